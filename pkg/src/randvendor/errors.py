"""Exception types shared across the package."""


class NumericalIntegrityError(RuntimeError):
    """Two formulas that must agree disagreed beyond tolerance."""


class ScenarioError(ValueError):
    """Scenario file violates the schema; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")
