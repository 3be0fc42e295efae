"""Univariate distribution kernels on the non-negative half-line.

Every family exposes the integral functionals the inventory formulas are
built from: the CDF, the quantile (generalized inverse), the mean, the
lower and upper partial expectations ``int_0^q t f(t) dt`` and
``int_q^inf t f(t) dt``, the integrated CDF ``int_0^q F(t) dt``, its
first-moment weighting ``int_0^q t F(t) dt``, and the expected maximum of
two independent draws. Closed forms are used wherever they exist; the rest
falls back to adaptive quadrature on the (possibly truncated) support.

Instances are immutable after construction and safe to share across
threads. Sampling derives a counter-based generator from an explicit seed
and never touches global state.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np
from scipy.special import ndtr, ndtri

from ._quad import TAIL_PROB, integrate

_ROOT_2PI = math.sqrt(2.0 * math.pi)


def _norm_pdf(z: float) -> float:
    return math.exp(-0.5 * z * z) / _ROOT_2PI


def _finite(name: str, value) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    return value


class Distribution:
    """A univariate distribution supported on a subset of [0, inf)."""

    has_density = True

    # -- family hooks -------------------------------------------------------

    def cdf(self, x: float) -> float:
        raise NotImplementedError

    def pdf(self, x: float) -> float:
        raise NotImplementedError

    def mean(self) -> float:
        raise NotImplementedError

    def support(self) -> tuple[float, float]:
        raise NotImplementedError

    def _quantile(self, u: float) -> float:
        raise NotImplementedError

    def from_uniform(self, u: np.ndarray) -> np.ndarray:
        """Map uniform(0,1) draws to draws from this distribution."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def atoms(self):
        """(values, weights) arrays when the distribution is purely atomic, else None."""
        return None

    def breakpoints(self) -> tuple[float, ...]:
        """Points where the CDF or density has a kink; quadrature splits here."""
        lo, hi = self.support()
        return tuple(p for p in (lo, hi) if math.isfinite(p))

    # -- derived operations -------------------------------------------------

    def quantile(self, u: float) -> float:
        """Smallest x with cdf(x) >= u, for 0 < u < 1."""
        if not 0.0 < u < 1.0:
            raise ValueError(f"quantile requires 0 < u < 1, got {u}")
        return self._quantile(float(u))

    def partial_expectation(self, q: float) -> float:
        """int_0^q t f(t) dt, the demand mass realized below q."""
        q = self._check_cutoff(q)
        return self._partial_expectation(q)

    def _partial_expectation(self, q: float) -> float:
        lo, hi = self.support()
        return integrate(lambda t: t * self.pdf(t), lo, min(q, hi), self.breakpoints())

    def integrated_cdf(self, q: float) -> float:
        """int_0^q F(t) dt."""
        q = self._check_cutoff(q)
        return self._integrated_cdf(q)

    def _integrated_cdf(self, q: float) -> float:
        return integrate(self.cdf, 0.0, q, self.breakpoints())

    def weighted_integrated_cdf(self, q: float) -> float:
        """int_0^q t F(t) dt."""
        q = self._check_cutoff(q)
        return self._weighted_integrated_cdf(q)

    def _weighted_integrated_cdf(self, q: float) -> float:
        return integrate(lambda t: t * self.cdf(t), 0.0, q, self.breakpoints())

    def upper_partial_expectation(self, q: float) -> float:
        """int_q^inf t f(t) dt = mean - partial_expectation(q)."""
        q = self._check_cutoff(q)
        return max(0.0, self.mean() - self._partial_expectation(q))

    def survival_integral(self, q: float) -> float:
        """int_0^q P(X > t) dt, integrated directly from the survival function."""
        q = self._check_cutoff(q)
        return self._survival_integral(q)

    def _survival_integral(self, q: float) -> float:
        return integrate(lambda t: 1.0 - self.cdf(t), 0.0, q, self.breakpoints())

    def sample(self, n: int, seed: int) -> np.ndarray:
        """n deterministic draws for the given seed (counter-based generator)."""
        if n < 1:
            raise ValueError(f"sample requires n >= 1, got {n}")
        rng = _generator(seed)
        return self.from_uniform(rng.random(int(n)))

    def upper_cut(self) -> float:
        """Finite stand-in for the upper support bound used by quadrature."""
        hi = self.support()[1]
        if math.isfinite(hi):
            return hi
        cached = getattr(self, "_cut_cache", None)
        if cached is None:
            cached = self._quantile(1.0 - TAIL_PROB)
            object.__setattr__(self, "_cut_cache", cached)
        return cached

    @staticmethod
    def _check_cutoff(q) -> float:
        q = float(q)
        if not q >= 0.0:
            raise ValueError(f"integration cutoff must be >= 0, got {q}")
        return q

    # -- plumbing ------------------------------------------------------------

    def __repr__(self):
        fields = ", ".join(f"{k}={v!r}" for k, v in self.to_dict().items() if k != "family")
        return f"{type(self).__name__}({fields})"

    def __eq__(self, other):
        return isinstance(other, Distribution) and self.to_dict() == other.to_dict()

    __hash__ = None


class Uniform(Distribution):
    def __init__(self, lo: float, hi: float):
        lo = _finite("uniform lo", lo)
        hi = _finite("uniform hi", hi)
        if not 0.0 <= lo < hi:
            raise ValueError(f"uniform requires 0 <= lo < hi, got lo={lo}, hi={hi}")
        self.lo = lo
        self.hi = hi
        self._width = hi - lo

    def support(self):
        return (self.lo, self.hi)

    def cdf(self, x):
        if x <= self.lo:
            return 0.0
        if x >= self.hi:
            return 1.0
        return (x - self.lo) / self._width

    def pdf(self, x):
        return 1.0 / self._width if self.lo <= x <= self.hi else 0.0

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def _quantile(self, u):
        return self.lo + u * self._width

    def from_uniform(self, u):
        return self.lo + np.asarray(u, dtype=float) * self._width

    def _partial_expectation(self, q):
        if q <= self.lo:
            return 0.0
        q = min(q, self.hi)
        return (q * q - self.lo * self.lo) / (2.0 * self._width)

    def _integrated_cdf(self, q):
        if q <= self.lo:
            return 0.0
        if q <= self.hi:
            return (q - self.lo) ** 2 / (2.0 * self._width)
        return 0.5 * self._width + (q - self.hi)

    def _weighted_integrated_cdf(self, q):
        if q <= self.lo:
            return 0.0
        top = min(q, self.hi)
        inner = (top**3 / 3.0 - self.lo * top**2 / 2.0 + self.lo**3 / 6.0) / self._width
        if q > self.hi:
            inner += 0.5 * (q * q - self.hi * self.hi)
        return inner

    def to_dict(self):
        return {"family": "uniform", "lo": self.lo, "hi": self.hi}


class Exponential(Distribution):
    def __init__(self, rate: float):
        rate = _finite("exponential rate", rate)
        if rate <= 0.0:
            raise ValueError(f"exponential requires rate > 0, got {rate}")
        self.rate = rate

    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        return -math.expm1(-self.rate * x) if x > 0.0 else 0.0

    def pdf(self, x):
        return self.rate * math.exp(-self.rate * x) if x >= 0.0 else 0.0

    def mean(self):
        return 1.0 / self.rate

    def _quantile(self, u):
        return -math.log1p(-u) / self.rate

    def from_uniform(self, u):
        return -np.log1p(-np.asarray(u, dtype=float)) / self.rate

    def _partial_expectation(self, q):
        lam = self.rate
        return -math.expm1(-lam * q) / lam - q * math.exp(-lam * q)

    def _integrated_cdf(self, q):
        return q + math.expm1(-self.rate * q) / self.rate

    def _weighted_integrated_cdf(self, q):
        return 0.5 * q * q - self._partial_expectation(q) / self.rate

    def to_dict(self):
        return {"family": "exponential", "rate": self.rate}


class LogNormal(Distribution):
    def __init__(self, log_mean: float, log_sd: float):
        self.log_mean = _finite("lognormal log_mean", log_mean)
        self.log_sd = _finite("lognormal log_sd", log_sd)
        if self.log_sd <= 0.0:
            raise ValueError(f"lognormal requires log_sd > 0, got {log_sd}")

    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        return float(ndtr((math.log(x) - self.log_mean) / self.log_sd))

    def pdf(self, x):
        if x <= 0.0:
            return 0.0
        z = (math.log(x) - self.log_mean) / self.log_sd
        return _norm_pdf(z) / (x * self.log_sd)

    def mean(self):
        return math.exp(self.log_mean + 0.5 * self.log_sd**2)

    def _quantile(self, u):
        return math.exp(self.log_mean + self.log_sd * float(ndtri(u)))

    def from_uniform(self, u):
        return np.exp(self.log_mean + self.log_sd * ndtri(np.asarray(u, dtype=float)))

    def _partial_expectation(self, q):
        if q <= 0.0:
            return 0.0
        z = (math.log(q) - self.log_mean - self.log_sd**2) / self.log_sd
        return self.mean() * float(ndtr(z))

    def to_dict(self):
        return {"family": "lognormal", "log_mean": self.log_mean, "log_sd": self.log_sd}


class TruncatedNormal(Distribution):
    """Normal(mean, sd) conditioned on the non-negative half-line."""

    def __init__(self, mean: float, sd: float):
        self.norm_mean = _finite("truncated_normal mean", mean)
        self.norm_sd = _finite("truncated_normal sd", sd)
        if self.norm_sd <= 0.0:
            raise ValueError(f"truncated_normal requires sd > 0, got {sd}")
        self._f0 = float(ndtr(-self.norm_mean / self.norm_sd))
        self._z = 1.0 - self._f0
        if self._z <= 0.0:
            raise ValueError("truncated_normal has no mass on [0, inf) at this mean/sd")

    def support(self):
        return (0.0, math.inf)

    def cdf(self, x):
        if x <= 0.0:
            return 0.0
        base = float(ndtr((x - self.norm_mean) / self.norm_sd))
        return min(1.0, max(0.0, (base - self._f0) / self._z))

    def pdf(self, x):
        if x < 0.0:
            return 0.0
        z = (x - self.norm_mean) / self.norm_sd
        return _norm_pdf(z) / (self.norm_sd * self._z)

    def mean(self):
        m, s = self.norm_mean, self.norm_sd
        return m + s * _norm_pdf(m / s) / self._z

    def _quantile(self, u):
        return self.norm_mean + self.norm_sd * float(ndtri(self._f0 + u * self._z))

    def from_uniform(self, u):
        p = self._f0 + np.asarray(u, dtype=float) * self._z
        return self.norm_mean + self.norm_sd * ndtri(p)

    def _partial_expectation(self, q):
        if q <= 0.0:
            return 0.0
        m, s = self.norm_mean, self.norm_sd
        alpha = -m / s
        beta = (q - m) / s
        mass = float(ndtr(beta)) - self._f0
        return (m * mass + s * (_norm_pdf(alpha) - _norm_pdf(beta))) / self._z

    def to_dict(self):
        return {"family": "truncated_normal", "mean": self.norm_mean, "sd": self.norm_sd}


class Empirical(Distribution):
    """Step-function distribution over an observed sample.

    The CDF is right-continuous; the quantile is the left-continuous
    generalized inverse (smallest sample value with cdf >= u).
    """

    has_density = False

    def __init__(self, values):
        arr = np.sort(np.asarray(list(values), dtype=float))
        if arr.size == 0:
            raise ValueError("empirical requires a non-empty sample")
        if not np.all(np.isfinite(arr)) or arr[0] < 0.0:
            raise ValueError("empirical sample values must be finite and >= 0")
        self.values = arr
        self._n = arr.size

    def support(self):
        return (float(self.values[0]), float(self.values[-1]))

    def cdf(self, x):
        return float(np.searchsorted(self.values, x, side="right")) / self._n

    def pdf(self, x):
        raise ValueError("empirical distribution has no density")

    def mean(self):
        return float(np.mean(self.values))

    def _quantile(self, u):
        idx = int(math.ceil(self._n * u - 1e-9)) - 1
        return float(self.values[min(max(idx, 0), self._n - 1)])

    def from_uniform(self, u):
        idx = np.ceil(np.asarray(u, dtype=float) * self._n - 1e-9).astype(int) - 1
        return self.values[np.clip(idx, 0, self._n - 1)]

    def atoms(self):
        return self.values, np.full(self._n, 1.0 / self._n)

    def breakpoints(self):
        return tuple(np.unique(self.values))

    def _partial_expectation(self, q):
        return float(self.values[self.values <= q].sum()) / self._n

    def _integrated_cdf(self, q):
        return float(np.clip(q - self.values, 0.0, None).sum()) / self._n

    def _weighted_integrated_cdf(self, q):
        return float(np.clip(q * q - self.values**2, 0.0, None).sum()) / (2.0 * self._n)

    def _survival_integral(self, q):
        # exact segment walk over the step function
        total = 0.0
        prev = 0.0
        for i, v in enumerate(self.values):
            if v >= q:
                break
            total += (v - prev) * (1.0 - i / self._n)
            prev = v
        else:
            i = self._n
        total += (q - prev) * (1.0 - i / self._n)
        return total

    def to_dict(self):
        return {"family": "empirical", "values": [float(v) for v in self.values]}


class Mixture(Distribution):
    """Finite mixture; weights must be positive and sum to 1 within 1e-12."""

    def __init__(self, components):
        comps = [(float(w), d) for w, d in components]
        if not comps:
            raise ValueError("mixture requires at least one component")
        for w, d in comps:
            if not (math.isfinite(w) and w > 0.0):
                raise ValueError(f"mixture weights must be positive, got {w}")
            if not isinstance(d, Distribution):
                raise ValueError("mixture components must be distributions")
        total = math.fsum(w for w, _ in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must sum to 1 within 1e-12, got {total}")
        self.components = tuple(comps)

    @property
    def has_density(self):
        return all(d.has_density for _, d in self.components)

    def support(self):
        lo = min(d.support()[0] for _, d in self.components)
        hi = max(d.support()[1] for _, d in self.components)
        return (lo, hi)

    def cdf(self, x):
        return math.fsum(w * d.cdf(x) for w, d in self.components)

    def pdf(self, x):
        return math.fsum(w * d.pdf(x) for w, d in self.components)

    def mean(self):
        return math.fsum(w * d.mean() for w, d in self.components)

    def _quantile(self, u):
        lo = min(d._quantile(u) for _, d in self.components)
        hi = max(d._quantile(u) for _, d in self.components)
        if hi <= lo:
            return lo
        # generalized inverse by bisection; handles flat segments and jumps
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.cdf(mid) >= u:
                hi = mid
            else:
                lo = mid
            if hi - lo <= 1e-15 * max(1.0, abs(hi)):
                break
        return hi

    def from_uniform(self, u):
        # stratified composition: the uniform draw picks the component and the
        # position within it, so the map stays deterministic and vectorized
        u = np.asarray(u, dtype=float)
        weights = np.array([w for w, _ in self.components])
        edges = np.concatenate(([0.0], np.cumsum(weights)))
        edges[-1] = 1.0
        idx = np.clip(np.searchsorted(edges, u, side="right") - 1, 0, len(weights) - 1)
        out = np.empty_like(u)
        top = np.nextafter(1.0, 0.0)
        for j, (w, d) in enumerate(self.components):
            mask = idx == j
            if mask.any():
                v = np.clip((u[mask] - edges[j]) / w, 0.0, top)
                out[mask] = d.from_uniform(v)
        return out

    def atoms(self):
        parts = [d.atoms() for _, d in self.components]
        if any(p is None for p in parts):
            return None
        values = np.concatenate([vals for vals, _ in parts])
        weights = np.concatenate(
            [w * wts for (_, wts), (w, _) in zip(parts, self.components)]
        )
        return values, weights

    def breakpoints(self):
        pts = set()
        for _, d in self.components:
            pts.update(d.breakpoints())
        return tuple(sorted(pts))

    def _partial_expectation(self, q):
        return math.fsum(w * d._partial_expectation(q) for w, d in self.components)

    def _integrated_cdf(self, q):
        return math.fsum(w * d._integrated_cdf(q) for w, d in self.components)

    def _weighted_integrated_cdf(self, q):
        return math.fsum(w * d._weighted_integrated_cdf(q) for w, d in self.components)

    def _survival_integral(self, q):
        return math.fsum(w * d._survival_integral(q) for w, d in self.components)

    def to_dict(self):
        return {
            "family": "mixture",
            "components": [{"weight": w, "dist": d.to_dict()} for w, d in self.components],
        }


class UpperTruncated(Distribution):
    """Any base family conditioned on values <= upper."""

    def __init__(self, base: Distribution, upper: float):
        upper = _finite("truncation upper bound", upper)
        if isinstance(base, UpperTruncated):
            upper = min(upper, base.upper)
            base = base.base
        z = base.cdf(upper)
        if z <= 0.0:
            raise ValueError(f"upper truncation at {upper} leaves no mass")
        self.base = base
        self.upper = upper
        self._z = z

    @property
    def has_density(self):
        return self.base.has_density

    def support(self):
        lo, hi = self.base.support()
        return (lo, min(hi, self.upper))

    def cdf(self, x):
        if x >= self.upper:
            return 1.0
        return self.base.cdf(x) / self._z

    def pdf(self, x):
        if x > self.upper:
            return 0.0
        return self.base.pdf(x) / self._z

    def mean(self):
        return self.base._partial_expectation(self.upper) / self._z

    def _quantile(self, u):
        return min(self.base._quantile(u * self._z), self.upper)

    def from_uniform(self, u):
        return np.minimum(self.base.from_uniform(np.asarray(u, float) * self._z), self.upper)

    def atoms(self):
        base_atoms = self.base.atoms()
        if base_atoms is None:
            return None
        values, weights = base_atoms
        keep = values <= self.upper
        return values[keep], weights[keep] / self._z

    def breakpoints(self):
        pts = {p for p in self.base.breakpoints() if p <= self.upper}
        pts.add(self.upper)
        return tuple(sorted(pts))

    def _partial_expectation(self, q):
        return self.base._partial_expectation(min(q, self.upper)) / self._z

    def _integrated_cdf(self, q):
        inner = self.base._integrated_cdf(min(q, self.upper)) / self._z
        if q > self.upper:
            inner += q - self.upper
        return inner

    def _weighted_integrated_cdf(self, q):
        inner = self.base._weighted_integrated_cdf(min(q, self.upper)) / self._z
        if q > self.upper:
            inner += 0.5 * (q * q - self.upper * self.upper)
        return inner

    def to_dict(self):
        record = dict(self.base.to_dict())
        record["upper"] = self.upper
        return record


# -- expected maximum of independent draws -----------------------------------


def expected_max(dist_a: Distribution, dist_b: Distribution) -> float:
    """E[max(X, Y)] for independent X ~ dist_a, Y ~ dist_b.

    Evaluated through the decomposition
    ``int x g(x) F(x) dx + int y f(y) G(y) dy`` when both sides have a
    density, and through exact atom conditioning otherwise. Arguments are
    put in a canonical order first so the result is bit-identical under
    swaps.
    """
    key_a = json.dumps(dist_a.to_dict(), sort_keys=True)
    key_b = json.dumps(dist_b.to_dict(), sort_keys=True)
    if key_b < key_a:
        dist_a, dist_b = dist_b, dist_a
    return _expected_max(dist_a, dist_b)


def expected_min(dist_a: Distribution, dist_b: Distribution) -> float:
    """E[min(X, Y)] via min + max = X + Y."""
    return dist_a.mean() + dist_b.mean() - expected_max(dist_a, dist_b)


def _expected_max(x: Distribution, y: Distribution) -> float:
    ax = x.atoms()
    if ax is not None:
        return _expected_max_over_atoms(ax, y)
    ay = y.atoms()
    if ay is not None:
        return _expected_max_over_atoms(ay, x)
    if x.has_density and y.has_density:
        return _expected_max_densities(x, y)
    # a mixture with both atomic and continuous parts: condition on the component
    if isinstance(x, Mixture):
        return math.fsum(w * _expected_max(d, y) for w, d in x.components)
    if isinstance(y, Mixture):
        return math.fsum(w * _expected_max(x, d) for w, d in y.components)
    raise ValueError("expected_max cannot decompose these distributions")


def _expected_max_over_atoms(atoms, other: Distribution) -> float:
    values, weights = atoms
    return math.fsum(
        w * (v * other.cdf(v) + other.upper_partial_expectation(v))
        for v, w in zip(values, weights)
    )


def _expected_max_densities(x: Distribution, y: Distribution) -> float:
    cut = max(x.upper_cut(), y.upper_cut())
    pts = set(x.breakpoints()) | set(y.breakpoints())
    return _half_max(x, y, cut, pts) + _half_max(y, x, cut, pts)


def _half_max(x: Distribution, y: Distribution, cut: float, pts) -> float:
    # int t f_x(t) F_y(t) dt; beyond the cut F_y is within TAIL_PROB of 1, so
    # the remainder is the exact tail moment of x
    lo = max(x.support()[0], y.support()[0])
    hi = min(x.support()[1], cut)
    value = 0.0
    if hi > lo:
        value = integrate(lambda t: t * x.pdf(t) * y.cdf(t), lo, hi, pts)
    return value + x.upper_partial_expectation(max(hi, lo))


# -- serialization ------------------------------------------------------------


def distribution_from_dict(record: dict, base_dir: str = ".") -> Distribution:
    """Build a distribution from its structured-text record."""
    if not isinstance(record, dict):
        raise ValueError("distribution record must be a mapping")
    record = dict(record)
    upper = record.pop("upper", None)
    family = record.pop("family", None)
    if family == "uniform":
        dist = Uniform(_field(record, "lo"), _field(record, "hi"))
    elif family == "exponential":
        dist = Exponential(_field(record, "rate"))
    elif family == "lognormal":
        dist = LogNormal(_field(record, "log_mean"), _field(record, "log_sd"))
    elif family == "truncated_normal":
        dist = TruncatedNormal(_field(record, "mean"), _field(record, "sd"))
    elif family == "empirical":
        if "csv" in record:
            dist = Empirical(_read_sample_csv(os.path.join(base_dir, record.pop("csv"))))
        else:
            values = _field(record, "values")
            if not isinstance(values, (list, tuple)):
                raise ValueError("empirical 'values' must be an array")
            dist = Empirical(values)
    elif family == "mixture":
        entries = _field(record, "components")
        if not isinstance(entries, (list, tuple)) or not entries:
            raise ValueError("mixture 'components' must be a non-empty array")
        comps = []
        for entry in entries:
            if not isinstance(entry, dict) or "weight" not in entry or "dist" not in entry:
                raise ValueError("mixture components need 'weight' and 'dist'")
            comps.append((entry["weight"], distribution_from_dict(entry["dist"], base_dir)))
        dist = Mixture(comps)
    else:
        raise ValueError(f"unknown distribution family {family!r}")
    if record:
        raise ValueError(f"unexpected fields for family {family!r}: {sorted(record)}")
    if upper is not None:
        dist = UpperTruncated(dist, upper)
    return dist


def _field(record: dict, name: str):
    if name not in record:
        raise ValueError(f"missing field {name!r}")
    return record.pop(name)


def _read_sample_csv(path: str) -> list[float]:
    """One-column CSV of sample values; a single header row is tolerated."""
    values: list[float] = []
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or not row[0].strip():
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                if i == 0:
                    continue  # header
                raise ValueError(f"non-numeric sample value {row[0]!r} in {path}")
    if not values:
        raise ValueError(f"no sample values found in {path}")
    return values


# -- deterministic generators --------------------------------------------------

_SEED_MOD = 2**64


def _generator(*entropy: int) -> np.random.Generator:
    """Counter-based generator keyed on the entropy tuple; replayable anywhere."""
    key = tuple(int(e) % _SEED_MOD for e in entropy)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy=key)))
