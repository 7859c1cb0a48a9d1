"""Function spaces: weighted L^p on the half line, X_rho coefficient pairs and
the Y^{s,tau} space of the Black-Scholes engine.

The translation engine works on :class:`GridFunction` values: uniform samples
on ``[0, x_max]`` evaluated between nodes by linear interpolation, and
extended beyond the grid either by zero or periodically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# Nodes allowed when unrolling a periodic function over a quadrature horizon.
MAX_HORIZON_NODES = 4_000_000
# Target tail mass (per unit sup^p) when choosing a quadrature horizon.
HORIZON_TAIL_MASS = 1e-17
# Log-grid density used by the Y^{s,tau} sup-norm surrogate.
Y_POINTS_PER_DECADE = 4096
Y_LOG10_RANGE = (-8.0, 8.0)


class InconclusiveTailError(ArithmeticError):
    """The tabulated range is too short to decide whether a tail converges."""

    def __init__(self, message, partial_sum):
        super().__init__(message)
        self.partial_sum = partial_sum


# ---------------------------------------------------------------------------
# weights


class WeightFunction:
    """Strictly positive weight ``v`` on the half line."""

    admissible_params: tuple[float, float] | None = None

    def __call__(self, x):
        raise NotImplementedError

    def tail(self, cut: float) -> float:
        """Integral of the weight over ``[cut, inf)``; ``math.inf`` when divergent."""
        raise NotImplementedError

    def cut_for_tail(self, target: float) -> float:
        """Smallest cut whose tail integral does not exceed ``target``."""
        if target <= 0:
            raise ValueError("target must be positive")
        total = self.tail(0.0)
        if total <= target:
            return 0.0
        if math.isinf(total):
            return math.inf
        lo, hi = 0.0, 1.0
        while self.tail(hi) > target:
            lo, hi = hi, hi * 2.0
            if hi > 1e12:
                return math.inf
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self.tail(mid) > target:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-13 * max(1.0, hi):
                break
        return hi

    @property
    def support_end(self) -> float:
        """Right end of the support (``inf`` unless the weight vanishes eventually)."""
        return math.inf

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ExpDecay(WeightFunction):
    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("ExpDecay rate must be positive")

    @property
    def admissible_params(self):
        return (1.0, self.rate)

    def __call__(self, x):
        return np.exp(-self.rate * np.asarray(x, dtype=float))

    def tail(self, cut):
        return math.exp(-self.rate * cut) / self.rate

    def cut_for_tail(self, target):
        if target <= 0:
            raise ValueError("target must be positive")
        return max(0.0, -math.log(self.rate * target) / self.rate)

    def describe(self):
        return {"kind": "ExpDecay", "rate": self.rate}


@dataclass(frozen=True)
class Constant(WeightFunction):
    level: float = 1.0

    def __post_init__(self):
        if not self.level > 0:
            raise ValueError("Constant level must be positive")

    @property
    def admissible_params(self):
        return (1.0, 0.0)

    def __call__(self, x):
        return np.full(np.shape(x), self.level, dtype=float)

    def tail(self, cut):
        return math.inf

    def cut_for_tail(self, target):
        if target <= 0:
            raise ValueError("target must be positive")
        return math.inf

    def describe(self):
        return {"kind": "Constant", "level": self.level}


@dataclass(frozen=True)
class RationalDecay(WeightFunction):
    """``(1 + x)^(-q)``."""

    q: float = 2.0

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError("RationalDecay exponent must be positive")

    @property
    def admissible_params(self):
        # (1 + x + t)^q / (1 + x)^q <= (1 + t)^q <= e^{q t}
        return (1.0, self.q)

    def __call__(self, x):
        return (1.0 + np.asarray(x, dtype=float)) ** (-self.q)

    def tail(self, cut):
        if self.q <= 1:
            return math.inf
        return (1.0 + cut) ** (1.0 - self.q) / (self.q - 1.0)

    def cut_for_tail(self, target):
        if target <= 0:
            raise ValueError("target must be positive")
        if self.q <= 1:
            return math.inf
        c = ((self.q - 1.0) * target) ** (-1.0 / (self.q - 1.0)) - 1.0
        return max(0.0, c)

    def describe(self):
        return {"kind": "RationalDecay", "q": self.q}


@dataclass(frozen=True, eq=False)
class TableWeight(WeightFunction):
    """Tabulated weight, linear between samples.

    ``beyond="zero"`` declares the weight vanishes after the last sample;
    ``beyond="unknown"`` holds the last value for evaluation and makes tail
    integrals heuristic.
    """

    grid: np.ndarray
    values: np.ndarray
    beyond: str = "unknown"
    admissible_params: tuple[float, float] | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or grid.shape != values.shape or grid.size < 2:
            raise ValueError("table grid and values must be 1-D of equal length >= 2")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("table grid must be strictly increasing")
        if grid[0] > 0:
            raise ValueError("table must start at x = 0")
        if not np.all(values > 0):
            raise ValueError("weight must be strictly positive on its samples")
        if self.beyond not in ("zero", "unknown"):
            raise ValueError("beyond must be 'zero' or 'unknown'")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        right = 0.0 if self.beyond == "zero" else self.values[-1]
        return np.interp(x, self.grid, self.values, right=right)

    @property
    def support_end(self):
        return float(self.grid[-1]) if self.beyond == "zero" else math.inf

    def _integral(self, a, b):
        """Exact integral of the piecewise-linear table over [a, b] inside its range."""
        g, v = self.grid, self.values
        a, b = max(a, g[0]), min(b, g[-1])
        if b <= a:
            return 0.0
        inner = (g > a) & (g < b)
        xs = np.concatenate(([a], g[inner], [b]))
        ys = np.interp(xs, g, v)
        return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))

    def tail(self, cut):
        end = float(self.grid[-1])
        if self.beyond == "zero":
            return self._integral(cut, end)
        length = end - cut
        if length <= 0:
            raise InconclusiveTailError("cut lies beyond the tabulated range", 0.0)
        # doubling horizons ending at the table end
        spans = [length / 2**k for k in range(8, -1, -1)]
        sums = [self._integral(cut, cut + s) for s in spans]
        if sums[-1] > 0 and (sums[-1] - sums[-2]) <= 1e-6 * sums[-1]:
            return sums[-1]
        ratios = [b / a if a > 0 else math.inf for a, b in zip(sums[:-1], sums[1:])]
        if all(abs(r - 2.0) <= 0.02 for r in ratios[-2:]):
            return math.inf
        raise InconclusiveTailError(
            f"tail from {cut} not settled within the table range", sums[-1])

    def describe(self):
        return {"kind": "Table", "beyond": self.beyond}


def tail_integral(v: WeightFunction, cut: float) -> float:
    """Integral of ``v`` over ``[cut, inf)``.

    Returns ``math.inf`` for a divergent tail. Tabulated weights whose range is
    too short to decide raise :class:`InconclusiveTailError`.
    """
    if cut < 0:
        raise ValueError("cut must be nonnegative")
    return v.tail(float(cut))


class AdmissibilityResult(NamedTuple):
    verdict: str
    M_min: float | None
    levels: tuple


def admissibility_check(v: WeightFunction, x_grid, t_grid, w_candidate: float,
                        rtol: float = 1e-2) -> AdmissibilityResult:
    """Empirical check of ``v(x) <= M e^{w t} v(x + t)``.

    The sup of ``v(x) e^{-w t} / v(x + t)`` is taken over three nested
    refinements of the supplied grids (a quarter, a half and all of the x
    range, with progressively finer t). A sup that stays put across the last
    refinement is reported admissible; a sup that keeps growing is not.
    """
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    if x_grid.size == 0 or t_grid.size == 0:
        return AdmissibilityResult("inconclusive", None, ())
    if np.any(np.diff(x_grid) <= 0) or np.any(np.diff(t_grid) <= 0):
        raise ValueError("grids must be strictly increasing")
    x_top = x_grid[-1]
    levels = []
    for frac, stride in ((0.25, 4), (0.5, 2), (1.0, 1)):
        xs = x_grid[x_grid <= x_top * frac + 1e-15]
        ts = t_grid[::stride]
        X, T = np.meshgrid(xs, ts, indexing="ij")
        if isinstance(v, TableWeight) and v.beyond == "unknown":
            keep = (X + T) <= v.grid[-1]
            X, T = X[keep], T[keep]
        if X.size == 0:
            return AdmissibilityResult("inconclusive", None, tuple(levels))
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            ratio = v(X) * np.exp(-w_candidate * T) / v(X + T)
        levels.append(float(np.max(np.where(np.isnan(ratio), np.inf, ratio))))
    levels = tuple(levels)
    m = levels[-1]
    if math.isfinite(m) and abs(levels[-1] - levels[-2]) <= rtol * max(levels[-2], 1.0):
        return AdmissibilityResult("admissible (empirical)", max(m, 1.0), levels)
    if levels[1] > levels[0] * (1 + rtol) and levels[2] > levels[1] * (1 + rtol):
        return AdmissibilityResult("not admissible", None, levels)
    return AdmissibilityResult("inconclusive", None, levels)


# ---------------------------------------------------------------------------
# grid functions


def _is_multiple(value: float, unit: float, rtol: float = 1e-9) -> bool:
    k = value / unit
    return abs(k - round(k)) <= rtol * max(1.0, abs(k))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Samples at ``0, h, ..., x_max`` with zero or periodic extension."""

    h: float
    samples: np.ndarray
    extension: str = "zero"
    period: float | None = None

    def __post_init__(self):
        samples = np.asarray(self.samples)
        if samples.dtype.kind not in "fc":
            samples = samples.astype(float)
        if samples.ndim != 1 or samples.size < 2:
            raise ValueError("need at least two samples")
        if not self.h > 0:
            raise ValueError("step must be positive")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples must be finite")
        if self.extension not in ("zero", "periodic"):
            raise ValueError("extension must be 'zero' or 'periodic'")
        if self.extension == "periodic":
            if self.period is None or not self.period > 0:
                raise ValueError("periodic extension needs a positive period")
            if not _is_multiple(self.period, self.h):
                raise ValueError("period must be an integer multiple of the step")
            if self.period > (samples.size - 1) * self.h * (1 + 1e-12):
                raise ValueError("period exceeds the sampled range")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def x_max(self) -> float:
        return (self.samples.size - 1) * self.h

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.h

    @property
    def period_nodes(self) -> int:
        return int(round(self.period / self.h))

    @property
    def is_complex(self) -> bool:
        return self.samples.dtype.kind == "c"

    def __call__(self, x):
        """Evaluate with linear interpolation and the extension contract."""
        x = np.asarray(x, dtype=float)
        if self.extension == "periodic":
            n = self.period_nodes
            base = self.samples[: n + 1].copy()
            base[n] = base[0]
            pos = np.mod(x, self.period) / self.h
            return _interp_nodes(base, pos)
        pos = x / self.h
        out = _interp_nodes(self.samples, np.clip(pos, 0, self.samples.size - 1))
        return np.where((pos > self.samples.size - 1 + 1e-9) | (pos < 0), 0.0, out)

    def unrolled(self, n_nodes: int) -> np.ndarray:
        """Node values ``f(0), f(h), ...`` for ``n_nodes`` nodes."""
        if self.extension == "periodic":
            n = self.period_nodes
            return self.samples[np.arange(n_nodes) % n]
        out = np.zeros(n_nodes, dtype=self.samples.dtype)
        m = min(n_nodes, self.samples.size)
        out[:m] = self.samples[:m]
        return out

    def sup(self) -> float:
        return float(np.max(np.abs(self.samples)))

    def _check_compatible(self, other):
        if not isinstance(other, GridFunction):
            return NotImplemented
        if self.h != other.h or self.extension != other.extension:
            raise ValueError("grid functions live on different grids")
        if self.extension == "periodic" and self.period != other.period:
            raise ValueError("periods differ")
        return None

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        n = max(self.samples.size, other.samples.size)
        return GridFunction(self.h, self.unrolled(n) + other.unrolled(n),
                            self.extension, self.period)

    def __sub__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        return self + (-1.0) * other

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return GridFunction(self.h, alpha * self.samples, self.extension, self.period)

    __rmul__ = __mul__

    def __neg__(self):
        return (-1.0) * self


def _interp_nodes(values: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Linear interpolation of node values at fractional node positions."""
    last = values.size - 1
    i = np.clip(np.floor(pos).astype(np.int64), 0, max(last - 1, 0))
    frac = pos - i
    return values[i] * (1.0 - frac) + values[np.minimum(i + 1, last)] * frac


def grid_from_callable(fn, h: float, x_max: float, extension: str = "zero",
                       period: float | None = None) -> GridFunction:
    n = int(round(x_max / h))
    x = np.arange(n + 1) * h
    return GridFunction(h, np.asarray(fn(x)), extension, period)


def tent(h: float = 0.01, center: float = 1.0, half_width: float = 1.0,
         height: float = 1.0, x_max: float | None = None) -> GridFunction:
    """Tent of the given height on ``[center - w, center + w]``, zero elsewhere."""
    if x_max is None:
        x_max = center + half_width
    return grid_from_callable(
        lambda x: height * np.clip(1.0 - np.abs(x - center) / half_width, 0.0, None),
        h, x_max)


def periodize(f: GridFunction, period: float) -> GridFunction:
    """Periodic function agreeing with ``f`` on ``[0, period)``."""
    n = int(round(period / f.h))
    return GridFunction(f.h, f.unrolled(n + 1), "periodic", n * f.h)


# ---------------------------------------------------------------------------
# weighted L^p norm


class NormEstimate(NamedTuple):
    """Quadrature estimate and a bound on the mass beyond the horizon.

    The true norm lies in ``[value, value + tail_bound]``.
    """

    value: float
    tail_bound: float

    @property
    def verdict(self) -> str:
        return "infinite norm" if math.isinf(self.value) else "finite"

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound


def _tail_or_none(v, cut):
    try:
        return v.tail(cut)
    except InconclusiveTailError:
        return None


def trapezoid_weights(n_nodes: int, h: float) -> np.ndarray:
    w = np.full(n_nodes, h)
    w[0] = w[-1] = 0.5 * h
    return w


def quadrature_horizon(v: WeightFunction, h: float, sup_p: float,
                       tail_mass: float = HORIZON_TAIL_MASS,
                       max_nodes: int = MAX_HORIZON_NODES) -> float:
    """Horizon beyond which ``sup_p * tail(v)`` is below ``tail_mass`` (node-capped)."""
    cap = (max_nodes - 1) * h
    if sup_p == 0:
        return 0.0
    try:
        cut = v.cut_for_tail(tail_mass / sup_p)
    except InconclusiveTailError:
        cut = float(v.grid[-1])
    return min(cut, cap)


def lp_v_norm(f: GridFunction, v: WeightFunction, p: float = 1.0,
              horizon: float | None = None) -> NormEstimate:
    """Weighted L^p norm ``(int_0^inf |f|^p v dx)^(1/p)`` by composite trapezoid.

    Zero-extended functions are integrated over their grid exactly as sampled.
    Periodic functions are unrolled over a horizon chosen from the weight's
    tail integral; ``tail_bound`` is ``sup|f| * tail(v, horizon)^(1/p)``.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    sup = f.sup()
    if sup == 0.0:
        return NormEstimate(0.0, 0.0)
    if f.extension == "zero":
        n = f.samples.size
        tail = 0.0
    else:
        if _tail_or_none(v, 0.0) == math.inf:
            return NormEstimate(math.inf, math.inf)
        if horizon is None:
            horizon = quadrature_horizon(v, f.h, sup ** p)
        n = max(int(math.ceil(horizon / f.h)), f.period_nodes) + 1
        horizon = (n - 1) * f.h
        tail_mass = _tail_or_none(v, horizon)
        tail = math.inf if tail_mass is None else sup * tail_mass ** (1.0 / p)
    vals = f.unrolled(n)
    x = np.arange(n) * f.h
    integrand = np.abs(vals) ** p * v(x)
    total = float(np.dot(trapezoid_weights(n, f.h), integrand))
    return NormEstimate(total ** (1.0 / p), tail)


def node_values_norm(values: np.ndarray, h: float, v_nodes: np.ndarray, p: float) -> np.ndarray:
    """Trapezoid weighted L^p norms of node arrays along the last axis."""
    w = trapezoid_weights(values.shape[-1], h) * v_nodes
    return (np.abs(values) ** p @ w) ** (1.0 / p)


# ---------------------------------------------------------------------------
# X_rho pairs


@dataclass(frozen=True, eq=False)
class CoefficientPair:
    """Element ``(sum a_n rho^n x^n / n!, sum b_n rho^n x^n / n!)`` of X_rho + X_rho."""

    rho: float
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex)
        b = np.asarray(self.b, dtype=complex)
        if a.ndim != 1 or a.shape != b.shape:
            raise ValueError("both components need the same truncation order")
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n_trunc(self) -> int:
        return self.a.size - 1

    @classmethod
    def zeros(cls, rho, n_trunc):
        z = np.zeros(n_trunc + 1, dtype=complex)
        return cls(rho, z, z)

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.a, self.b])

    @classmethod
    def from_vector(cls, rho, vec):
        half = vec.size // 2
        return cls(rho, vec[:half], vec[half:])

    def padded(self, n_trunc: int) -> "CoefficientPair":
        if n_trunc < self.n_trunc:
            return CoefficientPair(self.rho, self.a[: n_trunc + 1], self.b[: n_trunc + 1])
        extra = np.zeros(n_trunc - self.n_trunc, dtype=complex)
        return CoefficientPair(self.rho, np.concatenate([self.a, extra]),
                               np.concatenate([self.b, extra]))

    def __add__(self, other):
        if not isinstance(other, CoefficientPair):
            return NotImplemented
        n = max(self.n_trunc, other.n_trunc)
        x, y = self.padded(n), other.padded(n)
        return CoefficientPair(self.rho, x.a + y.a, x.b + y.b)

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return CoefficientPair(self.rho, alpha * self.a, alpha * self.b)

    __rmul__ = __mul__

    def evaluate(self, x):
        """Evaluate both component functions at real points ``x``."""
        x = np.asarray(x, dtype=float)
        n = np.arange(self.n_trunc + 1)
        log_fact = np.cumsum(np.log(np.maximum(n, 1)))
        # rho^n x^n / n! in log form to survive large n
        with np.errstate(divide="ignore"):
            logs = n * np.log(self.rho) - log_fact
        powers = np.power.outer(x, n) * np.exp(logs)
        return powers @ self.a, powers @ self.b


def x_rho_norm(u: CoefficientPair) -> float:
    """``max(sup_n |a_n|, sup_n |b_n|)``."""
    return float(max(np.max(np.abs(u.a), initial=0.0), np.max(np.abs(u.b), initial=0.0)))


# ---------------------------------------------------------------------------
# monomial combinations and Y^{s,tau}


@dataclass(frozen=True)
class SpaceParams:
    p: float = 1.0
    s: float = 4.0
    tau_y: float = 0.0

    def __post_init__(self):
        if self.p < 1 or not self.s > 0 or self.tau_y < 0:
            raise ValueError("need p >= 1, s > 0, tau_y >= 0")


@dataclass(frozen=True)
class MonomialCombo:
    """Finite combination ``sum_k c_k x^{beta_k}`` on ``x > 0``."""

    terms: tuple = ()

    def __post_init__(self):
        terms = tuple((complex(b), complex(c)) for b, c in self.terms)
        betas = [b for b, _ in terms]
        if len(set(betas)) != len(betas):
            raise ValueError("exponents must be pairwise distinct")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def monomial(cls, beta, c=1.0):
        return cls(((beta, c),))

    @property
    def betas(self) -> np.ndarray:
        return np.array([b for b, _ in self.terms], dtype=complex)

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=complex)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not self.terms:
            return np.zeros(x.shape, dtype=complex)
        return np.exp(np.multiply.outer(np.log(x), self.betas)) @ self.coeffs

    def __add__(self, other):
        if not isinstance(other, MonomialCombo):
            return NotImplemented
        merged = dict(self.terms)
        for b, c in other.terms:
            merged[b] = merged.get(b, 0.0) + c
        return MonomialCombo(tuple(merged.items()))

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, alpha):
        if not np.isscalar(alpha):
            return NotImplemented
        return MonomialCombo(tuple((b, alpha * c) for b, c in self.terms))

    __rmul__ = __mul__


def log_grid(points_per_decade: int = Y_POINTS_PER_DECADE,
             log10_range: tuple[float, float] = Y_LOG10_RANGE) -> np.ndarray:
    lo, hi = log10_range
    n = int(round((hi - lo) * points_per_decade)) + 1
    return np.linspace(lo, hi, n) * math.log(10.0)


def log_abs_combo(u: MonomialCombo, log_x: np.ndarray) -> np.ndarray:
    """``log|u(x)|`` computed without overflow, for ``x = exp(log_x)``."""
    if not u.terms:
        return np.full(log_x.shape, -np.inf)
    coeffs = u.coeffs
    nz = coeffs != 0
    if not np.any(nz):
        return np.full(log_x.shape, -np.inf)
    betas, coeffs = u.betas[nz], coeffs[nz]
    # log|c| + Re(beta) log x, phase Im(beta) log x + arg c
    mag = np.log(np.abs(coeffs)) + np.multiply.outer(log_x, betas.real)
    phase = np.angle(coeffs) + np.multiply.outer(log_x, betas.imag)
    top = np.max(mag, axis=-1, keepdims=True)
    acc = np.sum(np.exp(mag - top + 1j * phase), axis=-1)
    with np.errstate(divide="ignore"):
        return top[..., 0] + np.log(np.abs(acc))


class YNorm(NamedTuple):
    value: float
    argsup: float


def y_stau_norm(u: MonomialCombo, params: SpaceParams,
                points_per_decade: int = Y_POINTS_PER_DECADE,
                log10_range: tuple[float, float] = Y_LOG10_RANGE) -> YNorm:
    """Sup of ``|u(x)| / ((1 + x^s)(1 + x^-tau))`` over a log grid.

    The sup over all ``x > 0`` is surrogated by ``points_per_decade`` points
    per decade over ``10^-8 .. 10^8``; everything is done in log magnitude.
    """
    lx = log_grid(points_per_decade, log10_range)
    log_u = log_abs_combo(u, lx)
    log_w = np.logaddexp(0.0, params.s * lx) + np.logaddexp(0.0, -params.tau_y * lx)
    ratio = log_u - log_w
    k = int(np.argmax(ratio))
    if not np.isfinite(ratio[k]):
        return YNorm(0.0, float(math.exp(lx[k])))
    return YNorm(float(math.exp(ratio[k])), float(math.exp(lx[k])))


# ---------------------------------------------------------------------------
# plain-text tables


def _fmt(value) -> str:
    value = complex(value) if np.iscomplexobj(value) else float(value)
    return repr(value)


def _parse_value(text: str):
    text = text.strip()
    if "j" in text:
        return complex(text)
    return float(text)


def dumps_grid(f: GridFunction) -> str:
    head = f"# kind=grid step={f.h!r} extension={f.extension}"
    if f.extension == "periodic":
        head += f" period={f.period!r}"
    dtype = "complex" if f.is_complex else "real"
    lines = [head + f" dtype={dtype}", "x,value"]
    for x, y in zip(f.nodes, f.samples):
        lines.append(f"{float(x)!r},{_fmt(y)}")
    return "\n".join(lines) + "\n"


def _parse_header(line: str) -> dict:
    if not line.startswith("#"):
        raise ValueError("missing metadata header")
    meta = {}
    for token in line[1:].split():
        key, _, value = token.partition("=")
        meta[key] = value
    return meta


def loads_grid(text: str) -> GridFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = _parse_header(lines[0])
    if meta.get("kind") != "grid":
        raise ValueError("not a grid function table")
    values = [_parse_value(ln.split(",", 1)[1]) for ln in lines[2:]]
    dtype = complex if meta.get("dtype") == "complex" else float
    period = float(meta["period"]) if "period" in meta else None
    return GridFunction(float(meta["step"]), np.array(values, dtype=dtype),
                        meta.get("extension", "zero"), period)


def dumps_weight(v: WeightFunction) -> str:
    desc = v.describe()
    meta = " ".join(f"{k}={val!r}" if not isinstance(val, str) else f"{k}={val}"
                    for k, val in desc.items())
    if v.admissible_params is not None:
        meta += " M={!r} w={!r}".format(*v.admissible_params)
    lines = [f"# {meta}", "x,value"]
    if isinstance(v, TableWeight):
        lines += [f"{float(x)!r},{float(y)!r}" for x, y in zip(v.grid, v.values)]
    return "\n".join(lines) + "\n"


def loads_weight(text: str) -> WeightFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    meta = _parse_header(lines[0])
    kind = meta.get("kind")
    if kind == "ExpDecay":
        return ExpDecay(float(meta["rate"]))
    if kind == "Constant":
        return Constant(float(meta["level"]))
    if kind == "RationalDecay":
        return RationalDecay(float(meta["q"]))
    if kind == "Table":
        rows = [ln.split(",") for ln in lines[2:]]
        adm = (float(meta["M"]), float(meta["w"])) if "M" in meta else None
        return TableWeight(np.array([float(r[0]) for r in rows]),
                           np.array([float(r[1]) for r in rows]),
                           meta.get("beyond", "unknown"), adm)
    raise ValueError(f"unknown weight kind {kind!r}")


def make_weight(kind: str, **params) -> WeightFunction:
    """Weight from a config-style name: expdecay, constant, rationaldecay."""
    kind = kind.lower()
    if kind in ("expdecay", "exp"):
        return ExpDecay(float(params.get("rate", 1.0)))
    if kind == "constant":
        return Constant(float(params.get("level", 1.0)))
    if kind in ("rationaldecay", "rational"):
        return RationalDecay(float(params.get("q", 2.0)))
    raise ValueError(f"unknown weight kind {kind!r}")

