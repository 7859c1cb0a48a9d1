"""Numerical probes: densities of time sets, mixing return sets, periodic
approximation, distributional irregularity and frequent-hit densities."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import semigroups as sg
from .function_spaces import (
    CoefficientPair,
    GridFunction,
    MonomialCombo,
    WeightFunction,
    _is_multiple,
    log_grid,
    lp_v_norm,
    node_values_norm,
    quadrature_horizon,
    x_rho_norm,
    y_stau_norm,
)
from .shadowing import (
    HORIZON_FRACTION,
    NoFiniteGapError,
    Piece,
    ShadowingSpec,
    _period_for,
    class_index,
    construct_shadowing_point,
    required_gap,
    shifted_distance_series,
)

POINTS_PER_DECADE = 256


# ---------------------------------------------------------------------------
# densities


@dataclass(frozen=True)
class DensityEstimate:
    horizon: float
    step: float
    ratios: np.ndarray  # (k, 2) array of (t, ratio)
    upper: float
    lower: float
    tail_fraction: float
    mode: str = "upper"

    @property
    def value(self) -> float:
        return self.upper if self.mode == "upper" else self.lower

    @property
    def low_confidence(self) -> bool:
        # tail window shorter than one decade
        return self.horizon / self.step < 100.0


def geometric_times(step: float, horizon: float,
                    points_per_decade: int = POINTS_PER_DECADE) -> np.ndarray:
    """``step * 10^(k / points_per_decade)`` up to ``horizon``; nested across horizons."""
    if horizon < step:
        return np.array([horizon])
    k_max = int(math.floor(points_per_decade * math.log10(horizon / step) + 1e-9))
    return step * 10.0 ** (np.arange(k_max + 1) / points_per_decade)


def _measure_intervals(intervals, t: np.ndarray) -> np.ndarray:
    iv = sorted((float(a), float(b)) for a, b in intervals if b > a)
    merged = []
    for a, b in iv:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    if not merged:
        return np.zeros_like(t)
    starts = np.array([m[0] for m in merged])
    ends = np.array([m[1] for m in merged])
    clipped = np.clip(t[:, None], starts[None, :], ends[None, :]) - starts[None, :]
    return clipped.sum(axis=1)


def _measure_series(flags: np.ndarray, step: float, t: np.ndarray) -> np.ndarray:
    cum = np.concatenate([[0.0], np.cumsum(flags.astype(float))])
    cells = np.minimum(np.floor(t / step + 1e-9).astype(np.int64), flags.size)
    frac = t / step - cells
    partial = np.where(cells < flags.size, flags[np.minimum(cells, flags.size - 1)], 0.0)
    return step * (cum[cells] + np.clip(frac, 0.0, 1.0) * partial)


def density_estimate(indicator, horizon: float, step: float, mode: str = "upper",
                     tail_fraction: float = 0.5,
                     points_per_decade: int = POINTS_PER_DECADE) -> DensityEstimate:
    """Ratios ``mu(B & [0, t]) / t`` at geometric times and their tail extremes.

    ``indicator`` is either a list of ``(a, b)`` intervals (``b`` may be
    infinite), measured exactly, or a boolean array whose entry ``k`` covers
    ``[k step, (k+1) step)``. Upper/lower are the max/min over the last
    ``tail_fraction`` of the sample times.
    """
    if not horizon > 0 or not step > 0:
        raise ValueError("horizon and step must be positive")
    if mode not in ("upper", "lower"):
        raise ValueError("mode is 'upper' or 'lower'")
    t = geometric_times(step, horizon, points_per_decade)
    if isinstance(indicator, np.ndarray) and indicator.dtype == bool:
        mu = _measure_series(indicator, step, t)
    else:
        mu = _measure_intervals(indicator, t)
    ratios = np.clip(mu / t, 0.0, 1.0)
    k = max(1, int(math.ceil(tail_fraction * t.size)))
    tail = ratios[-k:]
    return DensityEstimate(float(horizon), float(step), np.column_stack([t, ratios]),
                           float(tail.max()), float(tail.min()), tail_fraction, mode)


def dyadic_union(horizon: float):
    """Intervals ``[4^k, 2 * 4^k]`` reaching past ``horizon``."""
    out, k = [], 0
    while 4.0 ** k <= horizon:
        out.append((4.0 ** k, 2.0 * 4.0 ** k))
        k += 1
    return out


# ---------------------------------------------------------------------------
# mixing


class ThresholdError(ValueError):
    """No witness is constructed at this time (not a claim that none exists)."""


class MixingWitness(NamedTuple):
    t: float
    x: GridFunction
    w: GridFunction
    t_prime: float
    period: float
    x_to_u: float
    tx_norm: float
    w_norm: float
    tw_to_u: float
    in_uw: bool
    in_wu: bool


def _distance(f: GridFunction, g: GridFunction, v, p, tail_target) -> float:
    return float(shifted_distance_series(f, g, np.array([0.0]), v, p, tail_target)[0])


def _right_shift(u: GridFunction, t: float) -> GridFunction:
    """A preimage of ``u`` under ``T_t``: zero on ``[0, t)``, then ``u``."""
    k = int(round(t / u.h))
    if not _is_multiple(t, u.h):
        raise ValueError("right shift needs a grid-aligned time")
    return GridFunction(u.h, np.concatenate([np.zeros(k), u.samples]), "zero")


def mixing_witness(handle: sg.Translation, u: GridFunction, radius_u: float,
                   radius_w: float, t: float, t0: float | None = None) -> MixingWitness:
    """Witnesses ``t in R(U, W)`` and ``t in R(W, U)`` for ``U = B(u, radius_u)``
    and ``W = B(0, radius_w)``.

    Shadows ``y_1 = u`` on ``[0, 0]`` and ``y_2 = 0`` on ``[M, t]`` by a periodic
    ``x``; then ``w = T_{t'} x`` with ``t' = P - t`` returns to ``x`` after ``t``.
    """
    v, p, h = handle.v, handle.p, u.h
    zero = GridFunction(h, np.zeros(2), "zero")
    if u.sup() == 0:
        return MixingWitness(t, zero, zero, t, math.nan, 0.0, 0.0, 0.0, 0.0, True, True)
    if math.isinf(radius_w) or math.isinf(radius_u):
        x = u if math.isinf(radius_w) else zero
        w = _right_shift(u, t) if math.isinf(radius_w) else zero
        tx = lp_v_norm(sg.translate(x, t), v, p).upper
        tw = _distance(sg.translate(w, t), u, v, p, 1e-12) if math.isfinite(radius_u) else 0.0
        return MixingWitness(t, x, w, t, math.nan, _distance(x, u, v, p, 1e-12), tx,
                             lp_v_norm(w, v, p).upper, tw, True, True)
    delta = min(radius_u, radius_w) / 2.0
    n = class_index(u)
    M, _ = required_gap(delta, n, v, p)
    t0 = h if t0 is None else t0
    if t < M:
        raise ThresholdError(f"t = {t} is below the constructive threshold M = {M:.6g}")
    P = _period_for(t, M, t0)
    t_prime = P - t
    if t_prime > t + 1e-9:
        raise ThresholdError(f"t = {t} leaves no room for the return time on the t0 lattice")
    spec = ShadowingSpec((Piece(u, 0.0, 0.0), Piece(zero, M, t)), delta, n, v, p, t0)
    x = construct_shadowing_point(spec, measure=False).x
    target = HORIZON_FRACTION * delta
    w = sg.translate(x, t_prime)
    x_to_u = _distance(x, u, v, p, target)
    tx = lp_v_norm(sg.translate(x, t), v, p).upper
    w_norm = lp_v_norm(w, v, p).upper
    tw_to_u = _distance(sg.translate(w, t), u, v, p, target)
    return MixingWitness(t, x, w, t_prime, x.period, x_to_u, tx, w_norm, tw_to_u,
                         x_to_u < radius_u and tx < radius_w,
                         w_norm < radius_w and tw_to_u < radius_u)


@dataclass(frozen=True)
class ReturnSetReport:
    t_grid: np.ndarray
    in_uw: np.ndarray
    in_wu: np.ndarray
    witnesses: tuple
    first_all_pass: float | None
    status: str


def return_set_scan(handle: sg.Translation, u: GridFunction, radius_u: float,
                    radius_w: float, t_grid) -> ReturnSetReport:
    """Mixing witnesses over a time grid and the empirical bound ``first_all_pass``."""
    t_grid = np.asarray(t_grid, dtype=float)
    in_uw = np.zeros(t_grid.size, dtype=bool)
    in_wu = np.zeros(t_grid.size, dtype=bool)
    witnesses = [None] * t_grid.size
    status = "ok"
    for k, t in enumerate(t_grid):
        try:
            wit = mixing_witness(handle, u, radius_u, radius_w, float(t))
        except ThresholdError:
            continue
        except NoFiniteGapError as exc:
            status = "mixing witnesses unavailable: " + str(exc)
            break
        witnesses[k] = wit
        in_uw[k], in_wu[k] = wit.in_uw, wit.in_wu
    both = in_uw & in_wu
    first = None
    if both.size and both[-1]:
        fails = np.flatnonzero(~both)
        first = float(t_grid[fails[-1] + 1]) if fails.size else float(t_grid[0])
    return ReturnSetReport(t_grid, in_uw, in_wu, tuple(witnesses), first, status)


# ---------------------------------------------------------------------------
# periodic approximation


class NoEigenDictionaryError(ValueError):
    pass


class PeriodicApproximant(NamedTuple):
    q: object
    period: float
    error: float
    return_residual: float


def _bs_dictionary(handle: sg.BlackScholes, theta: float, count: int):
    betas = []
    for k in range(1, count + 1):
        for sign in (1, -1):
            for beta in handle.exponents_for(1j * sign * k * theta):
                if -handle.space.tau_y < beta.real < handle.space.s:
                    betas.append(beta)
    return betas


def _hhte_dictionary(handle: sg.SecondOrder, theta: float, count: int, n_trunc: int):
    vecs = []
    n = np.arange(n_trunc + 1)
    for k in range(1, count + 1):
        for sign in (1, -1):
            lam = 1j * sign * k * theta
            mu = np.sqrt(complex(handle.mu_squared(lam)))
            for m in (mu, -mu):
                if abs(m) < handle.rho:
                    a = (m / handle.rho) ** n
                    vecs.append(np.concatenate([a, lam * a]))
    return vecs


def periodic_approximant(handle, target, delta: float, theta: float = 1.0,
                         count: int = 8, t0: float = 1.0) -> PeriodicApproximant:
    """A periodic point near ``target``.

    Translation: shadowing with a single piece ``[0, 0]`` gives an exactly
    periodic ``q`` within ``delta``. Spectral engines: least-squares fit by
    eigenvectors for eigenvalues ``i k theta``, common period ``2 pi / theta``;
    the achieved error is reported, not guaranteed.
    """
    if not delta > 0:
        raise ValueError("delta must be positive")
    if isinstance(handle, sg.Translation):
        if target.sup() == 0:
            q = GridFunction(target.h, np.zeros(int(round(t0 / target.h)) + 1), "periodic", t0)
            return PeriodicApproximant(q, t0, 0.0, 0.0)
        spec = ShadowingSpec((Piece(target, 0.0, 0.0),), delta, class_index(target),
                             handle.v, handle.p, t0)
        cert = construct_shadowing_point(spec)
        q = cert.x
        back = lp_v_norm(sg.translate(q, q.period) - q, handle.v, handle.p).value
        return PeriodicApproximant(q, q.period, cert.per_piece_errors[0], back)
    period = 2.0 * math.pi / theta
    if isinstance(handle, sg.BlackScholes):
        betas = _bs_dictionary(handle, theta, count)
        if not betas:
            raise NoEigenDictionaryError("no purely imaginary eigenvalues with exponents in Y^{s,tau}")
        lx = log_grid(32, (-4.0, 4.0))
        x = np.exp(lx)
        wt = (1 + x ** handle.space.s) * (1 + x ** (-handle.space.tau_y))
        basis = np.exp(np.outer(lx, np.array(betas))) / wt[:, None]
        coef, *_ = np.linalg.lstsq(basis, target(x) / wt, rcond=None)
        keep = np.abs(coef) > 1e-13 * np.max(np.abs(coef))
        q = MonomialCombo(tuple((b, c) for b, c, k in zip(betas, coef, keep) if k))
        error = y_stau_norm(q - target, handle.space).value
        back = y_stau_norm(sg.blackscholes_apply(period, q, handle) - q, handle.space).value
        return PeriodicApproximant(q, period, error, back)
    if isinstance(handle, sg.SecondOrder):
        n_trunc = max(handle.n_trunc, target.n_trunc)
        vecs = _hhte_dictionary(handle, theta, count, n_trunc)
        if not vecs:
            raise NoEigenDictionaryError("no eigen-exponentials with |mu| < rho for this theta")
        basis = np.column_stack(vecs)
        coef, *_ = np.linalg.lstsq(basis, target.padded(n_trunc).vector, rcond=None)
        q = CoefficientPair.from_vector(handle.rho, basis @ coef)
        error = x_rho_norm(q - target.padded(n_trunc))
        back = x_rho_norm(sg.second_order_apply(period, q, handle).state - q)
        return PeriodicApproximant(q, period, error, back)
    raise TypeError(f"unknown engine {type(handle).__name__}")


# ---------------------------------------------------------------------------
# distributional irregularity


class IrregularVector(NamedTuple):
    f: GridFunction
    times: np.ndarray
    norms: np.ndarray
    big: DensityEstimate
    small: DensityEstimate
    height: float
    boundaries: tuple


def plateau_schedule(first: float, growth: float, until: float):
    """Segment boundaries ``T_0 = 0, T_1 = first, T_{k+1} = (1 + growth) T_k``."""
    out = [0.0, first]
    while out[-1] < until:
        out.append(out[-1] * (1.0 + growth))
    return tuple(out)


def irregular_norm_series(v: WeightFunction, p: float, epsilon: float, horizon: float,
                          h: float, growth: float, first: float):
    total = v.tail(0.0)
    if math.isinf(total):
        raise ValueError("divergent weight: no distributionally irregular vector is built")
    height = 2.0 / (epsilon * total ** (1.0 / p))
    margin = quadrature_horizon(v, h, height ** p, tail_mass=(1e-3 * epsilon) ** p)
    x_max = horizon + margin
    bounds = plateau_schedule(first, growth, x_max)
    nodes = np.arange(int(math.ceil(x_max / h)) + 1) * h
    plateau = np.zeros(nodes.size, dtype=bool)
    for k in range(0, len(bounds) - 1, 2):
        plateau |= (nodes >= bounds[k]) & (nodes < bounds[k + 1])
    f = GridFunction(h, np.where(plateau, height, 0.0), "zero")
    n_u = int(round(margin / h)) + 1
    u = np.arange(n_u) * h
    kernel = np.full(n_u, h) * v(u)
    kernel[0] *= 0.5
    kernel[-1] *= 0.5
    n_s = int(math.floor(horizon / h + 1e-9)) + 1
    powered = np.abs(f.samples) ** p
    # sum_j kernel_j |f(s + u_j)|^p for every grid time s
    mass = np.correlate(powered[: n_s + n_u - 1], kernel, mode="valid")
    norms = np.maximum(mass, 0.0) ** (1.0 / p)
    tail = v.tail(margin) if margin < v.support_end else 0.0
    tail_bound = height * tail ** (1.0 / p)
    return f, np.arange(n_s) * h, norms, tail_bound, height, bounds


def irregular_vector(v: WeightFunction, epsilon: float, horizon: float, p: float = 1.0,
                     h: float = 0.05, growth: float = 19.0, first: float = 1.0,
                     points_per_decade: int = POINTS_PER_DECADE) -> IrregularVector:
    """Plateaus of height ``2 / (epsilon ||v||_1^(1/p))`` alternating with zero stretches.

    Each segment is ``growth`` times as long as everything before it, so at the
    end of a plateau (resp. zero stretch) the set where ``||T_s f|| >= 1/epsilon``
    (resp. ``< epsilon``) occupies about ``growth / (1 + growth)`` of ``[0, t]``.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    f, times, norms, tail_bound, height, bounds = irregular_norm_series(
        v, p, epsilon, horizon, h, growth, first)
    big, small = irregular_densities(norms, tail_bound, epsilon, horizon, h, points_per_decade)
    return IrregularVector(f, times, norms, big, small, height, bounds)


def irregular_densities(norms, tail_bound, epsilon, horizon, step,
                        points_per_decade=POINTS_PER_DECADE):
    """Upper densities of ``||T_s f|| >= 1/epsilon`` and ``||T_s f|| < epsilon``.

    Both events come from the same norm series; the big event uses the lower
    estimate and the small event the upper one.
    """
    big = density_estimate(norms >= 1.0 / epsilon, horizon, step, "upper",
                           points_per_decade=points_per_decade)
    small = density_estimate(norms + tail_bound < epsilon, horizon, step, "upper",
                             points_per_decade=points_per_decade)
    return big, small


# ---------------------------------------------------------------------------
# frequent hits


class HitScan(NamedTuple):
    times: np.ndarray
    distances: np.ndarray  # (targets, times)
    hits: np.ndarray
    densities: tuple
    tol: float


def _translation_distances(handle, x0, center, times, tail_target, chunk=256):
    v, p, h = handle.v, handle.p, x0.h
    sup = x0.sup() + center.sup()
    if sup == 0:
        return np.zeros(times.size)
    if x0.extension == "zero" and center.extension == "zero":
        # both vanish beyond their grids: the integral over [0, H] is everything
        H = max(x0.x_max, center.x_max)
        tail_bound = 0.0
    else:
        H = quadrature_horizon(v, h, sup ** p, tail_mass=tail_target ** p, max_nodes=200_001)
    n_u = max(2, int(math.ceil(H / h - 1e-9)) + 1)
    if not (x0.extension == "zero" and center.extension == "zero"):
        H = (n_u - 1) * h
        tail = v.tail(H) if H < v.support_end else 0.0
        tail_bound = sup * tail ** (1.0 / p) if math.isfinite(tail) else math.inf
    u = np.arange(n_u) * h
    v_nodes = v(u)
    g = center(u)
    out = np.empty(times.size)
    for lo in range(0, times.size, chunk):
        pos = times[lo: lo + chunk, None] + u[None, :]
        out[lo: lo + chunk] = node_values_norm(x0(pos) - g[None, :], h, v_nodes, p) + tail_bound
    return out


def orbit_distances(handle, x0, center, times, tail_target=1e-6) -> np.ndarray:
    """``||T_t x0 - center||`` in the engine's norm for each time."""
    times = np.asarray(times, dtype=float)
    if isinstance(handle, sg.Translation):
        return _translation_distances(handle, x0, center, times, tail_target)
    return np.array([sg.norm(handle, sg.apply(handle, float(t), x0) - center) for t in times])


def fh_hit_density(handle, x0, targets, horizon: float, step: float,
                   tol: float = 1e-9, points_per_decade: int = POINTS_PER_DECADE) -> HitScan:
    """Lower densities of ``{t : ||T_t x0 - c|| < r + tol}`` for each ball ``(c, r)``.

    Distances are upper estimates whose quadrature tail is held below
    ``HORIZON_FRACTION * r``, so a recorded hit is a hit.

    Finite-dictionary evidence for frequent hypercyclicity, never a verdict.
    """
    if not horizon > 0 or not step > 0:
        raise ValueError("horizon and step must be positive")
    times = np.arange(int(math.floor(horizon / step + 1e-9)) + 1) * step
    # a grid-aligned periodic orbit repeats its distances every period
    period_steps = None
    if (isinstance(handle, sg.Translation) and x0.extension == "periodic"
            and _is_multiple(x0.period, step)):
        period_steps = int(round(x0.period / step))
    dists, hits, dens = [], [], []
    for center, radius in targets:
        if math.isinf(radius):
            d = np.zeros(times.size)
        elif period_steps is not None and period_steps < times.size:
            one = orbit_distances(handle, x0, center, times[:period_steps],
                                  HORIZON_FRACTION * radius)
            d = np.resize(one, times.size)
        else:
            d = orbit_distances(handle, x0, center, times, HORIZON_FRACTION * radius)
        flag = d < radius + tol
        dists.append(d)
        hits.append(flag)
        dens.append(density_estimate(flag, horizon, step, "lower",
                                     points_per_decade=points_per_decade))
    return HitScan(times, np.array(dists), np.array(hits), tuple(dens), tol)
