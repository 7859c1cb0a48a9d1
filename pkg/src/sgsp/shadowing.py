"""Periodic shadowing points for the translation semigroup.

The invariant classes are ``K_n = {f : sup|f| <= n, Lipschitz <= n}``. Given
orbit pieces ``y_r`` on ``[a_r, b_r]`` the constructed point copies ``y_r`` on
``[a_r, b_r + C]`` (``C`` cuts the weight's tail below ``(delta/4n)^p``),
ramps to zero with slope at most ``n`` inside the gaps and closes up
periodically on ``y_1(0)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .function_spaces import (
    GridFunction,
    InconclusiveTailError,
    WeightFunction,
    _is_multiple,
    dumps_grid,
    dumps_weight,
    loads_grid,
    loads_weight,
    lp_v_norm,
    node_values_norm,
    quadrature_horizon,
)
from .semigroups import translate

SLACK = 1e-9
# Fraction of delta granted to the quadrature horizon when measuring errors.
HORIZON_FRACTION = 0.05


class NoFiniteGapError(ValueError):
    """The weight's tail never drops below the budget, so no gap works."""


class GapViolationError(ValueError):
    def __init__(self, message, piece):
        super().__init__(message)
        self.piece = piece


class ClassViolationError(ValueError):
    def __init__(self, message, piece):
        super().__init__(message)
        self.piece = piece


# ---------------------------------------------------------------------------
# K_n


class Membership(NamedTuple):
    member: bool
    sup_norm: float
    max_slope: float


def _slopes(f: GridFunction) -> np.ndarray:
    if f.extension == "periodic":
        nodes = f.samples[: f.period_nodes + 1].copy()
        nodes[-1] = nodes[0]
    else:
        # the zero extension starts right after x_max
        nodes = np.append(f.samples, 0.0)
    return np.abs(np.diff(nodes)) / f.h


def kn_membership(f: GridFunction, n: float) -> Membership:
    """``f in K_n`` iff sup and polyline slope are both at most ``n``."""
    sup = f.sup()
    slope = float(np.max(_slopes(f)))
    return Membership(sup <= n + SLACK and slope <= n + SLACK, sup, slope)


@dataclass(frozen=True)
class InvariantClass:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("class index starts at 1")

    def __contains__(self, f: GridFunction) -> bool:
        return kn_membership(f, self.n).member


def class_index(f: GridFunction) -> int:
    """Smallest ``n`` with ``f`` in ``K_n``."""
    m = kn_membership(f, 1)
    return max(1, int(math.ceil(max(m.sup_norm, m.max_slope) - SLACK)))


# ---------------------------------------------------------------------------
# gap


class Gap(NamedTuple):
    M: float
    C: float


def required_gap(delta: float, n: float, v: WeightFunction, p: float = 1.0) -> Gap:
    """Gap ``M = C + 2`` with ``C`` the smallest cut where ``tail(v, C) < (delta/4n)^p``.

    Compactly supported weights use the support end, where the tail is exactly 0.
    """
    if not delta > 0 or n < 1:
        raise ValueError("need delta > 0 and n >= 1")
    if math.isfinite(v.support_end):
        C = v.support_end
    else:
        try:
            C = v.cut_for_tail((delta / (4.0 * n)) ** p)
        except InconclusiveTailError as exc:
            raise NoFiniteGapError(f"tail integral inconclusive: {exc}") from exc
    if math.isinf(C):
        raise NoFiniteGapError("no finite gap exists: the weight has a divergent tail")
    return Gap(C + 2.0, C)


# ---------------------------------------------------------------------------
# specs and certificates


@dataclass(frozen=True)
class Piece:
    y: GridFunction
    a: float
    b: float


@dataclass(frozen=True)
class ShadowingSpec:
    pieces: tuple
    delta: float
    n: int
    v: WeightFunction
    p: float = 1.0
    t0: float = 1.0

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if not pieces:
            raise ValueError("need at least one piece")
        if pieces[0].a != 0:
            raise ValueError("the first piece must start at a_1 = 0")
        for r, pc in enumerate(pieces):
            if pc.b < pc.a:
                raise ValueError(f"piece {r + 1}: b < a")
            if r and pc.a <= pieces[r - 1].b:
                raise ValueError(f"piece {r + 1} overlaps its predecessor")
        if len({pc.y.h for pc in pieces}) != 1:
            raise ValueError("all pieces must share the grid step")
        if not self.t0 > 0 or not _is_multiple(self.t0, self.h):
            raise ValueError("t0 must be a positive multiple of the grid step")

    @property
    def h(self) -> float:
        return self.pieces[0].y.h

    @property
    def s(self) -> int:
        return len(self.pieces)


@dataclass
class ShadowingCertificate:
    x: GridFunction
    M: float
    C: float
    P: float
    per_piece_errors: tuple
    per_piece_argmax: tuple
    period_residual: float
    class_check: bool
    t_step: float
    on_lattice: bool | None = None


class VerificationReport(NamedTuple):
    passed: bool
    per_piece_max: tuple
    per_piece_argmax: tuple
    period_residual: float
    class_member: bool
    failures: tuple


# ---------------------------------------------------------------------------
# construction


def splice_periodic(h: float, period_nodes: int, segments, n: float) -> np.ndarray:
    """Node values of one period built from ``(start_node, values)`` segments.

    Segments are copied verbatim; between them the values ramp to zero and back
    with slope at most ``n``; the last segment ramps back to the value at node 0.
    Returns ``period_nodes + 1`` values (the last equals the first).
    """
    x = np.zeros(period_nodes + 1)
    ends = []
    for start, vals in segments:
        end = start + len(vals) - 1
        if start < 0 or end > period_nodes:
            raise ValueError("segment outside the period")
        x[start: end + 1] = vals
        ends.append(end)
    x[period_nodes] = x[0]
    bounds = [(seg[0], e) for seg, e in zip(segments, ends)] + [(period_nodes, period_nodes)]
    for (_, end), (nxt, _) in zip(bounds[:-1], bounds[1:]):
        down = _ramp_len(x[end], n, h)
        up = _ramp_len(x[nxt], n, h)
        if end + down > nxt - up:
            raise ValueError("segments too close for slope-limited ramps")
        k = np.arange(1, down + 1)
        x[end + k] = x[end] * (1.0 - k / down)
        k = np.arange(1, up + 1)
        x[nxt - k] = x[nxt] * (1.0 - k / up)
    return x


def _ramp_len(value: float, n: float, h: float) -> int:
    return max(1, int(math.ceil(abs(value) / (n * h) - SLACK)))


def _node_floor(x, h):
    return int(math.floor(x / h + SLACK))


def _node_ceil(x, h):
    return int(math.ceil(x / h - SLACK))


def _period_for(b_s: float, M: float, t0: float) -> float:
    """Least ``P >= b_s + M`` on the ``t0`` lattice."""
    k = math.ceil((b_s + M) / t0 - SLACK)
    return k * t0


def construct_shadowing_point(spec: ShadowingSpec, t_step: float = 0.01,
                              measure: bool = True) -> ShadowingCertificate:
    """Build a periodic ``x in K_n`` shadowing every piece within ``delta``.

    With ``measure=False`` the per-piece errors are left empty for callers
    that verify the point their own way.
    """
    n, h = spec.n, spec.h
    for r, pc in enumerate(spec.pieces, start=1):
        if not kn_membership(pc.y, n).member:
            raise ClassViolationError(f"piece {r}: y_{r} is not in K_{n}", r)
    M, C = required_gap(spec.delta, n, spec.v, spec.p)
    for r in range(1, spec.s):
        gap = spec.pieces[r].a - spec.pieces[r - 1].b
        if gap < M - SLACK:
            raise GapViolationError(
                f"piece {r + 1}: gap {gap:.6g} is shorter than the required {M:.6g}", r + 1)
    P = _period_for(spec.pieces[-1].b, M, spec.t0)
    n_p = int(round(P / h))
    ramp = _node_ceil(1.0, h)

    starts = [_node_floor(pc.a, h) for pc in spec.pieces] + [n_p]
    segments = []
    for r, pc in enumerate(spec.pieces):
        end = min(_node_ceil(pc.b + C, h), starts[r + 1] - 2 * ramp)
        if end < _node_ceil(pc.b, h):
            raise GapViolationError(f"piece {r + 2}: gap too tight on the grid", r + 2)
        idx = np.arange(starts[r], end + 1)
        segments.append((starts[r], pc.y(idx * h)))
    x = GridFunction(h, splice_periodic(h, n_p, segments, n), "periodic", n_p * h)

    maxima, argmax = measure_piece_errors(x, spec, t_step) if measure else ((), ())
    residual = lp_v_norm(translate(x, x.period) - x, spec.v, spec.p).value
    return ShadowingCertificate(
        x=x, M=M, C=C, P=x.period, per_piece_errors=maxima, per_piece_argmax=argmax,
        period_residual=residual, class_check=kn_membership(x, n).member, t_step=t_step)


# ---------------------------------------------------------------------------
# measurement and verification


def sample_times(a: float, b: float, t_step: float) -> np.ndarray:
    k = int(math.floor((b - a) / t_step + SLACK))
    t = a + np.arange(k + 1) * t_step
    if b - t[-1] > SLACK * max(1.0, b):
        t = np.append(t, b)
    return t


def shifted_distance_series(x: GridFunction, y: GridFunction, times: np.ndarray,
                            v: WeightFunction, p: float, tail_target: float,
                            chunk: int = 256) -> np.ndarray:
    """Upper estimates of ``||T_t x - T_t y||`` for every ``t`` in ``times``.

    Each value is the trapezoid norm over ``[0, H]`` plus
    ``(sup|x| + sup|y|) tail(v, H)^(1/p)``, with ``H`` chosen so the tail part
    stays under ``tail_target``.
    """
    h = x.h
    sup = x.sup() + y.sup()
    if sup == 0:
        return np.zeros(times.size)
    H = quadrature_horizon(v, h, sup ** p, tail_mass=tail_target ** p, max_nodes=200_001)
    n_u = max(2, int(math.ceil(H / h)) + 1)
    H = (n_u - 1) * h
    tail = v.tail(H) if H < v.support_end else 0.0
    tail_bound = sup * tail ** (1.0 / p) if math.isfinite(tail) else math.inf
    u = np.arange(n_u) * h
    v_nodes = v(u)
    out = np.empty(times.size)
    for lo in range(0, times.size, chunk):
        pos = times[lo: lo + chunk, None] + u[None, :]
        diff = x(pos) - y(pos)
        out[lo: lo + chunk] = node_values_norm(diff, h, v_nodes, p) + tail_bound
    return out


def measure_piece_errors(x: GridFunction, spec: ShadowingSpec, t_step: float):
    maxima, argmax = [], []
    for pc in spec.pieces:
        times = sample_times(pc.a, pc.b, t_step)
        series = shifted_distance_series(x, pc.y, times, spec.v, spec.p,
                                         HORIZON_FRACTION * spec.delta)
        k = int(np.argmax(series))
        maxima.append(float(series[k]))
        argmax.append(float(times[k]))
    return tuple(maxima), tuple(argmax)


def verify_shadowing(cert: ShadowingCertificate, spec: ShadowingSpec,
                     t_step: float | None = None, rtol: float = 1e-9) -> VerificationReport:
    """Re-measure a certificate against its spec.

    Passes when every sampled error is below ``delta``, ``T_P x = x`` exactly,
    ``x`` lies in ``K_n`` and (at the certificate's own ``t_step``) the recorded
    errors are reproduced within ``rtol``.
    """
    t_step = cert.t_step if t_step is None else t_step
    x = cert.x
    failures = []
    maxima, argmax = measure_piece_errors(x, spec, t_step)
    for r, (err, t) in enumerate(zip(maxima, argmax), start=1):
        if not err < spec.delta:
            failures.append(f"piece {r}: error {err:.6g} >= delta {spec.delta:.6g} at t={t:.6g}")
    if t_step == cert.t_step and len(cert.per_piece_errors) == len(maxima):
        for r, (old, new, t) in enumerate(zip(cert.per_piece_errors, maxima, argmax), start=1):
            if abs(old - new) > rtol * max(1.0, abs(old)):
                failures.append(
                    f"piece {r}: recorded error {old:.12g} not reproduced ({new:.12g}) near t={t:.6g}")
    if x.extension != "periodic" or not _is_multiple(x.period, x.h):
        failures.append("x is not periodic on the grid")
        residual = math.inf
    else:
        residual = lp_v_norm(translate(x, x.period) - x, spec.v, spec.p).value
        if residual != 0.0:
            failures.append(f"period residual {residual:.3g} != 0")
    member = kn_membership(x, spec.n)
    if not member.member:
        slopes = _slopes(x)
        k = int(np.argmax(slopes))
        failures.append(
            f"x not in K_{spec.n}: sup {member.sup_norm:.6g}, slope {member.max_slope:.6g} at x={k * x.h:.6g}")
    return VerificationReport(not failures, maxima, argmax, residual, member.member, tuple(failures))


def discrete_osp_check(spec: ShadowingSpec, t_step: float = 0.01) -> ShadowingCertificate:
    """Shadowing restricted to times on the ``t0`` lattice (discrete-time bridge)."""
    for r, pc in enumerate(spec.pieces, start=1):
        for name, value in (("a", pc.a), ("b", pc.b)):
            if not _is_multiple(value, spec.t0):
                raise ValueError(f"piece {r}: {name}_{r} = {value} is not a multiple of t0 = {spec.t0}")
    cert = construct_shadowing_point(spec, t_step)
    cert.on_lattice = _is_multiple(cert.P, spec.t0) and all(
        _is_multiple(t, spec.t0) for pc in spec.pieces for t in (pc.a, pc.b))
    return cert


# ---------------------------------------------------------------------------
# random suites


def random_kn_function(rng: np.random.Generator, n: float, h: float,
                       length: float, knot_spacing: float = 0.5) -> GridFunction:
    """Random Lipschitz polyline in ``K_n`` with zero extension, vanishing at ``x_max``."""
    knots = max(2, int(round(length / knot_spacing)) + 1)
    kx = np.linspace(0.0, length, knots)
    kv = rng.uniform(-n, n, size=knots)
    kv[-1] = 0.0
    nodes = int(round(length / h))
    f = np.interp(np.arange(nodes + 1) * h, kx, kv)
    slope = np.max(np.abs(np.diff(f))) / h
    scale = min(1.0, n / slope) if slope > 0 else 1.0
    return GridFunction(h, f * scale * (1 - 1e-12), "zero")


def random_spec(rng: np.random.Generator, n: int, s: int, delta: float,
                v: WeightFunction, p: float = 1.0, h: float = 0.01,
                t0: float = 1.0) -> ShadowingSpec:
    M, _ = required_gap(delta, n, v, p)
    pieces, a = [], 0.0
    for _ in range(s):
        y = random_kn_function(rng, n, h, length=float(rng.uniform(0.5, 4.0)))
        b = a + float(rng.uniform(0.0, 2.0))
        pieces.append(Piece(y, a, b))
        a = b + M + float(rng.uniform(0.0, 2.0))
    return ShadowingSpec(tuple(pieces), delta, n, v, p, t0)


# ---------------------------------------------------------------------------
# serialization


def dumps_certificate(cert: ShadowingCertificate, spec: ShadowingSpec) -> str:
    doc = {
        "certificate": {
            "period": cert.P, "gap": cert.M, "cut": cert.C, "t_step": cert.t_step,
            "per_piece_errors": list(cert.per_piece_errors),
            "per_piece_argmax": list(cert.per_piece_argmax),
            "period_residual": cert.period_residual, "class_check": cert.class_check,
            "on_lattice": cert.on_lattice, "x": dumps_grid(cert.x),
        },
        "spec": {
            "delta": spec.delta, "n": spec.n, "p": spec.p, "t0": spec.t0,
            "weight": dumps_weight(spec.v),
            "pieces": [{"a": pc.a, "b": pc.b, "y": dumps_grid(pc.y)} for pc in spec.pieces],
        },
    }
    return json.dumps(doc, indent=1)


def loads_certificate(text: str):
    doc = json.loads(text)
    c, s = doc["certificate"], doc["spec"]
    spec = ShadowingSpec(
        tuple(Piece(loads_grid(pc["y"]), pc["a"], pc["b"]) for pc in s["pieces"]),
        s["delta"], s["n"], loads_weight(s["weight"]), s["p"], s["t0"])
    cert = ShadowingCertificate(
        x=loads_grid(c["x"]), M=c["gap"], C=c["cut"], P=c["period"],
        per_piece_errors=tuple(c["per_piece_errors"]),
        per_piece_argmax=tuple(c["per_piece_argmax"]),
        period_residual=c["period_residual"], class_check=c["class_check"],
        t_step=c["t_step"], on_lattice=c["on_lattice"])
    return cert, spec
