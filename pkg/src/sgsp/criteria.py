"""Checkable conditions: the integral dichotomy for translations, the
eigenvector-field criterion and the parameter gates of the spectral engines."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from . import semigroups as sg
from .function_spaces import (
    CoefficientPair,
    GridFunction,
    InconclusiveTailError,
    MonomialCombo,
    WeightFunction,
    admissibility_check,
    grid_from_callable,
    log_grid,
    lp_v_norm,
    tail_integral,
    tent,
)
from .probes import fh_hit_density, periodic_approximant
from .shadowing import (
    NoFiniteGapError,
    Piece,
    ShadowingSpec,
    class_index,
    construct_shadowing_point,
    random_spec,
    required_gap,
    verify_shadowing,
)

# ---------------------------------------------------------------------------
# parameter gates


def hhte_parameter_gate(alpha: float, tau: float, rho: float) -> bool:
    """``alpha * tau * rho > 2``."""
    if min(alpha, tau, rho) <= 0:
        raise ValueError("alpha, tau and rho must be positive")
    return alpha * tau * rho > 2


def blackscholes_parameter_gate(s: float, tau_y: float, sigma: float) -> bool:
    """``s > 1``, ``tau_y >= 0`` and ``s * sigma / sqrt(2) > 1``."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    return s > 1 and tau_y >= 0 and s * sigma / math.sqrt(2.0) > 1


# ---------------------------------------------------------------------------
# translation dichotomy


def default_dictionary(h: float = 0.01):
    return (tent(h), tent(h, center=1.5, half_width=1.5, height=0.75),
            tent(h, center=0.5, half_width=0.5, height=-0.5))


@dataclass
class EquivalenceConfig:
    seed: int = 0
    suite_size: int = 10
    delta: float = 0.3
    fh_horizon_periods: int = 10
    fh_step: float = 0.05
    fh_radius: float | None = None
    tol: float = 1e-9


@dataclass
class EquivalenceReport:
    integral_verdict: str
    integral_value: float
    admissibility: str
    shadowing_ok: bool | None = None
    shadowing_detail: str = ""
    gap_refused: bool | None = None
    periodic_density_ok: bool | None = None
    periodic_errors: tuple = ()
    eigenfield_norm: float | None = None
    fh_evidence: tuple = ()
    fh_positive: bool | None = None
    overall: str = "inconclusive"
    notes: tuple = ()

    def items(self) -> dict:
        """The five equivalent assertions as observed (``None`` = not probed)."""
        return {
            "(i) integral finite": {"finite": True, "divergent": False}.get(self.integral_verdict),
            "(ii) specification": self.shadowing_ok,
            "(iii) periodic density": self.periodic_density_ok,
            "(iv) eigenfield in space": (None if self.eigenfield_norm is None
                                         else math.isfinite(self.eigenfield_norm)),
            "(v) frequent hits": self.fh_positive,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["items"] = self.items()
        return d

    def summary(self) -> str:
        lines = [f"integral: {self.integral_verdict} ({self.integral_value!r})",
                 f"admissibility: {self.admissibility}"]
        for name, val in self.items().items():
            lines.append(f"{name}: {'not probed' if val is None else val}")
        if self.shadowing_detail:
            lines.append(f"shadowing suite: {self.shadowing_detail}")
        lines.extend(self.notes)
        lines.append(f"overall: {self.overall}")
        return "\n".join(lines)


def _integral(v: WeightFunction):
    try:
        value = tail_integral(v, 0.0)
    except InconclusiveTailError as exc:
        return "inconclusive", exc.partial_sum
    return ("finite" if math.isfinite(value) else "divergent"), value


def _eigenfield_norm(v: WeightFunction, p: float) -> float:
    """Norm of ``x -> e^{ix}`` (a point of the translation eigenfield)."""
    n = 256
    h = 2 * math.pi / n
    f = GridFunction(h, np.exp(1j * h * np.arange(n + 1)), "periodic", 2 * math.pi)
    return lp_v_norm(f, v, p).upper


def _nonincreasing(v: WeightFunction) -> bool:
    x = np.linspace(0.0, 50.0, 5001)
    return bool(np.all(np.diff(v(x)) <= 0))


def translation_equivalences(v: WeightFunction, p: float = 1.0, dictionary=None,
                             config: EquivalenceConfig | None = None) -> EquivalenceReport:
    """Probe every assertion of the integral dichotomy for ``T_t`` on ``L^p_v``.

    A finite integral predicts positive probes; a divergent one predicts
    constructive refusals and, for nonincreasing weights, unreachable balls.
    """
    cfg = config or EquivalenceConfig()
    handle = sg.Translation(v, p)
    dictionary = tuple(dictionary or default_dictionary())
    M_adm, w_adm = v.admissible_params
    adm = admissibility_check(v, np.linspace(0, 20, 201), np.linspace(0, 10, 51), w_adm)
    verdict, value = _integral(v)
    report = EquivalenceReport(verdict, value, adm.verdict)
    if verdict == "inconclusive":
        report.notes = ("tail integral inconclusive: probes skipped",)
        return report
    finite = verdict == "finite"
    notes = []

    # (ii) shadowing suite
    rng = np.random.default_rng(cfg.seed)
    passed = total = 0
    try:
        required_gap(0.5, 1, v, p)
        report.gap_refused = False
        for _ in range(cfg.suite_size):
            n = int(rng.integers(1, 4))
            s = int(rng.integers(2, 6))
            delta = float(rng.uniform(0.1, 1.0))
            spec = random_spec(rng, n, s, delta, v, p)
            cert = construct_shadowing_point(spec)
            total += 1
            passed += verify_shadowing(cert, spec).passed
        report.shadowing_ok = passed == total
        report.shadowing_detail = f"{passed}/{total} certificates verified"
    except NoFiniteGapError as exc:
        report.gap_refused = True
        report.shadowing_ok = False
        report.shadowing_detail = f"refused: {exc}"

    # (iii) periodic points near the dictionary
    errors = []
    try:
        for y in dictionary:
            errors.append(periodic_approximant(handle, y, cfg.delta).error)
        report.periodic_density_ok = all(e < cfg.delta for e in errors)
    except NoFiniteGapError:
        report.periodic_density_ok = False
        notes.append("periodic approximation refused: no finite gap")
    report.periodic_errors = tuple(errors)

    # (iv) the eigenfield t -> e^{itx} lies in the space
    report.eigenfield_norm = _eigenfield_norm(v, p)

    # (v) frequent-hit evidence
    radius = cfg.fh_radius or cfg.delta
    if finite:
        x0, targets = _dictionary_orbit(handle, dictionary, radius / 2.0)
        hits = fh_hit_density(handle, x0, [(y, radius) for y in targets],
                              cfg.fh_horizon_periods * x0.period, cfg.fh_step, cfg.tol)
        report.fh_evidence = tuple(d.lower for d in hits.densities)
        report.fh_positive = all(d > 0 for d in report.fh_evidence)
    elif _nonincreasing(v):
        x0 = dictionary[0]
        base = lp_v_norm(x0, v, p).upper
        targets = []
        for y in dictionary:
            scale = (base + 2 * radius) / lp_v_norm(y, v, p).value
            targets.append((y * max(1.0, scale), radius))
        hits = fh_hit_density(handle, x0, targets, 50.0, cfg.fh_step, cfg.tol)
        report.fh_evidence = tuple(d.lower for d in hits.densities)
        report.fh_positive = any(d > 0 for d in report.fh_evidence)
    else:
        notes.append("frequent-hit probe skipped: weight not nonincreasing")

    expected = finite
    observed = [val for key, val in report.items().items()
                if val is not None and not key.startswith("(i)")]
    report.overall = "consistent" if all(o == expected for o in observed) else "inconsistent"
    report.notes = tuple(notes)
    return report


def _dictionary_orbit(handle: sg.Translation, dictionary, delta: float):
    """A periodic ``x0`` passing within ``delta`` of every dictionary element.

    A piece ``(z, a, a)`` pins ``T_a x0`` near ``T_a z``, so each element is
    first shifted right by its visiting time ``a``.
    """
    n = max(class_index(y) for y in dictionary)
    M, _ = required_gap(delta, n, handle.v, handle.p)
    pieces, a = [], 0.0
    for y in dictionary:
        k = int(round(a / y.h))
        z = GridFunction(y.h, np.concatenate([np.zeros(k, dtype=y.samples.dtype), y.samples]),
                         "zero")
        pieces.append(Piece(z, a, a))
        a = math.ceil(a + M)
    spec = ShadowingSpec(tuple(pieces), delta, n, handle.v, handle.p)
    return construct_shadowing_point(spec).x, dictionary


# ---------------------------------------------------------------------------
# eigenvector fields


class OutsideSpaceError(ValueError):
    """The field's value at this parameter is not in the engine's space."""


@dataclass
class EigenfieldReport:
    t_samples: tuple
    residuals: tuple
    rejected: tuple
    boundedness: float
    span_surrogate: dict = field(default_factory=dict)
    satisfied: bool = False
    degenerate: bool = False
    smooth_flag: bool | None = None
    c0_flag: bool | None = None

    @property
    def residual_sup(self) -> float:
        return max(self.residuals, default=0.0)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["span_surrogate"] = {k: list(v) for k, v in self.span_surrogate.items()}
        d["residual_sup"] = self.residual_sup
        return d

    def summary(self) -> str:
        lines = [f"samples: {len(self.residuals)} accepted, {len(self.rejected)} rejected",
                 f"residual sup: {self.residual_sup!r}",
                 f"boundedness: {self.boundedness!r}"]
        for k, v in self.span_surrogate.items():
            lines.append(f"span residual {k}: {v[-1]!r}" if v else f"span residual {k}: n/a")
        if self.degenerate:
            lines.append("degenerate field: every sample is zero")
        lines.append("criterion satisfied (empirical)" if self.satisfied
                     else "criterion not satisfied")
        return "\n".join(lines)


def translation_field(h: float = 1e-4, x_max: float = 40.0):
    """``t -> e^{itx}`` on ``[0, x_max]`` as a complex grid function."""
    def sample(t):
        return grid_from_callable(lambda x: np.exp(1j * t * x), h, x_max)
    return sample


def translation_fd_generator(f: GridFunction) -> GridFunction:
    """``(f(. + h) - f) / h`` on the interior nodes."""
    return GridFunction(f.h, np.diff(f.samples) / f.h, "zero")


def hhte_field(handle: sg.SecondOrder, n_trunc: int | None = None):
    """``t -> (e^{mu x}, it e^{mu x})`` with ``mu^2 = ((it)^2 - e it) / c``."""
    n = np.arange((n_trunc or handle.n_trunc) + 1)

    def sample(t):
        lam = 1j * t
        mu = np.sqrt(complex(handle.mu_squared(lam)))
        if abs(mu) >= handle.rho:
            raise OutsideSpaceError(f"|mu({t})| = {abs(mu):.6g} >= rho")
        a = (mu / handle.rho) ** n
        return CoefficientPair(handle.rho, a, lam * a)
    return sample


def blackscholes_field(handle: sg.BlackScholes):
    """``t -> x^beta(t)`` with ``lambda(beta) = it`` and ``-tau_y < Re beta < s``."""
    space = handle.space

    def sample(t):
        for beta in handle.exponents_for(1j * t):
            if -space.tau_y < beta.real < space.s:
                return MonomialCombo.monomial(beta)
        raise OutsideSpaceError(f"no exponent for it = {t}i inside Y^(s,tau)")
    return sample


def generator_for(handle) -> Callable:
    if isinstance(handle, sg.Translation):
        return translation_fd_generator
    if isinstance(handle, sg.SecondOrder):
        return lambda u: sg.second_order_generator(u, handle)
    if isinstance(handle, sg.BlackScholes):
        return lambda u: sg.blackscholes_generator(u, handle)
    raise TypeError(f"unknown engine {type(handle).__name__}")


def _flatten(handle, state, like=None) -> np.ndarray:
    """A finite vector standing for ``state`` in a weighted l2 surrogate."""
    if isinstance(state, CoefficientPair):
        n = like.n_trunc if like is not None else state.n_trunc
        return state.padded(n).vector
    if isinstance(state, MonomialCombo):
        lx = log_grid(32, (-4.0, 4.0))
        x = np.exp(lx)
        sp = handle.space
        return state(x) / ((1 + x ** sp.s) * (1 + x ** (-sp.tau_y)))
    ref = like if like is not None else state
    stride = max(1, ref.samples.size // 4096)
    x = ref.nodes[::stride]
    return state(x) * np.sqrt(handle.v(x) * ref.h * stride)


def _span_residuals(vectors, target) -> list:
    """Relative residual of ``target`` after projecting on the first ``k`` vectors."""
    basis, out = [], []
    scale = np.linalg.norm(target)
    r = target.astype(complex)
    for vec in vectors:
        q = vec.astype(complex)
        for b in basis:
            q = q - np.vdot(b, q) * b
        nq = np.linalg.norm(q)
        if nq > 1e-12 * max(1.0, np.linalg.norm(vec)):
            q = q / nq
            basis.append(q)
            r = r - np.vdot(q, r) * q
        out.append(float(np.linalg.norm(r) / scale) if scale else 0.0)
    # guard against rounding: nested projections never grow
    return [float(r) for r in np.minimum.accumulate(out)] if out else out


def eigenfield_check(handle, sampler, t_samples, generator=None, dictionary=(),
                     tol: float = 1e-3, span_tol: float = 1e-2,
                     smooth_flag: bool | None = None,
                     c0_flag: bool | None = None) -> EigenfieldReport:
    """Residuals ``||A f(t) - it f(t)||``, the sup of ``||f(t)||`` and span residuals.

    ``dictionary`` maps names to target states; their span residuals use the
    accepted samples in the given order, so the sets are nested.
    """
    generator = generator or generator_for(handle)
    dictionary = dict(dictionary) if not isinstance(dictionary, dict) else dictionary
    ts, residuals, rejected, norms, vectors = [], [], [], [], []
    first = None
    for t in t_samples:
        t = float(t)
        try:
            f = sampler(t)
        except OutsideSpaceError as exc:
            rejected.append((t, str(exc)))
            continue
        Af = generator(f)
        if isinstance(f, GridFunction):
            itf = GridFunction(f.h, 1j * t * f.samples[: Af.samples.size], "zero")
            res = lp_v_norm(Af - itf, handle.v, handle.p).upper
        else:
            res = sg.norm(handle, Af - f * (1j * t))
        ts.append(t)
        residuals.append(float(res))
        norms.append(sg.norm(handle, f))
        first = first if first is not None else f
        if dictionary:
            vectors.append(_flatten(handle, f, first))
    span = {name: _span_residuals(vectors, _flatten(handle, g, first))
            for name, g in dictionary.items()} if first is not None else {}
    bound = max(norms, default=0.0)
    degenerate = bound == 0.0
    satisfied = (bool(residuals) and not degenerate and max(residuals) < tol
                 and all(v and v[-1] < span_tol for v in span.values()))
    return EigenfieldReport(tuple(ts), tuple(residuals), tuple(rejected), bound, span,
                            satisfied, degenerate, smooth_flag, c0_flag)
