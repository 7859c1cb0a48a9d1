"""Semigroup engines behind one ``apply(handle, t, state)`` entry point.

* :class:`Translation` -- ``T_t f(x) = f(x + t)`` on weighted L^p of the half line.
* :class:`SecondOrder` -- ``e^{tA}`` on X_rho + X_rho for the hyperbolic heat
  equation (or the wave equation when ``tau`` is ``None``).
* :class:`BlackScholes` -- diagonal action on monomials ``x^beta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from .expm import expm
from .function_spaces import (
    CoefficientPair,
    GridFunction,
    MonomialCombo,
    SpaceParams,
    WeightFunction,
    _is_multiple,
    lp_v_norm,
    x_rho_norm,
    y_stau_norm,
)


@dataclass(frozen=True)
class Translation:
    v: WeightFunction
    p: float = 1.0

    def __post_init__(self):
        if self.v.admissible_params is None:
            raise ValueError("translation needs an admissible weight (M, w)")
        M, _ = self.v.admissible_params
        if M < 1:
            raise ValueError("admissibility constant M must be >= 1")
        if self.p < 1:
            raise ValueError("p must be >= 1")


@dataclass(frozen=True)
class SecondOrder:
    """``u_1' = u_2``, ``u_2' = c u_1'' + e u_2`` on coefficient sequences.

    Hyperbolic heat: ``c = alpha / tau``, ``e = -1 / tau``. Wave (``tau=None``):
    ``c = alpha``, ``e = 0``.
    """

    alpha: float
    tau: float | None
    rho: float
    n_trunc: int = 60

    def __post_init__(self):
        if not self.alpha > 0 or not self.rho > 0:
            raise ValueError("alpha and rho must be positive")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive (None selects the wave equation)")
        if self.n_trunc < 2:
            raise ValueError("n_trunc must be at least 2")

    @property
    def c(self) -> float:
        return self.alpha if self.tau is None else self.alpha / self.tau

    @property
    def e(self) -> float:
        return 0.0 if self.tau is None else -1.0 / self.tau

    def mu_squared(self, lam):
        """``mu^2`` making ``(e^{mu x}, lam e^{mu x})`` an eigenvector for ``lam``."""
        return (lam * lam - self.e * lam) / self.c


@dataclass(frozen=True)
class BlackScholes:
    sigma: float
    r: float
    space: SpaceParams = field(default_factory=SpaceParams)

    def __post_init__(self):
        if not self.sigma > 0 or not self.r > 0:
            raise ValueError("sigma and r must be positive")

    @property
    def nu(self) -> float:
        return self.sigma / math.sqrt(2.0)

    @property
    def gamma(self) -> float:
        return self.r / self.nu - self.nu

    def eigenvalue(self, beta):
        """Eigenvalue of the generator on ``x^beta``: ``nu^2 b^2 + gamma nu b - r``."""
        nu = self.nu
        return nu * nu * beta * beta + self.gamma * nu * beta - self.r

    def exponents_for(self, lam):
        """Both roots ``beta`` of ``eigenvalue(beta) = lam``."""
        nu = self.nu
        a, b, c = nu * nu, self.gamma * nu, -self.r - lam
        disc = np.sqrt(complex(b * b - 4 * a * c))
        return ((-b + disc) / (2 * a), (-b - disc) / (2 * a))


# ---------------------------------------------------------------------------
# translation


def translate(f: GridFunction, t: float) -> GridFunction:
    """``T_t f``, exact index shift when ``t`` is a multiple of the step."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return f
    if _is_multiple(t, f.h):
        k = int(round(t / f.h))
        if f.extension == "periodic":
            n = f.period_nodes
            idx = (np.arange(f.samples.size) + k) % n
            return GridFunction(f.h, f.samples[idx], "periodic", f.period)
        out = np.zeros_like(f.samples)
        if k < f.samples.size:
            out[: f.samples.size - k] = f.samples[k:]
        return GridFunction(f.h, out, "zero")
    return GridFunction(f.h, f(f.nodes + t), f.extension, f.period)


def translation_error_bound(f: GridFunction, t: float) -> float:
    """Bound on the sup distance between ``translate(f, t)`` and the true shift.

    Zero at grid-aligned ``t``; otherwise both polylines are Lipschitz with
    the sample slope and agree on shifted nodes, so ``h * max slope`` bounds it.
    """
    if t == 0 or _is_multiple(t, f.h):
        return 0.0
    # h * (max |diff| / h)
    return float(np.max(np.abs(np.diff(f.samples))))


# ---------------------------------------------------------------------------
# second-order engine


def _generator_matrix(c, e, rho, n):
    size = n + 1
    shift = np.zeros((size, size))
    idx = np.arange(size - 2)
    shift[idx, idx + 2] = rho * rho
    A = np.zeros((2 * size, 2 * size))
    A[:size, size:] = np.eye(size)
    A[size:, :size] = c * shift
    A[size:, size:] = e * np.eye(size)
    return A


def second_order_matrix(handle: SecondOrder, n_trunc: int | None = None) -> np.ndarray:
    """Finite section of the generator acting on ``concat(a, b)``."""
    n = handle.n_trunc if n_trunc is None else n_trunc
    return _generator_matrix(handle.c, handle.e, handle.rho, n)


@lru_cache(maxsize=256)
def _propagator(c, e, rho, n, t):
    P = expm(t * _generator_matrix(c, e, rho, n))
    P.setflags(write=False)
    return P


def second_order_generator(u: CoefficientPair, handle: SecondOrder) -> CoefficientPair:
    """``A(a, b) = (b, c D^2 a + e b)`` with ``(D^2 a)_n = rho^2 a_{n+2}``."""
    rho2 = handle.rho ** 2
    d2a = np.zeros_like(u.a)
    d2a[:-2] = rho2 * u.a[2:]
    return CoefficientPair(u.rho, u.b.copy(), handle.c * d2a + handle.e * u.b)


class SecondOrderResult(NamedTuple):
    state: CoefficientPair
    error_estimate: float
    truncation_limited: bool


def _propagate(handle, t, u, n):
    P = _propagator(handle.c, handle.e, handle.rho, n, float(t))
    return CoefficientPair.from_vector(handle.rho, P @ u.padded(n).vector)


def second_order_apply(t: float, u: CoefficientPair, handle: SecondOrder,
                       tol: float = 1e-8) -> SecondOrderResult:
    """``e^{tA} u`` on the truncated coefficient space.

    The error estimate is the X_rho distance between the results at
    truncation ``N`` and ``N + 10``; above ``tol`` the result is flagged.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if u.rho != handle.rho:
        raise ValueError("state and engine use different rho")
    if t == 0:
        return SecondOrderResult(u, 0.0, False)
    n = max(handle.n_trunc, u.n_trunc)
    coarse = _propagate(handle, t, u, n)
    fine = _propagate(handle, t, u, n + 10)
    err = x_rho_norm(coarse.padded(n + 10) - fine)
    return SecondOrderResult(coarse, err, err > tol)


# ---------------------------------------------------------------------------
# Black-Scholes engine


def blackscholes_apply(t: float, u: MonomialCombo, handle: BlackScholes) -> MonomialCombo:
    """Each term ``c x^beta`` becomes ``c e^{t lambda(beta)} x^beta``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return u
    return MonomialCombo(tuple((b, c * np.exp(t * handle.eigenvalue(b)))
                               for b, c in u.terms))


def blackscholes_generator(u: MonomialCombo, handle: BlackScholes) -> MonomialCombo:
    return MonomialCombo(tuple((b, c * handle.eigenvalue(b)) for b, c in u.terms))


# ---------------------------------------------------------------------------
# uniform interface


def apply(handle, t: float, state):
    if isinstance(handle, Translation):
        return translate(state, t)
    if isinstance(handle, SecondOrder):
        return second_order_apply(t, state, handle).state
    if isinstance(handle, BlackScholes):
        return blackscholes_apply(t, state, handle)
    raise TypeError(f"unknown engine {type(handle).__name__}")


def norm(handle, state) -> float:
    """The engine's native norm (upper estimate for translation)."""
    if isinstance(handle, Translation):
        return lp_v_norm(state, handle.v, handle.p).upper
    if isinstance(handle, SecondOrder):
        return x_rho_norm(state)
    if isinstance(handle, BlackScholes):
        return y_stau_norm(state, handle.space).value
    raise TypeError(f"unknown engine {type(handle).__name__}")


def engine_name(handle) -> str:
    if isinstance(handle, SecondOrder):
        return "wave" if handle.tau is None else "hhte"
    return {Translation: "translation", BlackScholes: "blackscholes"}[type(handle)]


def random_state(handle, rng: np.random.Generator, h: float = 0.01):
    """A seeded test state in the engine's space."""
    if isinstance(handle, Translation):
        knots = rng.uniform(-1.0, 1.0, size=int(rng.integers(3, 9)))
        knots[-1] = 0.0
        kx = np.linspace(0.0, float(rng.uniform(1.0, 4.0)), knots.size)
        nodes = np.arange(int(round(kx[-1] / h)) + 1) * h
        return GridFunction(h, np.interp(nodes, kx, knots), "zero")
    if isinstance(handle, SecondOrder):
        n = np.arange(handle.n_trunc + 1)
        decay = 0.7 ** n
        a = decay * (rng.normal(size=n.size) + 1j * rng.normal(size=n.size))
        b = decay * (rng.normal(size=n.size) + 1j * rng.normal(size=n.size))
        return CoefficientPair(handle.rho, a, b)
    if isinstance(handle, BlackScholes):
        sp = handle.space
        k = int(rng.integers(1, 4))
        re = rng.uniform(-sp.tau_y + 0.05, sp.s - 0.05, size=k)
        im = rng.uniform(-2.0, 2.0, size=k)
        coef = rng.normal(size=k) + 1j * rng.normal(size=k)
        return MonomialCombo(tuple(zip(re + 1j * im, coef)))
    raise TypeError(f"unknown engine {type(handle).__name__}")


class LawReport(NamedTuple):
    identity_residual: float
    composition_residual: float
    continuity_residual: float


def check_semigroup_laws(handle, f, t1: float, t2: float, eps: float = 1e-3,
                         reference=None) -> LawReport:
    """Residuals of ``T_0 = Id``, ``T_{t1+t2} = T_{t1} T_{t2}`` and continuity at ``t1``.

    For the second-order engine ``reference`` may carry the same element at a
    higher truncation; the composition is then compared against
    ``T_{t1+t2} reference``, so the residual includes state truncation error.
    """
    if t1 < 0 or t2 < 0:
        raise ValueError("times must be nonnegative")
    identity = norm(handle, apply(handle, 0.0, f) - f)
    composed = apply(handle, t1, apply(handle, t2, f))
    if reference is not None:
        direct = apply(handle, t1 + t2, reference)
        if isinstance(handle, SecondOrder):
            n = max(direct.n_trunc, composed.n_trunc)
            direct, composed = direct.padded(n), composed.padded(n)
    else:
        direct = apply(handle, t1 + t2, f)
    composition = norm(handle, direct - composed)
    continuity = norm(handle, apply(handle, t1 + eps, f) - apply(handle, t1, f))
    return LawReport(identity, composition, continuity)
