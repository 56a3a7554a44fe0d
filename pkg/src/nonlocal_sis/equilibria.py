"""Steady states of the two-compartment dispersal model.

The stationary system for susceptible/infected densities (S, I) is

    d_S (K S - m S) - beta S I/(S+I) + gamma I = 0
    d_I (K I - m I) + beta S I/(S+I) - gamma I = 0        (m = row_integral)

with total mass N. Adding the equations shows d_S S + d_I I is constant (= k)
at any positive steady state, which reduces the problem to a scalar field
0 < I < 1 solving

    d_I (K I - m I) + (beta - gamma) I - d_S beta I^2 / (d_S I + d_I (1 - I)) = 0

after the normalization d_S S + I = 1. The reduced equation is solved by a
damped fixed-point map G(I) = I + tau F(I) iterated simultaneously from a
constant supersolution (I = 1, where F = -gamma < 0) and a small multiple of
the principal eigenvector (a subsolution once scaled down). With tau at most
the reciprocal of the diagonal Lipschitz bound the map is order-preserving, so
the two iterates stay ordered and squeeze the unique positive solution.

The same machinery solves the logistic-type steady problems that appear as
large-diffusivity limits.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    AssumptionViolatedError,
    NoConvergenceError,
    NonpositiveParameterError,
    OutOfRangeError,
    SubcriticalRegimeError,
)
from .mesh import Kernel, Mesh1D, integrate, require_field
from .spectral import RateFields, principal_eigenvalue, weighted_eigenvalue

KIND_DISEASE_FREE = "disease_free"
KIND_ENDEMIC = "endemic"

BRACKET_GAP_TOL = 1e-10
ORDER_SLACK = 1e-12
ITERATION_CAP = 10**6
SUPERCRITICAL_SLACK = 1e-9


def infection_term(beta: np.ndarray, S: np.ndarray, I: np.ndarray) -> np.ndarray:
    """beta * S * I / (S + I), with 0 where the population vanishes."""
    tot = S + I
    safe = np.where(tot > 1e-300, tot, 1.0)
    return np.where(tot > 1e-300, beta * S * I / safe, 0.0)


@dataclass(frozen=True)
class ModelParams:
    """Full model data: kernel (with its mesh), rates, diffusivities, total mass."""

    kernel: Kernel
    rates: RateFields
    d_S: float
    d_I: float
    N: float

    def __post_init__(self) -> None:
        for name in ("d_S", "d_I", "N"):
            if not getattr(self, name) > 0:
                raise NonpositiveParameterError(f"{name} must be > 0, got {getattr(self, name)}")
        require_field(self.mesh, self.rates.beta, "beta")

    @property
    def mesh(self) -> Mesh1D:
        return self.kernel.mesh


@dataclass(frozen=True)
class EquilibriumResult:
    S_tilde: np.ndarray
    I_tilde: np.ndarray
    k: float
    kind: str
    iterations: int
    residual: float


def equilibrium_residual(params: ModelParams, S: np.ndarray, I: np.ndarray) -> float:
    """Sup-norm residual of the stationary system at (S, I)."""
    S = require_field(params.mesh, S, "S")
    I = require_field(params.mesh, I, "I")
    K, m = params.kernel.matrix, params.kernel.row_integral
    inf = infection_term(params.rates.beta, S, I)
    r_s = params.d_S * (K @ S - m * S) - inf + params.rates.gamma * I
    r_i = params.d_I * (K @ I - m * I) + inf - params.rates.gamma * I
    return float(max(np.abs(r_s).max(), np.abs(r_i).max()))


def disease_free(params: ModelParams) -> EquilibriumResult:
    """The constant state (N/|domain|, 0)."""
    n = params.mesh.n
    s_bar = params.N / params.mesh.length
    S = np.full(n, s_bar)
    I = np.zeros(n)
    return EquilibriumResult(
        S_tilde=S, I_tilde=I, k=params.d_S * s_bar, kind=KIND_DISEASE_FREE,
        iterations=0, residual=equilibrium_residual(params, S, I),
    )


class _OrderBreak(Exception):
    """Internal: bracket ordering or monotonicity lost during iteration."""


def _scale_subsolution(residual_fn, phi: np.ndarray, start: float) -> np.ndarray:
    """Halve delta from `start` until delta*phi has nonnegative residual everywhere."""
    delta = start
    for _ in range(60):
        cand = delta * phi
        if np.all(residual_fn(cand) >= 0.0):
            return cand
        delta *= 0.5
    raise NoConvergenceError("no subsolution found after 60 halvings of the eigenvector scale")


def _monotone_bracket(residual_fn, lower: np.ndarray, upper: np.ndarray, tau: float,
                      gap_tol: float = BRACKET_GAP_TOL, cap: int = ITERATION_CAP):
    """Iterate G = id + tau*residual from both bracket ends until they collapse.

    Checks every iteration that the upper iterate does not increase, the lower
    does not decrease, and the bracket stays ordered (1e-12 slack); a violation
    means tau was too aggressive and is reported via _OrderBreak.
    """
    if np.any(lower > upper + ORDER_SLACK):
        raise _OrderBreak("initial bracket not ordered")
    for it in range(1, cap + 1):
        new_upper = upper + tau * residual_fn(upper)
        new_lower = lower + tau * residual_fn(lower)
        if (np.any(new_upper > upper + ORDER_SLACK)
                or np.any(new_lower < lower - ORDER_SLACK)
                or np.any(new_lower > new_upper + ORDER_SLACK)):
            raise _OrderBreak(f"bracket ordering lost at iteration {it}")
        upper, lower = new_upper, new_lower
        if float(np.max(upper - lower)) <= gap_tol:
            return 0.5 * (upper + lower), it
    raise NoConvergenceError(f"bracket gap above {gap_tol:g} after {cap} iterations")


def _bracket_with_retry(residual_fn, lower, upper, tau, **kw):
    """Run the bracket iteration; on failure halve tau and retry once."""
    try:
        return _monotone_bracket(residual_fn, lower, upper, tau, **kw)
    except (_OrderBreak, NoConvergenceError):
        try:
            return _monotone_bracket(residual_fn, lower, upper, 0.5 * tau, **kw)
        except _OrderBreak as exc:
            raise NoConvergenceError(f"bracket iteration failed even at tau/2: {exc}") from exc


def _reduced_residual(params: ModelParams):
    K, m = params.kernel.matrix, params.kernel.row_integral
    beta, gamma = params.rates.beta, params.rates.gamma
    d_S, d_I = params.d_S, params.d_I

    def residual(I: np.ndarray) -> np.ndarray:
        q = d_S * I + d_I * (1.0 - I)
        return d_I * (K @ I - m * I) + (beta - gamma) * I - d_S * beta * I * I / q

    return residual


def _require_supercritical(params: ModelParams) -> None:
    mu, _ = weighted_eigenvalue(params.kernel, params.d_I, params.rates)
    if 1.0 / mu <= 1.0 + SUPERCRITICAL_SLACK:
        raise SubcriticalRegimeError(
            f"reproduction number {1.0 / mu:.6g} is not above 1; no positive steady state"
        )


def _solve_reduced_detailed(params: ModelParams) -> tuple[np.ndarray, int]:
    _require_supercritical(params)
    residual = _reduced_residual(params)
    _, phi = principal_eigenvalue(params.kernel, params.d_I, params.rates)
    if phi.min() <= 0:
        raise NoConvergenceError("principal eigenvector is not strictly positive")
    phi = phi / phi.max()
    lower = _scale_subsolution(residual, phi, 0.5)
    upper = np.ones(params.mesh.n)
    tau = 1.0 / float(np.max(params.d_I * params.kernel.row_integral
                             + params.rates.gamma + params.rates.beta))
    return _bracket_with_retry(residual, lower, upper, tau)


def solve_reduced_infected(params: ModelParams) -> np.ndarray:
    """Solve the reduced scalar steady equation; returns the field with 0 < I < 1."""
    I, _ = _solve_reduced_detailed(params)
    return I


def iterate_reduced_map(params: ModelParams, start: np.ndarray,
                        tol: float = 1e-12, cap: int = ITERATION_CAP) -> np.ndarray:
    """Run the damped fixed-point map from an arbitrary field in (0, 1).

    The map has a unique fixed point in the open bracket, so this converges to
    the same reduced solution regardless of the starting point; used to probe
    uniqueness by restarting from perturbed states.
    """
    residual = _reduced_residual(params)
    tau = 1.0 / float(np.max(params.d_I * params.kernel.row_integral
                             + params.rates.gamma + params.rates.beta))
    I = require_field(params.mesh, start, "start").copy()
    for _ in range(cap):
        step = tau * residual(I)
        I = I + step
        if float(np.max(np.abs(step))) <= tol:
            return I
    raise NoConvergenceError(f"damped map did not settle within {cap} iterations")


def recover_equilibrium(params: ModelParams, reduced_infected: np.ndarray,
                        iterations: int = 0) -> EquilibriumResult:
    """Scale the reduced solution back to densities with total mass N.

    With S = (1 - I)/d_S the pair (k S, k I / d_I) solves the full stationary
    system for k = d_I N / integral(d_I S + I); the constant k is exactly
    d_S S_tilde + d_I I_tilde pointwise.
    """
    I = require_field(params.mesh, reduced_infected, "reduced_infected")
    if not (I.min() > 0.0 and I.max() < 1.0):
        raise OutOfRangeError(
            f"reduced infected fraction must lie strictly inside (0, 1), "
            f"got range [{I.min():g}, {I.max():g}]"
        )
    S = (1.0 - I) / params.d_S
    k = params.d_I * params.N / integrate(params.mesh, params.d_I * S + I)
    S_tilde = k * S
    I_tilde = (k / params.d_I) * I
    return EquilibriumResult(
        S_tilde=S_tilde, I_tilde=I_tilde, k=float(k), kind=KIND_ENDEMIC,
        iterations=iterations, residual=equilibrium_residual(params, S_tilde, I_tilde),
    )


def endemic_equilibrium(params: ModelParams) -> EquilibriumResult:
    """Solve the reduced equation and rescale; the unique positive steady state."""
    I, iterations = _solve_reduced_detailed(params)
    return recover_equilibrium(params, I, iterations=iterations)


def logistic_steady(kernel: Kernel, d: float, r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Positive steady state of d (K u - m u) + (r - c u) u = 0.

    Exists iff the linearization at zero is unstable (principal value of the
    dispersal-plus-r operator below -1e-9); c must be strictly positive, r may
    change sign.
    """
    mesh = kernel.mesh
    r = require_field(mesh, r, "r")
    c = require_field(mesh, c, "c")
    if not d > 0:
        raise NonpositiveParameterError(f"diffusivity must be > 0, got {d}")
    if not np.all(c > 0):
        raise NonpositiveParameterError("crowding coefficient c must be strictly positive")
    K, m = kernel.matrix, kernel.row_integral
    lin = -(d * (K - np.diag(m)) + np.diag(r))
    vals, vecs = np.linalg.eigh(lin)
    if not vals[0] < -1e-9:
        raise SubcriticalRegimeError(
            f"linearization principal value {vals[0]:.3e} not below -1e-9; only the zero state exists"
        )
    phi = vecs[:, 0]
    if phi.sum() < 0:
        phi = -phi
    if phi.min() <= 0:
        raise NoConvergenceError("principal eigenvector is not strictly positive")
    phi = phi / phi.max()

    def residual(u: np.ndarray) -> np.ndarray:
        return d * (K @ u - m * u) + (r - c * u) * u

    ceiling = float(np.max(r / c))
    upper = np.full(mesh.n, ceiling)
    lower = _scale_subsolution(residual, phi, 0.5 * ceiling)
    tau = 1.0 / float(np.max(d * m - r + 2.0 * c * ceiling))
    u, _ = _bracket_with_retry(residual, lower, upper, tau)
    return u


def solve_ratio_profile(kernel: Kernel, d_I: float, rates: RateFields) -> np.ndarray:
    """Positive solution of d_I (K t - m t) + (beta - gamma) t - beta t^2/(d_I + t) = 0.

    This is the rescaled infected profile governing the large-d_S limit: the
    limiting pair is (d_I N / integral(d_I + t), N t / integral(d_I + t)).
    A priori bound t <= d_I max((beta - gamma)/gamma) supplies the constant
    supersolution.
    """
    mu, _ = weighted_eigenvalue(kernel, d_I, rates)
    if 1.0 / mu <= 1.0 + SUPERCRITICAL_SLACK:
        raise SubcriticalRegimeError(
            f"reproduction number {1.0 / mu:.6g} is not above 1; ratio profile does not exist"
        )
    K, m = kernel.matrix, kernel.row_integral
    beta, gamma = rates.beta, rates.gamma

    def residual(t: np.ndarray) -> np.ndarray:
        return d_I * (K @ t - m * t) + (beta - gamma) * t - beta * t * t / (d_I + t)

    _, phi = principal_eigenvalue(kernel, d_I, rates)
    if phi.min() <= 0:
        raise NoConvergenceError("principal eigenvector is not strictly positive")
    phi = phi / phi.max()
    ceiling = d_I * float(np.max((beta - gamma) / gamma))
    upper = np.full(kernel.mesh.n, ceiling)
    lower = _scale_subsolution(residual, phi, 0.5 * ceiling)
    tau = 1.0 / float(np.max(d_I * m + gamma + beta))
    t, _ = _bracket_with_retry(residual, lower, upper, tau)
    return t


def limit_profile_both_infinity(rates: RateFields, N: float, mesh: Mesh1D) -> tuple[float, float]:
    """Constants the endemic state approaches as both diffusivities blow up:
    ((N/|domain|) int(gamma)/int(beta), (N/|domain|) (1 - int(gamma)/int(beta)))."""
    if not N > 0:
        raise NonpositiveParameterError(f"N must be > 0, got {N}")
    require_field(mesh, rates.beta, "beta")
    ratio = float(rates.gamma.sum() / rates.beta.sum())
    if ratio >= 1.0:
        raise AssumptionViolatedError("limit needs a high-risk domain: int(beta) > int(gamma)")
    s_bar = N / mesh.length
    return s_bar * ratio, s_bar * (1.0 - ratio)


def limit_profile_ds_infinity(kernel: Kernel, d_I: float, rates: RateFields,
                              N: float) -> tuple[np.ndarray, np.ndarray]:
    """Large-d_S endemic limit: susceptibles flatten to a constant, infecteds
    follow the ratio profile."""
    if not N > 0:
        raise NonpositiveParameterError(f"N must be > 0, got {N}")
    t = solve_ratio_profile(kernel, d_I, rates)
    denom = integrate(kernel.mesh, d_I + t)
    S = np.full(kernel.mesh.n, d_I * N / denom)
    I = N * t / denom
    return S, I


def limit_system_residual(kernel: Kernel, d_S: float, rates: RateFields, N: float,
                          S: np.ndarray, I_star: float) -> float:
    """Sup-norm residual of the large-d_I limiting system at (S, I_star):
    the stationary susceptible equation with constant infecteds, plus the mass
    constraint integral(S) + I_star |domain| = N."""
    S = require_field(kernel.mesh, S, "S")
    K, m = kernel.matrix, kernel.row_integral
    eq = d_S * (K @ S - m * S) + rates.gamma * I_star - rates.beta * S * I_star / (S + I_star)
    mass = integrate(kernel.mesh, S) + I_star * kernel.mesh.length - N
    return float(max(np.abs(eq).max(), abs(mass)))


def _limit_di_inner(kernel: Kernel, d_S: float, rates: RateFields, I_star: float,
                    S0: np.ndarray, tol: float = 1e-13, cap: int = 100000) -> np.ndarray:
    """Fixed point of the closed-form quadratic update for the susceptible profile.

    The stationary susceptible equation with constant infecteds I_star is, per
    node, a(x) S^2 + G(x) S - H(x) = 0 with a = d_S m, G = (a + beta - gamma) I_star - w,
    H = gamma I_star^2 + w I_star, where w = d_S K S is the inflow term; the positive
    root is (-G + sqrt(G^2 + 4 a H)) / (2 a). Iterating the root against the
    inflow converges for I_star bounded away from 0 (the map loses contraction
    as I_star -> 0, where it degenerates to a row-stochastic power iteration).
    """
    a = d_S * kernel.row_integral
    beta, gamma = rates.beta, rates.gamma
    S = S0.copy()
    for _ in range(cap):
        w = d_S * (kernel.matrix @ S)
        G = (a + beta - gamma) * I_star - w
        H = gamma * I_star * I_star + w * I_star
        S_new = (-G + np.sqrt(G * G + 4.0 * a * H)) / (2.0 * a)
        delta = float(np.abs(S_new - S).max())
        S = S_new
        if delta <= tol * max(1.0, float(np.abs(S).max())):
            return S
    raise NoConvergenceError(f"inner susceptible iteration stalled at I_star={I_star:g}")


def limit_profile_di_infinity(kernel: Kernel, d_S: float, rates: RateFields,
                              N: float) -> tuple[np.ndarray, float]:
    """Large-d_I endemic limit: infecteds flatten to a constant I_star, the
    susceptible profile solves the limiting stationary equation.

    Outer bisection on I_star in (0, N/|domain|) against the mass constraint
    (total mass is empirically monotone in I_star); inner closed-form quadratic
    fixed point for the susceptible profile at each trial value.
    """
    if not d_S > 0:
        raise NonpositiveParameterError(f"d_S must be > 0, got {d_S}")
    if not N > 0:
        raise NonpositiveParameterError(f"N must be > 0, got {N}")
    if rates.beta.sum() <= rates.gamma.sum():
        raise AssumptionViolatedError("limit needs a high-risk domain: int(beta) > int(gamma)")
    mesh = kernel.mesh
    i_max = N / mesh.length

    def mass_residual(i_star: float, warm: np.ndarray) -> tuple[float, np.ndarray]:
        S = _limit_di_inner(kernel, d_S, rates, i_star, warm)
        return integrate(mesh, S) + i_star * mesh.length - N, S

    warm = np.full(mesh.n, 0.5 * i_max)
    lo = 0.02 * i_max
    r_lo, S_lo = mass_residual(lo, warm)
    for _ in range(6):
        if r_lo < 0:
            break
        lo *= 0.5
        r_lo, S_lo = mass_residual(lo, S_lo)
    hi = (1.0 - 1e-6) * i_max
    r_hi, _ = mass_residual(hi, warm)
    if not (r_lo < 0.0 < r_hi):
        raise AssumptionViolatedError(
            f"mass residual does not change sign on ({lo:g}, {hi:g}): {r_lo:.3e}, {r_hi:.3e}"
        )
    warm = S_lo
    mid, S_mid, r_mid = lo, S_lo, r_lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r_mid, S_mid = mass_residual(mid, warm)
        warm = S_mid
        if abs(r_mid) <= 1e-10 * N and (hi - lo) <= 1e-12:
            break
        if r_mid < 0:
            lo = mid
        else:
            hi = mid
    if abs(r_mid) > 1e-8 * N:
        raise NoConvergenceError(f"outer bisection left mass residual {r_mid:.3e}")
    return S_mid, float(mid)
