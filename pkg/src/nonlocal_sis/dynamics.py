"""Time integration of the dispersal model and long-time diagnostics.

The coupled system

    S_t = d_S (K S - m S) - beta S I/(S+I) + gamma I
    I_t = d_I (K I - m I) + beta S I/(S+I) - gamma I

is advanced with classic fourth-order Runge-Kutta. Total mass is a linear
invariant of the right-hand side (the dispersal terms integrate to zero by
symmetry of the kernel matrix, the reaction terms cancel), so any Runge-Kutta
scheme conserves it to rounding; the integrator still monitors drift and fails
loudly if it ever exceeds 1e-8 of the initial mass.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import (
    DivisionGuardError,
    LengthMismatchError,
    MassDriftError,
    NegativeStateError,
    OutOfRangeError,
    StepCollapseError,
)
from .equilibria import (
    KIND_DISEASE_FREE,
    KIND_ENDEMIC,
    EquilibriumResult,
    ModelParams,
    disease_free,
    endemic_equilibrium,
    infection_term,
)
from .mesh import Kernel, integrate, require_field
from .spectral import weighted_eigenvalue

MASS_DRIFT_TOL = 1e-8
MAX_STEP_HALVINGS = 20
DEFAULT_SAMPLE_COUNT = 500
KIND_UNDECIDED = "undecided"


def rhs_fields(params: ModelParams, S: np.ndarray, I: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand side of the coupled system at state (S, I)."""
    K, m = params.kernel.matrix, params.kernel.row_integral
    beta, gamma = params.rates.beta, params.rates.gamma
    inf = infection_term(beta, S, I)
    recov = gamma * I
    dS = params.d_S * (K @ S - m * S) - inf + recov
    dI = params.d_I * (K @ I - m * I) + inf - recov
    return dS, dI


def stable_timestep(params: ModelParams) -> float:
    """Step bound 0.5 / (max diffusivity * max row integral + max rate).

    Half the reciprocal of a sup-norm Lipschitz bound on the right-hand side;
    comfortably inside the RK4 stability region for this dissipative system.
    """
    diff = max(params.d_S, params.d_I) * float(params.kernel.row_integral.max())
    react = float(max(params.rates.beta.max(), params.rates.gamma.max()))
    return 0.5 / (diff + react)


def lyapunov_value(S: np.ndarray, I: np.ndarray,
                   S_tilde: np.ndarray, I_tilde: np.ndarray, h: float) -> float:
    """Weighted squared distance 0.5 int[(S-S~)^2/S~ + (I-I~)^2/I~].

    Nonincreasing along trajectories when both diffusivities coincide and the
    reference state is the endemic equilibrium.
    """
    if float(np.min(S_tilde)) <= 1e-14 or float(np.min(I_tilde)) <= 1e-14:
        raise DivisionGuardError("reference state must be strictly positive")
    val = 0.5 * h * float(np.sum((S - S_tilde) ** 2 / S_tilde + (I - I_tilde) ** 2 / I_tilde))
    return val


def dispersal_spectral_gap(kernel: Kernel, d: float) -> float:
    """Second-smallest eigenvalue of -d(K - m): the decay rate of nonconstant
    modes under pure dispersal (the smallest eigenvalue is 0, on constants)."""
    if not d > 0:
        raise OutOfRangeError(f"diffusivity must be > 0, got {d}")
    op = -d * (kernel.matrix - np.diag(kernel.row_integral))
    vals = np.linalg.eigvalsh(op)
    return float(vals[1])


@dataclass(frozen=True)
class SimulationResult:
    times: np.ndarray
    mass: np.ndarray
    dist_dfe: np.ndarray
    min_S: np.ndarray
    min_I: np.ndarray
    final_S: np.ndarray
    final_I: np.ndarray
    dt: float
    steps: int
    dist_endemic: np.ndarray | None = None
    lyapunov: np.ndarray | None = None
    fields: list[tuple[np.ndarray, np.ndarray]] | None = None


def _rk4_step(params: ModelParams, S, I, dt):
    k1s, k1i = rhs_fields(params, S, I)
    k2s, k2i = rhs_fields(params, S + 0.5 * dt * k1s, I + 0.5 * dt * k1i)
    k3s, k3i = rhs_fields(params, S + 0.5 * dt * k2s, I + 0.5 * dt * k2i)
    k4s, k4i = rhs_fields(params, S + dt * k3s, I + dt * k3i)
    S_new = S + (dt / 6.0) * (k1s + 2.0 * k2s + 2.0 * k3s + k4s)
    I_new = I + (dt / 6.0) * (k1i + 2.0 * k2i + 2.0 * k3i + k4i)
    return S_new, I_new


def _advance(params: ModelParams, S, I, dt, depth: int = 0):
    """One step of size dt, recursively split in half if positivity fails."""
    S_new, I_new = _rk4_step(params, S, I, dt)
    if float(S_new.min()) >= 0.0 and float(I_new.min()) >= 0.0:
        return S_new, I_new
    if depth >= MAX_STEP_HALVINGS:
        raise StepCollapseError(
            f"positivity not restored after {MAX_STEP_HALVINGS} step halvings (dt={dt:g})"
        )
    S_half, I_half = _advance(params, S, I, 0.5 * dt, depth + 1)
    return _advance(params, S_half, I_half, 0.5 * dt, depth + 1)


def integrate_to(params: ModelParams, S0: np.ndarray, I0: np.ndarray, t_end: float,
                 dt: float | None = None, endemic: EquilibriumResult | None = None,
                 sample_stride: int | None = None,
                 store_fields: bool = False) -> SimulationResult:
    """Advance (S0, I0) to time t_end, sampling diagnostics along the way.

    Mass drift is checked against the initial mass (which need not equal
    params.N). When `endemic` is supplied each sample also records the sup
    distance to it and the weighted Lyapunov value.
    """
    S = require_field(params.mesh, S0, "S0").astype(float).copy()
    I = require_field(params.mesh, I0, "I0").astype(float).copy()
    if float(S.min()) < 0.0 or float(I.min()) < 0.0:
        raise NegativeStateError("initial densities must be nonnegative")
    if not t_end > 0:
        raise OutOfRangeError(f"t_end must be > 0, got {t_end}")
    if dt is None:
        dt = stable_timestep(params)
    if not 0 < dt:
        raise OutOfRangeError(f"dt must be > 0, got {dt}")
    steps = max(1, ceil(t_end / dt))
    dt = t_end / steps
    if sample_stride is None:
        sample_stride = max(1, steps // DEFAULT_SAMPLE_COUNT)
    if sample_stride < 1:
        raise OutOfRangeError(f"sample_stride must be >= 1, got {sample_stride}")

    h = params.mesh.h
    mass0 = integrate(params.mesh, S + I)
    dfe_S = np.full(params.mesh.n, params.N / params.mesh.length)
    ref = endemic
    if ref is not None and ref.S_tilde.shape != S.shape:
        raise LengthMismatchError("endemic reference does not match the mesh")

    times, mass, dist_dfe, min_S, min_I = [], [], [], [], []
    dist_end, lyap = [], []
    snapshots: list[tuple[np.ndarray, np.ndarray]] = []

    def record(t: float) -> None:
        times.append(t)
        m_now = integrate(params.mesh, S + I)
        if abs(m_now - mass0) > MASS_DRIFT_TOL * max(1.0, abs(mass0)):
            raise MassDriftError(f"mass drifted by {m_now - mass0:.3e} at t={t:g}")
        mass.append(m_now)
        dist_dfe.append(float(max(np.abs(S - dfe_S).max(), np.abs(I).max())))
        min_S.append(float(S.min()))
        min_I.append(float(I.min()))
        if ref is not None:
            dist_end.append(float(max(np.abs(S - ref.S_tilde).max(),
                                      np.abs(I - ref.I_tilde).max())))
            lyap.append(lyapunov_value(S, I, ref.S_tilde, ref.I_tilde, h))
        if store_fields:
            snapshots.append((S.copy(), I.copy()))

    record(0.0)
    for step in range(1, steps + 1):
        S, I = _advance(params, S, I, dt)
        if step % sample_stride == 0 or step == steps:
            record(step * dt)

    return SimulationResult(
        times=np.asarray(times), mass=np.asarray(mass), dist_dfe=np.asarray(dist_dfe),
        min_S=np.asarray(min_S), min_I=np.asarray(min_I),
        final_S=S, final_I=I, dt=dt, steps=steps,
        dist_endemic=np.asarray(dist_end) if ref is not None else None,
        lyapunov=np.asarray(lyap) if ref is not None else None,
        fields=snapshots if store_fields else None,
    )


def fit_decay_rate(times: np.ndarray, dists: np.ndarray) -> float:
    """Least-squares exponential decay rate of dists over times (positive =
    decay). Samples with nonpositive distance are dropped; needs at least two."""
    t = np.asarray(times, dtype=float)
    d = np.asarray(dists, dtype=float)
    if t.shape != d.shape or t.ndim != 1:
        raise LengthMismatchError("times and dists must be 1-D arrays of equal length")
    keep = d > 0
    if int(keep.sum()) < 2:
        raise OutOfRangeError("need at least two positive samples to fit a rate")
    slope = np.polyfit(t[keep], np.log(d[keep]), 1)[0]
    return float(-slope)


def classify_longtime(params: ModelParams, final_S: np.ndarray, final_I: np.ndarray,
                      tol: float = 1e-3) -> str:
    """Label the terminal state by sup distance to the known equilibria."""
    dfe = disease_free(params)
    d_dfe = float(max(np.abs(final_S - dfe.S_tilde).max(), np.abs(final_I).max()))
    if d_dfe <= tol:
        return KIND_DISEASE_FREE
    mu, _ = weighted_eigenvalue(params.kernel, params.d_I, params.rates)
    if 1.0 / mu > 1.0 + 1e-9:
        end = endemic_equilibrium(params)
        d_end = float(max(np.abs(final_S - end.S_tilde).max(),
                          np.abs(final_I - end.I_tilde).max()))
        if d_end <= tol:
            return KIND_ENDEMIC
    return KIND_UNDECIDED
