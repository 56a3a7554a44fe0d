"""Principal eigenvalue and reproduction number of the linearized infection operator.

For transmission/recovery fields beta, gamma > 0 and infected diffusivity d_I,
the linearization of the infected equation at the disease-free state is

    B u = d_I (K - diag(m)) u + diag(beta - gamma) u,     m = row_integral.

Three quantities are exposed:

* principal eigenvalue: smallest eigenvalue of -B (symmetric), so its sign is
  opposite to the spectral bound of B;
* weighted eigenvalue: smallest generalized eigenvalue of
  C phi = mu diag(beta) phi with C = -d_I (K - diag(m)) + diag(gamma),
  solved by the diagonal congruence diag(beta)^{-1/2} C diag(beta)^{-1/2}
  (never by forming an inverse pencil);
* reproduction number r0 = 1/mu, cross-computed by three independent routes
  that must agree: the weighted reciprocal, the Rayleigh maximum of the
  inverted pencil (congruence with C^{-1/2}), and the spectral radius of the
  symmetrized next-generation matrix diag(beta)^{1/2} C^{-1} diag(beta)^{1/2}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InvalidBracketError,
    LengthMismatchError,
    NonpositiveEigenvectorError,
    NonpositiveParameterError,
    SingularOperatorError,
)
from .mesh import Kernel
from .operators import assemble_dispersal, assemble_removal_generator, spectral_bound, OperatorMatrix

PRINCIPAL_EXISTS_SLACK = 1e-12
SIGN_CHANGE_TOL = 1e-8


@dataclass(frozen=True)
class RateFields:
    """Nodal transmission (beta) and recovery (gamma) rates, strictly positive."""

    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self) -> None:
        beta = np.asarray(self.beta, dtype=float)
        gamma = np.asarray(self.gamma, dtype=float)
        if beta.ndim != 1 or beta.shape != gamma.shape:
            raise LengthMismatchError(f"beta/gamma shapes differ: {beta.shape} vs {gamma.shape}")
        if not (np.all(beta > 0) and np.all(gamma > 0)):
            raise NonpositiveParameterError("beta and gamma must be strictly positive at every node")
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.beta.shape[0]


def _check_rates(kernel: Kernel, rates: RateFields) -> None:
    if rates.n != kernel.mesh.n:
        raise LengthMismatchError(f"rates have {rates.n} nodes, mesh has {kernel.mesh.n}")


def _weighted_matrix(kernel: Kernel, d_I: float, rates: RateFields) -> np.ndarray:
    """C = -d_I (K - diag(m)) + diag(gamma), symmetric positive definite."""
    disp = assemble_dispersal(kernel, d_I)
    return -disp.entries + np.diag(rates.gamma)


def principal_eigenvalue(kernel: Kernel, d_I: float, rates: RateFields) -> tuple[float, np.ndarray]:
    """Smallest eigenvalue of -(d_I (K - diag(m)) + diag(beta - gamma)).

    Returns (value, unit-norm eigenvector oriented to nonnegative mean).
    """
    _check_rates(kernel, rates)
    disp = assemble_dispersal(kernel, d_I)
    m = -(disp.entries + np.diag(rates.beta - rates.gamma))
    vals, vecs = np.linalg.eigh(m)
    vec = vecs[:, 0]
    if vec.sum() < 0:
        vec = -vec
    return float(vals[0]), vec


def principal_eigen_exists(kernel: Kernel, d_I: float, rates: RateFields,
                           value: float | None = None) -> bool:
    """Whether the principal value sits strictly below the multiplication-part minimum.

    The continuum operator only has a genuine principal eigenpair when
    lambda < min(d_I m(x) + gamma(x) - beta(x)); at equality the value is the
    essential-spectrum edge. Strict inequality with 1e-12 slack.
    """
    _check_rates(kernel, rates)
    if value is None:
        value, _ = principal_eigenvalue(kernel, d_I, rates)
    threshold = float(np.min(d_I * kernel.row_integral + rates.gamma - rates.beta))
    return value < threshold - PRINCIPAL_EXISTS_SLACK


def weighted_eigenvalue(kernel: Kernel, d_I: float, rates: RateFields) -> tuple[float, np.ndarray]:
    """Smallest mu with C phi = mu diag(beta) phi, via diagonal congruence.

    Returns (mu, phi) with phi normalized so max(phi) = 1. The eigenvector of
    the smallest eigenvalue is positive for an irreducible kernel matrix;
    a sign change beyond 1e-8 is reported as an error.
    """
    _check_rates(kernel, rates)
    c = _weighted_matrix(kernel, d_I, rates)
    inv_sqrt_b = 1.0 / np.sqrt(rates.beta)
    t = inv_sqrt_b[:, None] * c * inv_sqrt_b[None, :]
    vals, vecs = np.linalg.eigh(0.5 * (t + t.T))
    phi = inv_sqrt_b * vecs[:, 0]
    if phi[np.argmax(np.abs(phi))] < 0:
        phi = -phi
    phi = phi / phi.max()
    if phi.min() < -SIGN_CHANGE_TOL:
        raise NonpositiveEigenvectorError(
            f"principal eigenvector changes sign (min {phi.min():.3e} after max-normalization)"
        )
    return float(vals[0]), phi


def _r0_variational(c: np.ndarray, beta: np.ndarray) -> float:
    """Largest Rayleigh value of the inverted pencil: lam_max(C^{-1/2} diag(beta) C^{-1/2})."""
    vals, q = np.linalg.eigh(c)
    if vals[0] <= 0:
        raise SingularOperatorError("weighted matrix is not positive definite")
    c_inv_half = (q * (1.0 / np.sqrt(vals))) @ q.T
    t = c_inv_half @ (beta[:, None] * c_inv_half)
    return float(np.linalg.eigvalsh(0.5 * (t + t.T))[-1])


def _r0_nextgen(c: np.ndarray, beta: np.ndarray) -> float:
    """Spectral radius of the next-generation matrix via the similar symmetric form."""
    try:
        np.linalg.cholesky(c)
    except np.linalg.LinAlgError as exc:
        raise SingularOperatorError("removal generator is not negative definite") from exc
    sqrt_b = np.sqrt(beta)
    y = np.linalg.solve(c, np.diag(sqrt_b))
    w = sqrt_b[:, None] * y
    return float(np.linalg.eigvalsh(0.5 * (w + w.T))[-1])


REPORT_CSV_COLUMNS = (
    "d_I", "lambda_p", "principal_exists", "mu_p", "r0_weighted", "r0_variational",
    "r0_nextgen", "limit_d0", "limit_dinf", "r0_limit_d0", "r0_limit_dinf",
)


@dataclass(frozen=True)
class SpectralReport:
    """All spectral diagnostics for one (kernel, d_I, rates) triple.

    Field names match the external CSV column contract.
    """

    d_I: float
    lambda_p: float
    principal_exists: bool
    mu_p: float
    r0_weighted: float
    r0_variational: float
    r0_nextgen: float
    spectral_bound_M: float
    limit_d0: float
    limit_dinf: float
    r0_limit_d0: float
    r0_limit_dinf: float
    lambda_p_eigvec: np.ndarray = field(repr=False)

    def to_record(self) -> dict:
        """Flat JSON-style record (eigenvector omitted)."""
        return {
            "d_I": self.d_I,
            "lambda_p": self.lambda_p,
            "principal_exists": self.principal_exists,
            "mu_p": self.mu_p,
            "r0_weighted": self.r0_weighted,
            "r0_variational": self.r0_variational,
            "r0_nextgen": self.r0_nextgen,
            "spectral_bound_M": self.spectral_bound_M,
            "limit_d0": self.limit_d0,
            "limit_dinf": self.limit_dinf,
            "r0_limit_d0": self.r0_limit_d0,
            "r0_limit_dinf": self.r0_limit_dinf,
        }


def r0_all_routes(kernel: Kernel, d_I: float, rates: RateFields) -> SpectralReport:
    """Compute the principal eigenvalue, the weighted eigenvalue, and r0 by all
    three routes, plus the small- and large-diffusivity limit values."""
    _check_rates(kernel, rates)
    lam, vec = principal_eigenvalue(kernel, d_I, rates)
    exists = principal_eigen_exists(kernel, d_I, rates, lam)
    mu, _ = weighted_eigenvalue(kernel, d_I, rates)
    c = _weighted_matrix(kernel, d_I, rates)
    # independent eigensolve of the negated operator cross-checks lam
    bound = spectral_bound(OperatorMatrix(
        entries=assemble_removal_generator(kernel, d_I, rates.gamma).entries + np.diag(rates.beta),
        symmetric=True,
    ))
    theta = rates.gamma - rates.beta
    return SpectralReport(
        d_I=float(d_I),
        lambda_p=lam,
        principal_exists=exists,
        mu_p=mu,
        r0_weighted=1.0 / mu,
        r0_variational=_r0_variational(c, rates.beta),
        r0_nextgen=_r0_nextgen(c, rates.beta),
        spectral_bound_M=bound,
        limit_d0=float(theta.min()),
        limit_dinf=float(theta.mean()),
        r0_limit_d0=float(np.max(rates.beta / rates.gamma)),
        r0_limit_dinf=float(rates.beta.sum() / rates.gamma.sum()),
        lambda_p_eigvec=vec,
    )


@dataclass(frozen=True)
class CriticalDispersal:
    """Result of the threshold-diffusivity search: either a root or a reason there is none."""

    value: float | None
    reason: str | None

    @property
    def found(self) -> bool:
        return self.value is not None


def find_critical_dispersal(kernel: Kernel, rates: RateFields,
                            d_lo: float, d_hi: float,
                            tol: float = 1e-10, max_iter: int = 60) -> CriticalDispersal:
    """Bisect for the diffusivity where the principal eigenvalue crosses zero.

    The crossing exists exactly when beta exceeds gamma somewhere but the
    domain is low-risk overall (integral of beta below integral of gamma);
    the degenerate regimes are reported with a reason instead of a root.
    """
    _check_rates(kernel, rates)
    if not (d_lo > 0 and d_lo < d_hi):
        raise InvalidBracketError(f"need 0 < d_lo < d_hi, got ({d_lo}, {d_hi})")
    if rates.beta.sum() >= rates.gamma.sum():
        return CriticalDispersal(value=None, reason="high-risk domain: R0>1 for all d_I")
    if np.all(rates.beta < rates.gamma):
        return CriticalDispersal(value=None, reason="beta<gamma everywhere: R0<1 for all d_I")
    f_lo, _ = principal_eigenvalue(kernel, d_lo, rates)
    f_hi, _ = principal_eigenvalue(kernel, d_hi, rates)
    if not (f_lo < 0.0 < f_hi):
        return CriticalDispersal(
            value=None,
            reason=f"bracket does not straddle the crossing: lambda({d_lo:g})={f_lo:.3e}, "
                   f"lambda({d_hi:g})={f_hi:.3e}",
        )
    lo, hi = d_lo, d_hi
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid, _ = principal_eigenvalue(kernel, mid, rates)
        if abs(f_mid) <= tol or (hi - lo) <= tol * d_hi:
            break
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    return CriticalDispersal(value=float(mid), reason=None)


def principal_eigenvalue_scan(kernel: Kernel, rates: RateFields, d_values) -> np.ndarray:
    """Principal eigenvalue along a grid of diffusivities (monotone increasing in d)."""
    d_values = np.asarray(d_values, dtype=float)
    if d_values.size == 0:
        raise InvalidBracketError("empty diffusivity grid")
    if not np.all(d_values > 0):
        raise NonpositiveParameterError("diffusivities must be strictly positive")
    return np.array([principal_eigenvalue(kernel, float(d), rates)[0] for d in d_values])
