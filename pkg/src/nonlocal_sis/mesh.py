"""Uniform midpoint mesh on a bounded interval and dispersal-kernel assembly.

The convolution kernel J is discretized by sampling at node differences and
weighting by the cell width (midpoint quadrature):

    K[i][j] = J(x_i - x_j) * h,    row_integral[i] = sum_j K[i][j]

so row_integral[i] approximates the kernel mass the node sees inside the
domain. Boundary rows see strictly less than unit mass; no renormalization is
applied, which is what produces the zero-flux-like behaviour of the discrete
dispersal operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    InvalidDomainError,
    KernelQuadratureError,
    KernelTooNarrowError,
    LengthMismatchError,
    NonpositiveParameterError,
)

ROW_SUM_SLACK = 1e-8


@dataclass(frozen=True)
class Mesh1D:
    """n midpoint nodes on (a, b): x_i = a + (i + 1/2) h with h = (b - a)/n."""

    a: float
    b: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or self.b <= self.a:
            raise InvalidDomainError(f"need finite a < b, got ({self.a}, {self.b})")
        if self.n < 2:
            raise InvalidDomainError(f"need at least 2 nodes, got n={self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.n

    @property
    def length(self) -> float:
        return self.b - self.a

    @cached_property
    def nodes(self) -> np.ndarray:
        return self.a + (np.arange(self.n) + 0.5) * self.h


def build_mesh(a: float, b: float, n: int) -> Mesh1D:
    return Mesh1D(a, b, n)


@dataclass(frozen=True)
class KernelSpec:
    """Descriptor of an even, nonnegative, unit-mass jump kernel.

    family "triangle": J(z) = max(0, 1 - |z|/delta) / delta, support [-delta, delta].
    family "gaussian": J(z) = exp(-z^2 / (2 sigma^2)) / Z on [-cutoff, cutoff], 0 outside,
    with the analytic normalizer Z = sigma sqrt(2 pi) erf(cutoff / (sigma sqrt(2))) so the
    truncated kernel has exact unit mass on the line.
    """

    family: str
    delta: float | None = None
    sigma: float | None = None
    cutoff: float | None = None

    def __post_init__(self) -> None:
        if self.family == "triangle":
            if self.delta is None or not self.delta > 0:
                raise NonpositiveParameterError(f"triangle kernel needs delta > 0, got {self.delta}")
        elif self.family == "gaussian":
            if self.sigma is None or not self.sigma > 0:
                raise NonpositiveParameterError(f"gaussian kernel needs sigma > 0, got {self.sigma}")
            if self.cutoff is None or not self.cutoff > 0:
                raise NonpositiveParameterError(f"gaussian kernel needs cutoff > 0, got {self.cutoff}")
        else:
            raise NonpositiveParameterError(f"unknown kernel family {self.family!r}")

    @property
    def support_radius(self) -> float:
        return self.delta if self.family == "triangle" else self.cutoff

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.family == "triangle":
            return np.maximum(0.0, 1.0 - np.abs(z) / self.delta) / self.delta
        norm = self.sigma * math.sqrt(2.0 * math.pi) * math.erf(self.cutoff / (self.sigma * math.sqrt(2.0)))
        vals = np.exp(-z * z / (2.0 * self.sigma**2)) / norm
        return np.where(np.abs(z) <= self.cutoff, vals, 0.0)


@dataclass(frozen=True)
class Kernel:
    """Assembled kernel: quadrature matrix plus per-row domain mass."""

    spec: KernelSpec
    mesh: Mesh1D
    matrix: np.ndarray
    row_integral: np.ndarray


def build_kernel(mesh: Mesh1D, spec: KernelSpec) -> Kernel:
    """Assemble K[i][j] = J(x_i - x_j) h and validate the kernel contract.

    Raises KernelTooNarrowError when the support spans under two node spacings
    (a row would couple to fewer than two neighbours) and KernelQuadratureError
    when midpoint quadrature pushes a row sum above 1 + 1e-8, which happens for
    supports incommensurate with the grid or gaussian cutoffs shorter than
    about 5.5 sigma; widen the cutoff or refine the mesh in that case.
    """
    if spec.support_radius < 2.0 * mesh.h:
        raise KernelTooNarrowError(
            f"support radius {spec.support_radius} < 2h = {2.0 * mesh.h}; "
            "the discrete operator would be degenerate"
        )
    x = mesh.nodes
    matrix = spec.evaluate(x[:, None] - x[None, :]) * mesh.h
    matrix = 0.5 * (matrix + matrix.T)
    offdiag_counts = np.count_nonzero(matrix, axis=1) - 1
    if offdiag_counts.min() < 2:
        raise KernelTooNarrowError("a kernel row has fewer than two nonzero off-diagonal entries")
    row_integral = matrix.sum(axis=1)
    if row_integral.max() > 1.0 + ROW_SUM_SLACK:
        raise KernelQuadratureError(
            f"max row sum {row_integral.max():.12g} exceeds 1 + {ROW_SUM_SLACK:g}; "
            "kernel support is incommensurate with the grid or the cutoff is too short"
        )
    # every admissible kernel loses mass at the boundary rows
    assert row_integral.min() < 1.0 and row_integral.min() > 0.0
    matrix.setflags(write=False)
    row_integral.setflags(write=False)
    return Kernel(spec=spec, mesh=mesh, matrix=matrix, row_integral=row_integral)


def require_field(mesh: Mesh1D, values: object, name: str = "field") -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.shape != (mesh.n,):
        raise LengthMismatchError(f"{name} has shape {arr.shape}, expected ({mesh.n},)")
    return arr


def integrate(mesh: Mesh1D, values: object) -> float:
    """Midpoint-rule integral of a nodal field over (a, b)."""
    return mesh.h * float(np.sum(require_field(mesh, values)))
