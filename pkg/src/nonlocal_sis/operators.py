"""Dense matrix forms of the discrete dispersal and removal operators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AsymmetricOperatorError, NonpositiveParameterError
from .mesh import Kernel, require_field


@dataclass(frozen=True)
class OperatorMatrix:
    entries: np.ndarray
    symmetric: bool

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.entries @ np.asarray(u, dtype=float)


def assemble_dispersal(kernel: Kernel, d: float) -> OperatorMatrix:
    """d (K - diag(row_integral)): redistribution minus outflow at rate d.

    Columns sum to zero (mass conservation) and constants lie in the null
    space, both exact up to roundoff by construction.
    """
    if not d > 0:
        raise NonpositiveParameterError(f"diffusivity must be > 0, got {d}")
    entries = d * (kernel.matrix - np.diag(kernel.row_integral))
    return OperatorMatrix(entries=entries, symmetric=True)


def assemble_removal_generator(kernel: Kernel, d_I: float, gamma: np.ndarray) -> OperatorMatrix:
    """Generator of the infected compartment with transmission switched off:
    d_I (K - diag(row_integral)) - diag(gamma). Its spectral bound is < 0, which
    is what makes the next-generation construction well posed.
    """
    gamma = require_field(kernel.mesh, gamma, "gamma")
    if not np.all(gamma > 0):
        raise NonpositiveParameterError("gamma must be strictly positive at every node")
    disp = assemble_dispersal(kernel, d_I)
    return OperatorMatrix(entries=disp.entries - np.diag(gamma), symmetric=True)


def spectral_bound(op: OperatorMatrix) -> float:
    """Largest eigenvalue of a symmetric operator."""
    if not op.symmetric:
        raise AsymmetricOperatorError("spectral_bound requires a symmetric operator")
    return float(np.linalg.eigvalsh(op.entries)[-1])
