"""Mesh construction and kernel quadrature invariants."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonlocal_sis import (
    InvalidDomainError,
    KernelQuadratureError,
    KernelSpec,
    KernelTooNarrowError,
    LengthMismatchError,
    NonpositiveParameterError,
    build_kernel,
    build_mesh,
    integrate,
)
from nonlocal_sis.mesh import require_field


def test_midpoint_nodes():
    mesh = build_mesh(-1.0, 1.0, 4)
    assert mesh.h == pytest.approx(0.5)
    assert mesh.length == pytest.approx(2.0)
    np.testing.assert_allclose(mesh.nodes, [-0.75, -0.25, 0.25, 0.75])


@pytest.mark.parametrize("a,b,n", [(1.0, -1.0, 10), (0.0, 0.0, 10), (-1.0, 1.0, 1),
                                   (float("nan"), 1.0, 10), (-np.inf, 1.0, 10)])
def test_invalid_domain_rejected(a, b, n):
    with pytest.raises(InvalidDomainError):
        build_mesh(a, b, n)


def test_integrate_constant_exact():
    mesh = build_mesh(-1.0, 1.0, 37)
    assert integrate(mesh, np.full(37, 3.0)) == pytest.approx(6.0, abs=1e-14)


def test_require_field_length():
    mesh = build_mesh(-1.0, 1.0, 10)
    with pytest.raises(LengthMismatchError):
        require_field(mesh, np.ones(9), "u")
    with pytest.raises(LengthMismatchError):
        require_field(mesh, np.ones((10, 1)), "u")


def test_kernel_spec_validation():
    with pytest.raises(NonpositiveParameterError):
        KernelSpec(family="triangle", delta=0.0)
    with pytest.raises(NonpositiveParameterError):
        KernelSpec(family="gaussian", sigma=0.2, cutoff=-1.0)
    with pytest.raises(NonpositiveParameterError):
        KernelSpec(family="pillbox", delta=0.5)


def test_triangle_kernel_matrix(kernel400):
    K = kernel400.matrix
    assert np.all(K >= 0)
    np.testing.assert_allclose(K, K.T, atol=0)
    sums = K.sum(axis=1) * 1.0
    assert sums.max() <= 1.0 + 1e-8
    # rows whose support lies fully inside the interval integrate the unit-mass
    # kernel exactly, up to quadrature roundoff
    interior = np.abs(kernel400.mesh.nodes) <= 0.4
    np.testing.assert_allclose(kernel400.row_integral[interior], 1.0, atol=1e-12)
    # boundary rows lose the mass that falls outside the interval
    assert kernel400.row_integral[0] < 0.6


def test_wide_triangle_row_integral():
    # half-width larger than the interval: center row keeps (2 - 0.2)/5 of mass
    kernel = build_kernel(build_mesh(-1.0, 1.0, 400), KernelSpec(family="triangle", delta=5.0))
    assert kernel.row_integral.max() == pytest.approx(0.36, abs=1e-12)
    assert kernel.row_integral.min() == pytest.approx(0.3202, abs=1e-4)


def test_narrow_kernel_rejected():
    mesh = build_mesh(-1.0, 1.0, 50)  # h = 0.04
    with pytest.raises(KernelTooNarrowError):
        build_kernel(mesh, KernelSpec(family="triangle", delta=0.05))


def test_gaussian_kernel_quadrature_guard():
    mesh = build_mesh(-1.0, 1.0, 400)
    # a 3-sigma cutoff clips ~7e-5 of mass, which midpoint quadrature then
    # overshoots past 1; the constructor must refuse rather than renormalize
    with pytest.raises(KernelQuadratureError):
        build_kernel(mesh, KernelSpec(family="gaussian", sigma=0.2, cutoff=0.6))
    kernel = build_kernel(mesh, KernelSpec(family="gaussian", sigma=0.2, cutoff=1.2))
    assert kernel.row_integral.max() <= 1.0 + 1e-8


def test_kernel_arrays_read_only(kernel400):
    with pytest.raises(ValueError):
        kernel400.matrix[0, 0] = 1.0
    with pytest.raises(ValueError):
        kernel400.row_integral[0] = 1.0


@settings(deadline=None, max_examples=25)
@given(n=st.integers(40, 200), delta=st.floats(0.2, 3.0))
def test_kernel_rows_bounded_or_refused(n, delta):
    """Arbitrary half-widths either quadrature cleanly or are refused; a kink
    landing inside a cell may overshoot unit mass and must not be papered over."""
    mesh = build_mesh(-1.0, 1.0, n)
    try:
        kernel = build_kernel(mesh, KernelSpec(family="triangle", delta=delta))
    except KernelQuadratureError:
        return
    assert kernel.row_integral.max() <= 1.0 + 1e-8
    assert kernel.row_integral.min() > 0.0
    np.testing.assert_allclose(kernel.matrix, kernel.matrix.T, atol=0)


@settings(deadline=None, max_examples=25)
@given(n=st.integers(40, 200), k=st.integers(3, 30))
def test_grid_aligned_triangle_never_refused(n, k):
    # a half-width that is an exact multiple of h puts the kink on cell edges,
    # where the midpoint rule integrates the piecewise-linear kernel exactly
    mesh = build_mesh(-1.0, 1.0, n)
    kernel = build_kernel(mesh, KernelSpec(family="triangle", delta=k * mesh.h))
    assert kernel.row_integral.max() <= 1.0 + 1e-12
