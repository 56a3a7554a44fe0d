import numpy as np
import pytest

from nonlocal_sis import KernelSpec, RateFields, build_kernel, build_mesh


@pytest.fixture(scope="session")
def kernel400():
    return build_kernel(build_mesh(-1.0, 1.0, 400), KernelSpec(family="triangle", delta=0.5))


@pytest.fixture(scope="session")
def kernel100():
    return build_kernel(build_mesh(-1.0, 1.0, 100), KernelSpec(family="triangle", delta=0.5))


@pytest.fixture(scope="session")
def cosine_rates_400(kernel400):
    x = kernel400.mesh.nodes
    return RateFields(1.0 + 0.8 * np.cos(np.pi * x), np.full(x.size, 1.0))
