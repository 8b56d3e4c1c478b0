import pytest

from affine_energy.spherequad import build_sphere_grid


@pytest.fixture(scope="session")
def circle512():
    return build_sphere_grid(2, 512, "uniform-angle")


@pytest.fixture(scope="session")
def circle256():
    return build_sphere_grid(2, 256, "uniform-angle")


@pytest.fixture(scope="session")
def sphere3():
    return build_sphere_grid(3, 1024, "product-gauss")
