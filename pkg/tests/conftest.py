import pytest

from perpetuity_fpt.model import build_law


@pytest.fixture(scope="session")
def ln_law():
    """log A ~ Normal(-0.25, 1), B = 1: xi = 0.5, rho = 4."""
    return build_law("lognormal_A_const_B", mean_log_a=-0.25, var_log_a=1.0)


@pytest.fixture(scope="session")
def two_point():
    """A in {2, 1/2} with P{A=2} = 1/4, B = 1: xi = log2(3)."""
    return build_law("two_point_A_const_B", a_atoms=[2.0, 0.5], probs=[0.25, 0.75])


@pytest.fixture(scope="session")
def bounded_law():
    return build_law(
        "bounded_density_A_bounded_B", a_lo=0.2, a_hi=1.6, shape1=2.0, shape2=2.0, b_lo=0.5, b_hi=1.5
    )
