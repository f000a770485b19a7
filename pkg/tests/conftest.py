import pytest

from app.synthesis_service import synthesize
from utils.config import Settings
from utils.curve_funcs import CurveModel, random_odd_curve
from utils.field_funcs import FieldSpec, make_rng

P1009 = FieldSpec.prime(1009)
P61 = FieldSpec.prime(2 ** 61 - 1)
GF2 = FieldSpec.binary(1)
GF4 = FieldSpec.binary(2)
GF8 = FieldSpec.binary(3)
GF16 = FieldSpec.binary(4, 0x13)
GF2_16 = FieldSpec.binary(16)
QQ = FieldSpec.rational()
FAST = Settings(seed=7, delta_samples=60, bqf_samples=130, w_samples=24, fresh_samples=15)


@pytest.fixture
def rng():
    return make_rng(12345)


@pytest.fixture
def fast_settings():
    return FAST


@pytest.fixture
def rational_curve():
    # y^2 = x^5 - 5x^3 + 4x + 1 = x(x^2-1)(x^2-4) + 1; the points with x in {0, +-1, +-2} have y = +-1
    return CurveModel.from_ints(QQ, (1, 4, 0, -5, 0, 1))


@pytest.fixture
def odd_curve():
    return random_odd_curve(P1009, make_rng(1))


@pytest.fixture
def char2_case_a():
    # y^2 + y = x^5 + x^3 + x over GF(2^16)
    return CurveModel.from_ints(GF2_16, (0, 1, 0, 1, 0, 1), (1,))


@pytest.fixture(scope="session")
def odd_formulas():
    return synthesize(random_odd_curve(P1009, make_rng(1)), 7, FAST)


@pytest.fixture(scope="session")
def char2_formulas():
    return synthesize(CurveModel.from_ints(GF2_16, (0, 1, 0, 1, 0, 1), (1,)), 7, FAST)
