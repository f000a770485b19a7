from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tests.conftest import GF16, GF2_16, P1009, P61, QQ
from tests.strategies import field_values
from utils.errors import DivisionByZero, FieldMismatch, FormatError, UnsupportedField
from utils.field_funcs import (
    FieldElement,
    FieldSpec,
    arith,
    default_binary_modulus,
    gf2_is_irreducible,
    gf2_mulmod,
    is_prime,
    make_rng,
    quad_solve,
    random_element,
)


def test_is_prime():
    primes = [3, 5, 1009, 648391, 718064159, 2 ** 61 - 1, 18446744073709551557]
    composites = [1, 4, 561, 1105, 130392, 33333333333, 999999999999, (2 ** 31 - 1) * (2 ** 29 - 3)]
    assert all(map(is_prime, primes))
    assert not any(map(is_prime, composites))


def test_parse_and_print():
    assert str(FieldSpec.parse("prime:p=1009")) == "prime:p=1009"
    assert str(FieldSpec.parse("binary:m=4,mod=0x13")) == "binary:m=4,mod=0x13"
    assert FieldSpec.parse("rational") == QQ
    assert FieldSpec.parse(str(GF2_16)) == GF2_16
    assert FieldSpec.parse("binary:m=2").modulus == 0x7


@pytest.mark.parametrize("text", ["prime:1009", "galois", "binary:m=four", "prime:q=7"])
def test_parse_rejects_bad_text(text):
    with pytest.raises(FormatError):
        FieldSpec.parse(text)


def test_unsupported_fields():
    with pytest.raises(UnsupportedField):
        FieldSpec.prime(1000)
    with pytest.raises(UnsupportedField):
        FieldSpec.prime(2)
    with pytest.raises(UnsupportedField):
        FieldSpec.binary(4, 0x11)  # x^4 + 1 = (x + 1)^4
    with pytest.raises(UnsupportedField):
        FieldSpec.binary(64, (1 << 64) | 0x1B)


def test_default_modulus_is_irreducible():
    for m in (1, 2, 3, 5, 8, 13, 16, 20):
        modulus = default_binary_modulus(m)
        assert modulus.bit_length() == m + 1
        assert gf2_is_irreducible(modulus)
    assert default_binary_modulus(3) == 0xB


def test_log_tables_match_polynomial_product():
    for a in range(16):
        for b in range(16):
            assert GF16.mul(a, b) == gf2_mulmod(a, b, 0x13)


def test_untabled_binary_field():
    big = FieldSpec.binary(20)
    rng = make_rng(3)
    for _ in range(50):
        a, b = big.random_nonzero(rng), big.random_nonzero(rng)
        assert big.mul(a, b) == gf2_mulmod(a, b, big.modulus)
        assert big.mul(a, big.inv(a)) == 1


@pytest.mark.parametrize("spec", [GF16, GF2_16, P1009, P61])
def test_inverse_and_fermat(spec):
    rng = make_rng(5)
    for _ in range(30):
        a = spec.random_nonzero(rng)
        assert spec.mul(a, spec.inv(a)) == spec.one
        assert spec.pow(a, spec.order - 1) == spec.one
        assert spec.div(a, a) == spec.one


def test_inverse_of_zero():
    for spec in (GF16, P1009, QQ):
        with pytest.raises(DivisionByZero):
            spec.inv(spec.zero)
    with pytest.raises(ZeroDivisionError):
        P1009.inv(0)


def test_tonelli_shanks_counts_squares():
    roots = [P1009.sqrt(a) for a in range(1, 1009)]
    assert sum(r is not None for r in roots) == 504
    assert all(r is None or r * r % 1009 == a for a, r in zip(range(1, 1009), roots))


def test_rational_sqrt():
    assert QQ.sqrt(Fraction(9, 4)) == Fraction(3, 2)
    assert QQ.sqrt(Fraction(2)) is None
    assert QQ.sqrt(Fraction(-1)) is None


@pytest.mark.parametrize("spec", [GF16, FieldSpec.prime(13)])
def test_quad_roots_match_brute_force(spec):
    for b in spec.elements():
        for c in spec.elements():
            expected = sorted(y for y in spec.elements() if spec.add(spec.sqr(y), spec.mul(b, y)) == c)
            assert spec.quad_roots(b, c) == expected


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_quad_roots_solve_the_equation(data):
    for spec in (GF2_16, P61):
        b = data.draw(field_values(spec))
        c = data.draw(field_values(spec))
        for y in spec.quad_roots(b, c):
            assert spec.add(spec.sqr(y), spec.mul(b, y)) == c


def test_quad_roots_over_rationals():
    # y^2 - y = 2 has roots -1 and 2; y^2 = 2 has none
    assert QQ.quad_roots(Fraction(-1), Fraction(2)) == [Fraction(-1), Fraction(2)]
    assert QQ.quad_roots(Fraction(0), Fraction(2)) == []


@pytest.mark.parametrize("m", [4, 5])
def test_artin_schreier(m):
    spec = FieldSpec.binary(m)
    solvable = 0
    for gamma in spec.elements():
        z = spec.artin_schreier(gamma)
        assert (z is None) == (spec.trace(gamma) == 1)
        if z is not None:
            solvable += 1
            assert spec.add(spec.sqr(z), z) == gamma
    assert solvable == spec.order // 2


def test_field_elements():
    a, b = FieldElement.of(P1009, 1000), FieldElement.of(P1009, 20)
    assert (a + b).value == 11
    assert (a - b).value == 980
    assert (a * b).value == 20000 % 1009
    assert ((a / b) * b) == a
    assert (-a).value == 9
    assert (a ** 2).value == 81
    assert (5 - a).value == 14
    assert 5 - a == -(a - 5)
    assert ((1 / b) * b).value == 1
    assert (2 - FieldElement.of(QQ, Fraction(1, 3))).value == Fraction(5, 3)
    assert arith(a, b, "add") == a + b
    with pytest.raises(FieldMismatch):
        a + FieldElement.of(GF16, 3)
    with pytest.raises(FieldMismatch):
        arith(a, FieldElement.of(GF16, 3), "mul")


def test_quad_solve_returns_a_set():
    b, c = FieldElement.of(GF16, 1), FieldElement.of(GF16, 0)
    assert quad_solve(b, c) == {FieldElement(GF16, 0), FieldElement(GF16, 1)}


def test_values_round_trip_through_text():
    assert GF16.format_value(0xB) == "0xb"
    assert GF16.parse_value("0xb") == 0xB
    assert P1009.parse_value("-1") == 1008
    assert QQ.parse_value("3/4") == Fraction(3, 4)
    with pytest.raises(FormatError):
        P1009.parse_value("x")


def test_random_is_reproducible():
    assert random_element(P61, make_rng(9)) == random_element(P61, make_rng(9))
    rng_a, rng_b = make_rng(11), make_rng(11)
    assert [GF2_16.random(rng_a) for _ in range(20)] == [GF2_16.random(rng_b) for _ in range(20)]
    with pytest.raises(UnsupportedField):
        QQ.random(make_rng(1))
