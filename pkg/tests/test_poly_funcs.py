import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from app.ladder_service import CountingSpec
from tests.conftest import GF16, GF2_16, P1009, P61
from tests.strategies import field_values, polys
from utils.errors import DivisionByZero, FieldMismatch, LengthMismatch, UnsupportedField
from utils.field_funcs import FieldElement, FieldSpec
from utils.poly_funcs import (
    BIQUADRATIC44,
    QUARTIC4,
    QUARTIC_EXPONENTS,
    KernelSolver,
    Matrix,
    MonomialBasis,
    Poly,
    biquadratic_monomials,
    eval_form,
    form_value,
    multiplicity,
    poly_gcd,
    poly_ops,
    poly_xgcd,
    quadratic_factors,
    quartic_monomials,
    root_values,
    roots,
    solve_kernel,
)


def linear(spec, r):
    return Poly(spec, (spec.neg(r), spec.one))


def test_trailing_zeros_are_stripped():
    p = Poly(P1009, (1, 2, 0, 0))
    assert p.degree == 1
    assert p.coeffs == (1, 2)
    assert Poly(P1009).degree == -1
    assert Poly(P1009, (0, 0)).is_zero()


def test_mixed_fields_are_rejected():
    with pytest.raises(FieldMismatch):
        Poly(P1009, (1,)) + Poly(P61, (1,))


@settings(max_examples=50, deadline=None)
@given(polys(P1009, 8), polys(P1009, 4, nonzero=True))
def test_division_with_remainder(a, b):
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.degree < b.degree


@settings(max_examples=50, deadline=None)
@given(polys(P1009, 6, nonzero=True), polys(P1009, 6, nonzero=True))
def test_extended_gcd(a, b):
    g, s, t = poly_xgcd(a, b)
    assert s * a + t * b == g
    assert g.lead == 1
    assert (a % g).is_zero() and (b % g).is_zero()
    assert poly_gcd(a, b) == g


def test_division_by_zero_polynomial():
    with pytest.raises(DivisionByZero):
        divmod(Poly(P1009, (1, 1)), Poly(P1009))
    with pytest.raises(DivisionByZero):
        poly_ops(Poly(P1009, (1, 1)), Poly(P1009), "gcd")


def test_evaluation_and_derivative():
    p = Poly.from_ints(P1009, (5, 0, 3, 1))  # x^3 + 3x^2 + 5
    assert p(2) == 8 + 12 + 5
    assert p.deriv() == Poly.from_ints(P1009, (0, 6, 3))
    assert Poly.from_ints(GF2_16, (1, 1, 1)).deriv() == Poly.from_ints(GF2_16, (1,))


def test_homogeneous():
    # x^2 + 1 at (x + 1)/(x - 1): (x + 1)^2 + (x - 1)^2 = 2x^2 + 2
    p = Poly.from_ints(P1009, (1, 0, 1))
    num, den = Poly.from_ints(P1009, (1, 1)), Poly.from_ints(P1009, (-1, 1))
    assert p.homogeneous(2, num, den) == Poly.from_ints(P1009, (2, 0, 2))


@pytest.mark.parametrize("spec", [P1009, P61, GF2_16, FieldSpec.binary(17), FieldSpec.binary(5)])
def test_roots_of_a_split_polynomial(spec):
    r1, r2, r3 = 3, 5, 7
    p = linear(spec, r1) * linear(spec, r2) * linear(spec, r2) * linear(spec, r3)
    assert root_values(p) == sorted({r1, r2, r3})
    assert multiplicity(p, r2) == 2
    assert multiplicity(p, r1) == 1
    assert [(str(e), m) for e, m in roots(p)] == [(spec.format_value(r), multiplicity(p, r)) for r in sorted({r1, r2, r3})]


def test_roots_skip_irreducible_factors():
    # x^2 + x + 1 splits exactly over the binary fields containing GF(4)
    trinomial = lambda spec: Poly.from_ints(spec, (1, 1, 1))  # noqa: E731
    assert root_values(trinomial(FieldSpec.binary(17))) == []
    assert root_values(trinomial(FieldSpec.binary(5))) == []
    for r in root_values(trinomial(GF2_16)):
        assert GF2_16.add(GF2_16.add(GF2_16.sqr(r), r), 1) == 0
    assert len(root_values(trinomial(GF2_16))) == 2


def test_roots_need_a_finite_field():
    with pytest.raises(UnsupportedField):
        root_values(Poly.from_ints(FieldSpec.rational(), (1, 1)))


def irreducible_quadratics(spec):
    monic = (Poly(spec, (t, s, spec.one)) for s in spec.elements() for t in spec.elements())
    return [a for a in monic if not root_values(a)]


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_quadratic_factors_match_exhaustive_search(data):
    for spec in (GF16, FieldSpec.prime(13)):
        p = data.draw(polys(spec, nonzero=True))
        expected = [a for a in irreducible_quadratics(spec) if (p % a).is_zero()]
        assert sorted(map(str, quadratic_factors(p))) == sorted(map(str, expected))


def test_quadratic_factors_with_equal_traces():
    same_x = [a for a in irreducible_quadratics(GF16) if a.coeff(1) == 1]
    a1, a2 = same_x[:2]
    x = Poly.x(GF16)
    assert quadratic_factors(a1 * a2 * x) == sorted([a1, a2], key=lambda a: a.coeff(0))
    assert quadratic_factors(Poly.from_ints(P1009, (0, -11, 0, 1))) == [Poly.from_ints(P1009, (-11, 0, 1))]
    assert quadratic_factors(Poly.from_ints(P1009, (-1, 0, 1))) == []
    with pytest.raises(UnsupportedField):
        quadratic_factors(Poly.from_ints(FieldSpec.rational(), (1, 0, 1)))


@settings(max_examples=30, deadline=None)
@given(st.lists(field_values(P1009), min_size=16, max_size=16))
def test_matrix_inverse(entries):
    m = Matrix(P1009, tuple(tuple(entries[4 * r:4 * r + 4]) for r in range(4)))
    try:
        inv = m.inverse()
    except DivisionByZero:
        assume(False)
    assert m @ inv == Matrix.identity(P1009, 4)
    assert (inv @ m).scalar_identity_factor() == 1


def test_matrix_shapes():
    with pytest.raises(LengthMismatch):
        Matrix.of(P1009, [(1, 2), (3,)])
    with pytest.raises(LengthMismatch):
        Matrix.identity(P1009, 2) @ Matrix.identity(P1009, 3)
    assert Matrix.identity(P1009, 3).scale(5).scalar_identity_factor() == 5
    assert Matrix.of(P1009, [(1, 2), (0, 1)]).scalar_identity_factor() is None


def test_solve_kernel():
    m = Matrix.of(P1009, [(1, 2, 3), (2, 4, 6)])
    basis = solve_kernel(m)
    assert len(basis) == 2
    for vec in basis:
        assert m.apply(vec) == (0, 0)
        assert next(v for v in vec if v) == 1


def test_kernel_solver_incremental_rank():
    rng_rows = [{0: 1, 3: 2}, {1: 1, 2: 5}, {0: 2, 3: 4}, {0: 1, 1: 1, 2: 5, 3: 2}]
    solver = KernelSolver(P1009, 4)
    added = [solver.add_row(row) for row in rng_rows]
    assert added == [True, True, False, False]
    assert solver.rank == 2
    for vec in solver.kernel():
        for row in rng_rows:
            assert P1009.dot([row.get(c, 0) for c in range(4)], vec) == 0


def test_monomial_bases():
    quartic, biquadratic = MonomialBasis(QUARTIC4), MonomialBasis(BIQUADRATIC44)
    assert quartic.size == len(quartic.monomials) == 35
    assert biquadratic.size == len(biquadratic.monomials) == 100
    assert QUARTIC_EXPONENTS[0] == (4, 0, 0, 0)
    assert QUARTIC_EXPONENTS[-1] == (0, 0, 0, 4)
    assert quartic.index((0, 2, 0, 2)) == QUARTIC_EXPONENTS.index((0, 2, 0, 2))
    assert biquadratic.monomials[0] == ((2, 0, 0, 0), (2, 0, 0, 0))
    assert biquadratic.monomials[11] == ((1, 1, 0, 0), (1, 1, 0, 0))


@settings(max_examples=25, deadline=None)
@given(st.tuples(*(field_values(P1009) for _ in range(4))), st.tuples(*(field_values(P1009) for _ in range(4))))
def test_monomial_values(x, y):
    def power(v, e):
        out = 1
        for vi, ei in zip(v, e):
            out = out * pow(vi, ei, 1009) % 1009
        return out

    assert quartic_monomials(P1009, x) == [power(x, e) for e in QUARTIC_EXPONENTS]
    expected = [power(x, ex) * power(y, ey) % 1009 for ex, ey in MonomialBasis(BIQUADRATIC44).monomials]
    assert biquadratic_monomials(P1009, x, y) == expected


def test_monomials_route_squares_through_sqr():
    spec = CountingSpec(P1009)
    quartic_monomials(spec, (5, 2, 7, 4))
    assert spec.counts == {"sqr": 8, "mul": 37}
    spec.counts.clear()
    biquadratic_monomials(spec, (5, 2, 7, 4), (1, 3, 6, 8))
    assert spec.counts == {"sqr": 8, "mul": 112}


def test_form_evaluation():
    basis = MonomialBasis(QUARTIC4)
    coeffs = [0] * 35
    coeffs[basis.index((0, 2, 0, 2))] = 3
    point = (5, 2, 7, 4)
    assert form_value(P1009, basis, coeffs, point) == 3 * 4 * 16
    elements = [FieldElement(P1009, c) for c in coeffs]
    assert eval_form(basis, elements, [FieldElement(P1009, v) for v in point]) == FieldElement(P1009, 192)
    with pytest.raises(LengthMismatch):
        form_value(P1009, basis, coeffs[:-1], point)
