from fractions import Fraction
from itertools import product
from math import comb

import pytest

from tests.conftest import GF2_16, GF4, P1009
from utils.curve_funcs import (
    CurveModel,
    CurvePoint,
    char2_normal_form,
    conjugate_weierstrass_pairs,
    random_char2_curve,
    random_odd_curve,
    rational_weierstrass_points,
    sample_point,
    tau_matrix,
    validate,
)
from utils.errors import FormatError, FormulaSetMissing, RootsNotRational, UnsupportedField
from utils.field_funcs import FieldSpec, make_rng
from utils.jacobian_funcs import (
    MumfordDivisor,
    add,
    from_point_pair,
    is_reduced,
    random_divisor,
    scalar_mul,
    to_point_pair,
    two_torsion_divisor,
    working_model,
)
from utils.kummer_funcs import (
    KummerPoint,
    convert_b_from_simplified,
    kappa,
    on_surface,
    printed_b14,
    printed_b44,
    quartic_from_curve,
    translate_by_two_torsion,
    two_torsion_classes,
    w_matrix_char2,
)
from utils.poly_funcs import Poly

P = 1009


def classical_quartic(f, k):
    """Kummer quartic of y^2 = f(x), written out term by term."""
    f0, f1, f2, f3, f4, f5, f6 = f
    k1, k2, k3, k4 = k
    K2 = k2 ** 2 - 4 * k1 * k3
    K1 = (-2 * (2 * f0 * k1 ** 3 + f1 * k1 ** 2 * k2 + 2 * f2 * k1 ** 2 * k3 + f3 * k1 * k2 * k3
                + 2 * f4 * k1 * k3 ** 2 + f5 * k2 * k3 ** 2 + 2 * f6 * k3 ** 3))
    K0 = ((f1 ** 2 - 4 * f0 * f2) * k1 ** 4 - 4 * f0 * f3 * k1 ** 3 * k2 - 2 * f1 * f3 * k1 ** 3 * k3
          - 4 * f0 * f4 * k1 ** 2 * k2 ** 2 + 4 * (f0 * f5 - f1 * f4) * k1 ** 2 * k2 * k3
          + (f3 ** 2 + 2 * f1 * f5 - 4 * f2 * f4 - 4 * f0 * f6) * k1 ** 2 * k3 ** 2
          - 4 * f0 * f5 * k1 * k2 ** 3 + 4 * (2 * f0 * f6 - f1 * f5) * k1 * k2 ** 2 * k3
          + 4 * (f1 * f6 - f2 * f5) * k1 * k2 * k3 ** 2 - 2 * f3 * f5 * k1 * k3 ** 3
          - 4 * f0 * f6 * k2 ** 4 - 4 * f1 * f6 * k2 ** 3 * k3 - 4 * f2 * f6 * k2 ** 2 * k3 ** 2
          - 4 * f3 * f6 * k2 * k3 ** 3 + (f5 ** 2 - 4 * f4 * f6) * k3 ** 4)
    return (K2 * k4 ** 2 + K1 * k4 + K0) % P


def char2_normal_model(h_roots=2, seed=31):
    rng = make_rng(seed)
    while True:
        try:
            _, model, _ = char2_normal_form(random_char2_curve(GF2_16, rng, h_roots=h_roots))
            return model
        except RootsNotRational:
            continue


def test_quartic_without_h_matches_the_classical_table():
    rng = make_rng(2)
    for _ in range(100):
        f = tuple(P1009.random(rng) for _ in range(7))
        q = quartic_from_curve(CurveModel.from_ints(P1009, f))
        k = tuple(P1009.random(rng) for _ in range(4))
        assert q.evaluate(k) == classical_quartic(f, k)


def test_quartic_vector_layout():
    q = quartic_from_curve(CurveModel.from_ints(P1009, (1, 2, 3, 4, 5, 6, 7)))
    vec = q.as_vector()
    assert len(vec) == 35
    assert sum(v != 0 for v in vec) == len([v for t in (q.k2, q.k1, q.k0) for v in t.values() if v != 0])


@pytest.mark.parametrize("kind", ["odd5", "odd6", "char2", "char2_cubic_h"])
def test_images_lie_on_the_surface(kind, rng):
    curve = {
        "odd5": lambda: random_odd_curve(P1009, rng),
        "odd6": lambda: random_odd_curve(P1009, rng, 6),
        "char2": lambda: random_char2_curve(GF2_16, rng),
        "char2_cubic_h": lambda: random_char2_curve(GF2_16, rng, h_roots=3),
    }[kind]()
    q = quartic_from_curve(curve)
    assert on_surface(q, KummerPoint.origin(curve.spec))
    wm = working_model(curve)
    for _ in range(25):
        d = random_divisor(wm, rng)
        for multiple in (d, add(wm, d, d), scalar_mul(wm, d, 5)):
            assert on_surface(q, kappa(curve, to_point_pair(wm, multiple), check=False))
    p = sample_point(curve, rng)
    assert on_surface(q, kappa(curve, (p, p), check=False))


def test_rational_images(rational_curve):
    q = quartic_from_curve(rational_curve)
    wm = working_model(rational_curve)
    assert on_surface(q, KummerPoint.origin(rational_curve.spec))
    p, r = (CurvePoint.affine(Fraction(x), Fraction(1)) for x in (0, 1))
    d = from_point_pair(wm, p, r)
    for n in range(1, 5):
        assert on_surface(q, kappa(rational_curve, to_point_pair(wm, scalar_mul(wm, d, n)), check=False))


@pytest.mark.parametrize("h_roots,count", [(1, 1), (2, 3), (3, 3)])
def test_char2_two_torsion_counts(h_roots, count):
    for seed in range(50):
        curve = random_char2_curve(GF2_16, make_rng(seed), h_roots=h_roots)
        classes = two_torsion_classes(curve)
        assert len(classes) == count
        assert 1 + len(classes) in (1, 2, 4)
        wm = working_model(curve)
        for cls in classes:
            assert cls.kappa.coords[1] != 0
            assert scalar_mul(wm, two_torsion_divisor(wm, cls), 2).is_zero()


def rational_two_torsion_count(wm):
    """#J[2] over a tiny field by running through every reduced divisor."""
    spec = wm.spec
    count = 0
    for degree in range(3):
        for tail in product(spec.elements(), repeat=degree):
            a = Poly(spec, tuple(tail) + (spec.one,))
            for b_coeffs in product(spec.elements(), repeat=degree):
                d = MumfordDivisor(a, Poly(spec, tuple(b_coeffs)))
                if is_reduced(wm, d) and scalar_mul(wm, d, 2).is_zero():
                    count += 1
    return count


def random_binary_curve(spec, rng):
    """Any h, so the Weierstrass points may be conjugate."""
    while True:
        h = Poly(spec, tuple(spec.random(rng) for _ in range(4)))
        f = Poly(spec, tuple(spec.random(rng) for _ in range(6)) + (spec.one,))
        curve = CurveModel(spec, f, h)
        if validate(curve).valid and rational_weierstrass_points(curve):
            return curve


def check_classes_against_the_oracle(curve):
    wm = working_model(curve)
    classes = two_torsion_classes(curve)
    q = quartic_from_curve(curve)
    divisors = [two_torsion_divisor(wm, cls) for cls in classes]
    assert len(set(divisors)) == len(divisors)
    for cls, d in zip(classes, divisors):
        assert not d.is_zero()
        assert scalar_mul(wm, d, 2).is_zero()
        assert on_surface(q, cls.kappa)
        assert kappa(curve, to_point_pair(wm, d)).projectively_equal(cls.kappa)
    assert 1 + len(classes) == rational_two_torsion_count(wm)
    return classes


def test_char2_two_torsion_over_random_curves():
    conjugate = 0
    for seed in range(50):
        classes = check_classes_against_the_oracle(random_binary_curve(GF4, make_rng(seed)))
        assert 1 + len(classes) in (1, 2, 4)
        conjugate += sum(not cls.points for cls in classes)
    assert conjugate


def test_odd_two_torsion_over_a_small_prime_field():
    gf7 = FieldSpec.prime(7)
    conjugate = 0
    for seed in range(20):
        rng = make_rng(seed)
        classes = check_classes_against_the_oracle(random_odd_curve(gf7, rng, 5 + seed % 2))
        conjugate += sum(not cls.points for cls in classes)
    assert conjugate


def test_conjugate_weierstrass_pair_gives_a_class():
    # 4f = 4x(x - 1)(x - 2)(x^2 - 11) and 11 is not a square mod 1009
    curve = CurveModel.from_ints(P1009, (0, -22, 33, -9, -3, 1))
    classes = two_torsion_classes(curve)
    assert len(classes) == comb(4, 2) + 1
    (cls,) = [c for c in classes if not c.points]
    assert cls.class_id == "quad:0,998"
    assert cls.a == Poly.from_ints(P1009, (-11, 0, 1))
    assert cls.b.is_zero()
    wm = working_model(curve)
    d = two_torsion_divisor(wm, cls)
    assert d.a == cls.a
    assert scalar_mul(wm, d, 2).is_zero()
    assert kappa(curve, to_point_pair(wm, d)).projectively_equal(cls.kappa)


def test_odd_two_torsion(odd_curve):
    classes = two_torsion_classes(odd_curve)
    expected = comb(len(rational_weierstrass_points(odd_curve)), 2) + len(conjugate_weierstrass_pairs(odd_curve))
    assert len(classes) == expected
    wm = working_model(odd_curve)
    for cls in classes:
        d = two_torsion_divisor(wm, cls)
        assert not d.is_zero()
        assert scalar_mul(wm, d, 2).is_zero()
        assert cls.data is None
        with pytest.raises(FormulaSetMissing):
            translate_by_two_torsion(odd_curve, cls, KummerPoint.origin(P1009))


@pytest.mark.parametrize("h_roots", [1, 2, 3])
def test_char2_translation_matrix(h_roots):
    model = char2_normal_model(h_roots)
    rng = make_rng(h_roots)
    wm = working_model(model)
    q = quartic_from_curve(model)
    classes = two_torsion_classes(model)
    infinity = [cls for cls in classes if cls.data.case == "affineInfinity"]
    assert infinity
    assert all(cls.data.r6 is not None for cls in infinity)
    for cls in classes:
        w = w_matrix_char2(model, cls.data)
        assert w.scalar_identity_factor() is None
        assert (w @ w).scalar_identity_factor() not in (None, 0)
        origin = KummerPoint.origin(GF2_16)
        assert translate_by_two_torsion(model, cls, origin).projectively_equal(cls.kappa)
        t = two_torsion_divisor(wm, cls)
        for _ in range(10):
            d = random_divisor(wm, rng)
            moved = kappa(model, to_point_pair(wm, add(wm, d, t)))
            image = kappa(model, to_point_pair(wm, d)).apply(w)
            assert on_surface(q, image)
            assert image.projectively_equal(moved)


def test_translation_matrix_needs_a_normal_form(rng):
    curve = random_char2_curve(GF2_16, rng)
    cls = two_torsion_classes(curve)[0]
    with pytest.raises(UnsupportedField):
        w_matrix_char2(curve, cls.data)
    with pytest.raises(UnsupportedField):
        w_matrix_char2(random_odd_curve(P1009, rng), cls.data)


def test_b14_conversion(rng):
    curve = random_odd_curve(P1009, rng, 6)
    t = tau_matrix(curve)
    for _ in range(20):
        values = {(i, j): P1009.random(rng) for i in range(4) for j in range(i, 4)}
        assert printed_b14(curve, values) == convert_b_from_simplified(t, values)[(0, 3)]


def test_b44_closed_form_differs_from_the_matrix_form(rng):
    spec = P1009
    curve = CurveModel.from_ints(spec, (3, 1, 4, 1, 5, 9, 2), (6, 5, 3, 5))
    t = tau_matrix(curve)
    h0, h1, h2, h3 = curve.hs
    c = (spec.mul(h0, h2), spec.mul(h0, h3), spec.mul(h1, h3))
    eighth = spec.inv(spec.from_int(8))
    for _ in range(20):
        values = {(i, j): spec.random(rng) for i in range(4) for j in range(i, 4)}
        gap = spec.zero
        for i in range(3):
            gap = spec.add(gap, spec.mul(c[i], values[(i, 3)]))
            for j in range(i + 1, 3):
                gap = spec.sub(gap, spec.mul(spec.mul(c[i], c[j]), values[(i, j)]))
        matrix_form = convert_b_from_simplified(t, values)[(3, 3)]
        assert spec.sub(printed_b44(curve, values), matrix_form) == spec.mul(eighth, gap)

    plain = CurveModel.from_ints(spec, (3, 1, 4, 1, 5, 9, 2))
    values = {(i, j): spec.random(rng) for i in range(4) for j in range(i, 4)}
    assert printed_b44(plain, values) == convert_b_from_simplified(tau_matrix(plain), values)[(3, 3)]


def test_kummer_points():
    k = KummerPoint.parse(P1009, "2:4:6:8")
    assert str(k.normalized()) == "1:2:3:4"
    assert k.projectively_equal(KummerPoint.of(P1009, (3, 6, 9, 12)))
    zero = KummerPoint.of(P1009, (0, 0, 0, 0))
    assert zero.is_zero_vector()
    assert not zero.projectively_equal(zero)
    assert KummerPoint.parse(GF2_16, "0x0:0x0:0x1:0xff").normalized().coords == (0, 0, 1, 0xFF)
    with pytest.raises(FormatError):
        KummerPoint.parse(P1009, "1:2:3")
    with pytest.raises(FormatError):
        KummerPoint.of(P1009, (1, 2, 3))
