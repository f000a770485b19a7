"""
Mumford-representation divisor arithmetic on an odd-degree working model.

The user's model is moved so that a rational Weierstrass point sits at
infinity (deg f = 5, deg h <= 2). Cantor composition and reduction there
compute in the full Jacobian; results are carried back to the user's model
as point pairs for the Kummer map.
"""
from dataclasses import dataclass

from utils.curve_funcs import (
    AFFINE,
    CurvePoint,
    INF_RAMIFIED,
    ModelIsomorphism,
    conjugate_weierstrass_pairs,
    is_ramified_at_infinity,
    pullback_point,
    rational_weierstrass_points,
    sample_point,
    transform,
    transform_point,
)
from utils.errors import ExhaustedRetries, NoRationalWeierstrassPoint, UnsupportedDivisor
from utils.poly_funcs import Poly, poly_xgcd

RANDOM_DIVISOR_ATTEMPTS = 1_000


@dataclass(frozen=True)
class MumfordDivisor:
    a: Poly
    b: Poly

    @classmethod
    def zero(cls, spec):
        return cls(Poly.constant(spec, spec.one), Poly(spec))

    @property
    def weight(self):
        return self.a.degree

    def is_zero(self):
        return self.a.degree == 0

    def __str__(self):
        return f"({self.a}, {self.b})"


@dataclass(frozen=True)
class WorkingModel:
    user: object
    model: object
    link: ModelIsomorphism

    @property
    def spec(self):
        return self.model.spec

    def to_user(self, point):
        return pullback_point(self.user, self.link, point, source=self.model)

    def from_user(self, point):
        return transform_point(self.user, self.link, point, target=self.model)

    @property
    def base_point(self):
        """The user's Weierstrass point sitting at infinity of the working model."""
        spec = self.spec
        return self.to_user(CurvePoint(INF_RAMIFIED, y=spec.zero))


@dataclass(frozen=True)
class PointPair:
    """
    A divisor class as seen on the user model: `zero`, two `points`, or a
    `conjugate` pair given by A(X) = X^2 + A1 X + A0 irreducible with y = B(X).
    """

    kind: str
    points: tuple = ()
    a: Poly = None
    b: Poly = None


def _odd_degree_shift(c):
    spec = c.spec
    if spec.characteristic == 2:
        root = spec.sqrt(c.fs[6])
    else:
        root = spec.div(spec.neg(c.hs[3]), spec.from_int(2))
    return ModelIsomorphism.y_map(spec, spec.one, Poly.monomial(spec, root, 3))


def working_model(c):
    spec = c.spec
    if is_ramified_at_infinity(c):
        link = ModelIsomorphism.identity(spec)
    else:
        if not spec.is_finite:
            raise NoRationalWeierstrassPoint("rational models must already be ramified at infinity")
        affine = [p for p in rational_weierstrass_points(c) if p.tag == AFFINE]
        if not affine:
            raise NoRationalWeierstrassPoint(f"{c} has no rational Weierstrass point")
        r = min(affine, key=lambda p: spec.sort_key(p.x)).x
        link = ModelIsomorphism.mobius(spec, r, spec.one, spec.one, spec.zero)
    moved = transform(c, link)
    shift = _odd_degree_shift(moved)
    if not shift.u.is_zero():
        link = link.compose(shift)
    return WorkingModel(c, transform(c, link), link)


# --- Cantor ---------------------------------------------------------------------------

def _reduce(wm, a, b):
    f, h = wm.model.f, wm.model.h
    b = b % a
    while a.degree > 2:
        a = (f - b * h - b * b) // a
        b = (-h - b) % a
    a_monic = a.monic()
    return MumfordDivisor(a_monic, b % a_monic)


def add(wm, d1, d2):
    h, f = wm.model.h, wm.model.f
    g1, e1, e2 = poly_xgcd(d1.a, d2.a)
    d, c1, c2 = poly_xgcd(g1, d1.b + d2.b + h)
    s1, s2, s3 = c1 * e1, c1 * e2, c2
    a = (d1.a * d2.a) // (d * d)
    b = (s1 * d1.a * d2.b + s2 * d2.a * d1.b + s3 * (d1.b * d2.b + f)) // d
    return _reduce(wm, a, b)


def negate(wm, d):
    return MumfordDivisor(d.a, (-wm.model.h - d.b) % d.a)


def scalar_mul(wm, d, n):
    if n < 0:
        raise ValueError("scalar must be nonnegative")
    result = MumfordDivisor.zero(wm.spec)
    for bit in bin(n)[2:]:
        result = add(wm, result, result)
        if bit == "1":
            result = add(wm, result, d)
    return result


def point_divisor(wm, point):
    """Class of P - infinity for a point of the working model."""
    spec = wm.spec
    if point.tag != AFFINE:
        return MumfordDivisor.zero(spec)
    return MumfordDivisor(Poly(spec, (spec.neg(point.x), spec.one)), Poly.constant(spec, point.y))


def from_point_pair(wm, p1, p2):
    """Class of P1 + P2 - 2*base for two points of the USER model."""
    return add(wm, point_divisor(wm, wm.from_user(p1)), point_divisor(wm, wm.from_user(p2)))


def random_divisor(wm, rng):
    spec = wm.spec
    for _ in range(RANDOM_DIVISOR_ATTEMPTS):
        p1, p2 = sample_point(wm.model, rng), sample_point(wm.model, rng)
        if p1.x == p2.x:
            continue
        x = Poly.x(spec)
        a = (x - Poly.constant(spec, p1.x)) * (x - Poly.constant(spec, p2.x))
        slope = spec.div(spec.sub(p2.y, p1.y), spec.sub(p2.x, p1.x))
        b = Poly(spec, (spec.sub(p1.y, spec.mul(slope, p1.x)), slope))
        return MumfordDivisor(a, b)
    raise ExhaustedRetries(f"no generic divisor after {RANDOM_DIVISOR_ATTEMPTS} attempts")


def is_reduced(wm, d):
    """Mumford conditions: a monic of degree <= 2, deg b < deg a, a | b^2 + b h - f."""
    f, h = wm.model.f, wm.model.h
    if d.a.degree > 2 or d.a.lead != wm.spec.one:
        return False
    if not d.b.is_zero() and d.b.degree >= d.a.degree:
        return False
    return ((d.b * d.b + d.b * h - f) % d.a).is_zero()


# --- back to the user model -------------------------------------------------------------

class _QuadraticAlgebra:
    """k[X]/(X^2 + a1 X + a0); elements are pairs (r0, r1)."""

    def __init__(self, spec, a):
        self.spec = spec
        self.a0, self.a1 = a.coeff(0), a.coeff(1)

    def mul(self, p, q):
        spec = self.spec
        c0 = spec.mul(p[0], q[0])
        c1 = spec.add(spec.mul(p[0], q[1]), spec.mul(p[1], q[0]))
        c2 = spec.mul(p[1], q[1])
        return spec.sub(c0, spec.mul(c2, self.a0)), spec.sub(c1, spec.mul(c2, self.a1))

    def inv(self, p):
        spec = self.spec
        conj = (spec.sub(p[0], spec.mul(self.a1, p[1])), spec.neg(p[1]))
        norm = self.mul(p, conj)[0]
        inv_norm = spec.inv(norm)
        return spec.mul(conj[0], inv_norm), spec.mul(conj[1], inv_norm)

    def lift(self, poly):
        spec = self.spec
        r = (spec.zero, spec.zero)
        for c in reversed(poly.coeffs):
            r = self.mul(r, (spec.zero, spec.one))
            r = (spec.add(r[0], c), r[1])
        return r


def _conjugate_pair(wm, d):
    spec = wm.spec
    iso = wm.link
    alg = _QuadraticAlgebra(spec, d.a)
    den = alg.inv((iso.delta, iso.gamma))
    xi = alg.mul((iso.beta, iso.alpha), den)
    y_num = alg.lift((d.b.scale(iso.e) + iso.u) % d.a)
    eta = alg.mul(y_num, alg.mul(den, alg.mul(den, den)))
    beta1 = spec.div(eta[1], xi[1])
    beta0 = spec.sub(eta[0], spec.mul(beta1, xi[0]))
    sq = alg.mul(xi, xi)
    m1 = spec.div(sq[1], xi[1])
    m0 = spec.sub(sq[0], spec.mul(m1, xi[0]))
    a = Poly(spec, (spec.neg(m0), spec.neg(m1), spec.one))
    return PointPair("conjugate", a=a, b=Poly(spec, (beta0, beta1)))


def to_point_pair(wm, d):
    spec = wm.spec
    if d.a.degree == 0:
        return PointPair("zero")
    if d.a.degree == 1:
        x1 = spec.neg(d.a.coeff(0))
        working = CurvePoint.affine(x1, d.b(x1))
        return PointPair("points", (wm.to_user(working), wm.base_point))
    xs = spec.quad_roots(d.a.coeff(1), spec.neg(d.a.coeff(0)))
    if not xs:
        return _conjugate_pair(wm, d)
    if len(xs) == 1:
        xs = xs * 2
    points = tuple(wm.to_user(CurvePoint.affine(x, d.b(x))) for x in xs)
    return PointPair("points", points)


def two_torsion_divisor(wm, cls):
    """Working-model divisor of a two-torsion class (see utils.kummer_funcs.TwoTorsionClass)."""
    if cls.points:
        return from_point_pair(wm, *cls.points)
    for a, b in conjugate_weierstrass_pairs(wm.model):
        d = MumfordDivisor(a, b)
        if to_point_pair(wm, d).a == cls.a:
            return d
    raise UnsupportedDivisor(f"no conjugate Weierstrass pair over {cls.a} on the working model")
