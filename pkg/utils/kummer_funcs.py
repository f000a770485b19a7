"""
Kummer surface of y^2 + h(x) y = f(x): the map kappa into P^3, the quartic
K = K2 k4^2 + K1 k4 + K0, two-torsion data and the characteristic-2
translation matrix.

Exponent keys (e1, e2, e3) below are the powers of k1, k2, k3.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from utils.curve_funcs import (
    AFFINE,
    INF_MINUS,
    INF_PLUS,
    INF_RAMIFIED,
    conjugate_weierstrass_pairs,
    involution,
    rational_weierstrass_points,
)
from utils.errors import (
    FormatError,
    FormulaSetMissing,
    SelfCheckFailed,
    TwoTorsionK2Zero,
    UnsupportedDivisor,
    UnsupportedField,
)
from utils.field_funcs import FieldElement
from utils.poly_funcs import QUARTIC_EXPONENTS, Matrix, Poly

logger = logging.getLogger("kummer.surface")


@dataclass(frozen=True)
class KummerPoint:
    spec: object
    coords: tuple

    @classmethod
    def of(cls, spec, values):
        coords = tuple(spec.canonical(v) for v in values)
        if len(coords) != 4:
            raise FormatError("Kummer points have four coordinates")
        return cls(spec, coords)

    @classmethod
    def origin(cls, spec):
        return cls(spec, (spec.zero, spec.zero, spec.zero, spec.one))

    @classmethod
    def parse(cls, spec, text):
        parts = text.split(":")
        if len(parts) != 4:
            raise FormatError(f"expected k1:k2:k3:k4, got {text!r}")
        return cls(spec, tuple(spec.parse_value(p) for p in parts))

    @property
    def elements(self):
        return tuple(FieldElement(self.spec, v) for v in self.coords)

    def is_zero_vector(self):
        return all(v == self.spec.zero for v in self.coords)

    def normalized(self):
        spec = self.spec
        lead = next((v for v in self.coords if v != spec.zero), None)
        if lead is None:
            return self
        inv = spec.inv(lead)
        return KummerPoint(spec, tuple(spec.mul(inv, v) for v in self.coords))

    def projectively_equal(self, other):
        if self.is_zero_vector() or other.is_zero_vector():
            return False
        return self.normalized().coords == other.normalized().coords

    def apply(self, matrix):
        return KummerPoint(self.spec, matrix.apply(self.coords))

    def __str__(self):
        return ":".join(self.spec.format_value(v) for v in self.coords)


@dataclass(frozen=True)
class KummerQuartic:
    spec: object
    k2: dict
    k1: dict
    k0: dict

    @staticmethod
    def _eval(spec, table, k1, k2, k3):
        total = spec.zero
        for (e1, e2, e3), c in table.items():
            if c == spec.zero:
                continue
            term = spec.mul(spec.mul(spec.pow(k1, e1), spec.pow(k2, e2)), spec.pow(k3, e3))
            total = spec.add(total, spec.mul(c, term))
        return total

    def parts(self, coords):
        spec = self.spec
        k1, k2, k3, _ = coords
        return tuple(self._eval(spec, t, k1, k2, k3) for t in (self.k2, self.k1, self.k0))

    def evaluate(self, coords):
        spec = self.spec
        a2, a1, a0 = self.parts(coords)
        k4 = coords[3]
        return spec.add(spec.mul(spec.add(spec.mul(a2, k4), a1), k4), a0)

    def as_vector(self):
        """Coefficients of K over the quartic4 basis."""
        spec = self.spec
        vec = []
        for e1, e2, e3, e4 in QUARTIC_EXPONENTS:
            table = {2: self.k2, 1: self.k1, 0: self.k0}.get(e4, {})
            vec.append(table.get((e1, e2, e3), spec.zero))
        return vec


def _terms(spec, *terms):
    """sum of n * prod(factors) for terms (n, factor, ...)."""
    total = spec.zero
    for n, *factors in terms:
        value = spec.from_int(n)
        for x in factors:
            value = spec.mul(value, x)
        total = spec.add(total, value)
    return total


@lru_cache(maxsize=256)
def quartic_from_curve(c):
    spec = c.spec
    f0, f1, f2, f3, f4, f5, f6 = c.fs
    h0, h1, h2, h3 = c.hs
    T = lambda *terms: _terms(spec, *terms)  # noqa: E731

    k2 = {(0, 2, 0): spec.one, (1, 0, 1): spec.from_int(-4)}
    k1 = {
        (3, 0, 0): T((-4, f0), (-1, h0, h0)),
        (2, 1, 0): T((-2, f1), (-1, h0, h1)),
        (2, 0, 1): T((-4, f2), (-1, h1, h1), (2, h0, h2)),
        (1, 2, 0): T((-1, h0, h2)),
        (1, 1, 1): T((-2, f3), (-1, h1, h2), (3, h0, h3)),
        (1, 0, 2): T((-4, f4), (-1, h2, h2), (2, h1, h3)),
        (0, 3, 0): T((-1, h0, h3)),
        (0, 2, 1): T((-1, h1, h3)),
        (0, 1, 2): T((-2, f5), (-1, h2, h3)),
        (0, 0, 3): T((-4, f6), (-1, h3, h3)),
    }
    k0 = {
        (4, 0, 0): T((-4, f0, f2), (-1, f0, h1, h1), (1, f1, f1), (1, f1, h0, h1), (-1, f2, h0, h0)),
        (3, 1, 0): T((-4, f0, f3), (-2, f0, h1, h2), (1, f1, h0, h2), (-1, f3, h0, h0)),
        (3, 0, 1): T((2, f0, h1, h3), (-2, f1, f3), (-1, f1, h0, h3), (-1, f1, h1, h2), (2, f2, h0, h2),
                     (-1, f3, h0, h1)),
        (2, 2, 0): T((-4, f0, f4), (-2, f0, h1, h3), (-1, f0, h2, h2), (1, f1, h0, h3), (-1, f4, h0, h0)),
        (2, 1, 1): T((4, f0, f5), (2, f0, h2, h3), (-4, f1, f4), (-1, f1, h1, h3), (-1, f1, h2, h2),
                     (2, f2, h0, h3), (1, f3, h0, h2), (-2, f4, h0, h1), (1, f5, h0, h0)),
        (2, 0, 2): T((-4, f0, f6), (-1, f0, h3, h3), (2, f1, f5), (1, f1, h2, h3), (-4, f2, f4),
                     (-1, f2, h2, h2), (1, f3, f3), (1, f3, h0, h3), (1, f3, h1, h2), (-1, f4, h1, h1),
                     (1, f5, h0, h1), (-1, f6, h0, h0)),
        (1, 3, 0): T((-4, f0, f5), (-2, f0, h2, h3), (-1, f5, h0, h0)),
        (1, 2, 1): T((8, f0, f6), (2, f0, h3, h3), (-4, f1, f5), (-2, f1, h2, h3), (1, f3, h0, h3),
                     (-2, f5, h0, h1), (2, f6, h0, h0)),
        (1, 1, 2): T((4, f1, f6), (1, f1, h3, h3), (-4, f2, f5), (-2, f2, h2, h3), (1, f3, h1, h3),
                     (2, f4, h0, h3), (-1, f5, h0, h2), (-1, f5, h1, h1), (2, f6, h0, h1)),
        (1, 0, 3): T((-2, f3, f5), (-1, f3, h2, h3), (2, f4, h1, h3), (-1, f5, h0, h3), (-1, f5, h1, h2),
                     (2, f6, h0, h2)),
        (0, 4, 0): T((-4, f0, f6), (-1, f0, h3, h3), (-1, f6, h0, h0)),
        (0, 3, 1): T((-4, f1, f6), (-1, f1, h3, h3), (-2, f6, h0, h1)),
        (0, 2, 2): T((-4, f2, f6), (-1, f2, h3, h3), (1, f5, h0, h3), (-2, f6, h0, h2), (-1, f6, h1, h1)),
        (0, 1, 3): T((-4, f3, f6), (-1, f3, h3, h3), (1, f5, h1, h3), (-2, f6, h1, h2)),
        (0, 0, 4): T((-4, f4, f6), (-1, f4, h3, h3), (1, f5, f5), (1, f5, h2, h3), (-1, f6, h2, h2)),
    }
    return KummerQuartic(spec, k2, k1, k0)


def on_surface(q, k):
    return q.evaluate(k.coords) == q.spec.zero


# --- the Kummer map ---------------------------------------------------------------------

def _f0_sym(c, s1, s2):
    """F0(x, u) in terms of s1 = x + u, s2 = x u."""
    spec = c.spec
    f0, f1, f2, f3, f4, f5, f6 = c.fs
    s22 = spec.sqr(s2)
    return _terms(spec, (2, f0), (1, f1, s1), (2, f2, s2), (1, f3, s1, s2), (2, f4, s22),
                  (1, f5, s1, s22), (2, f6, s22, s2))


def _kappa_symmetric(c, s1, s2, yv, h_cross):
    spec = c.spec
    num = spec.sub(spec.sub(_f0_sym(c, s1, s2), spec.mul(spec.from_int(2), yv)), h_cross)
    den = spec.sub(spec.sqr(s1), spec.mul(spec.from_int(4), s2))
    return KummerPoint(spec, (spec.one, s1, s2, spec.div(num, den)))


def _kappa_doubled(c, x, y):
    spec = c.spec
    f0, f1, f2, f3, f4, f5, f6 = c.fs
    denom = spec.add(spec.mul(spec.from_int(2), y), c.h(x))
    if denom == spec.zero:
        raise UnsupportedDivisor("doubled Weierstrass point")
    dh = c.h.deriv()(x)
    slope = spec.div(spec.sub(c.f.deriv()(x), spec.mul(dh, y)), denom)
    x2 = spec.sqr(x)
    k4 = _terms(spec, (-1, f2), (-2, f3, x), (-4, f4, x2), (-6, f5, x2, x), (-9, f6, x2, x2),
                (1, dh, slope), (1, slope, slope))
    return KummerPoint(spec, (spec.one, spec.mul(spec.from_int(2), x), x2, k4))


def _kappa_with_infinity(c, point, Y):
    spec = c.spec
    x, y = point.x, point.y
    f5, f6 = c.fs[5], c.fs[6]
    h3 = c.hs[3]
    x2 = spec.sqr(x)
    k4 = _terms(spec, (1, f5, x2), (2, f6, x2, x), (-2, y, Y), (-1, c.h(x), Y), (-1, h3, y))
    return KummerPoint(spec, (spec.zero, spec.one, x, k4))


def kappa_points(c, p, q):
    spec = c.spec
    zero = KummerPoint.origin(spec)
    if p.tag != AFFINE and q.tag != AFFINE:
        if p.tag == INF_RAMIFIED and q.tag == INF_RAMIFIED:
            return zero
        if {p.tag, q.tag} == {INF_PLUS, INF_MINUS}:
            return zero
        raise UnsupportedDivisor("doubled non-ramified point at infinity")
    if p.tag != AFFINE:
        p, q = q, p
    if q.tag != AFFINE:
        return _kappa_with_infinity(c, p, q.y)
    if p.x != q.x:
        yv = spec.mul(p.y, q.y)
        h_cross = spec.add(spec.mul(c.h(p.x), q.y), spec.mul(c.h(q.x), p.y))
        return _kappa_symmetric(c, spec.add(p.x, q.x), spec.mul(p.x, q.x), yv, h_cross)
    if q == involution(c, p):
        return zero
    return _kappa_doubled(c, p.x, p.y)


def kappa_conjugate(c, a, b):
    """Pair of conjugate points over the roots of monic quadratic a, with y = b(x)."""
    spec = c.spec
    s1, s2 = spec.neg(a.coeff(1)), a.coeff(0)
    b0, b1 = b.coeff(0), b.coeff(1)
    p = c.h % a
    p0, p1 = p.coeff(0), p.coeff(1)
    yv = _terms(spec, (1, b0, b0), (1, b0, b1, s1), (1, b1, b1, s2))
    h_cross = _terms(spec, (2, p0, b0), (1, p0, b1, s1), (1, p1, b0, s1), (2, p1, b1, s2))
    return _kappa_symmetric(c, s1, s2, yv, h_cross)


def kappa(c, pair, check=True):
    """kappa of a PointPair (see utils.jacobian_funcs) or of a tuple of two points."""
    if isinstance(pair, tuple):
        k = kappa_points(c, *pair)
    elif pair.kind == "zero":
        k = KummerPoint.origin(c.spec)
    elif pair.kind == "conjugate":
        k = kappa_conjugate(c, pair.a, pair.b)
    else:
        k = kappa_points(c, *pair.points)
    if check and not on_surface(quartic_from_curve(c), k):
        raise SelfCheckFailed(f"kappa image {k} is not on the Kummer surface")
    return k


# --- two-torsion ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoTorsionData:
    case: str
    t0: object
    t1: object
    b: tuple
    c: object
    k: tuple
    r6: object = None


@dataclass(frozen=True)
class TwoTorsionClass:
    """
    A nonzero rational two-torsion class: two rational Weierstrass `points`, or
    (`points` empty) the conjugate Weierstrass pair over the roots of `a` with y = b(x).
    """

    class_id: str
    points: tuple
    kappa: KummerPoint
    data: TwoTorsionData = None
    a: Poly = None
    b: Poly = None


def point_id(spec, point):
    return f"x:{spec.format_value(point.x)}" if point.tag == AFFINE else f"x:{point.tag}"


def _two_torsion_data(c, points, k):
    spec = c.spec
    k1, k2, k3, k4 = k.coords
    if k2 == spec.zero:
        raise TwoTorsionK2Zero(f"k2 = 0 for the two-torsion point {k}")
    inv_k2 = spec.inv(k2)
    kp = tuple(spec.mul(v, inv_k2) for v in (k1, k2, k3, k4))
    q1, q2 = points
    x = Poly.x(spec)
    if q2.tag == AFFINE:
        x1, y1, x2, y2 = q1.x, q1.y, q2.x, q2.y
        t = c.h // ((x - Poly.constant(spec, x1)) * (x - Poly.constant(spec, x2)))
        dx = spec.sub(x1, x2)
        inv_d2 = spec.inv(spec.sqr(dx))
        b = tuple(spec.mul(spec.sub(spec.mul(y1, spec.pow(x2, i)), spec.mul(y2, spec.pow(x1, i))), inv_d2)
                  for i in range(4))
        cc = spec.div(spec.mul(y1, y2), dx)
        return TwoTorsionData("affineAffine", t.coeff(0), t.coeff(1), b, cc, kp)
    x1 = q1.x
    y1 = spec.sqrt(c.f(x1))
    r6 = spec.sqrt(c.fs[6])
    t = c.h // (x - Poly.constant(spec, x1))
    k3p = kp[2]
    b = [spec.mul(r6, spec.pow(k3p, i)) for i in range(4)]
    b[3] = spec.add(b[3], y1)
    return TwoTorsionData("affineInfinity", t.coeff(0), t.coeff(1), tuple(b), spec.mul(y1, r6), kp, r6)


def two_torsion_pairs(c):
    """All pairs of distinct rational Weierstrass points; conjugate pairs come from conjugate_weierstrass_pairs."""
    points = rational_weierstrass_points(c)
    return list(combinations(points, 2))


def two_torsion_classes(c):
    spec = c.spec
    classes = []
    for q1, q2 in two_torsion_pairs(c):
        if q1.tag != AFFINE:
            q1, q2 = q2, q1
        class_id = f"{point_id(spec, q1)}|{point_id(spec, q2)}"
        k = kappa(c, (q1, q2))
        data = None
        if spec.characteristic == 2:
            try:
                data = _two_torsion_data(c, (q1, q2), k)
            except TwoTorsionK2Zero:
                logger.warning("skipping two-torsion class %s: k2 = 0", class_id)
                continue
        classes.append(TwoTorsionClass(class_id, (q1, q2), k, data))
    for a, b in conjugate_weierstrass_pairs(c):
        class_id = f"quad:{spec.format_value(a.coeff(1))},{spec.format_value(a.coeff(0))}"
        classes.append(TwoTorsionClass(class_id, (), kappa_conjugate(c, a, b), a=a, b=b))
    return classes


def w_matrix_char2(c, data):
    spec = c.spec
    if spec.characteristic != 2:
        raise UnsupportedField("the unified translation matrix is for characteristic 2")
    if data is None:
        raise UnsupportedField("the unified translation matrix needs two rational Weierstrass points")
    f0, f1, f2, f3, f4, f5, f6 = c.fs
    if any(v != spec.zero for v in (f0, f2, f4, f6)):
        raise UnsupportedField("translation matrix needs f0 = f2 = f4 = f6 = 0; use char2_normal_form")
    t0, t1, cc = data.t0, data.t1, data.c
    b0, b1, b2, b3 = data.b
    k1, k2, k3, k4 = data.k
    S = lambda *terms: _terms(spec, *terms)  # noqa: E731
    rows = (
        (S((1, t1, b2), (1, k4)), S((1, t1, b1), (1, f5, k3)), S((1, t1, b0), (1, f5, k2)), k1),
        (S((1, t0, b2), (1, t1, b3), (1, f3, k3)), S((1, t0, b1), (1, t1, b2), (1, k4)),
         S((1, t0, b0), (1, t1, b1), (1, f3, k1)), k2),
        (S((1, t0, b3), (1, f1, k2)), S((1, t0, b2), (1, f1, k1)), S((1, t0, b1), (1, k4)), k3),
        (S((1, t0, f1, b0), (1, t0, f3, b2), (1, t0, t0, cc), (1, t1, f1, b1), (1, f3, f1, k1)),
         S((1, t0, f5, b3), (1, t0, t1, cc), (1, t1, f1, b0), (1, f1, f5, k2)),
         S((1, t0, f5, b2), (1, t1, f3, b1), (1, t1, f5, b3), (1, t1, t1, cc), (1, f3, f5, k3)),
         k4),
    )
    return Matrix(spec, rows)


def translate_by_two_torsion(c, cls, k, formulas=None):
    if c.spec.characteristic == 2:
        w = w_matrix_char2(c, cls.data)
    else:
        w = formulas.w.get(cls.class_id) if formulas is not None else None
        if w is None:
            raise FormulaSetMissing(f"no synthesized translation matrix for {cls.class_id}")
    return k.apply(w)


# --- odd characteristic: tau and the B conversion ---------------------------------------------

def symmetric_from_forms(spec, values):
    """Full symmetric matrix S with S_ij = B_ij off the diagonal and 2 B_ii on it."""
    two = spec.from_int(2)
    return Matrix(spec, tuple(
        tuple(spec.mul(two, values[(i, i)]) if i == j else values[(min(i, j), max(i, j))] for j in range(4))
        for i in range(4)))


def convert_b_from_simplified(t_matrix, values_prime):
    """B values on the general model from B' values on y^2 = 4f + h^2: S = T^-1 S' T^-T."""
    spec = t_matrix.spec
    t_inv = t_matrix.inverse()
    s = t_inv @ symmetric_from_forms(spec, values_prime) @ t_inv.transpose()
    half = spec.inv(spec.from_int(2))
    return {(i, j): spec.mul(half, s[i, i]) if i == j else s[i, j] for i in range(4) for j in range(i, 4)}


def printed_b14(c, values_prime):
    """B14 = b'14/4 + (2 h0h2 b'11 + h0h3 b'12 + h1h3 b'13)/2."""
    spec = c.spec
    h0, h1, h2, h3 = c.hs
    b = values_prime
    quarter, half = spec.inv(spec.from_int(4)), spec.inv(spec.from_int(2))
    inner = _terms(spec, (2, h0, h2, b[(0, 0)]), (1, h0, h3, b[(0, 1)]), (1, h1, h3, b[(0, 2)]))
    return spec.add(spec.mul(quarter, b[(0, 3)]), spec.mul(half, inner))


def printed_b44(c, values_prime):
    """B44 as displayed in closed form; differs from T^-1 S' T^-T by (sum c_i b'i4 - sum c_i c_j b'ij) / 8."""
    spec = c.spec
    h0, h1, h2, h3 = c.hs
    b = values_prime
    quarter, eighth, sixteenth = (spec.inv(spec.from_int(n)) for n in (4, 8, 16))
    linear = _terms(
        spec,
        (1, h0, h2, b[(0, 3)]), (1, h0, h3, b[(1, 3)]), (1, h1, h3, b[(2, 3)]),
        (1, h0, h0, h2, h2, b[(0, 0)]), (1, h0, h0, h3, h3, b[(1, 1)]), (1, h1, h1, h3, h3, b[(2, 2)]),
    )
    cross = _terms(spec, (1, h0, h0, h2, h3, b[(0, 1)]), (1, h0, h1, h2, h3, b[(0, 2)]), (1, h0, h1, h3, h3, b[(1, 2)]))
    return spec.add(spec.add(spec.mul(quarter, linear), spec.mul(eighth, cross)), spec.mul(sixteenth, b[(3, 3)]))
