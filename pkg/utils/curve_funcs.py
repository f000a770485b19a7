"""
Genus-2 models y^2 + h(x) y = f(x), their points, validity and the model
changes used throughout: Mobius maps on x combined with y -> e*y + u(x).

Points are carried on the weighted projective closure P(1,3,1). A point at
infinity stores Y, the limit of y/x^3, which is a root of Y^2 + h3*Y = f6.
"""
from dataclasses import dataclass
from pathlib import Path

from pydantic import BaseModel

from utils.errors import (
    CharacteristicTwo,
    DegreeOverflow,
    ExhaustedRetries,
    FormatError,
    RootsNotRational,
    SingularCurve,
    UnsupportedField,
)
from utils.field_funcs import BINARY, FieldSpec
from utils.poly_funcs import Matrix, Poly, multiplicity, poly_gcd, quadratic_factors, root_values

AFFINE = "affine"
INF_PLUS = "inf+"
INF_MINUS = "inf-"
INF_RAMIFIED = "inf"
INFINITY_TAGS = (INF_PLUS, INF_MINUS, INF_RAMIFIED)

SAMPLE_ATTEMPTS = 10_000
RATIONAL_HEIGHT = 3


@dataclass(frozen=True)
class CurveModel:
    spec: FieldSpec
    f: Poly
    h: Poly

    def __post_init__(self):
        if self.f.degree > 6 or self.h.degree > 3:
            raise DegreeOverflow(f"deg f = {self.f.degree}, deg h = {self.h.degree}")

    @classmethod
    def from_ints(cls, spec, f, h=()):
        return cls(spec, Poly.from_ints(spec, f), Poly.from_ints(spec, h))

    @property
    def fs(self):
        return self.f.padded(7)

    @property
    def hs(self):
        return self.h.padded(4)

    @property
    def char(self):
        return self.spec.characteristic

    def equation(self, x, y):
        """y^2 + h(x) y - f(x); zero exactly on the curve."""
        spec = self.spec
        return spec.sub(spec.add(spec.sqr(y), spec.mul(self.h(x), y)), self.f(x))

    def __str__(self):
        return f"y^2 + ({self.h})*y = {self.f} over {self.spec}"


@dataclass(frozen=True)
class CurvePoint:
    tag: str
    x: object = None
    y: object = None

    @classmethod
    def affine(cls, x, y):
        return cls(AFFINE, x, y)

    @property
    def is_infinite(self):
        return self.tag != AFFINE

    def label(self, spec):
        if self.tag == AFFINE:
            return f"({spec.format_value(self.x)},{spec.format_value(self.y)})"
        return self.tag


class Validity(BaseModel):
    valid: bool
    reason: str = ""


# --- points ---------------------------------------------------------------------

def infinity_values(c):
    """Sorted roots Y of Y^2 + h3*Y = f6; their order fixes inf+ before inf-."""
    return c.spec.quad_roots(c.hs[3], c.fs[6])


def is_ramified_at_infinity(c):
    spec = c.spec
    if spec.characteristic == 2:
        return c.hs[3] == spec.zero
    f6, h3 = c.fs[6], c.hs[3]
    return spec.add(spec.mul(spec.from_int(4), f6), spec.sqr(h3)) == spec.zero


def points_at_infinity(c):
    values = infinity_values(c)
    if is_ramified_at_infinity(c):
        return [CurvePoint(INF_RAMIFIED, y=values[0])]
    return [CurvePoint(tag, y=v) for tag, v in zip((INF_PLUS, INF_MINUS), values)]


def infinity_point(c, value):
    for point in points_at_infinity(c):
        if point.y == value:
            return point
    raise FormatError(f"{value} is not a branch value at infinity")


def is_on_curve(c, point):
    if point.tag == AFFINE:
        return c.equation(point.x, point.y) == c.spec.zero
    return any(p == point for p in points_at_infinity(c))


def involution(c, point):
    spec = c.spec
    if point.tag == AFFINE:
        return CurvePoint.affine(point.x, spec.sub(spec.neg(point.y), c.h(point.x)))
    other = spec.sub(spec.neg(point.y), c.hs[3])
    if point.tag == INF_RAMIFIED:
        return point
    return infinity_point(c, other)


def _random_x(c, rng):
    spec = c.spec
    if spec.is_finite:
        return spec.random(rng)
    num = int(rng.integers(-RATIONAL_HEIGHT, RATIONAL_HEIGHT + 1))
    den = int(rng.integers(1, RATIONAL_HEIGHT + 1))
    return spec.canonical(num) / den


def sample_point(c, rng):
    """A random affine point; rational models are searched at small height."""
    for _ in range(SAMPLE_ATTEMPTS):
        x = _random_x(c, rng)
        ys = c.spec.quad_roots(c.h(x), c.f(x))
        if ys:
            return CurvePoint.affine(x, ys[int(rng.integers(len(ys)))])
    raise ExhaustedRetries(f"no point found on {c} after {SAMPLE_ATTEMPTS} draws")


def affine_points(c):
    spec = c.spec
    return [CurvePoint.affine(x, y) for x in spec.elements() for y in spec.quad_roots(c.h(x), c.f(x))]


def all_points(c):
    return affine_points(c) + points_at_infinity(c)


# --- validity -------------------------------------------------------------------

def validate(c):
    spec = c.spec
    if spec.characteristic != 2:
        F = c.f.scale(spec.from_int(4)) + c.h * c.h
        if F.degree < 5:
            return Validity(valid=False, reason=f"4f + h^2 has degree {F.degree} < 5")
        if poly_gcd(F, F.deriv()).degree > 0:
            return Validity(valid=False, reason="4f + h^2 has a repeated root")
        return Validity(valid=True)
    if c.h.is_zero():
        return Validity(valid=False, reason="h = 0 in characteristic 2")
    dh, df = c.h.deriv(), c.f.deriv()
    g = poly_gcd(c.h, dh * dh * c.f + df * df)
    if g.degree > 0:
        return Validity(valid=False, reason=f"singular affine point over a root of {g}")
    f5, f6 = c.fs[5], c.fs[6]
    h2, h3 = c.hs[2], c.hs[3]
    if h3 == spec.zero and spec.add(spec.mul(spec.sqr(h2), f6), spec.sqr(f5)) == spec.zero:
        return Validity(valid=False, reason="singular point at infinity")
    return Validity(valid=True)


def rational_weierstrass_points(c):
    """Fixed points of the involution with base-field coordinates."""
    spec = c.spec
    points = []
    if spec.characteristic == 2:
        for r in root_values(c.h):
            points.append(CurvePoint.affine(r, spec.sqrt(c.f(r))))
    else:
        F = c.f.scale(spec.from_int(4)) + c.h * c.h
        half = spec.inv(spec.from_int(2))
        for r in root_values(F):
            points.append(CurvePoint.affine(r, spec.neg(spec.mul(half, c.h(r)))))
    if is_ramified_at_infinity(c):
        points.extend(points_at_infinity(c))
    return points


def weierstrass_polynomial(c):
    """Its roots are the affine x-coordinates of the Weierstrass points."""
    spec = c.spec
    if spec.characteristic == 2:
        return c.h
    return c.f.scale(spec.from_int(4)) + c.h * c.h


def weierstrass_ordinate(c, a):
    """b with y = b(x) at the Weierstrass points over the roots of a factor a of weierstrass_polynomial(c)."""
    spec = c.spec
    if spec.characteristic == 2:
        # square root in the residue field GF(2^(m deg a))
        return (c.f % a).pow_mod(spec.order ** a.degree // 2, a)
    return c.h.scale(spec.neg(spec.inv(spec.from_int(2)))) % a


def conjugate_weierstrass_pairs(c):
    """(a, b) for each pair of conjugate Weierstrass points, a irreducible over the base field."""
    return [(a, weierstrass_ordinate(c, a)) for a in quadratic_factors(weierstrass_polynomial(c))]


# --- model isomorphisms -----------------------------------------------------------

@dataclass(frozen=True)
class ModelIsomorphism:
    """
    Maps a model C to C' by the pullback
        x = (alpha x' + beta) / (gamma x' + delta)
        y = (e y' + u(x')) / (gamma x' + delta)^3
    i.e. on weighted coordinates (X:Y:Z) = (alpha X' + beta Z : e Y' + U(X',Z') : gamma X' + delta Z').
    """

    spec: FieldSpec
    alpha: object
    beta: object
    gamma: object
    delta: object
    e: object
    u: Poly

    def __post_init__(self):
        if self.u.degree > 3:
            raise DegreeOverflow(f"y-shift of degree {self.u.degree}")
        if self.det == self.spec.zero or self.e == self.spec.zero:
            raise SingularCurve("isomorphism is not invertible")

    @classmethod
    def identity(cls, spec):
        return cls(spec, spec.one, spec.zero, spec.zero, spec.one, spec.one, Poly(spec))

    @classmethod
    def mobius(cls, spec, alpha, beta, gamma, delta, e=None):
        return cls(spec, alpha, beta, gamma, delta, spec.one if e is None else e, Poly(spec))

    @classmethod
    def y_map(cls, spec, e, u):
        return cls(spec, spec.one, spec.zero, spec.zero, spec.one, e, u)

    @property
    def det(self):
        spec = self.spec
        return spec.sub(spec.mul(self.alpha, self.delta), spec.mul(self.beta, self.gamma))

    @property
    def matrix(self):
        return Matrix(self.spec, ((self.alpha, self.beta), (self.gamma, self.delta)))

    def numerator(self):
        return Poly(self.spec, (self.beta, self.alpha))

    def denominator(self):
        return Poly(self.spec, (self.delta, self.gamma))

    def u_at(self, X, Z):
        """Homogenized degree-3 shift U(X, Z) = Z^3 u(X/Z)."""
        spec = self.spec
        total, xp, zp = spec.zero, spec.one, [spec.one] * 4
        for i in range(1, 4):
            zp[i] = spec.mul(zp[i - 1], Z)
        for i in range(4):
            total = spec.add(total, spec.mul(self.u.coeff(i), spec.mul(xp, zp[3 - i])))
            xp = spec.mul(xp, X)
        return total

    def compose(self, then):
        """First self, then `then`."""
        spec = self.spec
        m = self.matrix @ then.matrix
        u = then.u.scale(self.e) + self.u.homogeneous(3, then.numerator(), then.denominator())
        return ModelIsomorphism(spec, m[0, 0], m[0, 1], m[1, 0], m[1, 1], spec.mul(self.e, then.e), u)

    def inverse(self):
        spec = self.spec
        d = self.det
        num = Poly(spec, (spec.neg(self.beta), self.delta))
        den = Poly(spec, (self.alpha, spec.neg(self.gamma)))
        inv_e = spec.inv(self.e)
        u = self.u.homogeneous(3, num, den).scale(spec.neg(inv_e))
        e = spec.mul(spec.pow(d, 3), inv_e)
        return ModelIsomorphism(spec, self.delta, spec.neg(self.beta), spec.neg(self.gamma), self.alpha, e, u)

    def is_identity(self):
        return self == ModelIsomorphism.identity(self.spec)


def transform(c, iso):
    spec = c.spec
    num, den = iso.numerator(), iso.denominator()
    H = c.h.homogeneous(3, num, den)
    F = c.f.homogeneous(6, num, den)
    inv_e = spec.inv(iso.e)
    two_u = iso.u.scale(spec.from_int(2))
    h_new = (two_u + H).scale(inv_e)
    f_new = (F - iso.u * iso.u - H * iso.u).scale(spec.sqr(inv_e))
    return CurveModel(spec, f_new, h_new)


def _normalize(c, X, Y, Z):
    spec = c.spec
    if Z != spec.zero:
        zi = spec.inv(Z)
        return CurvePoint.affine(spec.mul(X, zi), spec.mul(Y, spec.pow(zi, 3)))
    return infinity_point(c, spec.mul(Y, spec.pow(spec.inv(X), 3)))


def _weighted(c, point):
    spec = c.spec
    if point.tag == AFFINE:
        return point.x, point.y, spec.one
    return spec.one, point.y, spec.zero


def transform_point(c, iso, point, target=None):
    """Carry a point of c to transform(c, iso)."""
    spec = c.spec
    target = target or transform(c, iso)
    X, Y, Z = _weighted(c, point)
    Xn = spec.sub(spec.mul(iso.delta, X), spec.mul(iso.beta, Z))
    Zn = spec.sub(spec.mul(iso.alpha, Z), spec.mul(iso.gamma, X))
    Yn = spec.div(spec.sub(spec.mul(spec.pow(iso.det, 3), Y), iso.u_at(Xn, Zn)), iso.e)
    return _normalize(target, Xn, Yn, Zn)


def pullback_point(c, iso, point, source=None):
    """Carry a point of transform(c, iso) back to c."""
    spec = c.spec
    source = source or transform(c, iso)
    Xn, Yn, Zn = _weighted(source, point)
    X = spec.add(spec.mul(iso.alpha, Xn), spec.mul(iso.beta, Zn))
    Z = spec.add(spec.mul(iso.gamma, Xn), spec.mul(iso.delta, Zn))
    Y = spec.add(spec.mul(iso.e, Yn), iso.u_at(Xn, Zn))
    return _normalize(c, X, Y, Z)


def simplified_model(c):
    """y^2 = 4f + h^2 through y' = 2y + h(x)."""
    spec = c.spec
    if spec.characteristic == 2:
        raise CharacteristicTwo("no simplified model in characteristic 2")
    half = spec.inv(spec.from_int(2))
    iso = ModelIsomorphism.y_map(spec, half, c.h.scale(spec.neg(half)))
    return transform(c, iso), iso


def tau_matrix(c):
    """Matrix of tau on Kummer coordinates: k4 -> 4 k4 - 2(h0h2 k1 + h0h3 k2 + h1h3 k3)."""
    spec = c.spec
    if spec.characteristic == 2:
        raise CharacteristicTwo("tau is defined away from characteristic 2")
    h0, h1, h2, h3 = c.hs
    m2 = spec.from_int(-2)
    one, zero = spec.one, spec.zero
    return Matrix(spec, (
        (one, zero, zero, zero),
        (zero, one, zero, zero),
        (zero, zero, one, zero),
        (spec.mul(m2, spec.mul(h0, h2)), spec.mul(m2, spec.mul(h0, h3)), spec.mul(m2, spec.mul(h1, h3)), spec.from_int(4)),
    ))


def tau_on_kummer(c, k):
    """k is any Kummer point exposing `apply(matrix)`."""
    return k.apply(tau_matrix(c))


# --- characteristic-2 normal forms --------------------------------------------------

NORMAL_FORM_H = {"a": (1,), "b": (0, 1), "c": (0, 1, 1)}


def _h_roots(c):
    """Distinct roots of the homogenized h as (vector, multiplicity); infinity is (1, 0)."""
    spec = c.spec
    roots = [((r, spec.one), multiplicity(c.h, r)) for r in root_values(c.h)]
    at_infinity = 3 - c.h.degree
    if at_infinity:
        roots.append(((spec.one, spec.zero), at_infinity))
    return roots


def _normal_form_mobius(c, case, roots):
    spec = c.spec
    by_mult = sorted(roots, key=lambda r: -r[1])
    if case == "a":
        (w, _), = by_mult
        if w == (spec.one, spec.zero):
            return spec.one, spec.zero, spec.zero, spec.one
        return w[0], spec.one, w[1], spec.zero
    if case == "b":
        (wd, _), (ws, _) = by_mult
        return wd[0], ws[0], wd[1], ws[1]
    # send infinity, 0, 1 to the three roots: w1 = a*winf + b*w0
    winf, w0, w1 = (r[0] for r in roots)
    m = Matrix(spec, ((winf[0], w0[0]), (winf[1], w0[1]))).inverse()
    a, b = m.apply(w1)
    return spec.mul(a, winf[0]), spec.mul(b, w0[0]), spec.mul(a, winf[1]), spec.mul(b, w0[1])


def _even_killing_shift(spec, case, f):
    f0, _, f2, _, f4, _, f6 = f

    def artin_schreier(gamma):
        z = spec.artin_schreier(gamma)
        if z is None:
            raise RootsNotRational(f"z^2 + z = {spec.format_value(gamma)} has no solution in {spec}")
        return z

    if case == "a":
        u3, u2 = spec.sqrt(f6), spec.sqrt(f4)
        u1 = spec.sqrt(spec.add(f2, u2))
        u0 = artin_schreier(f0)
    elif case == "b":
        u0, u3 = spec.sqrt(f0), spec.sqrt(f6)
        u1 = artin_schreier(f2)
        u2 = spec.sqrt(spec.add(f4, u3))
    else:
        u0, u3 = spec.sqrt(f0), spec.sqrt(f6)
        u1 = artin_schreier(spec.add(f2, u0))
        u2 = artin_schreier(spec.add(f4, u3))
    return Poly(spec, (u0, u1, u2, u3))


def normal_form_condition(spec, case, f1, f3, f5):
    if case == "a":
        return f5 != spec.zero
    if case == "b":
        return spec.mul(f1, f5) != spec.zero
    beta = spec.zero
    for v in (f1, f3, f5):
        beta = spec.add(beta, spec.add(v, spec.sqr(v)))
    return spec.mul(spec.mul(f1, f5), beta) != spec.zero


def char2_normal_form(c):
    """(case, model, iso) with h in {1, x, x^2+x} and f = f1 x + f3 x^3 + f5 x^5."""
    spec = c.spec
    if spec.characteristic != 2:
        raise UnsupportedField("normal forms are for characteristic 2")
    if c.h.is_zero():
        raise SingularCurve("h = 0 in characteristic 2")
    roots = _h_roots(c)
    if sum(m for _, m in roots) < 3:
        raise RootsNotRational(f"h = {c.h} does not split over {spec}")
    case = {1: "a", 2: "b", 3: "c"}[len(roots)]
    alpha, beta, gamma, delta = _normal_form_mobius(c, case, roots)
    moved = transform(c, ModelIsomorphism.mobius(spec, alpha, beta, gamma, delta))
    target = Poly.from_ints(spec, NORMAL_FORM_H[case])
    e = spec.div(moved.h.lead, target.lead)
    step1 = ModelIsomorphism.mobius(spec, alpha, beta, gamma, delta, e)
    scaled = transform(c, step1)
    step2 = ModelIsomorphism.y_map(spec, spec.one, _even_killing_shift(spec, case, scaled.fs))
    iso = step1.compose(step2)
    model = transform(c, iso)
    f1, f3, f5 = model.fs[1], model.fs[3], model.fs[5]
    if not normal_form_condition(spec, case, f1, f3, f5):
        raise SingularCurve(f"normal form case ({case}) fails its nonsingularity condition")
    return case, model, iso


# --- curve files --------------------------------------------------------------------

def curve_to_text(c):
    fmt = c.spec.format_value
    return "\n".join([
        f"field {c.spec}",
        "f " + ",".join(fmt(v) for v in c.fs),
        "h " + ",".join(fmt(v) for v in c.hs),
    ]) + "\n"


def parse_curve(text):
    entries = {}
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, _, value = line.partition(" ")
        entries[key] = value.strip()
    if "field" not in entries or "f" not in entries:
        raise FormatError("curve text needs `field` and `f` lines")
    spec = FieldSpec.parse(entries["field"])
    f = [spec.parse_value(v) for v in entries["f"].split(",")]
    h = [spec.parse_value(v) for v in entries.get("h", "0").split(",")]
    if len(f) > 7 or len(h) > 4:
        raise DegreeOverflow("at most 7 coefficients for f and 4 for h")
    return CurveModel(spec, Poly(spec, tuple(f)), Poly(spec, tuple(h)))


def load_curve(path):
    return parse_curve(Path(path).read_text())


def parse_point(c, text):
    """`x,y`, or one of the labels inf+, inf-, inf."""
    text = text.strip()
    points = {p.tag: p for p in points_at_infinity(c)}
    if text in INFINITY_TAGS:
        if text not in points:
            raise FormatError(f"{text} is not a point at infinity of this model")
        return points[text]
    try:
        x, y = (c.spec.parse_value(v.strip()) for v in text.split(","))
    except ValueError as exc:
        raise FormatError(f"cannot read point {text!r}") from exc
    point = CurvePoint.affine(c.spec.canonical(x), c.spec.canonical(y))
    if not is_on_curve(c, point):
        raise FormatError(f"{point.label(c.spec)} is not on the curve")
    return point


def parse_points(c, text):
    parts = [p for p in text.split(";") if p.strip()]
    if len(parts) != 2:
        raise FormatError(f"expected two points `x1,y1;x2,y2`, got {text!r}")
    return tuple(parse_point(c, p) for p in parts)


# --- random models -------------------------------------------------------------------

def random_odd_curve(spec, rng, degree=5):
    """Nonsingular model with the rational Weierstrass point x = r: f = ((x - r) g - h^2) / 4."""
    if spec.characteristic == 2 or not spec.is_finite:
        raise UnsupportedField("random odd-characteristic models need an odd prime field")
    x = Poly.x(spec)
    quarter = spec.inv(spec.from_int(4))
    while True:
        r = spec.random(rng)
        g = Poly(spec, tuple(spec.random(rng) for _ in range(degree - 1)) + (spec.one,))
        h = Poly(spec, tuple(spec.random(rng) for _ in range(3)))
        curve = CurveModel(spec, ((x - Poly.constant(spec, r)) * g - h * h).scale(quarter), h)
        if validate(curve).valid:
            return curve


def random_char2_curve(spec, rng, h_roots=2, degree=6):
    """Nonsingular model whose h splits with `h_roots` distinct affine roots."""
    if spec.kind != BINARY:
        raise UnsupportedField("random characteristic-2 models need a binary field")
    x = Poly.x(spec)
    while True:
        roots = {spec.random(rng) for _ in range(h_roots)}
        if len(roots) < h_roots:
            continue
        h = Poly.constant(spec, spec.random_nonzero(rng))
        for r in sorted(roots):
            h = h * (x - Poly.constant(spec, r))
        f = Poly(spec, tuple(spec.random(rng) for _ in range(degree)) + (spec.one,))
        curve = CurveModel(spec, f, h)
        if validate(curve).valid:
            return curve
