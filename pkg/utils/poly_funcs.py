"""
Univariate polynomials, small dense matrices, sparse kernel elimination and
the fixed monomial bases used by the synthesized forms.

All arithmetic is on raw field values through a `FieldSpec`; see
`utils.field_funcs`.
"""
import heapq
import itertools
from dataclasses import dataclass

from utils.errors import DivisionByZero, FieldMismatch, LengthMismatch, UnsupportedField
from utils.field_funcs import BINARY, FieldElement

EXHAUSTIVE_ROOT_LIMIT = 256


def _strip(spec, coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == spec.zero:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class Poly:
    spec: object
    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _strip(self.spec, self.coeffs))

    @classmethod
    def from_ints(cls, spec, values):
        return cls(spec, tuple(spec.canonical(v) for v in values))

    @classmethod
    def constant(cls, spec, c):
        return cls(spec, (c,))

    @classmethod
    def monomial(cls, spec, c, n):
        return cls(spec, (spec.zero,) * n + (c,))

    @classmethod
    def x(cls, spec):
        return cls(spec, (spec.zero, spec.one))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def lead(self):
        return self.coeffs[-1] if self.coeffs else self.spec.zero

    def is_zero(self):
        return not self.coeffs

    def coeff(self, i):
        return self.coeffs[i] if 0 <= i < len(self.coeffs) else self.spec.zero

    def padded(self, n):
        return [self.coeff(i) for i in range(n)]

    def _check(self, other):
        if other.spec != self.spec:
            raise FieldMismatch(f"{self.spec} vs {other.spec}")

    def __add__(self, other):
        self._check(other)
        add = self.spec.add
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.spec, tuple(add(self.coeff(i), other.coeff(i)) for i in range(n)))

    def __sub__(self, other):
        self._check(other)
        sub = self.spec.sub
        n = max(len(self.coeffs), len(other.coeffs))
        return Poly(self.spec, tuple(sub(self.coeff(i), other.coeff(i)) for i in range(n)))

    def __neg__(self):
        return Poly(self.spec, tuple(self.spec.neg(c) for c in self.coeffs))

    def __mul__(self, other):
        self._check(other)
        if self.is_zero() or other.is_zero():
            return Poly(self.spec)
        spec = self.spec
        out = [spec.zero] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == spec.zero:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] = spec.add(out[i + j], spec.mul(a, b))
        return Poly(spec, tuple(out))

    def scale(self, c):
        return Poly(self.spec, tuple(self.spec.mul(c, a) for a in self.coeffs))

    def __divmod__(self, other):
        self._check(other)
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        spec = self.spec
        rem = list(self.coeffs)
        db = other.degree
        inv_lead = spec.inv(other.lead)
        quot = [spec.zero] * max(len(rem) - db, 0)
        for k in range(len(rem) - 1 - db, -1, -1):
            q = spec.mul(rem[k + db], inv_lead)
            quot[k] = q
            if q == spec.zero:
                continue
            for j, b in enumerate(other.coeffs):
                rem[k + j] = spec.sub(rem[k + j], spec.mul(q, b))
        return Poly(spec, tuple(quot)), Poly(spec, tuple(rem[:db]))

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def monic(self):
        if self.is_zero():
            return self
        return self.scale(self.spec.inv(self.lead))

    def deriv(self):
        spec = self.spec
        return Poly(spec, tuple(spec.mul(spec.from_int(i), c) for i, c in enumerate(self.coeffs) if i))

    def __call__(self, x):
        """Horner evaluation at a raw field value."""
        spec = self.spec
        acc = spec.zero
        for c in reversed(self.coeffs):
            acc = spec.add(spec.mul(acc, x), c)
        return acc

    def pow_mod(self, e, modulus):
        result = Poly.constant(self.spec, self.spec.one) % modulus
        base = self % modulus
        while e:
            if e & 1:
                result = (result * base) % modulus
            base = (base * base) % modulus
            e >>= 1
        return result

    def homogeneous(self, d, num, den):
        """sum c_i num^i den^(d-i) for polynomials num, den."""
        spec = self.spec
        total = Poly(spec)
        one = Poly.constant(spec, spec.one)
        num_pows, den_pows = [one], [one]
        for _ in range(d):
            num_pows.append(num_pows[-1] * num)
            den_pows.append(den_pows[-1] * den)
        for i in range(d + 1):
            c = self.coeff(i)
            if c != spec.zero:
                total = total + (num_pows[i] * den_pows[d - i]).scale(c)
        return total

    def __str__(self):
        if self.is_zero():
            return "0"
        fmt = self.spec.format_value
        terms = [f"{fmt(c)}*x^{i}" if i else fmt(c) for i, c in enumerate(self.coeffs) if c != self.spec.zero]
        return " + ".join(reversed(terms))


def poly_gcd(a, b):
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def poly_xgcd(a, b):
    """(g, s, t) with g = s*a + t*b and g monic (or zero)."""
    spec = a.spec
    r0, r1 = a, b
    s0, s1 = Poly.constant(spec, spec.one), Poly(spec)
    t0, t1 = Poly(spec), Poly.constant(spec, spec.one)
    while not r1.is_zero():
        q, r = divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if r0.is_zero():
        return r0, s0, t0
    inv = spec.inv(r0.lead)
    return r0.scale(inv), s0.scale(inv), t0.scale(inv)


def poly_ops(a, b, op):
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "divrem":
        return divmod(a, b)
    if op == "gcd":
        if b.is_zero():
            raise DivisionByZero("gcd with the zero polynomial")
        return poly_gcd(a, b)
    raise ValueError(f"unknown polynomial op {op!r}")


# --- roots over finite fields ---------------------------------------------------

def _frobenius_gcd(g):
    spec = g.spec
    x = Poly.x(spec)
    if spec.kind == BINARY:
        xq = x % g
        for _ in range(spec.m):
            xq = (xq * xq) % g
    else:
        xq = x.pow_mod(spec.order, g)
    return poly_gcd(g, xq - x)


def _trace_poly(spec, c, g):
    term = Poly.constant(spec, c) * Poly.x(spec) % g
    total = term
    for _ in range(spec.m - 1):
        term = (term * term) % g
        total = total + term
    return total


def _split(g):
    """Roots of a monic squarefree polynomial with all roots in the field."""
    spec = g.spec
    if g.degree <= 0:
        return []
    if g.degree == 1:
        return [spec.neg(g.coeff(0))]
    candidates = []
    if spec.kind == BINARY:
        for k in range(spec.m):
            t = _trace_poly(spec, 1 << k, g)
            candidates.append(poly_gcd(g, t))
    else:
        half = (spec.order - 1) // 2
        one = Poly.constant(spec, spec.one)
        for delta in range(spec.order):
            shifted = Poly(spec, (spec.from_int(delta), spec.one))
            d = poly_gcd(g, shifted.pow_mod(half, g) - one)
            if 0 < d.degree < g.degree:
                candidates.append(d)
                break
    for d in candidates:
        if 0 < d.degree < g.degree:
            return _split(d) + _split(g // d)
    raise UnsupportedField(f"could not split {g}")


def root_values(p):
    """Distinct roots in the base field, sorted."""
    spec = p.spec
    if not spec.is_finite:
        raise UnsupportedField("root finding needs a finite field")
    if p.is_zero():
        raise DivisionByZero("roots of the zero polynomial")
    if p.degree <= 0:
        return []
    if spec.order <= EXHAUSTIVE_ROOT_LIMIT:
        return [x for x in spec.elements() if p(x) == spec.zero]
    return sorted(_split(_frobenius_gcd(p.monic())), key=spec.sort_key)


def _split_candidates(spec):
    if spec.kind == BINARY:
        # relative traces of x and x^3 separate distinct quadratic factors
        for k in (1, 3):
            for i in range(spec.m):
                yield Poly.monomial(spec, 1 << i, k)
        return
    for d in spec.elements():
        yield Poly(spec, (d, spec.one))
    for e in spec.elements():
        for d in spec.elements():
            yield Poly(spec, (d, e, spec.one))


def _split_equal_degree(g, d):
    """Factors of g, a monic squarefree product of irreducibles of degree d."""
    spec = g.spec
    if g.degree <= d:
        return [g] if g.degree == d else []
    one = Poly.constant(spec, spec.one)
    for r in _split_candidates(spec):
        r = r % g
        if spec.kind == BINARY:
            term, s = r, r
            for _ in range(spec.m * d - 1):
                term = (term * term) % g
                s = s + term
        else:
            s = r.pow_mod((spec.order ** d - 1) // 2, g) - one
        part = poly_gcd(g, s)
        if 0 < part.degree < g.degree:
            return _split_equal_degree(part, d) + _split_equal_degree(g // part, d)
    raise UnsupportedField(f"could not split {g} into degree-{d} factors")


def quadratic_factors(p):
    """Distinct monic irreducible quadratic factors over a finite field, sorted by coefficients."""
    spec = p.spec
    if not spec.is_finite:
        raise UnsupportedField("factoring needs a finite field")
    if p.is_zero():
        raise DivisionByZero("factors of the zero polynomial")
    if p.degree < 2:
        return []
    g = p.monic()
    x = Poly.x(spec)
    xq = x.pow_mod(spec.order, g)
    xq2 = xq.pow_mod(spec.order, g)
    upto_two = poly_gcd(g, xq2 - x)
    quadratic_part = upto_two // poly_gcd(upto_two, xq - x)
    factors = _split_equal_degree(quadratic_part, 2)
    return sorted(factors, key=lambda a: tuple(spec.sort_key(v) for v in reversed(a.coeffs)))


def multiplicity(p, r):
    linear = Poly(p.spec, (p.spec.neg(r), p.spec.one))
    count = 0
    while not p.is_zero():
        q, rem = divmod(p, linear)
        if not rem.is_zero():
            break
        p = q
        count += 1
    return count


def roots(p):
    return [(FieldElement(p.spec, r), multiplicity(p, r)) for r in root_values(p)]


# --- matrices -------------------------------------------------------------------

@dataclass(frozen=True)
class Matrix:
    spec: object
    rows: tuple

    @classmethod
    def of(cls, spec, rows):
        rows = tuple(tuple(r) for r in rows)
        if len({len(r) for r in rows}) > 1:
            raise LengthMismatch("ragged matrix rows")
        return cls(spec, rows)

    @classmethod
    def identity(cls, spec, n):
        return cls(spec, tuple(tuple(spec.one if i == j else spec.zero for j in range(n)) for i in range(n)))

    @property
    def shape(self):
        return len(self.rows), len(self.rows[0]) if self.rows else 0

    def __getitem__(self, ij):
        return self.rows[ij[0]][ij[1]]

    def transpose(self):
        return Matrix(self.spec, tuple(zip(*self.rows)))

    def apply(self, vec):
        dot = self.spec.dot
        return tuple(dot(row, vec) for row in self.rows)

    def __matmul__(self, other):
        if self.shape[1] != other.shape[0]:
            raise LengthMismatch(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows))
        dot = self.spec.dot
        return Matrix(self.spec, tuple(tuple(dot(r, c) for c in cols) for r in self.rows))

    def scale(self, c):
        mul = self.spec.mul
        return Matrix(self.spec, tuple(tuple(mul(c, a) for a in r) for r in self.rows))

    def inverse(self):
        spec = self.spec
        n = self.shape[0]
        aug = [list(r) + [spec.one if i == j else spec.zero for j in range(n)] for i, r in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col] != spec.zero), None)
            if piv is None:
                raise DivisionByZero("singular matrix")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = spec.inv(aug[col][col])
            aug[col] = [spec.mul(inv, a) for a in aug[col]]
            for r in range(n):
                if r != col and aug[r][col] != spec.zero:
                    factor = aug[r][col]
                    aug[r] = [spec.sub(a, spec.mul(factor, b)) for a, b in zip(aug[r], aug[col])]
        return Matrix(spec, tuple(tuple(r[n:]) for r in aug))

    def scalar_identity_factor(self):
        """lambda if the matrix is lambda * Id, else None."""
        n = self.shape[0]
        lam = self.rows[0][0]
        for i in range(n):
            for j in range(n):
                if self.rows[i][j] != (lam if i == j else self.spec.zero):
                    return None
        return lam


# --- sparse kernel ----------------------------------------------------------------

class KernelSolver:
    """
    Incremental row echelon form over sparse dict rows {column: value}.

    Each stored pivot row is normalized to 1 at its smallest column, so
    reducing a new row in ascending column order only introduces larger
    columns.
    """

    def __init__(self, spec, ncols):
        self.spec = spec
        self.ncols = ncols
        self.pivots = {}

    @property
    def rank(self):
        return len(self.pivots)

    def add_row(self, row):
        spec = self.spec
        row = {c: v for c, v in row.items() if v != spec.zero}
        heap = list(row)
        heapq.heapify(heap)
        seen = set()
        while heap:
            col = heapq.heappop(heap)
            if col in seen:
                continue
            seen.add(col)
            value = row.get(col, spec.zero)
            if value == spec.zero:
                row.pop(col, None)
                continue
            pivot_row = self.pivots.get(col)
            if pivot_row is None:
                continue
            for c, v in pivot_row.items():
                new = spec.sub(row.get(c, spec.zero), spec.mul(value, v))
                if new == spec.zero:
                    row.pop(c, None)
                else:
                    if c not in row and c not in seen:
                        heapq.heappush(heap, c)
                    row[c] = new
        if not row:
            return False
        lead = min(row)
        inv = spec.inv(row[lead])
        self.pivots[lead] = {c: spec.mul(inv, v) for c, v in row.items()}
        return True

    def kernel(self):
        spec = self.spec
        free = [c for c in range(self.ncols) if c not in self.pivots]
        order = sorted(self.pivots, reverse=True)
        basis = []
        for f in free:
            vec = {f: spec.one}
            for p in order:
                acc = spec.zero
                for c, v in self.pivots[p].items():
                    if c != p and c in vec:
                        acc = spec.add(acc, spec.mul(v, vec[c]))
                if acc != spec.zero:
                    vec[p] = spec.neg(acc)
            dense = [vec.get(c, spec.zero) for c in range(self.ncols)]
            first = next(v for v in dense if v != spec.zero)
            inv = spec.inv(first)
            basis.append(tuple(spec.mul(inv, v) for v in dense))
        return basis


def solve_kernel(m):
    """Basis of the right kernel of a Matrix, first nonzero coordinate 1."""
    nrows, ncols = m.shape
    solver = KernelSolver(m.spec, ncols)
    for r in m.rows:
        solver.add_row(dict(enumerate(r)))
    return solver.kernel()


# --- monomial bases ---------------------------------------------------------------

def _degree_monomials(nvars, degree):
    exps = [e for e in itertools.product(range(degree + 1), repeat=nvars) if sum(e) == degree]
    return sorted(exps, reverse=True)


QUARTIC4 = "quartic4"
BIQUADRATIC44 = "biquadratic44"


@dataclass(frozen=True)
class MonomialBasis:
    """
    quartic4: the 35 degree-4 monomials in k1..k4, descending lex on the
    exponent tuple (k1^4, k1^3 k2, ..., k4^4).

    biquadratic44: index 10*i + j pairs the i-th degree-2 monomial in x1..x4
    with the j-th degree-2 monomial in y1..y4, both in descending lex order.
    """

    kind: str

    @property
    def monomials(self):
        if self.kind == QUARTIC4:
            return QUARTIC_EXPONENTS
        if self.kind == BIQUADRATIC44:
            return [(ex, ey) for ex in QUADRATIC_EXPONENTS for ey in QUADRATIC_EXPONENTS]
        raise ValueError(f"unknown monomial basis {self.kind!r}")

    @property
    def size(self):
        return 35 if self.kind == QUARTIC4 else 100

    def index(self, monomial):
        return self.monomials.index(monomial)

    def values(self, spec, x, y=None):
        if self.kind == QUARTIC4:
            return quartic_monomials(spec, x)
        return biquadratic_monomials(spec, x, y)


QUARTIC_EXPONENTS = _degree_monomials(4, 4)
QUADRATIC_EXPONENTS = _degree_monomials(4, 2)
QUADRATIC_PAIRS = [tuple(i for i in range(4) for _ in range(e[i])) for e in QUADRATIC_EXPONENTS]
QUARTIC_FACTORS = [tuple(i for i in range(4) for _ in range(e[i])) for e in QUARTIC_EXPONENTS]


def quadratic_monomials(spec, x):
    mul, sqr = spec.mul, spec.sqr
    return [sqr(x[i]) if i == j else mul(x[i], x[j]) for i, j in QUADRATIC_PAIRS]


def quartic_monomials(spec, x):
    mul, sqr = spec.mul, spec.sqr
    quad = dict(zip(QUADRATIC_PAIRS, quadratic_monomials(spec, x)))
    return [sqr(quad[(a, b)]) if (a, b) == (c, d) else mul(quad[(a, b)], quad[(c, d)])
            for a, b, c, d in QUARTIC_FACTORS]


def biquadratic_monomials(spec, x, y):
    mul = spec.mul
    qy = quadratic_monomials(spec, y)
    return [mul(a, b) for a in quadratic_monomials(spec, x) for b in qy]


def form_value(spec, basis, coeffs, x, y=None):
    if len(coeffs) != basis.size:
        raise LengthMismatch(f"{basis.kind} needs {basis.size} coefficients, got {len(coeffs)}")
    return spec.dot(coeffs, basis.values(spec, x, y))


def eval_form(basis, coeffs, point, other=None):
    """Evaluate a form given FieldElement coefficients and quadruples."""
    spec = point[0].spec
    raw = [c.value for c in coeffs]
    x = [c.value for c in point]
    y = [c.value for c in other] if other is not None else None
    return FieldElement(spec, form_value(spec, basis, raw, x, y))
