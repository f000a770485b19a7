"""
Exact arithmetic in the coefficient fields.

A `FieldSpec` is the field context: it owns the arithmetic on raw canonical
representatives (residues for GF(p), bit patterns for GF(2^m), reduced
`Fraction`s for Q). Everything performance-sensitive in the package works on
raw values through the spec; `FieldElement` is the typed wrapper for the
public API and mixes only with elements of the same spec.
"""
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from utils.errors import DivisionByZero, FieldMismatch, FormatError, UnsupportedField

PRIME = "prime"
BINARY = "binary"
RATIONAL = "rational"

MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
TABLE_LIMIT = 16
MAX_BINARY_DEGREE = 63


def is_prime(n):
    # deterministic Miller-Rabin for n < 3.3e24
    if n < 2:
        return False
    for q in MR_BASES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def prime_factors(n):
    factors, q = [], 2
    while q * q <= n:
        if n % q == 0:
            factors.append(q)
            while n % q == 0:
                n //= q
        q += 1
    if n > 1:
        factors.append(n)
    return factors


# GF(2)[x] on python ints, bit i = coefficient of x^i

def gf2_mulmod(a, b, modulus):
    deg = modulus.bit_length() - 1
    top = 1 << deg
    result = 0
    while b:
        if b & 1:
            result ^= a
        b >>= 1
        a <<= 1
        if a & top:
            a ^= modulus
    return result


def gf2_mod(a, modulus):
    deg = modulus.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= modulus << (a.bit_length() - 1 - deg)
    return a


def gf2_gcd(a, b):
    while b:
        a, b = b, gf2_mod(a, b)
    return a


def gf2_is_irreducible(modulus):
    """Ben-Or test: no factor of degree <= n/2 divides the modulus."""
    n = modulus.bit_length() - 1
    if n < 1:
        return False
    x = 0b10
    u = x
    for _ in range(n // 2):
        u = gf2_mulmod(u, u, modulus)
        if gf2_gcd(modulus, u ^ x) != 1:
            return False
    return True


def default_binary_modulus(m):
    """Lexicographically smallest irreducible polynomial of degree m."""
    for low in range(1, 1 << m, 2):
        candidate = (1 << m) | low
        if gf2_is_irreducible(candidate):
            return candidate
    raise UnsupportedField(f"no irreducible polynomial of degree {m}")


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    p: int = 0
    m: int = 0
    modulus: int = 0
    _exp: list = field(default=None, init=False, repr=False, compare=False)
    _log: list = field(default=None, init=False, repr=False, compare=False)
    _as_basis: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.kind == PRIME:
            if self.p < 3 or self.p >= 1 << 64 or not is_prime(self.p):
                raise UnsupportedField(f"p={self.p} is not an odd prime below 2^64")
        elif self.kind == BINARY:
            if not 1 <= self.m <= MAX_BINARY_DEGREE:
                raise UnsupportedField(f"binary extension degree m={self.m} outside 1..63")
            if self.modulus.bit_length() - 1 != self.m or not gf2_is_irreducible(self.modulus):
                raise UnsupportedField(f"modulus {self.modulus:#x} is not irreducible of degree {self.m}")
            if self.m <= TABLE_LIMIT:
                self._build_tables()
        elif self.kind != RATIONAL:
            raise UnsupportedField(f"unknown field kind {self.kind!r}")

    def _build_tables(self):
        q1 = (1 << self.m) - 1
        factors = prime_factors(q1)

        def slow_pow(a, e):
            r = 1
            while e:
                if e & 1:
                    r = gf2_mulmod(r, a, self.modulus)
                a = gf2_mulmod(a, a, self.modulus)
                e >>= 1
            return r

        generator = 1
        for g in range(2 if self.m > 1 else 1, q1 + 1):
            if all(slow_pow(g, q1 // r) != 1 for r in factors):
                generator = g
                break
        exp = [0] * (2 * q1)
        log = [0] * (q1 + 1)
        x = 1
        for i in range(q1):
            exp[i] = x
            log[x] = i
            x = gf2_mulmod(x, generator, self.modulus)
        exp[q1:] = exp[:q1]
        object.__setattr__(self, "_exp", exp)
        object.__setattr__(self, "_log", log)

    # --- constructors -----------------------------------------------------

    @classmethod
    def prime(cls, p):
        return cls(PRIME, p=p)

    @classmethod
    def binary(cls, m, modulus=None):
        return cls(BINARY, m=m, modulus=modulus or default_binary_modulus(m))

    @classmethod
    def rational(cls):
        return cls(RATIONAL)

    @classmethod
    def parse(cls, text):
        """`prime:p=1009`, `binary:m=16,mod=0x1002b` (mod optional), `rational`."""
        text = text.strip()
        if text == RATIONAL:
            return cls.rational()
        match = re.fullmatch(r"(prime|binary):(.*)", text)
        if not match:
            raise FormatError(f"bad field spec {text!r}")
        params = {}
        for item in match.group(2).split(","):
            key, sep, value = item.partition("=")
            try:
                params[key.strip()] = int(value.strip(), 0)
            except ValueError:
                raise FormatError(f"bad field parameter {item!r} in {text!r}") from None
        try:
            if match.group(1) == PRIME:
                return cls.prime(params["p"])
            return cls.binary(params["m"], params.get("mod"))
        except KeyError as exc:
            raise FormatError(f"field spec {text!r} lacks {exc}") from None

    def __str__(self):
        if self.kind == PRIME:
            return f"prime:p={self.p}"
        if self.kind == BINARY:
            return f"binary:m={self.m},mod={self.modulus:#x}"
        return RATIONAL

    # --- structure ----------------------------------------------------------

    @property
    def characteristic(self):
        return {PRIME: self.p, BINARY: 2, RATIONAL: 0}[self.kind]

    @property
    def order(self):
        if self.kind == PRIME:
            return self.p
        if self.kind == BINARY:
            return 1 << self.m
        return None

    @property
    def is_finite(self):
        return self.kind != RATIONAL

    @property
    def zero(self):
        return Fraction(0) if self.kind == RATIONAL else 0

    @property
    def one(self):
        return Fraction(1) if self.kind == RATIONAL else 1

    def from_int(self, n):
        if self.kind == PRIME:
            return n % self.p
        if self.kind == BINARY:
            return n & 1
        return Fraction(n)

    def canonical(self, value):
        if self.kind == PRIME:
            return int(value) % self.p
        if self.kind == BINARY:
            value = int(value)
            if value < 0:
                raise FormatError(f"negative bit pattern {value}")
            return gf2_mod(value, self.modulus)
        return Fraction(value)

    def elements(self):
        if not self.is_finite:
            raise UnsupportedField("cannot enumerate the rationals")
        return range(self.order)

    def sort_key(self, value):
        return value

    # --- arithmetic on raw values --------------------------------------------

    def add(self, a, b):
        if self.kind == PRIME:
            s = a + b
            return s - self.p if s >= self.p else s
        if self.kind == BINARY:
            return a ^ b
        return a + b

    def sub(self, a, b):
        if self.kind == PRIME:
            return (a - b) % self.p
        if self.kind == BINARY:
            return a ^ b
        return a - b

    def neg(self, a):
        if self.kind == PRIME:
            return (-a) % self.p
        if self.kind == BINARY:
            return a
        return -a

    def mul(self, a, b):
        if self.kind == PRIME:
            return a * b % self.p
        if self.kind == BINARY:
            if self._exp is not None:
                if a == 0 or b == 0:
                    return 0
                return self._exp[self._log[a] + self._log[b]]
            return gf2_mulmod(a, b, self.modulus)
        return a * b

    def sqr(self, a):
        return self.mul(a, a)

    def inv(self, a):
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.kind == PRIME:
            return pow(a, -1, self.p)
        if self.kind == BINARY:
            if self._exp is not None:
                q1 = (1 << self.m) - 1
                return self._exp[(q1 - self._log[a]) % q1]
            return self.pow(a, (1 << self.m) - 2)
        return 1 / a

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def pow(self, a, e):
        if e < 0:
            return self.pow(self.inv(a), -e)
        if self.kind == PRIME:
            return pow(a, e, self.p)
        if self.kind == RATIONAL:
            return a ** e
        result = 1
        while e:
            if e & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            e >>= 1
        return result

    def dot(self, xs, ys):
        total = self.zero
        for a, b in zip(xs, ys):
            total = self.add(total, self.mul(a, b))
        return total

    # --- roots of y^2 + b y = c ---------------------------------------------

    def trace(self, a):
        if self.kind != BINARY:
            raise UnsupportedField("absolute trace is defined here for binary fields only")
        t, x = a, a
        for _ in range(self.m - 1):
            x = self.sqr(x)
            t ^= x
        return t

    def half_trace(self, a):
        h, x = a, a
        for _ in range((self.m - 1) // 2):
            x = self.sqr(self.sqr(x))
            h ^= x
        return h

    def _artin_schreier_basis(self):
        if self._as_basis is None:
            basis = {}
            for i in range(self.m):
                vec, tag = self.sqr(1 << i) ^ (1 << i), 1 << i
                while vec:
                    top = vec.bit_length() - 1
                    if top not in basis:
                        basis[top] = (vec, tag)
                        break
                    bvec, btag = basis[top]
                    vec ^= bvec
                    tag ^= btag
            object.__setattr__(self, "_as_basis", basis)
        return self._as_basis

    def artin_schreier(self, gamma):
        """One z with z^2 + z = gamma, or None."""
        if self.trace(gamma):
            return None
        if self.m % 2 == 1:
            return self.half_trace(gamma)
        z = 0
        basis = self._artin_schreier_basis()
        while gamma:
            top = gamma.bit_length() - 1
            if top not in basis:
                return None
            bvec, btag = basis[top]
            gamma ^= bvec
            z ^= btag
        return z

    def sqrt(self, a):
        """A square root of a, or None when a is not a square."""
        if self.kind == BINARY:
            for _ in range(self.m - 1):
                a = self.sqr(a)
            return a
        if self.kind == RATIONAL:
            if a < 0:
                return None
            num, den = math.isqrt(a.numerator), math.isqrt(a.denominator)
            if num * num != a.numerator or den * den != a.denominator:
                return None
            return Fraction(num, den)
        return tonelli_shanks(a, self.p)

    def quad_roots(self, b, c):
        """Sorted list of all y with y^2 + b*y = c."""
        if self.kind == BINARY:
            if b == 0:
                return [self.sqrt(c)]
            gamma = self.div(c, self.sqr(b))
            z = self.artin_schreier(gamma)
            if z is None:
                return []
            return sorted({self.mul(b, z), self.mul(b, z ^ 1)})
        disc = self.add(self.sqr(b), self.mul(self.from_int(4), c))
        s = self.sqrt(disc)
        if s is None:
            return []
        half = self.inv(self.from_int(2))
        roots = {self.mul(self.sub(s, b), half), self.mul(self.sub(self.neg(s), b), half)}
        return sorted(roots, key=self.sort_key)

    # --- randomness and text ---------------------------------------------------

    def random(self, rng):
        if not self.is_finite:
            raise UnsupportedField("uniform sampling needs a finite field")
        return int(rng.integers(0, self.order, dtype=np.uint64))

    def random_nonzero(self, rng):
        while True:
            value = self.random(rng)
            if value:
                return value

    def format_value(self, value):
        if self.kind == BINARY:
            return f"{value:#x}"
        return str(value)

    def parse_value(self, text):
        text = text.strip()
        try:
            if self.kind == BINARY:
                return self.canonical(int(text, 0))
            if self.kind == PRIME:
                return self.canonical(int(text))
            return Fraction(text)
        except ValueError as exc:
            raise FormatError(f"bad {self.kind} field value {text!r}") from exc


def tonelli_shanks(a, p):
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r


def make_rng(seed):
    """The only source of randomness in the package."""
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class FieldElement:
    spec: FieldSpec
    value: object

    @classmethod
    def of(cls, spec, value):
        return cls(spec, spec.canonical(value))

    def _other(self, other):
        if isinstance(other, int):
            return self.spec.from_int(other)
        if not isinstance(other, FieldElement):
            return NotImplemented
        if other.spec != self.spec:
            raise FieldMismatch(f"{self.spec} vs {other.spec}")
        return other.value

    def _wrap(self, value):
        return FieldElement(self.spec, value)

    def __add__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.add(self.value, b))

    __radd__ = __add__

    def __sub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.sub(self.value, b))

    def __rsub__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.sub(b, self.value))

    def __mul__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.mul(self.value, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.div(self.value, b))

    def __rtruediv__(self, other):
        b = self._other(other)
        return NotImplemented if b is NotImplemented else self._wrap(self.spec.div(b, self.value))

    def __neg__(self):
        return self._wrap(self.spec.neg(self.value))

    def __pow__(self, e):
        return self._wrap(self.spec.pow(self.value, e))

    def is_zero(self):
        return self.value == 0

    def __str__(self):
        return self.spec.format_value(self.value)


def arith(a, b, op):
    """Binary operation by name: op in {add, sub, mul, div}."""
    if a.spec != b.spec:
        raise FieldMismatch(f"{a.spec} vs {b.spec}")
    return {"add": a.__add__, "sub": a.__sub__, "mul": a.__mul__, "div": a.__truediv__}[op](b)


def quad_solve(b, c):
    if b.spec != c.spec:
        raise FieldMismatch(f"{b.spec} vs {c.spec}")
    return {FieldElement(b.spec, y) for y in b.spec.quad_roots(b.value, c.value)}


def random_element(spec, rng):
    return FieldElement(spec, spec.random(rng))
