"""
Pseudo-arithmetic on the Kummer surface: doubling through the duplication
quartics, differential addition through the biquadratic forms and the
Montgomery ladder built from them. Everything stays projective; only the
final result is normalized.
"""
import logging
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from pydantic import BaseModel

from app.synthesis_service import FORM_ORDER, apply_delta, bqf_values, fingerprint, proportional
from utils.config import load_settings
from utils.errors import (
    AllPivotsFailed,
    FormulaSetMissing,
    SelfCheckFailed,
    StaleFormulaCache,
    UnsupportedField,
    ZeroOutput,
)
from utils.kummer_funcs import KummerPoint, quartic_from_curve, two_torsion_classes, w_matrix_char2

logger = logging.getLogger("kummer.ladder")

FORM_INDEX = {key: n for n, key in enumerate(FORM_ORDER)}
OPERATIONS = ("mul", "sqr", "inv", "add", "sub")


@dataclass(frozen=True)
class LadderContext:
    curve: object
    formulas: object
    quartic: object
    translations: dict = field(default_factory=dict)
    cross_pivot_check: bool = False

    @classmethod
    def build(cls, curve, formulas, cross_pivot_check=None):
        if formulas.fingerprint != fingerprint(curve):
            raise StaleFormulaCache("formula set does not belong to this curve")
        if cross_pivot_check is None:
            cross_pivot_check = load_settings().cross_pivot_check
        translations = dict(formulas.w)
        if curve.spec.characteristic == 2 and curve.spec.is_finite:
            for tt in two_torsion_classes(curve):
                try:
                    translations[tt.class_id] = w_matrix_char2(curve, tt.data)
                except UnsupportedField as exc:
                    logger.debug("no printed translation matrix for %s: %s", tt.class_id, exc)
        return cls(curve, formulas, quartic_from_curve(curve), translations, cross_pivot_check)

    @property
    def spec(self):
        return self.curve.spec


class CountingSpec:
    """Field proxy that counts the operations the ladder performs."""

    def __init__(self, spec):
        self._spec = spec
        self.counts = Counter()

    def __getattr__(self, name):
        return getattr(self._spec, name)

    def mul(self, a, b):
        self.counts["mul"] += 1
        return self._spec.mul(a, b)

    def sqr(self, a):
        self.counts["sqr"] += 1
        return self._spec.sqr(a)

    def inv(self, a):
        self.counts["inv"] += 1
        return self._spec.inv(a)

    def add(self, a, b):
        self.counts["add"] += 1
        return self._spec.add(a, b)

    def sub(self, a, b):
        self.counts["sub"] += 1
        return self._spec.sub(a, b)

    def dot(self, xs, ys):
        total = self._spec.zero
        for a, b in zip(xs, ys):
            total = self.add(total, self.mul(a, b))
        return total


# --- raw-coordinate kernels (spec may be a CountingSpec) ---------------------------------

def _xdbl(spec, delta, x):
    out = apply_delta(spec, delta, x)
    if all(v == spec.zero for v in out):
        raise ZeroOutput(f"duplication vanished at {x}")
    return out


def _recover(spec, b, z, j):
    bjj = b[FORM_INDEX[(j, j)]]
    out = []
    for i in range(4):
        if i == j:
            out.append(spec.mul(bjj, z[j]))
        else:
            bij = b[FORM_INDEX[(min(i, j), max(i, j))]]
            out.append(spec.sub(spec.mul(bij, z[j]), spec.mul(bjj, z[i])))
    return tuple(out)


def _xadd(spec, bqf, x, y, z, cross_check=False):
    b = bqf_values(spec, bqf, x, y)
    pivots = [j for j in range(4) if z[j] != spec.zero]
    results = []
    for j in pivots:
        w = _recover(spec, b, z, j)
        if any(v != spec.zero for v in w):
            if not cross_check:
                return w
            results.append(w)
    if not results:
        raise AllPivotsFailed(f"every pivot gives w = 0 for x={x}, y={y}, z={z}")
    real = spec._spec if isinstance(spec, CountingSpec) else spec
    if not all(proportional(real, results[0], r) for r in results[1:]):
        raise SelfCheckFailed("pivots disagree in differential addition")
    return results[0]


def _ladder(spec, ctx, x, n):
    r0 = (spec.zero, spec.zero, spec.zero, spec.one)
    r1 = tuple(x)
    delta, bqf = ctx.formulas.delta, ctx.formulas.bqf
    if n == 0:
        return r0
    for bit in bin(n)[2:]:
        if bit == "1":
            r0 = _xadd(spec, bqf, r1, r0, x, ctx.cross_pivot_check)
            r1 = _xdbl(spec, delta, r1)
        else:
            r1 = _xadd(spec, bqf, r1, r0, x, ctx.cross_pivot_check)
            r0 = _xdbl(spec, delta, r0)
    return r0


# --- public operations -------------------------------------------------------------------

def xdbl(ctx, x):
    return KummerPoint(ctx.spec, _xdbl(ctx.spec, ctx.formulas.delta, x.coords))


def xadd(ctx, x, y, z):
    """kappa(P+Q) from x = kappa(P), y = kappa(Q), z = kappa(P-Q)."""
    w = _xadd(ctx.spec, ctx.formulas.bqf, x.coords, y.coords, z.coords, ctx.cross_pivot_check)
    return KummerPoint(ctx.spec, w)


def ladder(ctx, x, n):
    if n < 0:
        raise ValueError("scalar must be nonnegative")
    return KummerPoint(ctx.spec, _ladder(ctx.spec, ctx, x.coords, n)).normalized()


def translate(ctx, class_id, x):
    if class_id not in ctx.translations:
        raise FormulaSetMissing(f"no translation matrix for {class_id}")
    return x.apply(ctx.translations[class_id])


# --- benchmark ------------------------------------------------------------------------------

class BenchReport(BaseModel):
    field: str
    bits: int
    trials: int
    xdbl: dict
    xadd: dict
    per_bit: dict
    seconds_per_bit_mean: float
    seconds_per_bit_std: float


def operation_counts(ctx, x):
    spec = CountingSpec(ctx.spec)
    x2 = _xdbl(spec, ctx.formulas.delta, x.coords)
    dbl = dict(spec.counts)
    spec.counts.clear()
    _xadd(spec, ctx.formulas.bqf, x2, x.coords, x.coords)
    add_counts = dict(spec.counts)
    return dbl, add_counts


def bench(ctx, x, trials, rng, bits=40):
    """Exact operation counts per ladder bit plus wall time per bit."""
    if not ctx.spec.is_finite:
        raise UnsupportedField("benchmarks run over finite fields")
    per_bit = None
    timings = []
    rows = []
    for trial in range(trials):
        n = int(rng.integers(1 << (bits - 1), 1 << bits, dtype=np.uint64))
        spec = CountingSpec(ctx.spec)
        _ladder(spec, ctx, x.coords, n)
        counts = {k: spec.counts.get(k, 0) / bits for k in OPERATIONS}
        if per_bit is not None and counts != per_bit:
            raise SelfCheckFailed("operation counts depend on the scalar")
        per_bit = counts
        start = time.perf_counter()
        _ladder(ctx.spec, ctx, x.coords, n)
        elapsed = (time.perf_counter() - start) / bits
        timings.append(elapsed)
        rows.append({"trial": trial, "scalar": n, "seconds_per_bit": elapsed, **counts})
    frame = pd.DataFrame(rows)
    logger.info("bench over %s:\n%s", ctx.spec, frame.to_string(index=False))
    dbl, add_counts = operation_counts(ctx, x)
    return BenchReport(
        field=str(ctx.spec),
        bits=bits,
        trials=trials,
        xdbl=dbl,
        xadd=add_counts,
        per_bit=per_bit or {},
        seconds_per_bit_mean=float(np.mean(timings)) if timings else 0.0,
        seconds_per_bit_std=float(np.std(timings)) if timings else 0.0,
    ), frame
