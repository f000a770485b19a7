"""
Executable checks: exhaustive searches for the two vanishing lemmas of the
characteristic-2 normal forms over tiny fields, and the randomized identity
suites that run the whole pipeline over a corpus of curves.
"""
import logging
import time
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np
import pandas as pd
import yaml
from pydantic import BaseModel
from tqdm import tqdm

from app.ladder_service import LadderContext, ladder, xadd
from app.synthesis_service import (
    OracleSampler,
    apply_delta,
    bqf_failures,
    bqf_values,
    crosscheck_b_conversion,
    crosscheck_tau_delta,
    delta_failures,
    lift_formula_set,
    proportional,
    synthesis_field,
    synthesize,
    translation_failures,
)
from utils.config import load_settings
from utils.curve_funcs import (
    NORMAL_FORM_H,
    CurveModel,
    normal_form_condition,
    random_char2_curve,
    random_odd_curve,
    simplified_model,
    validate,
)
from utils.errors import (
    CounterexampleFound,
    KummerError,
    SingularCurve,
    SuiteFailed,
    UnsupportedField,
)
from utils.field_funcs import BINARY, FieldSpec, make_rng
from utils.jacobian_funcs import scalar_mul, to_point_pair, two_torsion_divisor
from utils.kummer_funcs import KummerPoint, kappa, on_surface, quartic_from_curve, two_torsion_classes, w_matrix_char2
from utils.poly_funcs import Poly

logger = logging.getLogger("kummer.verify")

DELTA_FIELD_LIMIT = 64
BQF_FIELD_LIMIT = 8
LADDER_SCALAR_BOUND = 1 << 40
RATIONAL_SCALAR_BOUND = 1 << 3
PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"


# --- lemma searches -----------------------------------------------------------------------

class LemmaReport(BaseModel):
    lemma: str
    case: str
    field: str
    coefficients: list[str]
    search_space: int
    surface_points: int
    counterexamples: list[str] = []
    seconds: float = 0.0
    notes: str = ""

    @property
    def passed(self):
        return not self.counterexamples


def normal_form_curve(spec, case, coeffs):
    """y^2 + h y = f1 x + f3 x^3 + f5 x^5 with h the normal form of `case`."""
    if case not in NORMAL_FORM_H:
        raise ValueError(f"unknown normal form case {case!r}; expected a, b or c")
    if spec.kind != BINARY:
        raise UnsupportedField("normal forms live in characteristic 2")
    f1, f3, f5 = coeffs
    if not normal_form_condition(spec, case, f1, f3, f5):
        raise SingularCurve(f"case ({case}) condition fails for f1, f3, f5 = {', '.join(map(spec.format_value, coeffs))}")
    zero = spec.zero
    curve = CurveModel(spec, Poly(spec, (zero, f1, zero, f3, zero, f5)), Poly.from_ints(spec, NORMAL_FORM_H[case]))
    check = validate(curve)
    if not check.valid:
        raise SingularCurve(check.reason)
    return curve


def projective_points(spec):
    """One representative per point of P^3: the first nonzero coordinate is 1."""
    elements = list(spec.elements())
    for lead in range(4):
        for tail in product(elements, repeat=3 - lead):
            yield (spec.zero,) * lead + (spec.one,) + tail


def surface_points(curve, quiet=True):
    q = quartic_from_curve(curve)
    total = (curve.spec.order ** 4 - 1) // (curve.spec.order - 1)
    points = projective_points(curve.spec)
    return [x for x in tqdm(points, total=total, desc="surface", disable=True if quiet else None, leave=False)
            if q.evaluate(x) == curve.spec.zero]


def is_delta_counterexample(formulas, coords):
    spec = formulas.spec
    return any(v != spec.zero for v in coords) and all(v == spec.zero for v in apply_delta(spec, formulas.delta, coords))


def is_bqf_counterexample(formulas, x, y):
    spec = formulas.spec
    if all(v == spec.zero for v in x) or all(v == spec.zero for v in y):
        return False
    return all(v == spec.zero for v in bqf_values(spec, formulas.bqf, x, y))


def _lemma_curve(case, coeffs, spec, limit):
    if not spec.is_finite or spec.order > limit:
        raise UnsupportedField(f"exhaustive search needs a binary field of order <= {limit}, got {spec}")
    return normal_form_curve(spec, case, tuple(coeffs))


def _recheck(formulas, seed, settings, bqf):
    """Fresh-sample failures of the identity behind a lemma, counted over the synthesis field."""
    embedding = synthesis_field(formulas.spec, settings.extension_degree)
    lifted = lift_formula_set(formulas, embedding) if embedding else formulas
    sampler = OracleSampler(lifted.curve, make_rng(seed + 7), settings.retry_attempts)
    count = settings.fresh_samples
    failures = bqf_failures(lifted, sampler, count) if bqf else delta_failures(lifted, sampler, count)
    return f"{failures}/{count} fresh {'biquadratic' if bqf else 'duplication'} identity failures"


def _finish(report, formulas, seed, settings, bqf):
    if report.counterexamples:
        report.notes = _recheck(formulas, seed, settings, bqf)
        logger.error("%s lemma: %d counterexamples (%s)", report.lemma, len(report.counterexamples), report.notes)
        exc = CounterexampleFound(f"{report.lemma} lemma fails at {report.counterexamples[0]} ({report.notes})")
        exc.report = report
        raise exc
    return report


def lemma_delta_search(case, coeffs, spec, seed=None, settings=None, formulas=None, quiet=True):
    """Every nonzero x on the surface has delta(x) != 0."""
    settings = settings or load_settings()
    seed = settings.seed if seed is None else seed
    curve = _lemma_curve(case, coeffs, spec, DELTA_FIELD_LIMIT)
    start = time.perf_counter()
    formulas = formulas or synthesize(curve, seed, settings, quiet=quiet, with_bqf=False)
    points = surface_points(curve, quiet)
    bad = [KummerPoint(spec, x) for x in points if is_delta_counterexample(formulas, x)]
    report = LemmaReport(
        lemma="delta",
        case=case,
        field=str(spec),
        coefficients=[spec.format_value(v) for v in coeffs],
        search_space=spec.order ** 4,
        surface_points=len(points),
        counterexamples=[str(k) for k in bad],
        seconds=time.perf_counter() - start,
    )
    return _finish(report, formulas, seed, settings, bqf=False)


def lemma_b_search(case, coeffs, spec, seed=None, settings=None, formulas=None, quiet=True):
    """All B_ij(x, y) vanishing on the surface forces x = 0 or y = 0."""
    settings = settings or load_settings()
    seed = settings.seed if seed is None else seed
    curve = _lemma_curve(case, coeffs, spec, BQF_FIELD_LIMIT)
    start = time.perf_counter()
    formulas = formulas or synthesize(curve, seed, settings, quiet=quiet)
    points = surface_points(curve, quiet)
    pairs = product(points, repeat=2)
    bad = [
        f"{KummerPoint(spec, x)} ; {KummerPoint(spec, y)}"
        for x, y in tqdm(pairs, total=len(points) ** 2, desc="pairs", disable=True if quiet else None, leave=False)
        if is_bqf_counterexample(formulas, x, y)
    ]
    report = LemmaReport(
        lemma="biquadratic",
        case=case,
        field=str(spec),
        coefficients=[spec.format_value(v) for v in coeffs],
        search_space=spec.order ** 8,
        surface_points=len(points),
        counterexamples=bad,
        seconds=time.perf_counter() - start,
    )
    return _finish(report, formulas, seed, settings, bqf=True)


# --- corpus -----------------------------------------------------------------------------------

@dataclass(frozen=True)
class CorpusEntry:
    name: str
    curve: CurveModel


def _normal_form_random(spec, case, rng):
    while True:
        coeffs = tuple(spec.random(rng) for _ in range(3))
        try:
            return normal_form_curve(spec, case, coeffs)
        except SingularCurve:
            continue


def default_corpus(seed=None):
    """Twelve curves: odd prime fields, the three normal forms, split-h char 2 and one rational curve."""
    seed = load_settings().seed if seed is None else seed
    rng = make_rng(seed)
    big_p, small_p = FieldSpec.prime(2 ** 61 - 1), FieldSpec.prime(1009)
    gf = FieldSpec.binary(16)
    entries = [
        CorpusEntry("p61-deg5", random_odd_curve(big_p, rng, 5)),
        CorpusEntry("p61-deg6", random_odd_curve(big_p, rng, 6)),
        CorpusEntry("p1009-deg5-a", random_odd_curve(small_p, rng, 5)),
        CorpusEntry("p1009-deg5-b", random_odd_curve(small_p, rng, 5)),
        CorpusEntry("p1009-deg6-a", random_odd_curve(small_p, rng, 6)),
        CorpusEntry("p1009-deg6-b", random_odd_curve(small_p, rng, 6)),
        CorpusEntry("gf2^16-case-a", _normal_form_random(gf, "a", rng)),
        CorpusEntry("gf2^16-case-b", _normal_form_random(gf, "b", rng)),
        CorpusEntry("gf2^16-case-c", _normal_form_random(gf, "c", rng)),
        CorpusEntry("gf2^16-split-h-a", random_char2_curve(gf, rng)),
        CorpusEntry("gf2^16-split-h-b", random_char2_curve(gf, rng)),
        CorpusEntry("rational", CurveModel.from_ints(FieldSpec.rational(), (1, 4, 0, -5, 0, 1))),
    ]
    return entries


def load_corpus(path):
    """YAML corpus: `curves:` list of {name, field, f, h}. The word `default` gives the built-in corpus."""
    if str(path) == "default":
        return default_corpus()
    data = yaml.safe_load(Path(path).read_text()) or {}
    entries = []
    for n, item in enumerate(data.get("curves", [])):
        spec = FieldSpec.parse(item["field"])
        f = Poly(spec, tuple(spec.parse_value(str(v)) for v in item["f"]))
        h = Poly(spec, tuple(spec.parse_value(str(v)) for v in item.get("h", [0])))
        entries.append(CorpusEntry(item.get("name", f"curve-{n}"), CurveModel(spec, f, h)))
    return entries


def dump_corpus(entries):
    fmt = lambda c, vs: [c.spec.format_value(v) for v in vs]  # noqa: E731
    return yaml.safe_dump({"curves": [
        {"name": e.name, "field": str(e.curve.spec), "f": fmt(e.curve, e.curve.f.coeffs), "h": fmt(e.curve, e.curve.h.coeffs)}
        for e in entries
    ]}, sort_keys=False)


# --- randomized identity suites -------------------------------------------------------------------

class SuiteResult(BaseModel):
    curve: str
    suite: str
    status: str
    samples: int = 0
    failures: int = 0
    witness: str = ""


class SuiteReport(BaseModel):
    seed: int
    results: list[SuiteResult]

    @property
    def passed(self):
        return all(r.status != FAIL for r in self.results)

    def frame(self):
        return pd.DataFrame([r.model_dump() for r in self.results])


def _kappa_suite(curve, sampler, count):
    q = quartic_from_curve(curve)
    failures, witness = 0, ""
    for _ in range(count):
        k = sampler.draw(lambda: kappa(curve, to_point_pair(sampler.wm, sampler.random_class()), check=False))
        if not on_surface(q, k):
            failures += 1
            witness = witness or str(k)
    return failures, witness


def _translation_suite(curve, fs, sampler, count):
    spec = curve.spec
    q = quartic_from_curve(curve)
    failures, witness, samples = 0, "", 0
    for cls in two_torsion_classes(curve):
        if spec.characteristic == 2:
            try:
                matrix = w_matrix_char2(curve, cls.data)
            except UnsupportedField:
                continue
        else:
            matrix = fs.w[cls.class_id]
        factor = (matrix @ matrix).scalar_identity_factor()
        if factor in (None, spec.zero):
            failures += 1
            witness = witness or f"W^2 not scalar for {cls.class_id}"
        divisor = two_torsion_divisor(sampler.wm, cls)
        bad = translation_failures(curve, matrix, divisor, sampler, count)
        for _ in range(count):
            x, _ = sampler.translation_sample(divisor)
            if not on_surface(q, KummerPoint(spec, matrix.apply(x))):
                bad += 1
        if bad:
            witness = witness or f"translation by {cls.class_id}"
        failures += bad
        samples += 2 * count
    return samples, failures, witness


def _class_with_image(sampler):
    d = sampler.random_class()
    return d, sampler.kappa_of(d)


def _ladder_suite(curve, fs, sampler, rng, count):
    spec = curve.spec
    bound = LADDER_SCALAR_BOUND if spec.is_finite else RATIONAL_SCALAR_BOUND
    ctx = LadderContext.build(curve, fs)
    failures, witness = 0, ""
    for _ in range(count):
        d, coords = sampler.draw(lambda: _class_with_image(sampler))
        k = KummerPoint(spec, coords)
        m, n = (int(v) for v in rng.integers(1, bound, size=2, dtype=np.int64))
        if m == n:
            n += 1
        expected = KummerPoint(spec, sampler.kappa_of(scalar_mul(sampler.wm, d, n)))
        km, kn = ladder(ctx, k, m), ladder(ctx, k, n)
        chain = xadd(ctx, km, kn, ladder(ctx, k, abs(m - n)))
        ok = kn.projectively_equal(expected) and proportional(spec, chain.coords, ladder(ctx, k, m + n).coords)
        if not ok:
            failures += 1
            witness = witness or f"k={k}, m={m}, n={n}"
    return failures, witness


def _run(entry, suite, fn):
    try:
        samples, failures, witness = fn()
    except KummerError as exc:
        logger.warning("%s/%s: %s", entry.name, suite, exc)
        return SuiteResult(curve=entry.name, suite=suite, status=FAIL, failures=1, witness=str(exc))
    status = FAIL if failures else PASS
    return SuiteResult(curve=entry.name, suite=suite, status=status, samples=samples, failures=failures, witness=witness)


def _simplified_suites(entry, seed, settings, points, fs, quiet):
    curve = entry.curve
    try:
        simplified, _ = simplified_model(curve)
        fs_prime = synthesize(simplified, seed + 1, settings, quiet=quiet)
    except KummerError as exc:
        return [SuiteResult(curve=entry.name, suite="simplified_synthesis", status=FAIL, failures=1, witness=str(exc))]
    return [
        _run(entry, "tau_duplication", lambda: (
            crosscheck_tau_delta(curve, seed, settings, points, fs=fs, fs_prime=fs_prime).samples, 0, "")),
        _run(entry, "b_conversion", lambda: (
            crosscheck_b_conversion(curve, seed, settings, points, fs=fs, fs_prime=fs_prime).samples, 0, "")),
    ]


def curve_suites(
entry, seed, settings, points, quiet=True):
    curve = entry.curve
    spec = curve.spec
    check = validate(curve)
    if not check.valid:
        return [SuiteResult(curve=entry.name, suite="validate", status=SKIP, witness=check.reason)]
    if not spec.is_finite:
        points = min(points, settings.rational_points)
    rng = make_rng(seed)
    results = []
    try:
        sampler = OracleSampler(curve, rng, settings.retry_attempts)
    except KummerError as exc:
        return [SuiteResult(curve=entry.name, suite="oracle", status=SKIP, witness=str(exc))]

    def count_only(fn):
        return lambda: (points, *fn())

    results.append(_run(entry, "kappa_surface", count_only(lambda: _kappa_suite(curve, sampler, points))))
    try:
        fs = synthesize(curve, seed, settings, quiet=quiet)
    except KummerError as exc:
        results.append(SuiteResult(curve=entry.name, suite="synthesis", status=FAIL, failures=1, witness=str(exc)))
        return results

    def failures_only(fn):
        return lambda: (points, fn(), "")

    results.append(_run(entry, "duplication", failures_only(lambda: delta_failures(fs, sampler, points))))
    results.append(_run(entry, "biquadratic", failures_only(lambda: bqf_failures(fs, sampler, points))))
    if spec.is_finite:
        results.append(_run(entry, "translation", lambda: _translation_suite(curve, fs, sampler, points)))
    else:
        results.append(SuiteResult(curve=entry.name, suite="translation", status=SKIP,
                                   witness="two-torsion enumeration needs a finite field"))
    if spec.characteristic != 2:
        results.extend(_simplified_suites(entry, seed, settings, points, fs, quiet))
    results.append(_run(entry, "ladder_chain", count_only(lambda: _ladder_suite(curve, fs, sampler, rng, points))))
    return results


def proposition_suites(corpus, seed=None, settings=None, points=None, quiet=True, strict=False):
    """Run every suite on every corpus curve; curves that fail validation are reported as SKIP."""
    settings = settings or load_settings()
    seed = settings.seed if seed is None else seed
    points = points or settings.fresh_samples
    results = []
    for n, entry in enumerate(tqdm(corpus, desc="corpus", disable=True if quiet else None)):
        start = time.perf_counter()
        results.extend(curve_suites(entry, seed + 1000 * n, settings, points, quiet))
        logger.info("%s done in %.1fs", entry.name, time.perf_counter() - start)
    report = SuiteReport(seed=seed, results=results)
    if strict and not report.passed:
        first = next(r for r in results if r.status == FAIL)
        raise SuiteFailed(f"{first.curve}/{first.suite}: {first.witness}")
    return report
