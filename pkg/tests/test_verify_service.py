import pytest

import app.verify_service as verify_service
from app.synthesis_service import FormulaSet
from app.verify_service import (
    FAIL,
    PASS,
    SKIP,
    CorpusEntry,
    curve_suites,
    default_corpus,
    dump_corpus,
    is_bqf_counterexample,
    lemma_b_search,
    lemma_delta_search,
    load_corpus,
    normal_form_curve,
    projective_points,
    proposition_suites,
    surface_points,
)
from tests.conftest import FAST, GF2, GF4, GF16, GF2_16, P1009, QQ
from utils.curve_funcs import CurveModel
from utils.errors import CounterexampleFound, SingularCurve, SuiteFailed, UnsupportedField
from utils.kummer_funcs import quartic_from_curve
from utils.poly_funcs import Poly


def test_normal_form_curves():
    curve = normal_form_curve(GF4, "c", (2, 0, 1))
    assert curve.h == Poly.from_ints(GF4, (0, 1, 1))
    assert curve.f == Poly.from_ints(GF4, (0, 2, 0, 0, 0, 1))
    with pytest.raises(SingularCurve):
        normal_form_curve(GF2, "c", (1, 1, 1))
    with pytest.raises(SingularCurve):
        normal_form_curve(GF4, "b", (0, 1, 1))
    with pytest.raises(UnsupportedField):
        normal_form_curve(P1009, "a", (0, 0, 1))
    with pytest.raises(ValueError):
        normal_form_curve(GF4, "d", (0, 0, 1))


def test_projective_points():
    points = list(projective_points(GF4))
    assert len(points) == (4 ** 4 - 1) // 3
    assert len(set(points)) == len(points)
    assert all(next(v for v in p if v) == 1 for p in points)


def test_surface_points_over_gf2():
    curve = normal_form_curve(GF2, "a", (0, 0, 1))
    q = quartic_from_curve(curve)
    points = surface_points(curve)
    assert (0, 0, 0, 1) in points
    assert all(q.evaluate(x) == 0 for x in points)
    assert len(points) == sum(q.evaluate(x) == 0 for x in projective_points(GF2))


def test_lemma_searches_need_tiny_fields():
    with pytest.raises(UnsupportedField):
        lemma_delta_search("a", (0, 0, 1), GF2_16, 7, FAST)
    with pytest.raises(UnsupportedField):
        lemma_b_search("a", (0, 0, 1), GF16, 7, FAST)


@pytest.mark.slow
@pytest.mark.parametrize("case,field,coeffs", [
    ("a", GF2, (0, 0, 1)),
    ("a", GF4, (0, 0, 1)),
    ("b", GF4, (1, 0, 1)),
    ("c", GF4, (2, 0, 1)),
])
def test_duplication_lemma(case, field, coeffs):
    report = lemma_delta_search(case, coeffs, field, 7, FAST)
    assert report.passed
    assert report.lemma == "delta"
    assert report.search_space == field.order ** 4
    assert report.surface_points >= 1


@pytest.mark.slow
def test_biquadratic_lemma_over_gf2():
    report = lemma_b_search("a", (0, 0, 1), GF2, 7, FAST)
    assert report.passed
    assert report.search_space == 2 ** 8


def test_counterexamples_are_reported():
    curve = normal_form_curve(GF2, "a", (0, 0, 1))
    vanishing = FormulaSet(curve, ((0,) * 35,) * 4, ())
    with pytest.raises(CounterexampleFound) as info:
        lemma_delta_search("a", (0, 0, 1), GF2, 7, FAST, formulas=vanishing)
    report = info.value.report
    assert not report.passed
    assert len(report.counterexamples) == report.surface_points
    assert report.notes.startswith(f"{FAST.fresh_samples}/{FAST.fresh_samples}")


def test_zero_vectors_are_not_counterexamples():
    curve = normal_form_curve(GF2, "a", (0, 0, 1))
    vanishing = FormulaSet(curve, (), ((0,) * 100,) * 10)
    assert not is_bqf_counterexample(vanishing, (0, 0, 0, 0), (0, 0, 0, 1))
    assert is_bqf_counterexample(vanishing, (0, 0, 0, 1), (0, 0, 0, 1))


def test_default_corpus():
    corpus = default_corpus(3)
    assert len(corpus) == 12
    assert len({e.name for e in corpus}) == 12
    assert [e.curve for e in corpus] == [e.curve for e in default_corpus(3)]
    assert sum(e.curve.spec == QQ for e in corpus) == 1


def test_corpus_files_round_trip(tmp_path):
    corpus = default_corpus(3)
    path = tmp_path / "corpus.yaml"
    path.write_text(dump_corpus(corpus))
    assert load_corpus(path) == corpus


def test_singular_curves_are_skipped():
    singular = CorpusEntry("cusp", CurveModel.from_ints(P1009, (0, 0, 0, 0, 0, 1)))
    report = proposition_suites([singular], seed=1, settings=FAST, points=3)
    assert report.passed
    assert [(r.suite, r.status) for r in report.results] == [("validate", SKIP)]
    assert report.frame().shape[0] == 1


@pytest.mark.slow
def test_suites_on_an_odd_curve(odd_formulas):
    entry = CorpusEntry("p1009", odd_formulas.curve)
    results = curve_suites(entry, 7, FAST, 5)
    suites = {r.suite: r.status for r in results}
    assert set(suites) == {"kappa_surface", "duplication", "biquadratic", "translation", "tau_duplication",
                           "b_conversion", "ladder_chain"}
    assert set(suites.values()) == {PASS}


@pytest.mark.slow
def test_strict_mode_raises_on_failure(monkeypatch, char2_formulas):
    monkeypatch.setattr(verify_service, "delta_failures", lambda fs, sampler, count: 1)
    entry = CorpusEntry("gf2^16-case-a", char2_formulas.curve)
    report = proposition_suites([entry], seed=7, settings=FAST, points=4)
    assert not report.passed
    assert {r.suite: r.status for r in report.results}["duplication"] == FAIL
    with pytest.raises(SuiteFailed):
        proposition_suites([entry], seed=7, settings=FAST, points=4, strict=True)


@pytest.mark.slow
def test_suites_on_the_rational_curve():
    entry = next(e for e in default_corpus(3) if e.curve.spec == QQ)
    results = curve_suites(entry, 7, FAST.model_copy(update={"rational_points": 2}), 5)
    assert [r.suite for r in results] == ["kappa_surface", "duplication", "biquadratic", "translation",
                                          "tau_duplication", "b_conversion", "ladder_chain"]
    statuses = {r.suite: r.status for r in results}
    assert statuses.pop("translation") == SKIP
    assert set(statuses.values()) == {PASS}
    assert {r.samples for r in results if r.status == PASS} == {2}
