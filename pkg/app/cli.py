"""
Command line front end. Every command prints the seed it ran with; exit code 0
means success, 1 a failed check or rejected input, 2 a usage error.
"""
import json
from pathlib import Path
from typing import Optional

import typer
from pydantic import BaseModel
from rich.console import Console
from rich.table import Table

from app.ladder_service import LadderContext, bench, ladder, translate, xdbl
from app.synthesis_service import OracleSampler, load_formula_set, save_formula_set, synthesize
from app.verify_service import lemma_b_search, lemma_delta_search, load_corpus, proposition_suites
from utils.config import Settings, load_settings, setup_logging
from utils.curve_funcs import char2_normal_form, load_curve, parse_points, validate
from utils.errors import CounterexampleFound, FormatError, KummerError, LengthMismatch
from utils.field_funcs import FieldSpec, make_rng
from utils.jacobian_funcs import from_point_pair, scalar_mul, to_point_pair, working_model
from utils.kummer_funcs import KummerPoint, kappa, two_torsion_classes, w_matrix_char2

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Genus-2 Kummer surface arithmetic.")
eval_app = typer.Typer(no_args_is_help=True, help="Evaluate maps on user input.")
app.add_typer(eval_app, name="eval")
console = Console()


class CliConfig(BaseModel):
    """Flags of one run laid over the loaded settings."""

    command: str
    curve: Optional[Path] = None
    formulas: Optional[Path] = None
    seed: int
    samples: Optional[int] = None
    json_output: bool = False

    def settings(self):
        base = load_settings()
        update = {"seed": self.seed}
        if self.samples:
            update.update(delta_samples=self.samples, bqf_samples=self.samples, w_samples=self.samples)
        return Settings(**{**base.model_dump(), **update})


def _config(command, seed=None, **kwargs):
    cfg = CliConfig(command=command, seed=load_settings().seed if seed is None else seed, **kwargs)
    if not cfg.json_output:
        console.print(f"[dim]{command}: seed {cfg.seed}[/dim]")
    return cfg


def _fail(exc):
    if isinstance(exc, (FormatError, LengthMismatch)):
        console.print(f"[red]usage error:[/red] {exc}")
        raise typer.Exit(code=2)
    console.print(f"[red]{type(exc).__name__}:[/red] {exc}")
    if exc.reference:
        console.print(f"[dim]see: {exc.reference}[/dim]")
    raise typer.Exit(code=1)


def _context(curve_path, formulas_path):
    curve = load_curve(curve_path)
    return curve, LadderContext.build(curve, load_formula_set(formulas_path, curve))


def _emit(model, as_json):
    if as_json:
        typer.echo(model.model_dump_json(indent=2))
    else:
        for key, value in model.model_dump().items():
            console.print(f"{key}: {value}")


@app.callback()
def main(log_level: Optional[str] = typer.Option(None, help="Overrides the configured log level.")):
    setup_logging(log_level)


@app.command("validate")
def validate_command(curve_path: Path = typer.Argument(..., exists=True, dir_okay=False)):
    """Check nonsingularity and report the characteristic-2 normal form case."""
    _config("validate", curve=curve_path)
    try:
        curve = load_curve(curve_path)
        check = validate(curve)
        if not check.valid:
            console.print(f"[red]invalid:[/red] {check.reason}")
            raise typer.Exit(code=1)
        console.print(f"[green]valid[/green] {curve}")
        if curve.spec.characteristic == 2:
            try:
                case, model, _ = char2_normal_form(curve)
                console.print(f"normal form ({case}): {model}")
            except KummerError as exc:
                console.print(f"[yellow]no normal form over this field:[/yellow] {exc}")
    except KummerError as exc:
        _fail(exc)


@app.command("synth")
def synth_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    out: Path = typer.Option(..., "--out", help="KFS1 file to write."),
    samples: Optional[int] = typer.Option(None, min=1),
    seed: Optional[int] = typer.Option(None),
):
    """Synthesize duplication, biquadratic and translation formulas for a curve."""
    cfg = _config("synth", seed, curve=curve_path, formulas=out, samples=samples)
    try:
        curve = load_curve(curve_path)
        fs = synthesize(curve, cfg.seed, cfg.settings(), quiet=False)
        save_formula_set(fs, out)
    except KummerError as exc:
        _fail(exc)
    console.print(f"wrote {out} (fingerprint {fs.fingerprint[:16]})")


@eval_app.command("kappa")
def eval_kappa_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    points: str = typer.Option(..., help="Two points `x1,y1;x2,y2`; inf+, inf-, inf name points at infinity."),
):
    """Kummer image of the class of P1 + P2 minus the divisor at infinity."""
    try:
        curve = load_curve(curve_path)
        typer.echo(str(kappa(curve, parse_points(curve, points)).normalized()))
    except KummerError as exc:
        _fail(exc)


def _read_point(curve, point):
    k = KummerPoint.parse(curve.spec, point)
    if k.is_zero_vector():
        raise FormatError("the zero vector is not a projective point")
    return k


@app.command("dbl")
def dbl_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    formulas: Path = typer.Option(..., exists=True, dir_okay=False),
    point: str = typer.Option(..., help="k1:k2:k3:k4"),
):
    try:
        curve, ctx = _context(curve_path, formulas)
        typer.echo(str(xdbl(ctx, _read_point(curve, point)).normalized()))
    except KummerError as exc:
        _fail(exc)


@app.command("translate")
def translate_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    formulas: Path = typer.Option(..., exists=True, dir_okay=False),
    class_id: str = typer.Option(..., "--class", help="Two-torsion class id as printed by `twotorsion`."),
    point: str = typer.Option(..., help="k1:k2:k3:k4"),
):
    try:
        curve, ctx = _context(curve_path, formulas)
        typer.echo(str(translate(ctx, class_id, _read_point(curve, point)).normalized()))
    except KummerError as exc:
        _fail(exc)


@app.command("ladder")
def ladder_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    formulas: Path = typer.Option(..., exists=True, dir_okay=False),
    n: int = typer.Option(..., min=0),
    point: Optional[str] = typer.Option(None, help="k1:k2:k3:k4"),
    points: Optional[str] = typer.Option(None, help="Divisor `x1,y1;x2,y2`; its image is the ladder input."),
    oracle: bool = typer.Option(False, help="Compare with kappa of n*D from Cantor arithmetic (needs --points)."),
):
    """Montgomery ladder on the Kummer surface."""
    if (point is None) == (points is None):
        console.print("[red]usage error:[/red] give exactly one of --point and --points")
        raise typer.Exit(code=2)
    try:
        curve, ctx = _context(curve_path, formulas)
        pair = parse_points(curve, points) if points else None
        k = kappa(curve, pair) if pair else _read_point(curve, point)
        result = ladder(ctx, k, n)
        typer.echo(str(result))
        if oracle and pair:
            wm = working_model(curve)
            expected = kappa(curve, to_point_pair(wm, scalar_mul(wm, from_point_pair(wm, *pair), n)))
            if not result.projectively_equal(expected):
                console.print(f"[red]ladder disagrees with the oracle:[/red] {expected.normalized()}")
                raise typer.Exit(code=1)
            console.print("[green]matches the oracle[/green]")
    except KummerError as exc:
        _fail(exc)


@app.command("twotorsion")
def twotorsion_command(curve_path: Path = typer.Argument(..., exists=True, dir_okay=False)):
    """Rational two-torsion classes, their Kummer images and (char 2) translation matrices."""
    try:
        curve = load_curve(curve_path)
        classes = two_torsion_classes(curve)
        table = Table("class", "kappa", "matrix")
        for cls in classes:
            matrix = ""
            if curve.spec.characteristic == 2:
                try:
                    w = w_matrix_char2(curve, cls.data)
                    matrix = " / ".join(",".join(curve.spec.format_value(v) for v in row) for row in w.rows)
                except KummerError as exc:
                    matrix = str(exc)
            table.add_row(cls.class_id, str(cls.kappa.normalized()), matrix)
        console.print(table)
        console.print(f"{len(classes)} nonzero rational two-torsion classes")
    except KummerError as exc:
        _fail(exc)


@app.command("lemma")
def lemma_command(
    kind: str = typer.Argument(..., help="delta or b"),
    case: str = typer.Option(..., help="Normal form case a, b or c."),
    field: str = typer.Option(..., help="e.g. binary:m=2,mod=0x7"),
    coeffs: str = typer.Option(..., help="f1,f3,f5"),
    seed: Optional[int] = typer.Option(None),
    json_output: bool = typer.Option(False, "--json"),
):
    """Exhaustive search for the vanishing lemmas over a tiny binary field."""
    if kind not in ("delta", "b"):
        console.print(f"[red]usage error:[/red] unknown lemma {kind!r}; expected delta or b")
        raise typer.Exit(code=2)
    cfg = _config("lemma", seed, json_output=json_output)
    search = lemma_delta_search if kind == "delta" else lemma_b_search
    try:
        spec = FieldSpec.parse(field)
        values = tuple(spec.parse_value(v) for v in coeffs.split(","))
        if len(values) != 3:
            raise LengthMismatch("expected three coefficients f1,f3,f5")
        report = search(case, values, spec, cfg.seed, cfg.settings(), quiet=json_output)
    except CounterexampleFound as exc:
        _emit(exc.report, json_output)
        typer.echo("FAIL")
        raise typer.Exit(code=1)
    except ValueError as exc:
        if isinstance(exc, KummerError):
            _fail(exc)
        console.print(f"[red]usage error:[/red] {exc}")
        raise typer.Exit(code=2)
    except KummerError as exc:
        _fail(exc)
    _emit(report, json_output)
    typer.echo("PASS")


@app.command("verify")
def verify_command(
    corpus: str = typer.Argument("default", help="YAML corpus file, or `default`."),
    points: Optional[int] = typer.Option(None, min=1, help="Fresh samples per suite."),
    seed: Optional[int] = typer.Option(None),
    json_output: bool = typer.Option(False, "--json"),
):
    """Randomized identity suites over a corpus of curves."""
    cfg = _config("verify", seed, json_output=json_output)
    if corpus != "default" and not Path(corpus).exists():
        console.print(f"[red]usage error:[/red] no corpus file {corpus}")
        raise typer.Exit(code=2)
    try:
        entries = load_corpus(corpus)
        report = proposition_suites(entries, cfg.seed, cfg.settings(), points, quiet=json_output)
    except KummerError as exc:
        _fail(exc)
    if json_output:
        typer.echo(json.dumps({**report.model_dump(), "passed": report.passed}, indent=2))
    else:
        console.print(report.frame().to_string(index=False))
    typer.echo("PASS" if report.passed else "FAIL")
    if not report.passed:
        raise typer.Exit(code=1)


@app.command("bench")
def bench_command(
    curve_path: Path = typer.Argument(..., exists=True, dir_okay=False),
    formulas: Path = typer.Option(..., exists=True, dir_okay=False),
    trials: int = typer.Option(5, min=1),
    bits: int = typer.Option(40, min=2, max=63),
    seed: Optional[int] = typer.Option(None),
    json_output: bool = typer.Option(False, "--json"),
):
    """Operation counts and timing per ladder step."""
    cfg = _config("bench", seed, curve=curve_path, formulas=formulas, json_output=json_output)
    try:
        curve, ctx = _context(curve_path, formulas)
        rng = make_rng(cfg.seed)
        sampler = OracleSampler(curve, rng)
        x = KummerPoint(curve.spec, sampler.draw(lambda: sampler.kappa_of(sampler.random_class())))
        report, frame = bench(ctx, x, trials, rng, bits)
    except KummerError as exc:
        _fail(exc)
    if json_output:
        typer.echo(report.model_dump_json(indent=2))
    else:
        console.print(frame.to_string(index=False))
        _emit(report, False)
