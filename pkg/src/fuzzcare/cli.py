"""Command-line front door: diagnose, gen-rules, eval, validate, calibrate,
serve. Exit codes: 0 ok, 1 domain failure, 2 usage or IO failure.

Heavy imports happen inside the commands so --help and argument errors stay
fast.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

DEFAULT_RESOLUTION = 1001
MIN_RESOLUTION = 100


class IOFailure(click.ClickException):
    exit_code = 2


def _resolution_ok(ctx, param, value):
    if value < MIN_RESOLUTION:
        raise click.BadParameter(f"must be >= {MIN_RESOLUTION}")
    return value


class CliConfig:
    def __init__(self, kb_path, store_path, fmt, resolution):
        self.kb_path = Path(kb_path).resolve() if kb_path else None
        self.store_path = Path(store_path).resolve() if store_path else None
        self.fmt = fmt
        self.resolution = resolution

    def load_kb(self):
        from .reports import resolve_kb

        try:
            return resolve_kb(str(self.kb_path) if self.kb_path else None)
        except (OSError, ValueError, KeyError) as e:
            raise IOFailure(f"cannot read knowledge base: {e}")


@click.group()
@click.option("--kb", "kb_path", type=click.Path(), default=None,
              help="Knowledge-base JSON file (default: bundled; FUZZCARE_KB overrides).")
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="Diagnosis store file (serve only).")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]),
              default="table", help="Output format.")
@click.option("--resolution", type=int, default=DEFAULT_RESOLUTION,
              callback=_resolution_ok, help="Defuzzification grid samples.")
@click.pass_context
def main(ctx, kb_path, store_path, fmt, resolution):
    """Fuzzy rule-based heart-disease risk assessment."""
    ctx.obj = CliConfig(kb_path, store_path, fmt, resolution)


@main.command()
@click.option("--ecg", type=float, required=True)
@click.option("--chest-pain", "chest_pain", type=float, required=True)
@click.option("--blood-sugar", "blood_sugar", type=float, required=True)
@click.option("--cholesterol", type=float, required=True)
@click.option("--blood-pressure", "blood_pressure", type=float, required=True)
@click.option("--age", type=float, required=True)
@click.option("--heart-rate", "heart_rate", type=float, required=True)
@click.option("--gender", type=click.Choice(["male", "female", "unspecified"]),
              default="unspecified")
@click.pass_obj
def diagnose(cfg, **values):
    """Diagnose one patient from crisp measurements."""
    from .fuzzy import OutOfUniverse
    from .kb import PatientRecord, evaluate_crisp
    from .reports import report_doc

    try:
        record = PatientRecord(**values)
    except ValueError as e:
        raise click.UsageError(str(e))
    kb = cfg.load_kb()
    try:
        report = evaluate_crisp(
            kb.rule_base, kb, record, resolution=cfg.resolution
        )
    except OutOfUniverse as e:
        raise click.UsageError(f"--{e.variable.replace('_', '-')}: {e}")

    if cfg.fmt == "json":
        click.echo(json.dumps(report_doc(report), indent=2, sort_keys=False))
        return
    click.echo(f"risk level : {report.label}")
    click.echo(f"risk score : {report.score:.4f} / 10")
    click.echo(f"dosage     : {report.dosage.level} - {report.dosage.guidance}")
    click.echo(f"note       : {report.dosage.disclaimer}")
    top = report.trace.fired[:5]
    click.echo(f"fired rules (top {len(top)} of {len(report.trace.fired)}):")
    from .dsl import render_rule

    for f in top:
        badge = " [pinned]" if f.rule.provenance == "pinned" else ""
        click.echo(f"  {f.strength:6.4f}  {f.rule.id}{badge}  "
                   f"{render_rule(f.rule, annotate=False)}")


@main.command("gen-rules")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Where to write the rule-DSL file.")
@click.pass_obj
def gen_rules(cfg, out_path):
    """Write the full generated rule base as rule-DSL text."""
    from .dsl import render_rules

    kb = cfg.load_kb()
    base = kb.rule_base
    text = render_rules(base.rules)
    try:
        Path(out_path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise IOFailure(f"cannot write {out_path}: {e}")
    click.echo(f"{len(base.rules)} rules written to {out_path}")


@main.command("eval")
@click.option("--csv", "csv_path", type=click.Path(), required=True,
              help="CSV with measurement columns plus expected_label[,probability].")
@click.pass_obj
def eval_cmd(cfg, csv_path):
    """Score a labeled cohort against the knowledge base."""
    from .cohort import CsvError, evaluate_cohort, parse_eval_csv

    kb = cfg.load_kb()
    try:
        text = Path(csv_path).read_text(encoding="utf-8")
    except OSError as e:
        raise IOFailure(f"cannot read {csv_path}: {e}")
    try:
        rows = parse_eval_csv(text, kb)
    except CsvError as e:
        raise IOFailure(f"bad cohort file: {e}")
    result = evaluate_cohort(kb, kb.rule_base, rows, resolution=cfg.resolution)

    if cfg.fmt == "json":
        click.echo(json.dumps(result.to_doc(), indent=2, sort_keys=False))
        return
    for r in result.rows:
        mark = "ok " if r.match else "MISS"
        prob = f"  p={r.probability:.2f}" if r.probability is not None else ""
        click.echo(f"  row {r.row:3d}  expected {r.expected:6s} "
                   f"produced {r.produced:6s} {mark}{prob}")
    click.echo(f"n={result.n} matches={result.matches} "
               f"agreement={result.agreement if result.agreement is not None else 'n/a'}")
    if result.mean_probability is not None:
        click.echo(f"mean probability={result.mean_probability:.4f}")
    if result.binary_agreement is not None:
        click.echo(f"binary agreement={result.binary_agreement}")


@main.command()
@click.pass_obj
def validate(cfg):
    """Validate the knowledge base; exit 1 on failure."""
    from .kb import validate_kb

    kb = cfg.load_kb()
    report = validate_kb(kb)
    for f in report.findings:
        click.echo(f"[{'ok' if f.ok else 'FAIL'}] {f.check}: {f.detail}")
    if not report.ok:
        sys.exit(1)
    click.echo("knowledge base valid")


@main.command()
@click.option("--table2", "cohort_path", type=click.Path(), required=True,
              help="Labeled cohort CSV driving the grid search.")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Where to write the calibrated knowledge-base JSON.")
@click.pass_obj
def calibrate(cfg, cohort_path, out_path):
    """Recalibrate the anchored knowledge base against a labeled cohort."""
    from .cohort import CsvError, parse_eval_csv
    from .kb import CalibrationFailed, CohortRow, build_anchored_kb
    from .kb import calibrate as run_calibration

    anchored = build_anchored_kb()
    try:
        text = Path(cohort_path).read_text(encoding="utf-8")
    except OSError as e:
        raise IOFailure(f"cannot read {cohort_path}: {e}")
    try:
        rows = parse_eval_csv(text, anchored)
    except CsvError as e:
        raise IOFailure(f"bad cohort file: {e}")
    cohort = [CohortRow(r.record, r.expected, r.probability) for r in rows]
    try:
        calibrated = run_calibration(anchored, cohort, resolution=cfg.resolution)
    except CalibrationFailed as e:
        click.echo(f"calibration failed: {e}", err=True)
        sys.exit(1)
    try:
        Path(out_path).write_text(calibrated.to_json(), encoding="utf-8")
    except OSError as e:
        raise IOFailure(f"cannot write {out_path}: {e}")
    click.echo(f"calibrated knowledge base written to {out_path}")
    click.echo(calibrated.provenance)


@main.command()
@click.option("--listen", default="127.0.0.1:8571", show_default=True,
              help="host:port to bind.")
@click.pass_obj
def serve(cfg, listen):
    """Run the diagnosis HTTP service."""
    import socket

    import uvicorn

    from .service import create_app

    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise click.UsageError(f"--listen must be host:port, got {listen!r}")
    port = int(port_text)
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as e:
        raise IOFailure(f"cannot bind {listen}: {e}")
    finally:
        probe.close()

    try:
        app = create_app(
            kb_path=str(cfg.kb_path) if cfg.kb_path else None,
            store_path=str(cfg.store_path) if cfg.store_path else None,
            resolution=cfg.resolution,
        )
    except (OSError, ValueError, KeyError) as e:
        raise IOFailure(f"cannot start service: {e}")
    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
