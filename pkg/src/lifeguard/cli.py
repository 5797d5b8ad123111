"""``lifeguard`` command-line front end.

Machine-readable output only goes to files named by ``--out`` (or the
pipeline's ``--out-dir``); stdout gets a one-line summary.

Exit codes: 0 on success (for repairs: Type1 or nothing to fix), 2 when a
patch leaves issues or over-saves, 1 on usage, model or I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import __version__
from .analysis import build_atg, identify_persistent_widgets
from .appfile import dump_app_model, load_app_model
from .corpus import write_corpus
from .detector import DetectionReport, detect
from .errors import LifeguardError
from .explorer import ExplorationConfig, guided_explore
from .patcher import PatchOutcome, PatchType, emit_all_patch_text, evaluate_patch, plans_from_report, synthesize_all
from .validate import validate

log = logging.getLogger("lifeguard")

DEFAULTS = {"budget": 5000, "seed": 0, "max_events_per_state": 64, "jobs": 1}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(path: str | Path, doc) -> None:
    Path(path).write_text(dumps(doc), encoding="utf-8")


def read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def resolve_settings(args) -> dict:
    """Flags win over the config file, which wins over built-in defaults."""
    settings = dict(DEFAULTS)
    if getattr(args, "config", None):
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        settings.update(doc)
    for name in DEFAULTS:
        value = getattr(args, name, None)
        if value is not None:
            settings[name] = value
    return settings


def exploration_config(settings: dict) -> ExplorationConfig:
    try:
        return ExplorationConfig(settings["budget"], settings["seed"], settings["max_events_per_state"])
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def outcome_exit_code(outcome: PatchOutcome) -> int:
    return 0 if outcome.patch_type in (None, PatchType.TYPE1) else 2


def _load_valid(path: str):
    model = load_app_model(path)
    problems = validate(model)
    if problems:
        raise UsageError(f"{path}: invalid model: {problems[0]}" + (f" (+{len(problems) - 1} more)" if len(problems) > 1 else ""))
    return model


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_parse(args, settings) -> int:
    model = load_app_model(args.model)
    problems = validate(model)
    if args.out:
        write_json(args.out, {"diagnostics": [
            {"code": d.code, "location": d.location, "message": d.message} for d in problems
        ]})
    if problems:
        for d in problems:
            print(d, file=sys.stderr)
        print(f"{model.app_id}: {len(problems)} problem(s)")
        return 1
    widgets = sum(len(a.widgets) for a in model.activities)
    print(f"{model.app_id}: ok, {len(model.activities)} activities, {widgets} widgets")
    return 0


def cmd_atg(args, settings) -> int:
    atg = build_atg(_load_valid(args.model))
    if args.out:
        write_json(args.out, atg.to_dict())
    print(f"atg: {len(atg.nodes)} nodes, {len(atg.edges)} edges")
    return 0


def cmd_taint(args, settings) -> int:
    w_pr = identify_persistent_widgets(_load_valid(args.model))
    if args.out:
        write_json(args.out, w_pr.to_dict())
    print(f"taint: {len(w_pr)} persistent widget(s)")
    return 0


def cmd_explore(args, settings) -> int:
    model = _load_valid(args.model)
    pool, errors = guided_explore(model, build_atg(model), exploration_config(settings))
    if args.out:
        doc = pool.to_dict()
        doc["errors"] = sorted((e.to_dict() for e in set(errors)), key=lambda d: sorted(d.items()))
        write_json(args.out, doc)
    print(f"explore: {len(pool)} states, {len(set(errors))} critical error(s)")
    return 0


def cmd_detect(args, settings) -> int:
    report = detect(_load_valid(args.model), exploration_config(settings))
    if args.out:
        write_json(args.out, report.to_dict())
    print(f"detect: {report.ve_count} lost value(s), {report.ce_count} critical error(s)")
    return 0


def _report_for(model, path: str | None, cfg: ExplorationConfig) -> DetectionReport:
    if path:
        report = DetectionReport.from_dict(read_json(path))
        if report.app_id != model.app_id:
            raise UsageError(f"report is for {report.app_id!r}, model is {model.app_id!r}")
        return report
    return detect(model, cfg)


def cmd_fix(args, settings) -> int:
    model = _load_valid(args.model)
    report = _report_for(model, args.report, exploration_config(settings))
    plans = plans_from_report(report, model, identify_persistent_widgets(model))
    patched = synthesize_all(model, plans)
    if args.out:
        Path(args.out).write_text(dump_app_model(patched), encoding="utf-8")
    if args.patch_text:
        Path(args.patch_text).write_text(emit_all_patch_text(plans), encoding="utf-8")
    saved = sum(len(p.variables()) for p in plans)
    print(f"fix: {len(plans)} activity patch(es), {saved} variable(s) preserved")
    return 0


def cmd_evaluate(args, settings) -> int:
    cfg = exploration_config(settings)
    original = _load_valid(args.original)
    patched = _load_valid(args.patched)
    outcome = evaluate_patch(_report_for(original, args.report, cfg), patched, cfg)
    if args.out:
        write_json(args.out, outcome.to_dict())
    kind = outcome.patch_type.value if outcome.patch_type else "none"
    print(f"evaluate: {kind} (fixed={outcome.fixed}, residual={outcome.residual}, over_saved={outcome.over_saved})")
    return outcome_exit_code(outcome)


def run_pipeline(model_path: str, out_dir: str | Path, settings: dict) -> tuple[int, str]:
    """detect -> fix -> evaluate for one model; returns (exit code, summary)."""
    out = Path(out_dir)
    cfg = exploration_config(settings)
    model = _load_valid(model_path)
    out.mkdir(parents=True, exist_ok=True)
    report = detect(model, cfg)
    plans = plans_from_report(report, model, identify_persistent_widgets(model))
    patched = synthesize_all(model, plans)
    outcome = evaluate_patch(report, patched, cfg) if plans else PatchOutcome(None)
    write_json(out / "report.json", report.to_dict())
    (out / "patched.json").write_text(dump_app_model(patched), encoding="utf-8")
    (out / "patch.txt").write_text(emit_all_patch_text(plans), encoding="utf-8")
    write_json(out / "outcome.json", outcome.to_dict())
    kind = outcome.patch_type.value if outcome.patch_type else "no patch"
    summary = f"{model.app_id}: ve={report.ve_count} ce={report.ce_count} {kind}"
    return outcome_exit_code(outcome), summary


def _pipeline_job(job):
    path, out_dir, settings = job
    try:
        return run_pipeline(path, out_dir, settings)
    except (OSError, LifeguardError, UsageError, json.JSONDecodeError) as exc:
        return 1, f"{path}: error: {exc}"


def cmd_pipeline(args, settings) -> int:
    out_dir = Path(args.out_dir)
    if len(args.models) == 1:
        jobs = [(args.models[0], out_dir, settings)]
    else:
        stems = [Path(m).stem for m in args.models]
        if len(set(stems)) != len(stems):
            raise UsageError("model file names must be distinct")
        jobs = [(m, out_dir / s, settings) for m, s in zip(args.models, stems)]
    workers = max(1, int(settings["jobs"]))
    if workers == 1 or len(jobs) == 1:
        results = [_pipeline_job(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pipeline_job, jobs))
    for _, summary in results:
        print(f"pipeline: {summary}")
    return max(code for code, _ in results)


def cmd_gen_corpus(args, settings) -> int:
    if args.count < 1:
        raise UsageError("--count must be at least 1")
    paths = write_corpus(args.out_dir, settings["seed"], args.count)
    print(f"gen-corpus: {len(paths)} model(s) in {args.out_dir}")
    return 0


def cmd_fixture(args, settings) -> int:
    from importlib.resources import files

    src = files("lifeguard") / "fixtures" / f"{args.name}.json"
    if not src.is_file():
        raise UsageError(f"no bundled fixture named {args.name!r}")
    with src.open("rb") as fh, open(args.out, "wb") as dst:
        shutil.copyfileobj(fh, dst)
    print(f"fixture: wrote {args.out}")
    return 0


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="JSON file with budget/seed/max_events_per_state/jobs")
    common.add_argument("-v", "--verbose", action="count", default=0)

    tuning = _Parser(add_help=False)
    tuning.add_argument("--budget", type=int, help="exploration steps (default 5000)")
    tuning.add_argument("--seed", type=int, help="base seed (default 0)")
    tuning.add_argument("--max-events-per-state", dest="max_events_per_state", type=int)

    parser = _Parser(prog="lifeguard", description="Find and repair GUI data-loss issues in app models.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, parents=(common,)):
        p = sub.add_parser(name, help=help_, parents=list(parents))
        p.set_defaults(func=func)
        return p

    p = add("parse", cmd_parse, "validate a model")
    p.add_argument("model")
    p.add_argument("--out")
    for name, func, help_ in (("atg", cmd_atg, "activity transition graph"), ("taint", cmd_taint, "persistent widgets")):
        p = add(name, func, help_)
        p.add_argument("model")
        p.add_argument("--out")
    p = add("explore", cmd_explore, "explore GUI states", (common, tuning))
    p.add_argument("model")
    p.add_argument("--out")
    p = add("detect", cmd_detect, "detect data-loss issues", (common, tuning))
    p.add_argument("model")
    p.add_argument("--out")
    p = add("fix", cmd_fix, "synthesize a patch", (common, tuning))
    p.add_argument("model")
    p.add_argument("--report", help="detection report (detects afresh if omitted)")
    p.add_argument("--out", help="patched model")
    p.add_argument("--patch-text", dest="patch_text")
    p = add("evaluate", cmd_evaluate, "grade a patched model", (common, tuning))
    p.add_argument("original")
    p.add_argument("patched")
    p.add_argument("--report", help="detection report of the original")
    p.add_argument("--out")
    p = add("pipeline", cmd_pipeline, "detect, fix and evaluate", (common, tuning))
    p.add_argument("models", nargs="+")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--jobs", type=int)
    p = add("gen-corpus", cmd_gen_corpus, "generate a seeded corpus with a manifest", (common,))
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int, default=25)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p = add("fixture", cmd_fixture, "copy a bundled fixture", (common,))
    p.add_argument("name")
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, resolve_settings(args))
    except (OSError, LifeguardError, UsageError, json.JSONDecodeError) as exc:
        print(f"lifeguard: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
