"""Seeded generator of small app models with known data-loss ground truth.

Every model has a launcher ``home`` holding one navigation button per
feature activity. Each feature activity follows one pattern whose expected
detector findings are recorded in the manifest while the model is built, so
the manifest can serve as an oracle for the detector and the patcher.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .appfile import app_model_from_dict, dump_app_model
from .engine import ErrorKind, Scenario
from .model import AppModel

ROTATE, BACK, KILL = Scenario.S3_ROTATE.value, Scenario.S2_BACK.value, Scenario.S1_KILL.value

TEXT_TYPES = ("EditText", "EditText", "AutoCompleteTextView", "Spinner")
CHECK_TYPES = ("CheckBox", "Switch", "RadioButton", "CheckedTextView")
SINKS = (
    ("android.content.SharedPreferences$Editor", "putString"),
    ("android.database.sqlite.SQLiteDatabase", "insert"),
    ("java.io.FileOutputStream", "write"),
    ("com.example.data.DraftStore", "saveDraft"),
)

# patterns that seed at least one issue; the clean ones seed none
ISSUE_PATTERNS = ("form", "persist_form", "crash_restore", "dialog", "label_tap", "rotate_saved", "mirror")
CLEAN_PATTERNS = ("prefs_saved", "session_saved", "static", "counter_saved")

# deepest event sequence any seeded issue needs (tap into the activity, then one more)
MAX_DEPTH = 2


def _lit(v):
    return {"lit": v}


def _w(widget, prop="text"):
    return {"widget": widget, "property": prop}


def _text_widget(rng: random.Random, wid: str) -> dict:
    return {"id": wid, "type": rng.choice(TEXT_TYPES), "properties": {"text": "", "hint": wid}, "app_relevant": ["text"]}


def _check_widget(rng: random.Random, wid: str) -> dict:
    value = rng.choice(("false", "true"))
    return {"id": wid, "type": rng.choice(CHECK_TYPES), "properties": {"checked": value}, "app_relevant": ["checked"]}


def _label(wid: str, text: str) -> dict:
    return {"id": wid, "type": "TextView", "properties": {"text": text}, "app_relevant": ["text"]}


def _button(wid: str, text: str) -> dict:
    return {"id": wid, "type": "Button", "properties": {"text": text}, "app_relevant": ["text"]}


@dataclass
class _Built:
    activity: dict
    issues: list[dict] = field(default_factory=list)
    errors: list[dict] = field(default_factory=list)


def _lose(built: _Built, aid: str, widget: dict, *scenarios: str) -> None:
    prop = widget["app_relevant"][0]
    for scenario in scenarios:
        built.issues.append({"activity": aid, "widget": widget["id"], "property": prop, "scenario": scenario})


def _fields(rng: random.Random, low: int = 1, high: int = 3, checks: bool = True) -> list[dict]:
    out = [_text_widget(rng, f"field_{i}") for i in range(rng.randint(low, high))]
    if checks and rng.random() < 0.5:
        out.append(_check_widget(rng, "opt_in"))
    return out


def _build(rng: random.Random, pattern: str, aid: str) -> _Built:
    handlers: dict[str, list] = {}
    built = _Built({"id": aid, "widgets": [], "handlers": handlers})
    widgets = built.activity["widgets"]
    match pattern:
        case "form":
            fields = _fields(rng)
            widgets += fields + [_button("submit", "Submit")]
            for f in fields:
                _lose(built, aid, f, ROTATE, BACK)
        case "persist_form":
            fields = _fields(rng, checks=False)
            widgets += fields + [_button("save", "Save")]
            cls, method = rng.choice(SINKS)
            body = [{"op": "widget_read", "var": f"v{i}", "widget": f["id"], "property": "text"} for i, f in enumerate(fields)]
            payload: dict = {"var": "v0"}
            for i in range(1, len(fields)):
                payload = {"concat": [payload, {"concat": [_lit("|"), {"var": f"v{i}"}]}]}
            body.append({"op": "sink_call", "class": cls, "method": method, "args": [_lit(f"{aid}.draft"), payload]})
            handlers["tap:save"] = body
            for f in fields:
                _lose(built, aid, f, ROTATE, BACK, KILL)
        case "crash_restore":
            fields = _fields(rng, 1, 2)
            widgets += fields
            handlers["onRestoreInstanceState"] = [{"op": "crash", "message": f"{aid}: stale adapter after recreation"}]
            for f in fields:
                _lose(built, aid, f, BACK)  # rotation crashes before any value can be compared
            built.errors.append({"activity": aid, "kind": ErrorKind.CRASH.value})
        case "dialog":
            widgets += [_label("prompt", "Delete all?"), _button("ask", "Delete")]
            handlers["tap:ask"] = [{"op": "show_dialog", "dialog": "confirm_delete"}]
            built.errors.append({"activity": aid, "kind": ErrorKind.DIALOG_DISAPPEARED.value})
        case "label_tap":
            status = _label("status", "idle")
            widgets += [status, _button("refresh", "Refresh")]
            handlers["tap:refresh"] = [{"op": "widget_write", "widget": "status", "property": "text", "expr": _lit("synced")}]
            _lose(built, aid, status, ROTATE)
        case "rotate_saved":
            fields = _fields(rng)
            widgets += fields
            handlers["onSaveInstanceState"] = [
                {"op": "bundle_put", "store": "instance", "key": f["id"], "expr": _w(f["id"], f["app_relevant"][0])}
                for f in fields
            ]
            handlers["onRestoreInstanceState"] = [
                {"op": "restore", "store": "instance", "key": f["id"], "widget": f["id"], "property": f["app_relevant"][0]}
                for f in fields
            ]
            for f in fields:
                _lose(built, aid, f, BACK)
        case "mirror":
            source = _text_widget(rng, "query")
            echo = _label("echo", "")
            widgets += [source, echo]
            handlers["text_changed:query"] = [
                {"op": "widget_write", "widget": "echo", "property": "text", "expr": {"concat": [_lit("> "), _w("query")]}}
            ]
            _lose(built, aid, source, ROTATE, BACK)
            _lose(built, aid, echo, ROTATE)
        case "prefs_saved":
            fields = _fields(rng, checks=False)
            widgets += fields
            handlers["onPause"] = [
                {"op": "sink_call", "class": "android.content.SharedPreferences$Editor", "method": "putString",
                 "args": [_lit(f"{aid}.{f['id']}"), _w(f["id"])]}
                for f in fields
            ]
            handlers["onResume"] = [
                {"op": "restore", "store": "prefs", "key": f"{aid}.{f['id']}", "widget": f["id"], "property": "text"}
                for f in fields
            ]
        case "session_saved":
            fields = _fields(rng)
            widgets += fields
            handlers["onPause"] = [
                {"op": "bundle_put", "store": "session", "key": f["id"], "expr": _w(f["id"], f["app_relevant"][0])}
                for f in fields
            ]
            handlers["onResume"] = [
                {"op": "restore", "store": "session", "key": f["id"], "widget": f["id"], "property": f["app_relevant"][0]}
                for f in fields
            ]
        case "static":
            widgets += [_label("about", "Version 1.0"), _button("ok", "OK")]
            handlers["tap:ok"] = [{"op": "noop"}]
        case "counter_saved":
            widgets += [_label("count", "0"), _button("bump", "+1")]
            handlers["tap:bump"] = [{"op": "widget_write", "widget": "count", "property": "text", "expr": _lit("1")}]
            handlers["onSaveInstanceState"] = [{"op": "bundle_put", "store": "instance", "key": "count", "expr": _w("count")}]
            handlers["onRestoreInstanceState"] = [
                {"op": "restore", "store": "instance", "key": "count", "widget": "count", "property": "text"}
            ]
        case _:
            raise ValueError(f"unknown pattern {pattern!r}")
    return built


def gen_model(rng: random.Random, app_id: str) -> tuple[dict, dict]:
    """Build one app-model document and its manifest entry."""
    patterns = [rng.choice(ISSUE_PATTERNS)]
    patterns += rng.sample(ISSUE_PATTERNS + CLEAN_PATTERNS, rng.randint(1, 3))
    home_widgets = [_label("title", app_id.replace("_", " "))]
    home_handlers = {}
    activities = []
    issues, errors, clean = [], [], []
    for i, pattern in enumerate(patterns):
        aid = f"{pattern}_{i}"
        built = _build(rng, pattern, aid)
        activities.append(built.activity)
        issues += built.issues
        errors += built.errors
        if not built.issues and not built.errors:
            clean.append(aid)
        home_widgets.append(_button(f"open_{i}", pattern.replace("_", " ")))
        home_handlers[f"tap:open_{i}"] = [{"op": "navigate", "activity": aid}]
    clean.append("home")
    doc = {
        "app_id": app_id,
        "launcher": "home",
        "initial_prefs": {},
        "activities": [{"id": "home", "widgets": home_widgets, "handlers": home_handlers}] + activities,
    }
    entry = {
        "app_id": app_id,
        "file": f"{app_id}.json",
        "patterns": dict(zip((a["id"] for a in activities), patterns)),
        "issues": sorted(issues, key=lambda d: (d["activity"], d["widget"], d["property"], d["scenario"])),
        "critical_errors": sorted(errors, key=lambda d: (d["activity"], d["kind"])),
        "clean_activities": sorted(clean),
        "max_depth": MAX_DEPTH,
    }
    return doc, entry


def gen_corpus(seed: int, count: int) -> tuple[list[AppModel], dict]:
    if count < 1:
        raise ValueError("count must be at least 1")
    rng = random.Random(seed)
    models, entries = [], []
    for n in range(count):
        doc, entry = gen_model(rng, f"app_{seed}_{n:03d}")
        models.append(app_model_from_dict(doc))
        entries.append(entry)
    return models, {"seed": seed, "count": count, "models": entries}


def write_corpus(out_dir: str | Path, seed: int, count: int) -> list[Path]:
    """Write one JSON file per model plus ``manifest.json``; returns model paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    models, manifest = gen_corpus(seed, count)
    paths = []
    for model, entry in zip(models, manifest["models"]):
        path = out / entry["file"]
        path.write_text(dump_app_model(model), encoding="utf-8")
        paths.append(path)
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return paths
