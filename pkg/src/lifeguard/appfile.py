"""Reading and writing app-model JSON documents."""

from __future__ import annotations

import functools
import json
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .errors import ModelReferenceError, ModelSchemaError, ModelSyntaxError
from .model import (
    ActivityModel,
    AppModel,
    Assign,
    BundlePut,
    Concat,
    Crash,
    DismissDialog,
    Expression,
    Finish,
    Literal,
    Navigate,
    Noop,
    Restore,
    ShowDialog,
    SinkCall,
    Statement,
    VarRef,
    WidgetKind,
    WidgetModel,
    WidgetRead,
    WidgetRef,
    WidgetWrite,
    classify_widget_kind,
    designated_property,
)


@functools.lru_cache(maxsize=None)
def app_model_schema() -> dict[str, Any]:
    text = resources.files("lifeguard").joinpath("schema/app_model.schema.json").read_text("utf-8")
    return json.loads(text)


@functools.lru_cache(maxsize=None)
def _validator() -> jsonschema.Draft202012Validator:
    return jsonschema.Draft202012Validator(app_model_schema())


def schema_errors(doc: Any) -> list[jsonschema.ValidationError]:
    return sorted(_validator().iter_errors(doc), key=lambda e: list(e.absolute_path))


# --------------------------------------------------------------------------
# decoding
# --------------------------------------------------------------------------


def _expr(doc: dict) -> Expression:
    if "lit" in doc:
        return Literal(doc["lit"])
    if "var" in doc:
        return VarRef(doc["var"])
    if "widget" in doc:
        return WidgetRef(doc["widget"], doc["property"])
    left, right = doc["concat"]
    return Concat(_expr(left), _expr(right))


def _statement(doc: dict) -> Statement:
    op = doc["op"]
    if op == "assign":
        return Assign(doc["var"], _expr(doc["expr"]))
    if op == "widget_write":
        return WidgetWrite(doc["widget"], doc["property"], _expr(doc["expr"]))
    if op == "widget_read":
        return WidgetRead(doc["var"], doc["widget"], doc["property"])
    if op == "sink_call":
        return SinkCall(doc["class"], doc["method"], tuple(_expr(a) for a in doc.get("args", [])))
    if op == "navigate":
        return Navigate(doc["activity"])
    if op == "finish":
        return Finish()
    if op == "show_dialog":
        return ShowDialog(doc["dialog"])
    if op == "dismiss_dialog":
        return DismissDialog(doc["dialog"])
    if op == "crash":
        return Crash(doc["message"])
    if op == "noop":
        return Noop()
    if op == "bundle_put":
        return BundlePut(doc["store"], doc["key"], _expr(doc["expr"]))
    if op == "restore":
        return Restore(doc["store"], doc["key"], doc["widget"], doc["property"])
    raise ModelSchemaError(f"unknown statement op {op!r}")


def default_app_relevant(type_name: str, properties: dict[str, str]) -> tuple[str, ...]:
    prop = designated_property(classify_widget_kind(type_name))
    if prop is not None:
        return (prop,)
    return ("text",) if "text" in properties else ()


def _widget(doc: dict) -> WidgetModel:
    props = dict(doc.get("properties", {}))
    kind = classify_widget_kind(doc["type"])
    # editable widgets always carry their oracle-visible property
    if kind is WidgetKind.EDITABLE_HAS_TEXT:
        props.setdefault("text", "")
    elif kind is WidgetKind.EDITABLE_NO_TEXT:
        props.setdefault("checked", "false")
    if "app_relevant" in doc:
        relevant = tuple(doc["app_relevant"])
    else:
        relevant = default_app_relevant(doc["type"], props)
    return WidgetModel(id=doc["id"], type_name=doc["type"], properties=props, app_relevant=relevant)


def _activity(doc: dict) -> ActivityModel:
    handlers = {
        key: tuple(_statement(s) for s in stmts) for key, stmts in doc.get("handlers", {}).items()
    }
    return ActivityModel(
        id=doc["id"],
        widgets=tuple(_widget(w) for w in doc.get("widgets", [])),
        handlers=handlers,
    )


def app_model_from_dict(doc: Any) -> AppModel:
    """Build a model from decoded JSON. Raises on schema or reference errors."""
    errors = schema_errors(doc)
    if errors:
        first = errors[0]
        path = "/".join(str(p) for p in first.absolute_path)
        raise ModelSchemaError(first.message, "/" + path)
    model = AppModel(
        app_id=doc["app_id"],
        activities=tuple(_activity(a) for a in doc["activities"]),
        launcher=doc["launcher"],
        initial_prefs=dict(doc.get("initial_prefs", {})),
    )
    from .validate import reference_diagnostics

    refs = reference_diagnostics(model)
    if refs:
        raise ModelReferenceError(f"{refs[0].location}: {refs[0].message}", refs[0].ref)
    return model


def parse_app_model(text: str | bytes) -> AppModel:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelSyntaxError(exc.msg, exc.lineno, exc.colno) from exc
    return app_model_from_dict(doc)


def load_app_model(path: str | Path) -> AppModel:
    return parse_app_model(Path(path).read_text(encoding="utf-8"))


# --------------------------------------------------------------------------
# encoding
# --------------------------------------------------------------------------


def expr_to_dict(expr: Expression) -> dict:
    match expr:
        case Literal(value):
            return {"lit": value}
        case VarRef(name):
            return {"var": name}
        case WidgetRef(widget_id, prop):
            return {"widget": widget_id, "property": prop}
        case Concat(left, right):
            return {"concat": [expr_to_dict(left), expr_to_dict(right)]}
    raise TypeError(f"not an expression: {expr!r}")


def statement_to_dict(stmt: Statement) -> dict:
    match stmt:
        case Assign(var, expr):
            return {"op": "assign", "var": var, "expr": expr_to_dict(expr)}
        case WidgetWrite(w, p, expr):
            return {"op": "widget_write", "widget": w, "property": p, "expr": expr_to_dict(expr)}
        case WidgetRead(var, w, p):
            return {"op": "widget_read", "var": var, "widget": w, "property": p}
        case SinkCall(cls, method, args):
            return {"op": "sink_call", "class": cls, "method": method, "args": [expr_to_dict(a) for a in args]}
        case Navigate(target):
            return {"op": "navigate", "activity": target}
        case Finish():
            return {"op": "finish"}
        case ShowDialog(d):
            return {"op": "show_dialog", "dialog": d}
        case DismissDialog(d):
            return {"op": "dismiss_dialog", "dialog": d}
        case Crash(message):
            return {"op": "crash", "message": message}
        case Noop():
            return {"op": "noop"}
        case BundlePut(store, key, expr):
            return {"op": "bundle_put", "store": store, "key": key, "expr": expr_to_dict(expr)}
        case Restore(store, key, w, p):
            return {"op": "restore", "store": store, "key": key, "widget": w, "property": p}
    raise TypeError(f"not a statement: {stmt!r}")


def app_model_to_dict(model: AppModel) -> dict:
    return {
        "app_id": model.app_id,
        "launcher": model.launcher,
        "initial_prefs": dict(model.initial_prefs),
        "activities": [
            {
                "id": a.id,
                "widgets": [
                    {
                        "id": w.id,
                        "type": w.type_name,
                        "properties": dict(w.properties),
                        "app_relevant": list(w.app_relevant),
                    }
                    for w in a.widgets
                ],
                "handlers": {k: [statement_to_dict(s) for s in v] for k, v in a.handlers.items()},
            }
            for a in model.activities
        ],
    }


def dump_app_model(model: AppModel, *, indent: int | None = 2) -> str:
    """Serialize with sorted keys so output is byte-stable."""
    return json.dumps(app_model_to_dict(model), indent=indent, sort_keys=True, ensure_ascii=False) + "\n"
