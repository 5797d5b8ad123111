"""Static well-formedness checks for app models."""

from __future__ import annotations

from dataclasses import dataclass

from .model import (
    GEOMETRY_PROPERTIES,
    LIFECYCLE_CALLBACKS,
    ActivityModel,
    AppModel,
    Assign,
    BundlePut,
    Navigate,
    Restore,
    WidgetKind,
    WidgetRead,
    WidgetWrite,
    designated_property,
    expr_var_refs,
    expr_widget_refs,
    split_handler_key,
    statement_exprs,
)

REFERENCE_CODES = frozenset({"UnknownLauncher", "UnknownActivity", "UnknownWidget"})


@dataclass(frozen=True)
class Diagnostic:
    code: str
    location: str
    message: str
    ref: str = ""

    def __str__(self) -> str:
        return f"{self.code} at {self.location}: {self.message}"


def _check_handler(model: AppModel, act: ActivityModel, key: str, out: list[Diagnostic]) -> None:
    widgets = {w.id: w for w in act.widgets}
    event, _ = split_handler_key(key)
    defined: set[str] = set()
    for i, stmt in enumerate(act.handler(key)):
        loc = f"{act.id}.{key}[{i}]"
        for expr in statement_exprs(stmt):
            for name in expr_var_refs(expr):
                if name not in defined:
                    out.append(Diagnostic("UseBeforeDef", loc, f"variable {name!r} used before assignment", name))
            for ref in expr_widget_refs(expr):
                _check_widget_prop(widgets, ref.widget_id, ref.property, loc, out)
        match stmt:
            case Assign(var, _):
                defined.add(var)
            case WidgetRead(var, w, p):
                _check_widget_prop(widgets, w, p, loc, out)
                defined.add(var)
            case WidgetWrite(w, p, _):
                _check_widget_prop(widgets, w, p, loc, out)
            case Restore(store, _, w, p):
                _check_widget_prop(widgets, w, p, loc, out)
                if store == "instance" and event not in ("onCreate", "onRestoreInstanceState"):
                    out.append(Diagnostic("BadStore", loc, "instance-state bundle is only readable in onCreate/onRestoreInstanceState"))
            case BundlePut(store, _, _):
                if store == "instance" and event != "onSaveInstanceState":
                    out.append(Diagnostic("BadStore", loc, "instance-state bundle is only writable in onSaveInstanceState"))
                elif store not in ("instance", "session"):
                    out.append(Diagnostic("BadStore", loc, f"cannot put into store {store!r}"))
            case Navigate(target):
                if not model.has_activity(target):
                    out.append(Diagnostic("UnknownActivity", loc, f"navigation target {target!r} does not exist", target))


def _check_widget_prop(widgets, widget_id: str, prop: str, loc: str, out: list[Diagnostic]) -> None:
    w = widgets.get(widget_id)
    if w is None:
        out.append(Diagnostic("UnknownWidget", loc, f"widget {widget_id!r} is not declared in this activity", widget_id))
    elif prop not in w.properties:
        out.append(Diagnostic("UnknownProperty", loc, f"widget {widget_id!r} has no property {prop!r}", prop))


def _check_activity(model: AppModel, act: ActivityModel, out: list[Diagnostic]) -> None:
    seen: set[str] = set()
    for w in act.widgets:
        loc = f"{act.id}/{w.id}"
        if not w.id:
            out.append(Diagnostic("EmptyId", act.id, "widget id is empty"))
        if w.id in seen:
            out.append(Diagnostic("DuplicateWidgetId", loc, f"widget id {w.id!r} declared twice", w.id))
        seen.add(w.id)
        for prop in w.app_relevant:
            if prop in GEOMETRY_PROPERTIES:
                out.append(Diagnostic("GeometryProperty", loc, f"screen property {prop!r} cannot be app-relevant", prop))
            elif prop not in w.properties:
                out.append(Diagnostic("UnknownProperty", loc, f"app-relevant property {prop!r} is not declared", prop))
        needed = designated_property(w.kind)
        if needed is not None:
            if needed not in w.properties:
                out.append(Diagnostic("MissingRequiredProperty", loc, f"{w.type_name} needs a {needed!r} property", needed))
            if needed not in w.app_relevant:
                out.append(Diagnostic("MissingOracleProperty", loc, f"{needed!r} must be app-relevant for {w.type_name}", needed))
        if w.kind is WidgetKind.EDITABLE_NO_TEXT and w.properties.get("checked", "false") not in ("true", "false"):
            out.append(Diagnostic("BadCheckedValue", loc, "checked must be 'true' or 'false'"))

    widgets = {w.id: w for w in act.widgets}
    for key in act.handlers:
        event, widget_id = split_handler_key(key)
        loc = f"{act.id}.{key}"
        if widget_id is None:
            if event not in LIFECYCLE_CALLBACKS:
                out.append(Diagnostic("BadHandlerKey", loc, f"unknown callback {event!r}"))
        elif event not in ("tap", "text_changed"):
            out.append(Diagnostic("BadHandlerKey", loc, f"unknown widget event {event!r}"))
        elif widget_id not in widgets:
            out.append(Diagnostic("UnknownWidget", loc, f"handler names undeclared widget {widget_id!r}", widget_id))
        elif event == "text_changed" and not widgets[widget_id].kind.editable:
            out.append(Diagnostic("BadHandlerKey", loc, f"text_changed on non-editable widget {widget_id!r}"))
        _check_handler(model, act, key, out)


def validate(model: AppModel) -> list[Diagnostic]:
    """Return all invariant violations; an empty list means the model is usable."""
    from .appfile import app_model_to_dict, schema_errors

    out: list[Diagnostic] = []
    for err in schema_errors(app_model_to_dict(model)):
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        out.append(Diagnostic("SchemaViolation", path, err.message))

    seen: set[str] = set()
    for act in model.activities:
        if not act.id:
            out.append(Diagnostic("EmptyId", "activities", "activity id is empty"))
        if act.id in seen:
            out.append(Diagnostic("DuplicateActivityId", act.id, f"activity id {act.id!r} declared twice", act.id))
        seen.add(act.id)
    if not model.has_activity(model.launcher):
        out.append(Diagnostic("UnknownLauncher", "launcher", f"launcher {model.launcher!r} does not exist", model.launcher))
    for act in model.activities:
        _check_activity(model, act, out)
    return out


def reference_diagnostics(model: AppModel) -> list[Diagnostic]:
    """Only the dangling-reference subset of :func:`validate`."""
    out: list[Diagnostic] = []
    if not model.has_activity(model.launcher):
        out.append(Diagnostic("UnknownLauncher", "launcher", f"launcher {model.launcher!r} does not exist", model.launcher))
    for act in model.activities:
        _check_activity(model, act, out)
    return [d for d in out if d.code in REFERENCE_CODES]
