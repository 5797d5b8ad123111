"""Declarative app model: activities, widget trees and handler programs.

An :class:`AppModel` stands in for an APK. Handlers are straight-line
statement lists (no loops, no branches) over a tiny expression language.
All types are frozen; copies are made with :func:`dataclasses.replace`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Mapping, Union


class WidgetKind(str, enum.Enum):
    EDITABLE_HAS_TEXT = "EditableHasText"
    EDITABLE_NO_TEXT = "EditableNoText"
    NON_EDITABLE = "NonEditable"

    @property
    def editable(self) -> bool:
        return self is not WidgetKind.NON_EDITABLE


HAS_TEXT_TYPES = frozenset({"EditText", "AutoCompleteTextView", "Spinner"})
NO_TEXT_TYPES = frozenset({"CheckBox", "RadioButton", "CheckedTextView", "Switch"})

# Screen-related properties never take part in an oracle.
GEOMETRY_PROPERTIES = frozenset(
    {"bounds", "x", "y", "width", "height", "left", "top", "right", "bottom", "elevation", "rotation"}
)

LIFECYCLE_CALLBACKS = (
    "onCreate",
    "onPause",
    "onResume",
    "onStop",
    "onDestroy",
    "onSaveInstanceState",
    "onRestoreInstanceState",
)
WIDGET_EVENTS = ("tap", "text_changed")

STORES = ("instance", "session", "prefs")


def classify_widget_kind(type_name: str) -> WidgetKind:
    """Map a widget class name to its editability kind.

    Fully qualified names (``android.widget.EditText``) are classified by
    their simple name.
    """
    simple = type_name.rsplit(".", 1)[-1]
    if simple in HAS_TEXT_TYPES:
        return WidgetKind.EDITABLE_HAS_TEXT
    if simple in NO_TEXT_TYPES:
        return WidgetKind.EDITABLE_NO_TEXT
    return WidgetKind.NON_EDITABLE


def designated_property(kind: WidgetKind) -> str | None:
    """The property the back-scenario oracle watches for an editable kind."""
    if kind is WidgetKind.EDITABLE_HAS_TEXT:
        return "text"
    if kind is WidgetKind.EDITABLE_NO_TEXT:
        return "checked"
    return None


# --------------------------------------------------------------------------
# Expressions
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    value: str


@dataclass(frozen=True)
class VarRef:
    name: str


@dataclass(frozen=True)
class WidgetRef:
    widget_id: str
    property: str


@dataclass(frozen=True)
class Concat:
    left: "Expression"
    right: "Expression"


Expression = Union[Literal, VarRef, WidgetRef, Concat]


# --------------------------------------------------------------------------
# Statements
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    var: str
    expr: Expression


@dataclass(frozen=True)
class WidgetWrite:
    widget_id: str
    property: str
    expr: Expression


@dataclass(frozen=True)
class WidgetRead:
    var: str
    widget_id: str
    property: str


@dataclass(frozen=True)
class SinkCall:
    api_class: str
    method: str
    args: tuple[Expression, ...] = ()


@dataclass(frozen=True)
class Navigate:
    activity_id: str


@dataclass(frozen=True)
class Finish:
    pass


@dataclass(frozen=True)
class ShowDialog:
    dialog_id: str


@dataclass(frozen=True)
class DismissDialog:
    dialog_id: str


@dataclass(frozen=True)
class Crash:
    message: str


@dataclass(frozen=True)
class Noop:
    pass


@dataclass(frozen=True)
class BundlePut:
    """Write ``expr`` under ``key`` into the instance-state or session bundle."""

    store: str
    key: str
    expr: Expression


@dataclass(frozen=True)
class Restore:
    """Copy ``store[key]`` into a widget property, only if the key exists."""

    store: str
    key: str
    widget_id: str
    property: str


Statement = Union[
    Assign,
    WidgetWrite,
    WidgetRead,
    SinkCall,
    Navigate,
    Finish,
    ShowDialog,
    DismissDialog,
    Crash,
    Noop,
    BundlePut,
    Restore,
]

HandlerProgram = tuple  # tuple[Statement, ...]


def expr_widget_refs(expr: Expression):
    """Yield every WidgetRef inside ``expr``, left to right."""
    match expr:
        case WidgetRef():
            yield expr
        case Concat(left, right):
            yield from expr_widget_refs(left)
            yield from expr_widget_refs(right)


def expr_var_refs(expr: Expression):
    match expr:
        case VarRef(name):
            yield name
        case Concat(left, right):
            yield from expr_var_refs(left)
            yield from expr_var_refs(right)


def statement_exprs(stmt: Statement) -> tuple[Expression, ...]:
    match stmt:
        case Assign(_, expr) | WidgetWrite(_, _, expr) | BundlePut(_, _, expr):
            return (expr,)
        case SinkCall(_, _, args):
            return tuple(args)
    return ()


# --------------------------------------------------------------------------
# Widgets, activities, apps
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class WidgetModel:
    id: str
    type_name: str
    properties: Mapping[str, str] = field(default_factory=dict)
    app_relevant: tuple[str, ...] = ()

    @property
    def kind(self) -> WidgetKind:
        return classify_widget_kind(self.type_name)


def split_handler_key(key: str) -> tuple[str, str | None]:
    """``"tap:go"`` -> ``("tap", "go")``; ``"onCreate"`` -> ``("onCreate", None)``."""
    if ":" in key:
        event, _, widget = key.partition(":")
        return event, widget
    return key, None


@dataclass(frozen=True)
class ActivityModel:
    id: str
    widgets: tuple[WidgetModel, ...] = ()
    handlers: Mapping[str, tuple[Statement, ...]] = field(default_factory=dict)

    def widget(self, widget_id: str) -> WidgetModel:
        for w in self.widgets:
            if w.id == widget_id:
                return w
        raise KeyError(widget_id)

    def has_widget(self, widget_id: str) -> bool:
        return any(w.id == widget_id for w in self.widgets)

    def handler(self, key: str) -> tuple[Statement, ...]:
        return tuple(self.handlers.get(key, ()))


@dataclass(frozen=True)
class AppModel:
    app_id: str
    activities: tuple[ActivityModel, ...]
    launcher: str
    initial_prefs: Mapping[str, str] = field(default_factory=dict)

    def activity(self, activity_id: str) -> ActivityModel:
        for a in self.activities:
            if a.id == activity_id:
                return a
        raise KeyError(activity_id)

    def has_activity(self, activity_id: str) -> bool:
        return any(a.id == activity_id for a in self.activities)

    @property
    def activity_ids(self) -> tuple[str, ...]:
        return tuple(a.id for a in self.activities)
