"""Static analyses over app models.

* the activity transition graph used to steer exploration;
* the persistence-sink table;
* intra-handler taint tracking from widget reads into sink arguments.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .model import (
    AppModel,
    Assign,
    Concat,
    Crash,
    Expression,
    Literal,
    Navigate,
    SinkCall,
    Statement,
    VarRef,
    WidgetRead,
    WidgetRef,
    WidgetWrite,
    split_handler_key,
)


class Edge(NamedTuple):
    src: str
    dst: str
    label: str  # "" for transitions started from lifecycle callbacks


@dataclass(frozen=True)
class ActivityTransitionGraph:
    nodes: frozenset[str]
    edges: frozenset[Edge]

    def sorted_edges(self) -> list[Edge]:
        return sorted(self.edges)

    def labels_from(self, activity_id: str) -> list[str]:
        """Widgets of ``activity_id`` whose events may start a transition."""
        return sorted({e.label for e in self.edges if e.src == activity_id and e.label})

    def to_dict(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [{"src": e.src, "dst": e.dst, "label": e.label} for e in self.sorted_edges()],
        }


def build_atg(model: AppModel) -> ActivityTransitionGraph:
    edges = set()
    for act in model.activities:
        for key, program in act.handlers.items():
            _, widget_id = split_handler_key(key)
            for stmt in program:
                if isinstance(stmt, Navigate):
                    edges.add(Edge(act.id, stmt.activity_id, widget_id or ""))
    return ActivityTransitionGraph(frozenset(model.activity_ids), frozenset(edges))


# --------------------------------------------------------------------------
# sinks
# --------------------------------------------------------------------------


def _affix_match(pattern: str, name: str) -> bool:
    if pattern == "*":
        return True
    lead, trail = pattern.startswith("*"), pattern.endswith("*")
    core = pattern.strip("*")
    if lead and trail:
        return core in name
    if lead:
        return name.endswith(core)
    if trail:
        return name.startswith(core)
    return name == pattern


@dataclass(frozen=True)
class SinkSpec:
    """One row of the persistence-API table.

    ``class_pattern`` may list alternatives separated by ``|``; each
    alternative and the method pattern support a leading and/or trailing
    ``*`` wildcard. Matching is case-sensitive.
    """

    class_pattern: str
    method_pattern: str

    def __post_init__(self):
        if not self.class_pattern or not self.method_pattern:
            raise ValueError("sink patterns must be non-empty")

    def matches(self, api_class: str, method: str) -> bool:
        if not _affix_match(self.method_pattern, method):
            return False
        return any(_affix_match(alt, api_class) for alt in self.class_pattern.split("|"))


def default_sink_table() -> list[SinkSpec]:
    return [
        SinkSpec("android.content.SharedPreferences", "put*"),
        SinkSpec("android.content.SharedPreferences$Editor", "put*"),
        SinkSpec("android.database.sqlite.SQLiteDatabase", "insert*"),
        SinkSpec("android.database.sqlite.SQLiteDatabase", "replace*"),
        SinkSpec("android.database.sqlite.SQLiteDatabase", "update*"),
        SinkSpec("*OutputStream|*Writer", "write*"),
        SinkSpec("*", "save*"),
    ]


def is_sink(sinks: Iterable[SinkSpec], api_class: str, method: str) -> bool:
    return any(s.matches(api_class, method) for s in sinks)


# --------------------------------------------------------------------------
# taint
# --------------------------------------------------------------------------

Origin = tuple[str, str]  # (widget_id, property)


def _taint(expr: Expression, env: dict[str, frozenset], cells: dict[Origin, frozenset]) -> frozenset:
    match expr:
        case Literal():
            return frozenset()
        case VarRef(name):
            return env.get(name, frozenset())
        case WidgetRef(w, p):
            return cells.get((w, p), frozenset({(w, p)}))
        case Concat(left, right):
            return _taint(left, env, cells) | _taint(right, env, cells)
    raise TypeError(f"not an expression: {expr!r}")


def handler_sink_origins(program: Iterable[Statement], sinks: list[SinkSpec]) -> set[Origin]:
    """Widget properties whose initial values reach a sink argument.

    Straight-line code makes this exact: variables and widget cells are
    strongly updated, and nothing after a crash statement executes.
    """
    env: dict[str, frozenset] = {}
    cells: dict[Origin, frozenset] = {}
    hits: set[Origin] = set()
    for stmt in program:
        match stmt:
            case Assign(var, expr):
                env[var] = _taint(expr, env, cells)
            case WidgetRead(var, w, p):
                env[var] = cells.get((w, p), frozenset({(w, p)}))
            case WidgetWrite(w, p, expr):
                cells[(w, p)] = _taint(expr, env, cells)
            case SinkCall(cls, method, args):
                if is_sink(sinks, cls, method):
                    for arg in args:
                        hits |= _taint(arg, env, cells)
            case Crash():
                break
            # Restore only overwrites when its key exists at run time; the
            # origin a cell already carries stays a possible value.
    return hits


@dataclass(frozen=True)
class PersistentWidgetSet:
    entries: frozenset[tuple[str, str]]  # (activity_id, widget_id)

    def __contains__(self, item: tuple[str, str]) -> bool:
        return item in self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def for_activity(self, activity_id: str) -> set[str]:
        return {w for a, w in self.entries if a == activity_id}

    def to_dict(self) -> dict:
        return {"persistent": [{"activity": a, "widget": w} for a, w in sorted(self.entries)]}


def identify_persistent_widgets(model: AppModel, sinks: list[SinkSpec] | None = None) -> PersistentWidgetSet:
    if sinks is None:
        sinks = default_sink_table()
    found = set()
    for act in model.activities:
        for program in act.handlers.values():
            for widget_id, _ in handler_sink_origins(program, sinks):
                found.add((act.id, widget_id))
    return PersistentWidgetSet(frozenset(found))
