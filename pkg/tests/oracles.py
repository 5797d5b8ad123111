"""Independent reference implementations used to check the real ones."""

import dataclasses
import fnmatch

from lifeguard.appfile import app_model_to_dict
from lifeguard.engine import ActivityInstance, CriticalError, EngineState, Phase, Scenario, run_handler
from lifeguard.model import LIFECYCLE_CALLBACKS, ActivityModel, AppModel, Literal, SinkCall


def atg_edges_from_json(model: AppModel) -> set[tuple[str, str, str]]:
    """Walk the serialized document instead of the typed model."""
    edges = set()
    for act in app_model_to_dict(model)["activities"]:
        for key, stmts in act["handlers"].items():
            label = key.split(":", 1)[1] if ":" in key else ""
            for s in stmts:
                if s["op"] == "navigate":
                    edges.add((act["id"], s["activity"], label))
    return edges


def sink_matches(rows, api_class: str, method: str) -> bool:
    for cls_pattern, method_pattern in rows:
        if fnmatch.fnmatchcase(method, method_pattern) and any(
            fnmatch.fnmatchcase(api_class, alt) for alt in cls_pattern.split("|")
        ):
            return True
    return False


def sentinel(i: int) -> str:
    return f"\x01{i}\x02"


def dynamic_origins(model: AppModel, act: ActivityModel, key: str, rows) -> set[tuple[str, str]]:
    """Run one handler with a unique sentinel in every cell and see which reach a sink."""
    cells = sorted((w.id, p) for w in act.widgets for p in w.properties)
    marks = {sentinel(i): cell for i, cell in enumerate(cells)}
    state = EngineState(model=model)
    inst = ActivityInstance(act.id, Phase.RESUMED, {cell: s for s, cell in marks.items()})
    try:
        run_handler(state, inst, key)
    except CriticalError:
        pass
    hits = set()
    for rec in state.sink_log:
        if sink_matches(rows, rec.api_class, rec.method):
            for arg in rec.args:
                hits |= {cell for s, cell in marks.items() if s in arg}
    return hits


def snapshot_diff(before: dict, after: dict) -> set:
    """Pairwise comparison over every key of the pre-destruction snapshot."""
    lost = set()
    for k, v in before.items():
        found = False
        for k2, v2 in after.items():
            if k2 == k:
                found = v2 == v
        if not found:
            lost.add(k)
    return lost


# written out independently of the engine's own tables
EXPECTED = {
    Scenario.S1_KILL: ["onPause", "onSaveInstanceState", "onStop"],
    Scenario.S2_BACK: ["onPause", "onStop", "onDestroy"],
    Scenario.S3_ROTATE: ["onPause", "onSaveInstanceState", "onStop", "onDestroy"],
}
TRACE_CLASS = "test.Trace"


def with_tracing(model: AppModel) -> AppModel:
    """Prefix every lifecycle handler with a call that logs its own name."""
    acts = []
    for act in model.activities:
        handlers = dict(act.handlers)
        for cb in LIFECYCLE_CALLBACKS:
            handlers[cb] = (SinkCall(TRACE_CLASS, "log", (Literal(cb),)),) + tuple(handlers.get(cb, ()))
        acts.append(dataclasses.replace(act, handlers=handlers))
    return dataclasses.replace(model, activities=tuple(acts))


def logged(state, since=0):
    return [r.args[0] for r in state.sink_log[since:] if r.api_class == TRACE_CLASS]
