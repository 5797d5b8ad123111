"""Template-based repair of lost GUI values and evaluation of the result.

Lost variables of one activity are split into three groups, each with its
own save/restore template:

A. editable values that reach a persistence sink: written to shared
   preferences in onPause, restored in onResume;
B. other editable values: written to the process-wide session bundle in
   onPause, restored in onResume;
C. non-editable values: written to the instance-state bundle in
   onSaveInstanceState, restored in onRestoreInstanceState.

Every restore is guarded by the key being present, and patch statements
are appended after the existing ones so the restore has the last word.
"""

from __future__ import annotations

import dataclasses
import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .analysis import PersistentWidgetSet, SinkSpec, build_atg
from .detector import DetectionReport, Issue, detect
from .engine import CriticalError
from .errors import PlanMismatch
from .explorer import ExplorationConfig
from .model import (
    ActivityModel,
    AppModel,
    BundlePut,
    Literal,
    Restore,
    SinkCall,
    Statement,
    WidgetRef,
)

PREFS_EDITOR = "android.content.SharedPreferences$Editor"
KEY_ROOT = "lifeguard"


class VariableCategory(str, enum.Enum):
    EDITABLE_CROSS_RUN = "EditableCrossRun"
    EDITABLE_SINGLE_RUN = "EditableSingleRun"
    NON_EDITABLE = "NonEditable"


class PatchType(str, enum.Enum):
    TYPE1 = "Type1"
    TYPE2 = "Type2"
    TYPE3 = "Type3"
    TYPE4 = "Type4"


Var = tuple[str, str]  # (widget_id, property)


def key_prefix(activity_id: str) -> str:
    return f"{KEY_ROOT}.{activity_id}."


@dataclass(frozen=True)
class PatchPlan:
    activity_id: str
    cross_run: tuple[Var, ...] = ()
    single_run: tuple[Var, ...] = ()
    non_editable: tuple[Var, ...] = ()
    key_prefix: str = ""

    def __post_init__(self):
        if not self.key_prefix:
            object.__setattr__(self, "key_prefix", key_prefix(self.activity_id))

    @property
    def empty(self) -> bool:
        return not (self.cross_run or self.single_run or self.non_editable)

    def variables(self) -> list[Var]:
        return sorted(self.cross_run + self.single_run + self.non_editable)

    def key(self, widget_id: str, prop: str) -> str:
        return f"{self.key_prefix}{widget_id}.{prop}"

    def preserved_keys(self) -> set[str]:
        return {self.key(w, p) for w, p in self.variables()}

    def to_dict(self) -> dict:
        def pairs(vs):
            return [{"widget": w, "property": p} for w, p in vs]

        return {
            "activity": self.activity_id,
            "key_prefix": self.key_prefix,
            "cross_run": pairs(self.cross_run),
            "single_run": pairs(self.single_run),
            "non_editable": pairs(self.non_editable),
        }


def categorize(act: ActivityModel, widget_id: str, w_pr: PersistentWidgetSet) -> VariableCategory:
    if not act.widget(widget_id).kind.editable:
        return VariableCategory.NON_EDITABLE
    if (act.id, widget_id) in w_pr:
        return VariableCategory.EDITABLE_CROSS_RUN
    return VariableCategory.EDITABLE_SINGLE_RUN


def classify_variables(issues: Iterable[Issue], w_pr: PersistentWidgetSet, model: AppModel) -> PatchPlan:
    """One plan for one activity, merging what was lost under every scenario."""
    issues = list(issues)
    if not issues:
        raise ValueError("nothing to classify")
    activity_ids = {i.activity_id for i in issues}
    if len(activity_ids) != 1:
        raise ValueError(f"issues span several activities: {sorted(activity_ids)}")
    act = model.activity(activity_ids.pop())
    buckets: dict[VariableCategory, set[Var]] = {c: set() for c in VariableCategory}
    for issue in issues:
        for v in issue.lost:
            buckets[categorize(act, v.widget_id, w_pr)].add(v.key)
    return PatchPlan(
        act.id,
        cross_run=tuple(sorted(buckets[VariableCategory.EDITABLE_CROSS_RUN])),
        single_run=tuple(sorted(buckets[VariableCategory.EDITABLE_SINGLE_RUN])),
        non_editable=tuple(sorted(buckets[VariableCategory.NON_EDITABLE])),
    )


def plans_from_report(report: DetectionReport, model: AppModel, w_pr: PersistentWidgetSet) -> list[PatchPlan]:
    plans = []
    for activity_id in sorted(report.activities):
        issues = report.issues(activity_id)
        if issues:
            plans.append(classify_variables(issues, w_pr, model))
    return plans


# --------------------------------------------------------------------------
# synthesis
# --------------------------------------------------------------------------


def _check_plan(act: ActivityModel, plan: PatchPlan) -> None:
    for widget_id, prop in plan.variables():
        if not act.has_widget(widget_id):
            raise PlanMismatch(f"plan for {act.id!r} names absent widget {widget_id!r}")
        if prop not in act.widget(widget_id).properties:
            raise PlanMismatch(f"widget {widget_id!r} in {act.id!r} has no property {prop!r}")


def patch_statements(plan: PatchPlan) -> dict[str, list[Statement]]:
    """Statements each callback gains, in template order A, B, C."""
    added: dict[str, list[Statement]] = {}

    def emit(callback, stmt):
        added.setdefault(callback, []).append(stmt)

    for w, p in plan.cross_run:
        emit("onPause", SinkCall(PREFS_EDITOR, "putString", (Literal(plan.key(w, p)), WidgetRef(w, p))))
        emit("onResume", Restore("prefs", plan.key(w, p), w, p))
    for w, p in plan.single_run:
        emit("onPause", BundlePut("session", plan.key(w, p), WidgetRef(w, p)))
        emit("onResume", Restore("session", plan.key(w, p), w, p))
    for w, p in plan.non_editable:
        emit("onSaveInstanceState", BundlePut("instance", plan.key(w, p), WidgetRef(w, p)))
        emit("onRestoreInstanceState", Restore("instance", plan.key(w, p), w, p))
    return added


def synthesize_patch(model: AppModel, plan: PatchPlan) -> AppModel:
    if not model.has_activity(plan.activity_id):
        raise PlanMismatch(f"plan targets unknown activity {plan.activity_id!r}")
    if plan.empty:
        return model
    act = model.activity(plan.activity_id)
    _check_plan(act, plan)
    handlers = dict(act.handlers)
    for callback, stmts in patch_statements(plan).items():
        handlers[callback] = tuple(handlers.get(callback, ())) + tuple(stmts)
    patched = dataclasses.replace(act, handlers=handlers)
    activities = tuple(patched if a.id == act.id else a for a in model.activities)
    return dataclasses.replace(model, activities=activities)


def synthesize_all(model: AppModel, plans: Iterable[PatchPlan]) -> AppModel:
    for plan in plans:
        model = synthesize_patch(model, plan)
    return model


# --------------------------------------------------------------------------
# rendering
# --------------------------------------------------------------------------


def _getter(widget_id: str, prop: str) -> str:
    match prop:
        case "text":
            return f"{widget_id}.getText().toString()"
        case "checked":
            return f"String.valueOf({widget_id}.isChecked())"
    return f'String.valueOf({widget_id}.getProperty("{prop}"))'


def _setter(widget_id: str, prop: str, value: str) -> str:
    match prop:
        case "text":
            return f"{widget_id}.setText({value});"
        case "checked":
            return f"{widget_id}.setChecked(Boolean.parseBoolean({value}));"
    return f'{widget_id}.setProperty("{prop}", {value});'


def _block(title: str, save_sig: str, save_body: list[str], restore_sig: str, restore_body: list[str]) -> str:
    lines = [f"// {title}", f"@Override\n{save_sig} {{"]
    lines += ["    " + s for s in save_body]
    lines += ["}", "", f"@Override\n{restore_sig} {{"]
    lines += ["    " + s for s in restore_body]
    lines.append("}")
    return "\n".join(lines)


def emit_patch_text(plan: PatchPlan) -> str:
    """Java-flavoured rendering of the patch, blocks A, B, C in that order."""
    if plan.empty:
        return ""
    blocks = []
    if plan.cross_run:
        save = ["super.onPause();", "SharedPreferences.Editor editor = getPreferences(MODE_PRIVATE).edit();"]
        save += [f'editor.putString("{plan.key(w, p)}", {_getter(w, p)});' for w, p in plan.cross_run]
        save.append("editor.apply();")
        restore = ["super.onResume();", "SharedPreferences prefs = getPreferences(MODE_PRIVATE);"]
        for w, p in plan.cross_run:
            k = plan.key(w, p)
            restore.append(f'if (prefs.contains("{k}")) ' + _setter(w, p, f'prefs.getString("{k}", "")'))
        blocks.append(_block(
            f"A: {plan.activity_id} - keep values across app runs",
            "protected void onPause()", save, "protected void onResume()", restore,
        ))
    if plan.single_run:
        save = ["super.onPause();"]
        save += [f'Session.bundle.putString("{plan.key(w, p)}", {_getter(w, p)});' for w, p in plan.single_run]
        restore = ["super.onResume();"]
        for w, p in plan.single_run:
            k = plan.key(w, p)
            restore.append(f'if (Session.bundle.containsKey("{k}")) ' + _setter(w, p, f'Session.bundle.getString("{k}")'))
        blocks.append(_block(
            f"B: {plan.activity_id} - keep values within one app run",
            "protected void onPause()", save, "protected void onResume()", restore,
        ))
    if plan.non_editable:
        save = ["super.onSaveInstanceState(outState);"]
        save += [f'outState.putString("{plan.key(w, p)}", {_getter(w, p)});' for w, p in plan.non_editable]
        restore = ["super.onRestoreInstanceState(savedInstanceState);"]
        for w, p in plan.non_editable:
            k = plan.key(w, p)
            restore.append(
                f'if (savedInstanceState.containsKey("{k}")) ' + _setter(w, p, f'savedInstanceState.getString("{k}")')
            )
        blocks.append(_block(
            f"C: {plan.activity_id} - keep non-editable widget values",
            "protected void onSaveInstanceState(Bundle outState)", save,
            "protected void onRestoreInstanceState(Bundle savedInstanceState)", restore,
        ))
    return "\n\n".join(blocks) + "\n"


def emit_all_patch_text(plans: Iterable[PatchPlan]) -> str:
    return "".join(t for t in (emit_patch_text(p) for p in plans) if t)


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------


def preserved_keys(model: AppModel) -> dict[str, set[Var]]:
    """Per activity, the variables that patch statements in ``model`` save."""
    found: dict[str, set[Var]] = {}
    for act in model.activities:
        prefix = key_prefix(act.id)
        for program in act.handlers.values():
            for stmt in program:
                key = None
                if isinstance(stmt, BundlePut):
                    key = stmt.key
                elif isinstance(stmt, SinkCall) and stmt.args and isinstance(stmt.args[0], Literal):
                    key = stmt.args[0].value
                if key and key.startswith(prefix):
                    widget_id, _, prop = key[len(prefix):].rpartition(".")
                    if widget_id:
                        found.setdefault(act.id, set()).add((widget_id, prop))
    return found


def classify_outcome(fixed: int, residual: int, over_saved: int) -> PatchType:
    if residual == 0 and over_saved == 0:
        return PatchType.TYPE1
    if fixed == 0 and over_saved > 0:
        return PatchType.TYPE4
    if residual == 0:
        return PatchType.TYPE2
    return PatchType.TYPE3


_RANK = {PatchType.TYPE1: 0, PatchType.TYPE2: 1, PatchType.TYPE3: 2, PatchType.TYPE4: 3}


@dataclass(frozen=True)
class ActivityOutcome:
    activity_id: str
    patch_type: PatchType
    fixed: int
    residual: int
    over_saved: int


@dataclass(frozen=True)
class PatchOutcome:
    patch_type: PatchType | None
    fixed: int = 0
    residual: int = 0
    over_saved: int = 0
    new_ce: tuple[CriticalError, ...] = ()
    activities: tuple[ActivityOutcome, ...] = field(default=())

    def to_dict(self) -> dict:
        return {
            "patch_type": self.patch_type.value if self.patch_type else None,
            "fixed": self.fixed,
            "residual": self.residual,
            "over_saved": self.over_saved,
            "new_ce": [e.to_dict() for e in self.new_ce],
            "activities": [
                {
                    "id": a.activity_id,
                    "patch_type": a.patch_type.value,
                    "fixed": a.fixed,
                    "residual": a.residual,
                    "over_saved": a.over_saved,
                }
                for a in self.activities
            ],
        }


def _reachable(model: AppModel, sources: Iterable[str]) -> set[str]:
    atg = build_atg(model)
    seen = set(sources)
    queue = deque(seen)
    while queue:
        aid = queue.popleft()
        for e in atg.edges:
            if e.src == aid and e.dst not in seen:
                seen.add(e.dst)
                queue.append(e.dst)
    return seen


def evaluate_patch(
    original_report: DetectionReport,
    patched: AppModel,
    cfg: ExplorationConfig | None = None,
    sinks: list[SinkSpec] | None = None,
    *,
    patched_report: DetectionReport | None = None,
) -> PatchOutcome:
    """Re-run detection on ``patched`` and grade the patch.

    Activities count as patched when the model carries patch keys for them.
    With no patched activity the outcome has ``patch_type`` None.
    """
    if patched_report is None:
        patched_report = detect(patched, cfg, sinks)
    saved = preserved_keys(patched)
    if not saved:
        return PatchOutcome(None)

    per_activity = []
    for aid in sorted(saved):
        before = original_report.activities[aid].lost_keys() if aid in original_report.activities else set()
        after = patched_report.activities[aid].lost_keys() if aid in patched_report.activities else set()
        fixed, residual, over = len(before - after), len(after), len(saved[aid] - before)
        per_activity.append(ActivityOutcome(aid, classify_outcome(fixed, residual, over), fixed, residual, over))

    fixed = sum(a.fixed for a in per_activity)
    residual = sum(a.residual for a in per_activity)
    over = sum(a.over_saved for a in per_activity)
    patch_type = classify_outcome(fixed, residual, over)

    reach = _reachable(patched, saved)
    old = {e for rep in original_report.activities.values() for e in rep.ce}
    new_ce = tuple(
        e
        for aid, rep in sorted(patched_report.activities.items())
        if aid in reach
        for e in rep.ce
        if e not in old
    )
    if new_ce and _RANK[patch_type] < _RANK[PatchType.TYPE3]:
        patch_type = PatchType.TYPE3
    return PatchOutcome(patch_type, fixed, residual, over, new_ce, tuple(per_activity))
