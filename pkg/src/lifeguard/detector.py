"""Data-loss detection: revealing strategies, scoped oracles and the driver.

Each strategy destroys the current activity in one way, re-enters the
destroyed state and compares the GUI values it planted beforehand with the
values found afterwards. What counts as a GUI value depends on the
strategy: everything app-relevant after a rotation, editable widgets after
back, and persistent widgets after a kill.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Iterable

from .analysis import PersistentWidgetSet, SinkSpec, build_atg, identify_persistent_widgets
from .engine import (
    Back,
    CriticalError,
    EngineState,
    ErrorKind,
    GuiSnapshot,
    Kill,
    Relaunch,
    Rotate,
    Scenario,
    SetText,
    Toggle,
    dispatch_event,
    snapshot_gui,
)
from .errors import ReplayDivergence
from .explorer import ExplorationConfig, StateRecord, entry_prefix, guided_explore, replay, replay_on
from .model import AppModel, WidgetKind, classify_widget_kind, designated_property

log = logging.getLogger(__name__)


class OracleScope(str, enum.Enum):
    ALL_APP_RELEVANT = "AllAppRelevant"
    EDITABLE_ONLY = "EditableOnly"
    PERSISTENT_ONLY = "PersistentOnly"


class Reentry(str, enum.Enum):
    REPLAY = "Replay"
    NOOP = "Noop"
    RESTART_REPLAY = "RestartReplay"


@dataclass(frozen=True)
class Strategy:
    name: str
    scenario: Scenario
    reenter: Reentry
    scope: OracleScope


P_ROTATE = Strategy("rotate", Scenario.S3_ROTATE, Reentry.NOOP, OracleScope.ALL_APP_RELEVANT)
P_BACK = Strategy("back", Scenario.S2_BACK, Reentry.REPLAY, OracleScope.EDITABLE_ONLY)
P_KILL = Strategy("kill", Scenario.S1_KILL, Reentry.RESTART_REPLAY, OracleScope.PERSISTENT_ONLY)

# order of testing for every new state
STRATEGIES = (P_ROTATE, P_BACK, P_KILL)
STRATEGY_BY_SCENARIO = {s.scenario: s for s in STRATEGIES}


@dataclass(frozen=True)
class VariableValue:
    activity_id: str
    widget_id: str
    property: str
    value: str

    @property
    def key(self) -> tuple[str, str]:
        return (self.widget_id, self.property)

    def to_dict(self) -> dict[str, str]:
        return {"widget": self.widget_id, "property": self.property, "value": self.value}


@dataclass(frozen=True)
class Issue:
    activity_id: str
    scenario: Scenario
    lost: tuple[VariableValue, ...]


# --------------------------------------------------------------------------
# oracles
# --------------------------------------------------------------------------


def capture_scope(
    snapshot: GuiSnapshot, scope: OracleScope, w_pr: PersistentWidgetSet | None = None
) -> list[VariableValue]:
    types = dict(snapshot.widgets)
    scope = OracleScope(scope)
    if scope is OracleScope.PERSISTENT_ONLY:
        if w_pr is None:
            raise ValueError("PersistentOnly scope needs the persistent widget set")
        persistent = w_pr.for_activity(snapshot.activity_id)
    out = []
    for widget_id, prop, value in snapshot.values:
        if scope is OracleScope.EDITABLE_ONLY:
            if designated_property(classify_widget_kind(types[widget_id])) != prop:
                continue
        elif scope is OracleScope.PERSISTENT_ONLY and widget_id not in persistent:
            continue
        out.append(VariableValue(snapshot.activity_id, widget_id, prop, value))
    return out


def diff(v: list[VariableValue], v_prime: list[VariableValue]) -> list[VariableValue]:
    """Entries of ``v`` that are missing from ``v_prime`` or changed there."""
    after = {x.key: x.value for x in v_prime}
    return [x for x in v if x.key not in after or after[x.key] != x.value]


def sentinel(widget_id: str, seed: int) -> str:
    return f"mut_{widget_id}_{seed}"


def mutate_editable_widgets(
    state: EngineState,
    seed: int,
    scope: OracleScope = OracleScope.EDITABLE_ONLY,
    w_pr: PersistentWidgetSet | None = None,
) -> tuple[EngineState, dict[tuple[str, str], str]]:
    """Plant a fresh value in every editable widget of the resumed activity.

    Text widgets get a seed-tagged sentinel, checkable widgets are flipped.
    Returns the new state and the values the scope's oracle should find
    again after re-entry. Raises CriticalError from text_changed handlers.
    """
    inst = state.resumed()
    if inst is None:
        raise ReplayDivergence(0, "no resumed activity to mutate")
    act = state.model.activity(inst.activity_id)
    for widget in sorted(act.widgets, key=lambda w: w.id):
        if widget.kind is WidgetKind.EDITABLE_HAS_TEXT:
            event = SetText(widget.id, sentinel(widget.id, seed))
        elif widget.kind is WidgetKind.EDITABLE_NO_TEXT:
            event = Toggle(widget.id)
        else:
            continue
        if state.resumed() is None or state.resumed().activity_id != act.id:
            break
        state, err = dispatch_event(state, event)
        if err is not None:
            raise err
    if state.resumed() is None:
        return state, {}
    expected = {v.key: v.value for v in capture_scope(snapshot_gui(state), scope, w_pr)}
    return state, expected


# --------------------------------------------------------------------------
# strategies
# --------------------------------------------------------------------------


def _divergence(activity_id: str, exc: ReplayDivergence) -> CriticalError:
    # a state that cannot be reproduced is reported as a crash of the replay
    return CriticalError(ErrorKind.CRASH, activity_id, f"replay divergence: {exc}")


def _destroy_and_reenter(state: EngineState, strategy: Strategy, prefix) -> EngineState:
    """Run E_d then E_r. Raises CriticalError or ReplayDivergence."""
    if strategy.scenario is Scenario.S3_ROTATE:
        state, err = dispatch_event(state, Rotate())
        if err is not None:
            raise err
        return state
    if strategy.scenario is Scenario.S2_BACK:
        state, err = dispatch_event(state, Back())
        if err is not None:
            raise err
        # leave the rest of the task the same way before coming back in;
        # callbacks that navigate on resume can keep the app open forever
        presses = 2 * len(state.back_stack) + 2
        while state.running:
            if presses == 0 or state.resumed() is None:
                raise ReplayDivergence(0, "back does not leave the app")
            presses -= 1
            state, err = dispatch_event(state, Back())
            if err is not None:
                raise err
    else:
        state, err = dispatch_event(state, Kill())
        if err is not None:
            raise err
    state, err = dispatch_event(state, Relaunch())
    if err is not None:
        raise err
    return replay_on(state, prefix)


def run_strategy(
    model: AppModel,
    record: StateRecord,
    strategy: Strategy,
    w_pr: PersistentWidgetSet,
    seed: int,
    *,
    prefix=None,
) -> tuple[list[VariableValue], list[CriticalError]]:
    """Test one recorded state under one strategy.

    A crash or hang anywhere suppresses the value oracle (nothing is
    reported as lost). A dialog that was open before a rotation and is gone
    afterwards is reported as a DialogDisappeared error.
    """
    activity_id = record.activity_id
    try:
        if prefix is None:
            prefix = entry_prefix(model, record.event_seq, seed)
        state = replay(model, record.event_seq, seed)
        activity_id = state.resumed().activity_id
        state, _ = mutate_editable_widgets(state, seed, strategy.scope, w_pr)
        if state.resumed() is None or state.resumed().activity_id != activity_id:
            log.info("mutation left %s; skipping %s oracle", activity_id, strategy.name)
            return [], []
        before = snapshot_gui(state)
        v = capture_scope(before, strategy.scope, w_pr)
        state = _destroy_and_reenter(state, strategy, prefix)
    except CriticalError as err:
        return [], [err]
    except ReplayDivergence as exc:
        return [], [_divergence(activity_id, exc)]

    resumed = state.resumed()
    if resumed is None or resumed.activity_id != activity_id:
        where = resumed.activity_id if resumed else "nothing"
        return [], [_divergence(activity_id, ReplayDivergence(len(prefix), f"re-entry reached {where}"))]
    after = snapshot_gui(state)
    errors = []
    if strategy.scenario is Scenario.S3_ROTATE:
        for dialog in before.dialogs:
            if dialog not in after.dialogs:
                errors.append(CriticalError(ErrorKind.DIALOG_DISAPPEARED, activity_id, dialog))
    return diff(v, capture_scope(after, strategy.scope, w_pr)), errors


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass
class ActivityReport:
    lost: dict[Scenario, list[VariableValue]] = field(default_factory=lambda: {s: [] for s in Scenario})
    ce: list[CriticalError] = field(default_factory=list)

    @property
    def v_rt(self) -> list[VariableValue]:
        return self.lost[Scenario.S3_ROTATE]

    @property
    def v_bk(self) -> list[VariableValue]:
        return self.lost[Scenario.S2_BACK]

    @property
    def v_kl(self) -> list[VariableValue]:
        return self.lost[Scenario.S1_KILL]

    def lost_keys(self) -> set[tuple[str, str]]:
        return {v.key for values in self.lost.values() for v in values}


_JSON_FIELDS = (("v_rt", Scenario.S3_ROTATE), ("v_bk", Scenario.S2_BACK), ("v_kl", Scenario.S1_KILL))


@dataclass
class DetectionReport:
    app_id: str
    activities: dict[str, ActivityReport] = field(default_factory=dict)

    @classmethod
    def empty(cls, model: AppModel) -> "DetectionReport":
        return cls(model.app_id, {a: ActivityReport() for a in model.activity_ids})

    def _activity(self, activity_id: str) -> ActivityReport:
        return self.activities.setdefault(activity_id, ActivityReport())

    def add_lost(self, activity_id: str, scenario: Scenario, values: Iterable[VariableValue]) -> None:
        bucket = self._activity(activity_id).lost[scenario]
        seen = {v.key for v in bucket}
        for v in values:
            if v.key not in seen:
                bucket.append(v)
                seen.add(v.key)
        bucket.sort(key=lambda v: v.key)

    def add_errors(self, errors: Iterable[CriticalError]) -> None:
        for err in errors:
            ce = self._activity(err.activity_id).ce
            if err not in ce:
                ce.append(err)

    def issues(self, activity_id: str | None = None) -> list[Issue]:
        out = []
        for aid, rep in sorted(self.activities.items()):
            if activity_id is not None and aid != activity_id:
                continue
            for scenario in (Scenario.S1_KILL, Scenario.S2_BACK, Scenario.S3_ROTATE):
                if rep.lost[scenario]:
                    out.append(Issue(aid, scenario, tuple(rep.lost[scenario])))
        return out

    @property
    def ve_count(self) -> int:
        return sum(len(v) for rep in self.activities.values() for v in rep.lost.values())

    @property
    def ce_count(self) -> int:
        return sum(len(rep.ce) for rep in self.activities.values())

    def to_dict(self) -> dict:
        acts = []
        for aid, rep in sorted(self.activities.items()):
            entry: dict = {"id": aid}
            for name, scenario in _JSON_FIELDS:
                entry[name] = [v.to_dict() for v in rep.lost[scenario]]
            entry["ce"] = [{"kind": e.kind.value, "detail": e.detail} for e in rep.ce]
            acts.append(entry)
        return {"app_id": self.app_id, "activities": acts, "totals": {"ve": self.ve_count, "ce": self.ce_count}}

    @classmethod
    def from_dict(cls, doc: dict) -> "DetectionReport":
        report = cls(doc["app_id"])
        for entry in doc["activities"]:
            aid = entry["id"]
            report._activity(aid)
            for name, scenario in _JSON_FIELDS:
                report.add_lost(
                    aid,
                    scenario,
                    (VariableValue(aid, v["widget"], v["property"], v["value"]) for v in entry.get(name, [])),
                )
            report.add_errors(CriticalError(ErrorKind(e["kind"]), aid, e["detail"]) for e in entry.get("ce", []))
        return report


def strategy_seed(base: int, state_index: int, strategy_index: int, confirmation: int) -> int:
    """Distinct sentinel seed per (state, strategy, confirmation run)."""
    return base + 1 + 2 * (3 * state_index + strategy_index) + confirmation


def detect(
    model: AppModel, cfg: ExplorationConfig | None = None, sinks: list[SinkSpec] | None = None
) -> DetectionReport:
    cfg = cfg or ExplorationConfig()
    atg = build_atg(model)
    w_pr = identify_persistent_widgets(model, sinks)
    pool, errors = guided_explore(model, atg, cfg)
    report = DetectionReport.empty(model)
    report.add_errors(errors)
    for index, record in enumerate(pool):
        try:
            prefix = entry_prefix(model, record.event_seq, cfg.seed)
        except (CriticalError, ReplayDivergence):
            prefix = None  # run_strategy will report it
        for k, strategy in enumerate(STRATEGIES):
            seed = strategy_seed(cfg.seed, index, k, 0)
            lost, errs = run_strategy(model, record, strategy, w_pr, seed, prefix=prefix)
            report.add_errors(errs)
            if not lost:
                continue
            # confirm with an independent run using different sentinels
            again, errs = run_strategy(model, record, strategy, w_pr, strategy_seed(cfg.seed, index, k, 1), prefix=prefix)
            report.add_errors(errs)
            confirmed_keys = {v.key for v in again}
            confirmed = [v for v in lost if v.key in confirmed_keys]
            dropped = [v for v in lost if v.key not in confirmed_keys]
            if dropped:
                log.warning("dropping unconfirmed losses in %s under %s: %s", record.activity_id, strategy.name, dropped)
            report.add_lost(record.activity_id, strategy.scenario, confirmed)
    return report
