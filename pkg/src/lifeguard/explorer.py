"""Transition-guided state exploration with event recording and replay."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from typing import Iterator

from .analysis import ActivityTransitionGraph
from .engine import (
    CriticalError,
    EngineState,
    Event,
    SetText,
    Tap,
    Toggle,
    Back,
    GuiSnapshot,
    dispatch_event,
    event_from_dict,
    event_to_dict,
    launch_app,
    snapshot_gui,
)
from .errors import InvalidEvent, ReplayDivergence
from .model import AppModel, WidgetKind, classify_widget_kind

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV_PRIME) & _MASK64
    return h


@dataclass(frozen=True, order=True)
class StateId:
    value: int

    def hex(self) -> str:
        return f"{self.value:016x}"

    @classmethod
    def from_hex(cls, text: str) -> "StateId":
        return cls(int(text, 16))


def canonical_state_bytes(snapshot: GuiSnapshot) -> bytes:
    """Text-box values are blanked so that typing alone never makes a new state."""
    types = dict(snapshot.widgets)
    widgets = []
    for widget_id, prop, value in snapshot.values:
        if prop == "text" and classify_widget_kind(types[widget_id]) is WidgetKind.EDITABLE_HAS_TEXT:
            value = ""
        widgets.append([widget_id, types[widget_id], prop, value])
    doc = {"activity": snapshot.activity_id, "dialogs": list(snapshot.dialogs), "widgets": widgets}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def state_id(snapshot: GuiSnapshot) -> StateId:
    return StateId(fnv1a_64(canonical_state_bytes(snapshot)))


@dataclass(frozen=True)
class StateRecord:
    state_id: StateId
    event_seq: tuple[Event, ...]
    activity_id: str = ""

    def to_dict(self) -> dict:
        return {
            "state_id": self.state_id.hex(),
            "activity": self.activity_id,
            "events": [event_to_dict(e) for e in self.event_seq],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StateRecord":
        return cls(
            StateId.from_hex(doc["state_id"]),
            tuple(event_from_dict(e) for e in doc["events"]),
            doc.get("activity", ""),
        )


@dataclass
class StatePool:
    records: dict[StateId, StateRecord] = field(default_factory=dict)

    def __contains__(self, sid: StateId) -> bool:
        return sid in self.records

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[StateRecord]:
        return iter(self.records.values())

    def add(self, record: StateRecord) -> bool:
        if record.state_id in self.records:
            return False
        self.records[record.state_id] = record
        return True

    def to_dict(self) -> dict:
        return {"records": [r.to_dict() for r in self]}


@dataclass(frozen=True)
class ExplorationConfig:
    step_budget: int = 5000
    seed: int = 0
    max_events_per_state: int = 64

    def __post_init__(self):
        if self.step_budget <= 0 or self.max_events_per_state <= 0:
            raise ValueError("exploration budgets must be positive")


def probe_value(widget_id: str) -> str:
    return f"probe_{widget_id}"


def _widget_events(state: EngineState, widget_id: str) -> list[Event]:
    act = state.model.activity(state.resumed().activity_id)
    widget = act.widget(widget_id)
    events: list[Event] = []
    if f"tap:{widget_id}" in act.handlers:
        events.append(Tap(widget_id))
    if widget.kind is WidgetKind.EDITABLE_HAS_TEXT:
        events.append(SetText(widget_id, probe_value(widget_id)))
    elif widget.kind is WidgetKind.EDITABLE_NO_TEXT:
        events.append(Toggle(widget_id))
    return events


def candidate_events(state: EngineState, atg: ActivityTransitionGraph) -> list[Event]:
    """Transition-triggering widgets first, then other interactable ones, then back."""
    act = state.model.activity(state.resumed().activity_id)
    guided = [w for w in atg.labels_from(act.id) if act.has_widget(w)]
    rest = sorted(w.id for w in act.widgets if w.id not in guided)
    events: list[Event] = []
    for widget_id in guided + rest:
        events.extend(_widget_events(state, widget_id))
    events.append(Back())
    return events


def guided_explore(
    model: AppModel, atg: ActivityTransitionGraph, cfg: ExplorationConfig
) -> tuple[StatePool, list[CriticalError]]:
    """Breadth-first exploration; each dispatched candidate event costs one step.

    Frontier states are kept as engine snapshots instead of being replayed;
    the engine is deterministic, so the two are interchangeable (and the
    test-suite checks that every record replays to its id).
    """
    pool = StatePool()
    errors: list[CriticalError] = []
    try:
        initial = launch_app(model, cfg.seed)
    except CriticalError as err:
        return pool, [err]
    if initial.resumed() is None:
        return pool, errors  # the app finished itself during startup
    first = StateRecord(state_id(snapshot_gui(initial)), (), initial.resumed().activity_id)
    pool.add(first)
    frontier = deque([(first, initial)])
    steps = 0
    while frontier and steps < cfg.step_budget:
        record, state = frontier.popleft()
        for event in candidate_events(state, atg)[: cfg.max_events_per_state]:
            if steps >= cfg.step_budget:
                break
            steps += 1
            new, err = dispatch_event(state, event)
            if err is not None:
                errors.append(err)
                continue
            if new.resumed() is None:
                continue
            sid = state_id(snapshot_gui(new))
            if sid in pool:
                continue
            child = StateRecord(sid, record.event_seq + (event,), new.resumed().activity_id)
            pool.add(child)
            frontier.append((child, new))
    return pool, errors


def replay(model: AppModel, event_seq, seed: int = 0) -> EngineState:
    """Relaunch and re-dispatch a recorded sequence.

    Raises ReplayDivergence when an event no longer applies and
    CriticalError if the app crashes on the way.
    """
    state = launch_app(model, seed)
    return replay_on(state, event_seq)


def replay_on(state: EngineState, event_seq) -> EngineState:
    for i, event in enumerate(event_seq):
        try:
            state, err = dispatch_event(state, event)
        except InvalidEvent as exc:
            raise ReplayDivergence(i, str(exc)) from exc
        if err is not None:
            raise err
    return state


def entry_prefix(model: AppModel, event_seq, seed: int = 0) -> tuple[Event, ...]:
    """Shortest prefix of ``event_seq`` that brings up the final top instance.

    Events after it only edit the activity in place, and re-entering a
    destroyed state must not replay them over restored values.
    """
    state = launch_app(model, seed)
    born_at = {inst.serial: 0 for inst in state.back_stack}
    for i, event in enumerate(event_seq):
        try:
            state, err = dispatch_event(state, event)
        except InvalidEvent as exc:
            raise ReplayDivergence(i, str(exc)) from exc
        if err is not None:
            raise err
        for inst in state.back_stack:
            born_at.setdefault(inst.serial, i + 1)
    if state.top is None:
        raise ReplayDivergence(len(event_seq), "recorded sequence ends outside the app")
    return tuple(event_seq[: born_at[state.top.serial]])
