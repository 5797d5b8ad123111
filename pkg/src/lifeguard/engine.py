"""Deterministic interpreter of the activity lifecycle over an AppModel.

The engine keeps three storage tiers with different lifetimes:

* ``instance_state`` - the saved-instance bundle, delivered on recreation
  after a rotation and dropped on back or kill;
* ``session_store`` - per-activity bundle that lives as long as the process;
* ``prefs`` - shared preferences, surviving kill and relaunch.

There is no automatic widget-state restoration: whatever survives a
destruction does so because a handler saved and restored it.

Public operations take an :class:`EngineState` and return a fresh one; the
input is never mutated.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Union

from .errors import InvalidEvent, LifeguardError, NoResumedActivity
from .model import (
    LIFECYCLE_CALLBACKS,
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
    WidgetRead,
    WidgetRef,
    WidgetWrite,
)

STEP_LIMIT = 10_000

PREFS_CLASSES = frozenset({"android.content.SharedPreferences", "android.content.SharedPreferences$Editor"})


class Phase(str, enum.Enum):
    CREATED = "Created"
    STARTED = "Started"
    RESUMED = "Resumed"
    PAUSED = "Paused"
    STOPPED = "Stopped"
    DESTROYED = "Destroyed"


class Scenario(str, enum.Enum):
    S1_KILL = "S1_Kill"
    S2_BACK = "S2_Back"
    S3_ROTATE = "S3_Rotate"


SCENARIO_CALLBACKS: dict[Scenario, tuple[str, ...]] = {
    Scenario.S1_KILL: ("onPause", "onSaveInstanceState", "onStop"),
    Scenario.S2_BACK: ("onPause", "onStop", "onDestroy"),
    Scenario.S3_ROTATE: ("onPause", "onSaveInstanceState", "onStop", "onDestroy"),
}

_PHASE_AFTER = {
    "onCreate": Phase.CREATED,
    "onRestoreInstanceState": Phase.STARTED,
    "onResume": Phase.RESUMED,
    "onPause": Phase.PAUSED,
    "onStop": Phase.STOPPED,
    "onDestroy": Phase.DESTROYED,
}


class ErrorKind(str, enum.Enum):
    CRASH = "Crash"
    HANG = "Hang"
    DIALOG_DISAPPEARED = "DialogDisappeared"


class CriticalError(LifeguardError):
    """A crash, hang or vanished dialog observed while driving the app."""

    def __init__(self, kind: ErrorKind, activity_id: str, detail: str):
        super().__init__(f"{kind.value} in {activity_id}: {detail}")
        self.kind = ErrorKind(kind)
        self.activity_id = activity_id
        self.detail = detail

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CriticalError):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"CriticalError({self.kind.value!r}, {self.activity_id!r}, {self.detail!r})"

    def key(self) -> tuple[str, str, str]:
        return (self.kind.value, self.activity_id, self.detail)

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind.value, "activity": self.activity_id, "detail": self.detail}


# --------------------------------------------------------------------------
# events
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Tap:
    widget_id: str


@dataclass(frozen=True)
class SetText:
    widget_id: str
    value: str


@dataclass(frozen=True)
class Toggle:
    widget_id: str


@dataclass(frozen=True)
class Back:
    pass


@dataclass(frozen=True)
class Rotate:
    pass


@dataclass(frozen=True)
class Kill:
    pass


@dataclass(frozen=True)
class Relaunch:
    pass


Event = Union[Tap, SetText, Toggle, Back, Rotate, Kill, Relaunch]


def event_to_dict(event: Event) -> dict[str, str]:
    match event:
        case Tap(w):
            return {"type": "tap", "widget": w}
        case SetText(w, v):
            return {"type": "set_text", "widget": w, "value": v}
        case Toggle(w):
            return {"type": "toggle", "widget": w}
        case Back():
            return {"type": "back"}
        case Rotate():
            return {"type": "rotate"}
        case Kill():
            return {"type": "kill"}
        case Relaunch():
            return {"type": "relaunch"}
    raise TypeError(f"not an event: {event!r}")


def event_from_dict(doc: dict) -> Event:
    kind = doc["type"]
    if kind == "tap":
        return Tap(doc["widget"])
    if kind == "set_text":
        return SetText(doc["widget"], doc["value"])
    if kind == "toggle":
        return Toggle(doc["widget"])
    simple = {"back": Back, "rotate": Rotate, "kill": Kill, "relaunch": Relaunch}
    if kind in simple:
        return simple[kind]()
    raise ValueError(f"unknown event type {kind!r}")


# --------------------------------------------------------------------------
# state
# --------------------------------------------------------------------------


@dataclass
class ActivityInstance:
    activity_id: str
    phase: Phase
    widget_values: dict[tuple[str, str], str]
    locals: dict[str, str] = field(default_factory=dict)
    # creation order within the process; tells recreated instances apart
    serial: int = 0

    def copy(self) -> "ActivityInstance":
        return ActivityInstance(self.activity_id, self.phase, dict(self.widget_values), dict(self.locals), self.serial)


@dataclass
class SinkRecord:
    activity_id: str
    api_class: str
    method: str
    args: tuple[str, ...]


@dataclass
class EngineState:
    model: AppModel
    back_stack: list[ActivityInstance] = field(default_factory=list)
    instance_state: dict[str, dict[str, str]] = field(default_factory=dict)
    session_store: dict[str, dict[str, str]] = field(default_factory=dict)
    prefs: dict[str, str] = field(default_factory=dict)
    open_dialogs: set[tuple[str, str]] = field(default_factory=set)
    rng_seed: int = 0
    step_count: int = 0
    instances_created: int = 0
    sink_log: list[SinkRecord] = field(default_factory=list)
    trace: list[dict] | None = None
    # per-dispatch bookkeeping, not part of the observable state
    _budget: int = field(default=STEP_LIMIT, repr=False, compare=False)
    _pending: list = field(default_factory=list, repr=False, compare=False)

    def copy(self) -> "EngineState":
        return EngineState(
            model=self.model,
            back_stack=[i.copy() for i in self.back_stack],
            instance_state={k: dict(v) for k, v in self.instance_state.items()},
            session_store={k: dict(v) for k, v in self.session_store.items()},
            prefs=dict(self.prefs),
            open_dialogs=set(self.open_dialogs),
            rng_seed=self.rng_seed,
            step_count=self.step_count,
            instances_created=self.instances_created,
            sink_log=list(self.sink_log),
            trace=None if self.trace is None else list(self.trace),
        )

    @property
    def running(self) -> bool:
        return bool(self.back_stack)

    @property
    def top(self) -> ActivityInstance | None:
        return self.back_stack[-1] if self.back_stack else None

    def resumed(self) -> ActivityInstance | None:
        top = self.top
        if top is not None and top.phase is Phase.RESUMED:
            return top
        return None

    def stack_ids(self) -> list[str]:
        return [i.activity_id for i in self.back_stack]


def _log(state: EngineState, **record) -> None:
    if state.trace is not None:
        record.setdefault("detail", "")
        state.trace.append({"step": state.step_count, **record})


def _fresh_instance(model: AppModel, activity_id: str) -> ActivityInstance:
    act = model.activity(activity_id)
    values = {}
    for w in act.widgets:
        for prop, value in w.properties.items():
            values[(w.id, prop)] = value
    return ActivityInstance(activity_id, Phase.CREATED, values)


def layout_defaults(model: AppModel, activity_id: str) -> dict[tuple[str, str], str]:
    return _fresh_instance(model, activity_id).widget_values


# --------------------------------------------------------------------------
# statement interpreter
# --------------------------------------------------------------------------


def _eval(expr: Expression, inst: ActivityInstance) -> str:
    match expr:
        case Literal(value):
            return value
        case VarRef(name):
            return inst.locals[name]
        case WidgetRef(w, p):
            return inst.widget_values.get((w, p), "")
        case Concat(left, right):
            return _eval(left, inst) + _eval(right, inst)
    raise TypeError(f"not an expression: {expr!r}")


def run_handler(
    state: EngineState,
    inst: ActivityInstance,
    key: str,
    *,
    in_bundle: dict[str, str] | None = None,
    out_bundle: dict[str, str] | None = None,
) -> None:
    """Execute ``inst``'s handler for ``key`` in place.

    Navigation and finish are queued on ``state._pending`` and take effect
    once the handler returns. Raises CriticalError on crash or when the
    per-dispatch step budget runs out.
    """
    program = state.model.activity(inst.activity_id).handlers.get(key)
    if key in LIFECYCLE_CALLBACKS:
        _log(state, callback=key, activity=inst.activity_id)
    if key in _PHASE_AFTER:
        inst.phase = _PHASE_AFTER[key]
    if not program:
        return
    inst.locals = {}
    for stmt in program:
        state.step_count += 1
        state._budget -= 1
        if state._budget < 0:
            raise CriticalError(ErrorKind.HANG, inst.activity_id, f"exceeded {STEP_LIMIT} statements in one dispatch")
        _execute(state, inst, stmt, in_bundle, out_bundle)


def _execute(state: EngineState, inst: ActivityInstance, stmt: Statement, in_bundle, out_bundle) -> None:
    aid = inst.activity_id
    match stmt:
        case Assign(var, expr):
            inst.locals[var] = _eval(expr, inst)
        case WidgetWrite(w, p, expr):
            inst.widget_values[(w, p)] = _eval(expr, inst)
        case WidgetRead(var, w, p):
            inst.locals[var] = inst.widget_values.get((w, p), "")
        case SinkCall(cls, method, args):
            values = tuple(_eval(a, inst) for a in args)
            state.sink_log.append(SinkRecord(aid, cls, method, values))
            if cls in PREFS_CLASSES and method.startswith("put") and len(values) >= 2:
                state.prefs[values[0]] = values[1]
        case Navigate(target):
            state._pending.append((inst, "navigate", target))
        case Finish():
            state._pending.append((inst, "finish", None))
        case ShowDialog(d):
            state.open_dialogs.add((aid, d))
        case DismissDialog(d):
            state.open_dialogs.discard((aid, d))
        case Crash(message):
            raise CriticalError(ErrorKind.CRASH, aid, message)
        case Noop():
            pass
        case BundlePut(store, key, expr):
            value = _eval(expr, inst)
            if store == "instance":
                if out_bundle is not None:
                    out_bundle[key] = value
            elif store == "session":
                state.session_store.setdefault(aid, {})[key] = value
        case Restore(store, key, w, p):
            if store == "instance":
                source = in_bundle
            elif store == "session":
                source = state.session_store.get(aid)
            else:
                source = state.prefs
            if source is not None and key in source:
                inst.widget_values[(w, p)] = source[key]
        case _:
            raise TypeError(f"not a statement: {stmt!r}")


# --------------------------------------------------------------------------
# lifecycle transitions (in place)
# --------------------------------------------------------------------------


def _drop_dialogs(state: EngineState, activity_id: str) -> None:
    state.open_dialogs = {d for d in state.open_dialogs if d[0] != activity_id}


def _start(state: EngineState, activity_id: str, bundle: dict[str, str] | None) -> ActivityInstance:
    inst = _fresh_instance(state.model, activity_id)
    state.instances_created += 1
    inst.serial = state.instances_created
    state.back_stack.append(inst)
    run_handler(state, inst, "onCreate", in_bundle=bundle)
    if bundle is not None:
        run_handler(state, inst, "onRestoreInstanceState", in_bundle=bundle)
    run_handler(state, inst, "onResume")
    return inst


def _destroy(state: EngineState, inst: ActivityInstance, scenario: Scenario) -> None:
    bundle: dict[str, str] = {}
    for cb in SCENARIO_CALLBACKS[scenario]:
        if cb == "onSaveInstanceState":
            run_handler(state, inst, cb, out_bundle=bundle)
            state.instance_state[inst.activity_id] = bundle
        else:
            run_handler(state, inst, cb)
    if scenario is Scenario.S2_BACK:
        state.instance_state.pop(inst.activity_id, None)
    if scenario is not Scenario.S1_KILL:
        _drop_dialogs(state, inst.activity_id)


def _finish_top(state: EngineState) -> None:
    """Back-button semantics: S2 on the top, pop, resume the predecessor."""
    inst = state.back_stack[-1]
    _destroy(state, inst, Scenario.S2_BACK)
    state.back_stack.pop()
    if state.back_stack:
        run_handler(state, state.back_stack[-1], "onResume")


def _navigate(state: EngineState, source: ActivityInstance, target: str) -> None:
    if source.activity_id == target:
        return
    ids = state.stack_ids()
    if target in ids:
        # clear-top: finish everything above the target, then resume it
        while state.back_stack[-1].activity_id != target:
            inst = state.back_stack[-1]
            if inst.phase is Phase.RESUMED:
                _destroy(state, inst, Scenario.S2_BACK)
            else:
                run_handler(state, inst, "onDestroy")
                state.instance_state.pop(inst.activity_id, None)
                _drop_dialogs(state, inst.activity_id)
            state.back_stack.pop()
        run_handler(state, state.back_stack[-1], "onResume")
        return
    run_handler(state, source, "onPause")
    _start(state, target, None)
    run_handler(state, source, "onStop")


def _drain(state: EngineState) -> None:
    while state._pending:
        source, action, target = state._pending.pop(0)
        if state.resumed() is not source:
            continue  # queued by an activity that is no longer in front
        if action == "navigate":
            _navigate(state, source, target)
        else:
            _finish_top(state)


def _kill_process(state: EngineState) -> None:
    state.back_stack.clear()
    state.instance_state.clear()
    state.session_store.clear()
    state.open_dialogs.clear()
    state._pending.clear()


def _begin(state: EngineState) -> None:
    state._budget = STEP_LIMIT
    state._pending = []


# --------------------------------------------------------------------------
# public operations
# --------------------------------------------------------------------------


def launch_app(model: AppModel, seed: int = 0, *, trace: bool = False) -> EngineState:
    """Start a fresh process and bring up the launcher activity.

    Raises CriticalError if startup crashes or hangs.
    """
    state = EngineState(model=model, prefs=dict(model.initial_prefs), rng_seed=seed)
    if trace:
        state.trace = []
    _begin(state)
    _log(state, event="launch", activity=model.launcher)
    try:
        _start(state, model.launcher, None)
        _drain(state)
    except CriticalError:
        _kill_process(state)
        raise
    return state


def _check_event(state: EngineState, event: Event) -> None:
    if isinstance(event, Relaunch):
        if state.running:
            raise InvalidEvent("relaunch while the app is running")
        return
    inst = state.resumed()
    if inst is None:
        raise InvalidEvent(f"{type(event).__name__} without a resumed activity")
    if isinstance(event, (Tap, SetText, Toggle)):
        act = state.model.activity(inst.activity_id)
        if not act.has_widget(event.widget_id):
            raise InvalidEvent(f"widget {event.widget_id!r} is not in activity {inst.activity_id!r}")
        kind = act.widget(event.widget_id).kind
        if isinstance(event, SetText) and kind is not WidgetKind.EDITABLE_HAS_TEXT:
            raise InvalidEvent(f"set_text on {kind.value} widget {event.widget_id!r}")
        if isinstance(event, Toggle) and kind is not WidgetKind.EDITABLE_NO_TEXT:
            raise InvalidEvent(f"toggle on {kind.value} widget {event.widget_id!r}")


def _dispatch_in_place(state: EngineState, event: Event) -> None:
    match event:
        case Tap(w):
            inst = state.resumed()
            run_handler(state, inst, f"tap:{w}")
        case SetText(w, value):
            inst = state.resumed()
            inst.widget_values[(w, "text")] = value
            run_handler(state, inst, f"text_changed:{w}")
        case Toggle(w):
            inst = state.resumed()
            current = inst.widget_values.get((w, "checked"), "false")
            inst.widget_values[(w, "checked")] = "false" if current == "true" else "true"
            run_handler(state, inst, f"text_changed:{w}")
        case Back():
            _finish_top(state)
        case Rotate():
            _destroy(state, state.back_stack[-1], Scenario.S3_ROTATE)
            _recreate_in_place(state)
        case Kill():
            for inst in reversed(list(state.back_stack)):
                _destroy(state, inst, Scenario.S1_KILL)
            _kill_process(state)
            return
        case Relaunch():
            _start(state, state.model.launcher, None)
    _drain(state)


def dispatch_event(state: EngineState, event: Event) -> tuple[EngineState, CriticalError | None]:
    """Apply one user or system event.

    Raises InvalidEvent when the event's target does not resolve. A crash or
    hang kills the process (prefs survive) and is returned, not raised.
    """
    _check_event(state, event)
    new = state.copy()
    _begin(new)
    top = new.top
    _log(new, event=event_to_dict(event)["type"], activity=top.activity_id if top else "",
         detail=getattr(event, "widget_id", ""))
    try:
        _dispatch_in_place(new, event)
    except CriticalError as err:
        _kill_process(new)
        return new, err
    return new, None


def apply_destruction(state: EngineState, scenario: Scenario) -> EngineState:
    """Run the scenario's callback sequence on the resumed activity only.

    The instance stays on the stack (Stopped for S1, Destroyed otherwise);
    popping, recreation or process teardown is up to the caller.
    """
    if state.resumed() is None:
        raise NoResumedActivity("no resumed activity to destroy")
    new = state.copy()
    _begin(new)
    _destroy(new, new.back_stack[-1], Scenario(scenario))
    return new


def _recreate_in_place(state: EngineState) -> None:
    old = state.back_stack.pop()
    bundle = dict(state.instance_state.get(old.activity_id, {}))
    _start(state, old.activity_id, bundle)


def recreate_current(state: EngineState) -> EngineState:
    """Rebuild the destroyed top activity from its saved-instance bundle."""
    top = state.top
    if top is None or top.phase is not Phase.DESTROYED:
        raise InvalidEvent("top activity is not destroyed")
    new = state.copy()
    _begin(new)
    _recreate_in_place(new)
    _drain(new)
    return new


# --------------------------------------------------------------------------
# snapshots
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GuiSnapshot:
    """Immutable capture of the resumed activity's app-relevant GUI values."""

    activity_id: str
    values: tuple[tuple[str, str, str], ...]
    widgets: tuple[tuple[str, str], ...]
    dialogs: tuple[str, ...] = ()

    def value(self, widget_id: str, prop: str) -> str | None:
        for w, p, v in self.values:
            if w == widget_id and p == prop:
                return v
        return None

    def as_dict(self) -> dict[tuple[str, str], str]:
        return {(w, p): v for w, p, v in self.values}

    def type_of(self, widget_id: str) -> str:
        return dict(self.widgets)[widget_id]


def snapshot_gui(state: EngineState) -> GuiSnapshot:
    inst = state.resumed()
    if inst is None:
        raise NoResumedActivity("no resumed activity to snapshot")
    act = state.model.activity(inst.activity_id)
    values = []
    for w in act.widgets:
        for prop in w.app_relevant:
            values.append((w.id, prop, inst.widget_values.get((w.id, prop), "")))
    dialogs = sorted(d for a, d in state.open_dialogs if a == inst.activity_id)
    return GuiSnapshot(
        activity_id=inst.activity_id,
        values=tuple(sorted(values)),
        widgets=tuple(sorted((w.id, w.type_name) for w in act.widgets)),
        dialogs=tuple(dialogs),
    )


def run_events(state: EngineState, events: Iterable[Event]) -> tuple[EngineState, list[CriticalError]]:
    """Dispatch events in order, collecting (not raising) critical errors."""
    errors = []
    for event in events:
        state, err = dispatch_event(state, event)
        if err is not None:
            errors.append(err)
    return state, errors
