import pytest
from hypothesis import given, settings

from lifeguard.analysis import build_atg
from lifeguard.corpus import gen_corpus
from lifeguard.engine import Back, Rotate, SetText, Tap, Toggle, dispatch_event, launch_app, snapshot_gui
from lifeguard.errors import ReplayDivergence
from lifeguard.explorer import (
    ExplorationConfig,
    StateId,
    StateRecord,
    candidate_events,
    entry_prefix,
    fnv1a_64,
    guided_explore,
    replay,
    state_id,
)

from conftest import activity, app, widget
from strategies import app_models


@pytest.mark.parametrize(
    "data, expected",
    [(b"", 0xCBF29CE484222325), (b"a", 0xAF63DC4C8601EC8C), (b"foobar", 0x85944171F73967E8)],
)
def test_fnv1a_vectors(data, expected):
    assert fnv1a_64(data) == expected


def test_state_id_ignores_typed_text(register_model):
    state = launch_app(register_model)
    typed, _ = dispatch_event(state, SetText("name", "Alice"))
    assert state_id(snapshot_gui(state)) == state_id(snapshot_gui(typed))


def test_state_id_sees_labels_checks_and_dialogs():
    m = app(activity("a", [widget("c", "CheckBox"), widget("l", "TextView", text="x"), widget("b", "Button")],
                     {"tap:b": [{"op": "show_dialog", "dialog": "d"}]}))
    state = launch_app(m)
    base = state_id(snapshot_gui(state))
    toggled, _ = dispatch_event(state, Toggle("c"))
    shown, _ = dispatch_event(state, Tap("b"))
    assert len({base, state_id(snapshot_gui(toggled)), state_id(snapshot_gui(shown))}) == 3
    state.resumed().widget_values[("l", "text")] = "y"
    assert state_id(snapshot_gui(state)) != base


def test_state_id_hex_round_trip():
    sid = StateId(0xABC)
    assert sid.hex() == "0000000000000abc"
    assert StateId.from_hex(sid.hex()) == sid


def test_candidate_order_prefers_transitions():
    m = app(
        activity("a", [widget("note", "EditText"), widget("aa", "Button"), widget("zz", "Button")],
                 {"tap:zz": [{"op": "navigate", "activity": "b"}], "tap:aa": [{"op": "noop"}]}),
        activity("b"),
    )
    events = candidate_events(launch_app(m), build_atg(m))
    assert events == [Tap("zz"), Tap("aa"), SetText("note", "probe_note"), Back()]


def test_explore_fixture(register_model):
    pool, errors = guided_explore(register_model, build_atg(register_model), ExplorationConfig(50))
    assert len(pool) == 1 and errors == []


def test_explore_reaches_second_activity():
    m = app(activity("a", [widget("go", "Button")], {"tap:go": [{"op": "navigate", "activity": "b"}]}),
            activity("b", [widget("l", "TextView", text="b")]))
    pool, _ = guided_explore(m, build_atg(m), ExplorationConfig(20))
    assert sorted(r.activity_id for r in pool) == ["a", "b"]
    (rec_b,) = [r for r in pool if r.activity_id == "b"]
    assert rec_b.event_seq == (Tap("go"),)


def test_explore_collects_crashes():
    m = app(activity("a", [widget("b", "Button")], {"tap:b": [{"op": "crash", "message": "x"}]}))
    pool, errors = guided_explore(m, build_atg(m), ExplorationConfig(20))
    assert len(pool) == 1 and [e.detail for e in errors] == ["x"]


def test_config_rejects_bad_budget():
    with pytest.raises(ValueError):
        ExplorationConfig(0)


def _try_explore(model, budget):
    try:
        launch_app(model)
    except Exception:
        return None
    return guided_explore(model, build_atg(model), ExplorationConfig(budget))[0]


@settings(max_examples=60, deadline=None)
@given(app_models())
def test_budget_monotonicity(model):
    small, large = _try_explore(model, 5), _try_explore(model, 40)
    if small is None:
        return
    assert set(small.records) <= set(large.records)


@settings(max_examples=60, deadline=None)
@given(app_models())
def test_records_replay_to_their_ids(model):
    pool = _try_explore(model, 30)
    if pool is None:
        return
    for record in pool:
        assert state_id(snapshot_gui(replay(model, record.event_seq))) == record.state_id


def test_corpus_records_replay():
    models, _ = gen_corpus(7, 5)
    for model in models:
        pool, _ = guided_explore(model, build_atg(model), ExplorationConfig())
        for record in pool:
            again = StateRecord.from_dict(record.to_dict())
            assert again == record
            assert state_id(snapshot_gui(replay(model, again.event_seq))) == record.state_id


def test_replay_divergence():
    m = app(activity("a", [widget("b", "Button")]))
    with pytest.raises(ReplayDivergence):
        replay(m, (Tap("missing"),))


def test_entry_prefix_drops_in_place_edits():
    m = app(activity("a", [widget("go", "Button")], {"tap:go": [{"op": "navigate", "activity": "b"}]}),
            activity("b", [widget("e", "EditText")]))
    assert entry_prefix(m, (Tap("go"), SetText("e", "v"))) == (Tap("go"),)
    assert entry_prefix(m, ()) == ()


def test_entry_prefix_keeps_recreating_events():
    m = app(activity("a", [widget("go", "Button")], {"tap:go": [{"op": "navigate", "activity": "b"}]}),
            activity("b", [widget("e", "EditText")]))
    assert entry_prefix(m, (Tap("go"), Rotate())) == (Tap("go"), Rotate())


def test_entry_prefix_outside_app():
    m = app(activity("a"))
    with pytest.raises(ReplayDivergence):
        entry_prefix(m, (Back(),))
