import dataclasses

import pytest

from lifeguard.model import AppModel, BundlePut, Literal, Restore, VarRef, WidgetModel, WidgetRef, WidgetWrite
from lifeguard.validate import validate

from conftest import activity, app, widget


def codes(model):
    return sorted({d.code for d in validate(model)})


def with_handlers(model: AppModel, aid: str, **handlers) -> AppModel:
    act = model.activity(aid)
    act = dataclasses.replace(act, handlers={**act.handlers, **{k.replace("__", ":"): v for k, v in handlers.items()}})
    return dataclasses.replace(model, activities=tuple(act if a.id == aid else a for a in model.activities))


@pytest.fixture
def base():
    return app(activity("a", [widget("e", "EditText"), widget("l", "TextView", text="hi")]))


def test_clean_model(base):
    assert validate(base) == []


def test_use_before_def(base):
    m = with_handlers(base, "a", onCreate=(WidgetWrite("l", "text", VarRef("v")),))
    assert codes(m) == ["UseBeforeDef"]


def test_unknown_property(base):
    m = with_handlers(base, "a", onCreate=(WidgetWrite("l", "colour", Literal("red")),))
    assert codes(m) == ["UnknownProperty"]


def test_geometry_property_rejected(base):
    act = base.activity("a")
    w = WidgetModel("g", "TextView", {"text": "", "width": "10"}, ("text", "width"))
    m = dataclasses.replace(base, activities=(dataclasses.replace(act, widgets=act.widgets + (w,)),))
    assert codes(m) == ["GeometryProperty"]


def test_duplicate_ids():
    act = activity("a", [widget("e", "EditText"), widget("e", "EditText")])
    assert "DuplicateWidgetId" in codes(app(act))
    assert "DuplicateActivityId" in codes(app(activity("a"), activity("a")))


def test_missing_oracle_property():
    m = app(activity("a", [{"id": "e", "type": "EditText", "app_relevant": []}]))
    assert codes(m) == ["MissingOracleProperty"]


def test_bad_checked_value():
    m = app(activity("a", [widget("c", "CheckBox", checked="yes")]))
    assert codes(m) == ["BadCheckedValue"]


def test_text_changed_on_label_rejected(base):
    m = with_handlers(base, "a", text_changed__l=())
    assert codes(m) == ["BadHandlerKey"]


def test_instance_bundle_only_in_matching_callbacks(base):
    put = BundlePut("instance", "k", WidgetRef("e", "text"))
    get = Restore("instance", "k", "e", "text")
    assert codes(with_handlers(base, "a", onSaveInstanceState=(put,), onRestoreInstanceState=(get,))) == []
    assert codes(with_handlers(base, "a", onCreate=(get,))) == []
    assert codes(with_handlers(base, "a", onPause=(put,))) == ["BadStore"]
    assert codes(with_handlers(base, "a", onResume=(get,))) == ["BadStore"]


def test_session_and_prefs_restore_anywhere(base):
    m = with_handlers(base, "a", onResume=(Restore("session", "k", "e", "text"), Restore("prefs", "k", "e", "text")))
    assert validate(m) == []


def test_locations_point_at_statement(base):
    m = with_handlers(base, "a", onCreate=(WidgetWrite("l", "text", Literal("")), WidgetWrite("l", "text", VarRef("z"))))
    (diag,) = validate(m)
    assert diag.location == "a.onCreate[1]"
    assert diag.ref == "z"
