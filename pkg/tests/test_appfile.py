import json

import pytest
from hypothesis import given, settings

from lifeguard.appfile import app_model_to_dict, dump_app_model, load_app_model, parse_app_model
from lifeguard.errors import ModelReferenceError, ModelSchemaError, ModelSyntaxError
from lifeguard.model import WidgetKind, classify_widget_kind, designated_property
from lifeguard.validate import validate

from conftest import fixture_path
from strategies import app_models


@settings(max_examples=150, deadline=None)
@given(app_models(stores=True))
def test_round_trip(model):
    text = dump_app_model(model)
    again = parse_app_model(text)
    assert again == model
    assert dump_app_model(again) == text


@settings(max_examples=100, deadline=None)
@given(app_models(stores=True))
def test_generated_models_validate(model):
    assert validate(model) == []


@pytest.mark.parametrize(
    "type_name, kind",
    [
        ("EditText", WidgetKind.EDITABLE_HAS_TEXT),
        ("android.widget.AutoCompleteTextView", WidgetKind.EDITABLE_HAS_TEXT),
        ("Spinner", WidgetKind.EDITABLE_HAS_TEXT),
        ("CheckBox", WidgetKind.EDITABLE_NO_TEXT),
        ("RadioButton", WidgetKind.EDITABLE_NO_TEXT),
        ("CheckedTextView", WidgetKind.EDITABLE_NO_TEXT),
        ("android.widget.Switch", WidgetKind.EDITABLE_NO_TEXT),
        ("TextView", WidgetKind.NON_EDITABLE),
        ("Button", WidgetKind.NON_EDITABLE),
        ("edittext", WidgetKind.NON_EDITABLE),
    ],
)
def test_classify_widget_kind(type_name, kind):
    assert classify_widget_kind(type_name) is kind


def test_designated_property():
    assert designated_property(WidgetKind.EDITABLE_HAS_TEXT) == "text"
    assert designated_property(WidgetKind.EDITABLE_NO_TEXT) == "checked"
    assert designated_property(WidgetKind.NON_EDITABLE) is None


def test_fixture_loads():
    model = load_app_model(fixture_path("cyclestreets_register"))
    act = model.activity("register")
    editable = [w for w in act.widgets if w.kind.editable]
    assert len(editable) == 5
    assert validate(model) == []


def test_syntax_error_has_position():
    with pytest.raises(ModelSyntaxError) as info:
        parse_app_model('{"app_id": "x",\n  "launcher": }')
    assert info.value.line == 2
    assert info.value.col > 1


def test_schema_error_names_path():
    doc = {"app_id": "x", "launcher": "a", "activities": [{"id": "a", "widgets": [{"id": "w"}]}]}
    with pytest.raises(ModelSchemaError) as info:
        parse_app_model(json.dumps(doc))
    assert info.value.path.startswith("/activities/0/widgets/0")


def test_schema_rejects_unknown_op():
    doc = {"app_id": "x", "launcher": "a",
           "activities": [{"id": "a", "handlers": {"onCreate": [{"op": "goto"}]}}]}
    with pytest.raises(ModelSchemaError):
        parse_app_model(json.dumps(doc))


@pytest.mark.parametrize(
    "doc, ref",
    [
        ({"app_id": "x", "launcher": "missing", "activities": [{"id": "a"}]}, "missing"),
        ({"app_id": "x", "launcher": "a",
          "activities": [{"id": "a", "handlers": {"tap:go": [{"op": "navigate", "activity": "b"}]},
                          "widgets": [{"id": "go", "type": "Button"}]}]}, "b"),
        ({"app_id": "x", "launcher": "a",
          "activities": [{"id": "a", "handlers": {"onCreate": [
              {"op": "widget_write", "widget": "ghost", "property": "text", "expr": {"lit": ""}}]}}]}, "ghost"),
    ],
)
def test_reference_errors(doc, ref):
    with pytest.raises(ModelReferenceError) as info:
        parse_app_model(json.dumps(doc))
    assert info.value.ref == ref


def test_editable_defaults_filled_in():
    doc = {"app_id": "x", "launcher": "a", "activities": [{"id": "a", "widgets": [
        {"id": "e", "type": "EditText"}, {"id": "c", "type": "CheckBox"}, {"id": "l", "type": "TextView",
                                                                           "properties": {"text": "hi"}},
        {"id": "i", "type": "ImageView"}]}]}
    act = parse_app_model(json.dumps(doc)).activity("a")
    assert act.widget("e").properties == {"text": ""} and act.widget("e").app_relevant == ("text",)
    assert act.widget("c").properties == {"checked": "false"} and act.widget("c").app_relevant == ("checked",)
    assert act.widget("l").app_relevant == ("text",)
    assert act.widget("i").app_relevant == ()


def test_dump_is_sorted_and_stable(register_model):
    text = dump_app_model(register_model)
    assert text == json.dumps(app_model_to_dict(register_model), indent=2, sort_keys=True) + "\n"
    assert dump_app_model(parse_app_model(text)) == text
