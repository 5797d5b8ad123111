import json
from importlib.resources import files

import pytest

from lifeguard.appfile import app_model_from_dict, load_app_model

_criteria: dict[str, str] = {}


def fixture_path(name: str):
    return files("lifeguard") / "fixtures" / f"{name}.json"


@pytest.fixture
def register_model():
    return load_app_model(fixture_path("cyclestreets_register"))


def activity(aid, widgets=(), handlers=None):
    return {"id": aid, "widgets": list(widgets), "handlers": handlers or {}}


def widget(wid, type_name, **props):
    return {"id": wid, "type": type_name, "properties": props}


def app(*activities, launcher=None, app_id="t", prefs=None):
    doc = {"app_id": app_id, "launcher": launcher or activities[0]["id"], "activities": list(activities)}
    if prefs:
        doc["initial_prefs"] = prefs
    return app_model_from_dict(doc)


@pytest.fixture
def make_app():
    return app


# one PASS/FAIL line per acceptance criterion, printed after the run


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion the test checks")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}[report.outcome]
        if report.when == "call" or marker not in _criteria:
            _criteria[marker] = status


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is not None:
        report.criterion = f"criterion {m.args[0]}: {m.args[1]}"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for line, status in sorted(_criteria.items(), key=lambda kv: int(kv[0].split()[1].rstrip(":"))):
        terminalreporter.write_line(f"{status}  {line}")


def dumps(doc):
    return json.dumps(doc, sort_keys=True)
