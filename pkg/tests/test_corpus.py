import json

import pytest

from lifeguard.appfile import dump_app_model
from lifeguard.corpus import ISSUE_PATTERNS, gen_corpus, write_corpus
from lifeguard.detector import detect
from lifeguard.validate import validate


def test_single_model_has_an_issue():
    models, manifest = gen_corpus(1, 1)
    assert len(models) == 1
    entry = manifest["models"][0]
    assert entry["issues"] or entry["critical_errors"]
    assert manifest["seed"] == 1


def test_same_inputs_same_bytes(tmp_path):
    write_corpus(tmp_path / "a", 5, 4)
    write_corpus(tmp_path / "b", 5, 4)
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert "manifest.json" in names and len(names) == 5
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seeds_differ():
    a = [dump_app_model(m) for m in gen_corpus(1, 3)[0]]
    b = [dump_app_model(m) for m in gen_corpus(2, 3)[0]]
    assert a != b


def test_models_validate_and_cover_patterns():
    models, manifest = gen_corpus(42, 25)
    seen = set()
    for model, entry in zip(models, manifest["models"]):
        assert validate(model) == []
        seen |= set(entry["patterns"].values())
    assert seen >= set(ISSUE_PATTERNS)


def test_clean_activities_stay_clean():
    models, manifest = gen_corpus(9, 10)
    for model, entry in zip(models, manifest["models"]):
        report = detect(model)
        for aid in entry["clean_activities"]:
            rep = report.activities[aid]
            assert rep.lost_keys() == set() and rep.ce == []


def test_manifest_is_json_serializable(tmp_path):
    write_corpus(tmp_path, 3, 2)
    doc = json.loads((tmp_path / "manifest.json").read_text())
    assert doc["count"] == 2 and all(e["max_depth"] <= 3 for e in doc["models"])


def test_count_must_be_positive():
    with pytest.raises(ValueError):
        gen_corpus(1, 0)
