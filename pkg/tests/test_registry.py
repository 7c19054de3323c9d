import json

import pytest

from macro_router.errors import DuplicateNameError, InvalidTemplateError, SchemaError, UnknownIdError
from macro_router.registry import FeedbackStats, MacroRegistry

from conftest import make_record


def test_add_macro_assigns_id_and_lists():
    registry = MacroRegistry()
    macro_id = registry.add_macro(make_record())
    assert macro_id == 0
    records = registry.list_records()
    assert [r.macro_name for r in records] == ["TRACK_AND_COMPARE_SPENDING"]
    assert records[0].created_at  # assigned when absent


def test_add_macro_rejects_unbound_placeholder():
    record = make_record(url="http://sim.local/spend?budget={budget}")
    with pytest.raises(InvalidTemplateError) as err:
        MacroRegistry().add_macro(record)
    assert err.value.placeholder == "budget"


def test_add_macro_rejects_duplicate_name():
    registry = MacroRegistry()
    registry.add_macro(make_record(macro_name="PLAN_TRIP", params=(), url="http://sim.local/t"))
    with pytest.raises(DuplicateNameError):
        registry.add_macro(make_record(macro_name="PLAN_TRIP", params=(), url="http://sim.local/t"))


def test_output_binding_may_not_shadow_param():
    record = make_record(output_bindings=(("category", "data.category"),))
    with pytest.raises(ValueError, match="collides"):
        MacroRegistry().add_macro(record)


def test_corpus_document_concatenates_three_columns(fixture_registry):
    docs = dict(fixture_registry.corpus_documents())
    assert docs[1] == (
        "Smart Home Automation Adjust home devices based on environmental "
        "conditions. ADJUST THERMOSTAT IF COLD"
    )


def test_corpus_documents_empty_registry():
    assert MacroRegistry().corpus_documents() == []


def test_corpus_never_contains_call_urls(fixture_registry):
    for _, text in fixture_registry.corpus_documents():
        assert "http" not in text
        assert "sim.local" not in text


def test_record_feedback_counts():
    registry = MacroRegistry()
    macro_id = registry.add_macro(make_record())
    assert registry.record_feedback(macro_id, "success") == FeedbackStats(1, 1)
    assert registry.record_feedback(macro_id, "failure") == FeedbackStats(1, 2)
    with pytest.raises(UnknownIdError):
        registry.record_feedback(999, "success")


def test_save_load_round_trip(fixture_registry, tmp_path):
    path = tmp_path / "registry.json"
    fixture_registry.save(path)
    loaded = MacroRegistry.load(path)
    assert loaded.list_records() == fixture_registry.list_records()
    assert loaded.to_document() == fixture_registry.to_document()


def test_load_empty_document_is_schema_error(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    with pytest.raises(SchemaError):
        MacroRegistry.load(path)


def test_load_rejects_successes_above_attempts(fixture_dir, tmp_path):
    with open(f"{fixture_dir}/macros.json") as fh:
        document = json.load(fh)
    document["macros"][0]["stats"] = {"successes": 3, "attempts": 1}
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document))
    with pytest.raises(SchemaError) as err:
        MacroRegistry.load(path)
    assert "stats" in err.value.path


def test_load_rejects_wrong_version(tmp_path):
    path = tmp_path / "v2.json"
    path.write_text(json.dumps({"version": 2, "next_id": 0, "macros": []}))
    with pytest.raises(SchemaError):
        MacroRegistry.load(path)


def test_ids_strictly_increasing_and_never_reused():
    registry = MacroRegistry()
    ids = []
    for i in range(4):
        ids.append(
            registry.add_macro(
                make_record(macro_name=f"MACRO_{i}", params=(), url="http://sim.local/x")
            )
        )
    assert ids == sorted(ids) == list(set(ids))
    registry.remove_macro(ids[-1])
    fresh = registry.add_macro(
        make_record(macro_name="MACRO_AGAIN", params=(), url="http://sim.local/x")
    )
    assert fresh > ids[-1]
    assert len(registry.corpus_documents()) == len(registry)


def test_concurrent_reads_during_writes_see_consistent_snapshots():
    import threading

    registry = MacroRegistry()
    errors = []

    def writer():
        for i in range(200):
            registry.add_macro(
                make_record(macro_name=f"MACRO_{i}", params=(), url="http://sim.local/x")
            )

    def reader():
        try:
            for _ in range(400):
                docs = registry.corpus_documents()
                assert [i for i, _ in docs] == sorted(i for i, _ in docs)
        except Exception as exc:  # surfaced after join
            errors.append(exc)

    threads = [threading.Thread(target=writer)] + [
        threading.Thread(target=reader) for _ in range(3)
    ]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert errors == []
    assert len(registry) == 200


def test_revision_moves_on_corpus_mutation():
    registry = MacroRegistry()
    before = registry.revision
    macro_id = registry.add_macro(make_record())
    assert registry.revision == before + 1
    registry.record_feedback(macro_id, "success")  # stats only, corpus unchanged
    assert registry.revision == before + 1
    registry.remove_macro(macro_id)
    assert registry.revision == before + 2
