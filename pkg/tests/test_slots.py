import pytest

from macro_router.errors import MissingSlotError, TypeMismatchError
from macro_router.slots import Binding, ParamSpec, SlotSpec, extract, validate

GROCERY_UTTERANCE = (
    "Please, order 6 of the cheapest yogurt cups and 0.5 kilogram of any cheese "
    "from the closest market to my home"
)


def test_extract_grocery_order_example():
    specs = [
        SlotSpec("items", "order {items} from the closest market"),
        SlotSpec("address", "to {address}"),
    ]
    captured = extract(GROCERY_UTTERANCE, specs)
    assert captured["items"] == "6 of the cheapest yogurt cups and 0.5 kilogram of any cheese"
    assert captured["address"] == "my home"


def test_extract_missing_anchor_names_param():
    with pytest.raises(MissingSlotError) as err:
        extract("Plan a trip", [SlotSpec("budget", "budget of {budget}")])
    assert err.value.param == "budget"


def test_extract_remainder_fallback_takes_whole_utterance():
    specs = [SlotSpec("query", "{query}", fallback="remainder")]
    assert extract("  Find me a plumber  ", specs) == {"query": "find me a plumber"}


def test_extract_remainder_excludes_other_captures_and_anchors():
    specs = [
        SlotSpec("time", "at {time}"),
        SlotSpec("rest", "{rest}", fallback="remainder"),
    ]
    captured = extract("water the garden at 7 am", specs)
    assert captured["time"] == "7 am"
    assert captured["rest"] == "water the garden"


def test_extract_is_case_folded():
    captured = extract("ORDER Apples FROM the market", [SlotSpec("x", "order {x} from")])
    assert captured["x"] == "apples"


def test_extract_capture_is_maximal_between_anchors():
    captured = extract(
        "order cheese from the shop from the market",
        [SlotSpec("x", "order {x} from the market")],
    )
    assert captured["x"] == "cheese from the shop"


def test_extract_reconstructs_a_substring_of_the_folded_utterance():
    specs = [SlotSpec("x", "dial {x} now")]
    utterance = "Please dial 4 4 2 now thanks"
    captured = extract(utterance, specs)
    assert f"dial {captured['x']} now" in utterance.lower()


def test_validate_parses_number_kind():
    bindings = validate({"tempThreshold": "15"}, [ParamSpec("tempThreshold", "number")])
    assert bindings == [Binding("tempThreshold", 15.0)]


def test_validate_rejects_non_numeric():
    with pytest.raises(TypeMismatchError):
        validate({"tempThreshold": "cold"}, [ParamSpec("tempThreshold", "number")])


def test_validate_plan_trip_all_text_kinds():
    params = [ParamSpec("destination"), ParamSpec("dates"), ParamSpec("budget")]
    raw = {"destination": "thailand", "dates": "july", "budget": "$100 per night"}
    bindings = validate(raw, params)
    assert [b.param for b in bindings] == ["destination", "dates", "budget"]
    assert all(isinstance(b.value, str) for b in bindings)


def test_validate_missing_param():
    with pytest.raises(MissingSlotError):
        validate({}, [ParamSpec("dates")])


def test_extract_reports_first_unfillable_param_in_spec_order():
    specs = [
        SlotSpec("a", "alpha {a} beta"),
        SlotSpec("b", "gamma {b} delta"),
    ]
    with pytest.raises(MissingSlotError) as err:
        extract("no anchors here at all", specs)
    assert err.value.param == "a"


def test_extract_is_total_over_odd_inputs():
    specs = [SlotSpec("x", "find {x}")]
    for utterance in ["", "find", "find ", "FIND THE THING", "x" * 500]:
        try:
            captured = extract(utterance, specs)
            assert set(captured) == {"x"}
        except MissingSlotError as err:
            assert err.param == "x"
