"""Acceptance gate: one test per exit criterion, pinned tolerances.

The terminal summary (see conftest) prints one PASS/FAIL line per criterion.
Criterion 4a asserts the stated accuracy floor for the TF-IDF default on the
bundled 100-utterance experiment; the achieved deterministic figure is locked
in criterion 4b.
"""

import io
import json
import random
import time

import pytest

import conftest
from macro_router import cli
from macro_router.eval_harness import calibrate_theta, load_fixtures, run_eval
from macro_router.call_filter import CandidateCall, LossParams, TableOracle, filter_calls, utility_gain, weighted_loss
from macro_router.executor import SimulatedTransport, execute, instantiate
from macro_router.matcher import rank
from macro_router.pipeline import PipelineConfig, blended_score
from macro_router.registry import ApiCallTemplate, FeedbackStats, MacroRegistry, OutputBinding
from macro_router.vectorizer import fit, transform

from test_matcher import brute_force_rank, random_sparse

# first-harness-run lock-in: 37 of 90 in-scope top-1 at calibrated theta 0.01
LOCKED_ACCURACY = 37 / 90
LOCKED_THETA = 0.01
LOCKED_OOS_RATE = 1.0


def test_c1_ranking_equals_brute_force_oracle():
    """100 random corpora (<=200 docs, <=50 terms): identical order, <=1e-9."""
    start = time.perf_counter()
    rng = random.Random(20260810)
    for trial in range(100):
        n_docs = rng.randint(1, 200)
        index = [(i, random_sparse(rng, n_terms=50)) for i in range(n_docs)]
        query = random_sparse(rng, n_terms=50)
        expected = brute_force_rank(query, index)
        actual = rank(query, index)
        assert [r.id for r in actual] == [i for i, _ in expected], f"trial {trial}"
        for got, (_, want) in zip(actual, expected):
            assert abs(got.score - want) <= 1e-9
    assert time.perf_counter() - start < 5.0


def test_c2_cosine_invariant_suite():
    """symmetry, self-sim 1, orthogonality 0, bounds, scale-argmax: 1000 cases."""
    from macro_router.matcher import cosine

    rng = random.Random(4242)
    for _ in range(1000):
        a = random_sparse(rng, n_terms=20)
        b = random_sparse(rng, n_terms=20)
        assert abs(cosine(a, b) - cosine(b, a)) <= 1e-12
        assert abs(cosine(a, a) - 1.0) <= 1e-9
        assert -1e-12 <= cosine(a, b) <= 1.0 + 1e-12

        disjoint = {f"z{t}": w for t, w in b.items()}
        assert cosine(a, disjoint) == 0.0

        index = [(i, random_sparse(rng, n_terms=20)) for i in range(5)]
        scale = rng.uniform(0.01, 50.0)
        scaled_query = {t: w * scale for t, w in a.items()}
        plain = rank(a, index)
        scaled = rank(scaled_query, index)
        assert [r.id for r in plain] == [r.id for r in scaled]
        for x, y in zip(plain, scaled):
            assert abs(x.score - y.score) <= 1e-9


def test_c3_tfidf_hand_oracle():
    vocab = fit(["alpha beta", "alpha gamma"])
    vec = transform("alpha beta", vocab)
    assert vec["alpha"] == pytest.approx(0.579739, abs=1e-6)
    assert vec["beta"] == pytest.approx(0.814802, abs=1e-6)


def test_c4a_experiment_accuracy_floor():
    """Stated floor for the TF-IDF default: in-scope top-1 accuracy >= 0.75.

    The bundled corpus gives each macro only a title, a one-line description
    and its name; see the decisions ledger for why plain TF-IDF cannot reach
    this floor on the 100-utterance set (measured: LOCKED_ACCURACY).
    """
    registry, utterances = load_fixtures(conftest.FIXTURES)
    calibration = calibrate_theta(registry, utterances)
    report = run_eval(
        registry, utterances, PipelineConfig(theta=calibration.theta, alpha=1.0)
    )
    assert report.in_scope_accuracy >= 0.75, (
        f"TF-IDF default reaches {report.in_scope_accuracy:.4f} in-scope top-1 "
        f"accuracy ({round(report.in_scope_accuracy * report.n_in_scope)}/"
        f"{report.n_in_scope}) at calibrated theta {calibration.theta:.2f}"
    )


def test_c4b_experiment_out_of_scope_floor_and_regression_lock():
    """>=6 of 8 general prompts NoMatch at calibrated theta; achieved accuracy
    locked at +-0 across runs; full experiment under 10 s."""
    start = time.perf_counter()
    registry, utterances = load_fixtures(conftest.FIXTURES)
    calibration = calibrate_theta(registry, utterances)
    assert calibration.feasible
    assert calibration.theta == LOCKED_THETA
    report = run_eval(
        registry, utterances, PipelineConfig(theta=calibration.theta, alpha=1.0)
    )
    assert report.n_out_of_scope == 8
    assert report.out_of_scope_nomatch_rate * report.n_out_of_scope >= 6
    assert report.out_of_scope_nomatch_rate == LOCKED_OOS_RATE
    assert report.in_scope_accuracy == LOCKED_ACCURACY  # exact: deterministic
    rerun = run_eval(
        registry, utterances, PipelineConfig(theta=calibration.theta, alpha=1.0)
    )
    assert rerun.to_dict() == report.to_dict()
    assert time.perf_counter() - start < 10.0


def test_c5_loss_filter_oracle_and_monotonicity():
    tokens = ["the", "market", "opens", "at", "nine"]
    params = LossParams(window=1)
    oracle = TableOracle(table={("", "nine"): 0.25, ("ctx", "nine"): 0.5})
    without_call = weighted_loss(tokens, 4, "", oracle, params)
    with_call = weighted_loss(tokens, 4, "ctx", oracle, params)
    gain = utility_gain(tokens, CandidateCall(4, "ctx"), oracle, params)
    assert without_call == pytest.approx(1.386294, abs=1e-6)
    assert with_call == pytest.approx(0.693147, abs=1e-6)
    assert gain == pytest.approx(0.693147, abs=1e-6)

    rng = random.Random(77)
    for _ in range(200):
        table = {}
        for token in tokens:
            table[("", token)] = rng.uniform(0.05, 1.0)
            table[("z", token)] = rng.uniform(0.05, 1.0)
        rand_oracle = TableOracle(table=table)
        candidates = [CandidateCall(i, "z") for i in range(len(tokens))]
        tau_low, tau_high = sorted((rng.uniform(0, 1.5), rng.uniform(0, 1.5)))
        kept_low = filter_calls(tokens, candidates, rand_oracle,
                                LossParams(retention_threshold=tau_low))
        kept_high = filter_calls(tokens, candidates, rand_oracle,
                                 LossParams(retention_threshold=tau_high))
        assert {c.position for c in kept_high} <= {c.position for c in kept_low}


def test_c6_executor_sequencing():
    def step(url, bindings=()):
        return ApiCallTemplate(
            method="GET",
            url_template=url,
            output_bindings=[OutputBinding(*b) for b in bindings],
        )

    transport = SimulatedTransport()
    transport.add("GET", "/stores", 200, {"best": {"id": "s9"}})
    transport.add("GET", "/stores/s9/items", 200, {"item": "yogurt"})
    transport.add("GET", "/order/s9/yogurt", 200, {"done": True})
    plan = instantiate(
        [
            step("http://sim.local/stores", bindings=(("store", "best.id"),)),
            step("http://sim.local/stores/{store}/items", bindings=(("item", "item"),)),
            step("http://sim.local/order/{store}/{item}"),
        ],
        {},
    )
    result = execute(plan, transport)
    assert result.succeeded
    assert [c.url for c in transport.request_log] == [
        "http://sim.local/stores",
        "http://sim.local/stores/s9/items",
        "http://sim.local/order/s9/yogurt",
    ]

    failing = SimulatedTransport()
    failing.add("GET", "/a", 404, {})
    failing.add("GET", "/b", 200, {})
    failing.add("GET", "/c", 200, {})
    plan = instantiate(
        [step("http://sim.local/a"), step("http://sim.local/b"), step("http://sim.local/c")],
        {},
    )
    result = execute(plan, failing)
    assert not result.succeeded
    assert result.halted_at == 0
    assert len(failing.request_log) == 1

    rng = random.Random(5)
    for _ in range(100):
        n_calls = rng.randint(1, 7)
        fail_at = rng.randint(0, n_calls)
        transport = SimulatedTransport()
        templates = []
        for i in range(n_calls):
            transport.add("GET", f"/s/{i}", 500 if i == fail_at else 200, {})
            templates.append(step(f"http://sim.local/s/{i}"))
        execute(instantiate(templates, {}), transport)
        sent = [c.url for c in transport.request_log]
        planned = [f"http://sim.local/s/{i}" for i in range(n_calls)]
        assert sent == planned[: len(sent)]  # log is a prefix of the plan


def test_c7_pipeline_argmax_preservation():
    rng = random.Random(31337)
    for _ in range(1000):
        cosines = [rng.random() for _ in range(rng.randint(2, 12))]
        stats = FeedbackStats(rng.randint(0, 7), 7)
        alpha = rng.uniform(0.01, 1.0)
        blended = [blended_score(c, stats, alpha) for c in cosines]
        assert blended.index(max(blended)) == cosines.index(max(cosines))
        assert all(0.0 <= b <= 1.0 for b in blended)
    favored = blended_score(0.42, FeedbackStats(9, 10), 0.8)
    shunned = blended_score(0.42, FeedbackStats(0, 10), 0.8)
    assert favored > shunned


def test_c8_end_to_end_training_via_cli(fixture_dir, tmp_path, capsys, monkeypatch):
    import shutil

    registry_file = str(tmp_path / "registry.json")
    shutil.copy(f"{fixture_dir}/macros.json", registry_file)

    from test_interface import TRAIN_SCRIPT

    monkeypatch.setattr("sys.stdin", io.StringIO(TRAIN_SCRIPT))
    assert cli.main(["train", "--registry", registry_file]) == 0
    capsys.readouterr()

    assert cli.main(["route", "Fetch the weather forecast for Athens",
                     "--registry", registry_file, "--json"]) == 0
    decision = json.loads(capsys.readouterr().out)
    assert decision["kind"] == "matched"
    assert decision["macro_name"] == "FETCH_WEATHER_FORECAST"
    assert decision["macro_id"] == 15

    registry = MacroRegistry.load(registry_file)
    round_trip = tmp_path / "round_trip.json"
    registry.save(round_trip)
    assert MacroRegistry.load(round_trip).to_document() == registry.to_document()


def test_c9_primary_suite_is_fast_and_offline():
    """Runs last (conftest ordering): the whole primary suite, secondary not
    built, stays inside the 60 s budget. No test dials beyond localhost."""
    elapsed = time.perf_counter() - conftest.SESSION_START
    assert elapsed < 60.0, f"suite elapsed {elapsed:.1f}s"
