import json
from fractions import Fraction
from pathlib import Path
import sys

import pytest
import yaml

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from correlation_analyzer.data import graph_path
from correlation_analyzer.modules.cluster import m_poly, squarefree_full_coeff
from correlation_analyzer.modules.fuzz_harness import (
    CHECKS,
    CheckStatus,
    FuzzHarness,
    FuzzSettings,
    check_instance,
    enumerate_small_multigraphs,
    random_instances,
    random_weights,
    worst,
)
from correlation_analyzer.modules.multigraph import format_graph, read_graph
from correlation_analyzer.modules.paracel import paracel_index, verify_main_theorem
from correlation_analyzer.modules.polyring import MPoly
from correlation_analyzer.utils.splitmix import SplitMix64

CONFIG = Path(__file__).resolve().parents[1] / "config" / "analyzer_config.yaml"

SMALL = FuzzSettings(lambda_samples=2)


def test_settings_from_config():
    with open(CONFIG, "r", encoding="utf-8") as f:
        cfg = yaml.safe_load(f)
    settings = FuzzSettings.from_config(cfg)
    assert settings.oracle_max_edges == 4
    assert settings.positivity.weight_vectors == 25
    assert settings.positivity.q_values == (
        Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1)
    )
    assert settings.replay_dir == Path("replays")


def test_worst_ordering():
    assert worst([]) is CheckStatus.PASS
    assert worst([CheckStatus.PASS, CheckStatus.ANOMALY]) is CheckStatus.ANOMALY
    assert worst([CheckStatus.COUNTEREXAMPLE, CheckStatus.ANOMALY]) is CheckStatus.COUNTEREXAMPLE
    assert worst([CheckStatus.COUNTEREXAMPLE, CheckStatus.FAIL]) is CheckStatus.FAIL
    assert worst([CheckStatus.SKIPPED]) is CheckStatus.PASS


def test_random_instances_are_reproducible():
    first = random_instances(4, 5, 10, 7)
    second = random_instances(4, 5, 10, 7)
    assert first == second
    for g, _ in first:
        assert 2 <= g.vertex_count <= 4
        assert len(g.other_ids) <= 5
    fixed = random_instances(3, 2, 5, 1, fixed_size=True)
    assert all(g.vertex_count == 3 and len(g.other_ids) == 2 for g, _ in fixed)


def test_check_instance_k4():
    g = read_graph(graph_path("K4"))
    outcome = check_instance(g, SMALL, SplitMix64(1))
    assert set(outcome.checks) == set(CHECKS)
    assert outcome.outcome is CheckStatus.PASS
    assert outcome.checks["oracle"] is CheckStatus.PASS
    assert outcome.checks["ust"] is CheckStatus.PASS


def test_random_run_passes_and_is_deterministic():
    harness = FuzzHarness(SMALL)
    report = harness.run_random(4, 5, 20, 7)
    assert report.outcome is CheckStatus.PASS
    assert report.passed() == 20
    again = FuzzHarness(SMALL, workers=3).run_random(4, 5, 20, 7)
    assert [i.to_payload() for i in again.instances] == [i.to_payload() for i in report.instances]


def test_parallel_marked_edges_only():
    report = FuzzHarness(SMALL).run_random(2, 0, 10, 1)
    assert report.outcome is CheckStatus.PASS
    for inst in report.instances:
        assert "edge e 0 1" in inst.graph_text
    g, _ = random_instances(2, 0, 1, 1)[0]
    assert m_poly(g) == MPoly.monomial((), {"q": 2})


def test_enumerate_small_multigraphs():
    graphs = list(enumerate_small_multigraphs(2, 1))
    assert len(graphs) == 38
    assert any(g.e.is_loop for g in graphs)
    assert any(g.e.same_endpoints(g.f) and not g.e.is_loop for g in graphs)


def test_exhaustive_run_passes():
    report = FuzzHarness(SMALL).run_exhaustive(2, 2)
    assert report.outcome is CheckStatus.PASS
    counts = report.counts()
    assert counts["theorem"]["pass"] == len(report.instances)
    assert counts["ust"]["skipped"] > 0


def test_summary_rows():
    report = FuzzHarness(SMALL).run_random(3, 2, 5, 3)
    rows = report.summary_rows()
    assert [row["check"] for row in rows] == list(CHECKS)
    assert rows[0]["pass"] == 5


def test_counterexample_writes_replay(tmp_path, monkeypatch):
    monkeypatch.setattr(MPoly, "evaluate", lambda self, q, weights: Fraction(-1))
    settings = FuzzSettings(lambda_samples=1, replay_dir=tmp_path / "replays")
    g = read_graph(graph_path("K3"))
    report = FuzzHarness(settings).run_graphs([(g, 5)], label="fuzz-5")
    assert report.outcome is CheckStatus.COUNTEREXAMPLE
    assert len(report.replay_files) == 1
    data = json.loads(Path(report.replay_files[0]).read_text(encoding="utf-8"))
    assert data["seed"] == 5
    assert data["outcome"] == "counterexample"
    assert data["counterexamples"][0]["value"] == "-1"
    assert Path(report.replay_files[0]).name == "fuzz-5-0.json"


def _nonnegative_everywhere(g, m, rng, settings):
    for _ in range(settings.weight_vectors):
        weights = random_weights(g, rng, settings.weight_max)
        for q in settings.q_values:
            if m.evaluate(q, weights) < 0:
                return False
    return True


def test_exhaustive_theorem_and_paracel_count_up_to_three_vertices():
    graphs = list(enumerate_small_multigraphs(3, 3))
    assert len(graphs) == 2200
    for g in graphs:
        m = m_poly(g)
        assert verify_main_theorem(g, m).equal, format_graph(g)
        assert squarefree_full_coeff(g, at_q_one=True) == len(paracel_index(g)), format_graph(g)


def test_random_acceptance_instances_pass_criteria_checks():
    report = FuzzHarness(FuzzSettings(lambda_samples=1)).run_random(5, 6, 40, 11)
    assert report.outcome not in (CheckStatus.FAIL, CheckStatus.COUNTEREXAMPLE)
    counts = report.counts()
    assert counts["theorem"]["pass"] == 40
    assert counts["paracel_count"]["pass"] == 40
    assert counts["positivity"]["pass"] == 40


@pytest.mark.slow
def test_paracel_count_over_exhaustive_and_random_sets():
    graphs = list(enumerate_small_multigraphs(4, 4))
    graphs += [g for g, _ in random_instances(5, 6, 500, 11)]
    for g in graphs:
        assert squarefree_full_coeff(g, at_q_one=True) == len(paracel_index(g)), format_graph(g)


@pytest.mark.slow
def test_positivity_sampling_over_acceptance_instances():
    settings = FuzzSettings().positivity
    rng = SplitMix64(11)
    graphs = list(enumerate_small_multigraphs(3, 4))
    graphs += [g for g, _ in random_instances(5, 6, 500, 11)]
    for g in graphs:
        assert _nonnegative_everywhere(g, m_poly(g), rng, settings), format_graph(g)
