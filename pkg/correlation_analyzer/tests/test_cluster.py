from fractions import Fraction
from pathlib import Path
import time
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from correlation_analyzer.data import graph_path
from correlation_analyzer.modules.cluster import (
    PairSign,
    classify_pair,
    correlation_difference,
    lambda_coefficient,
    m_poly,
    m_poly_from_pairs,
    partition_function,
    reduce_by_lambda,
    reduced_coefficient,
    restricted_sum,
    squarefree_full_coeff,
    weight_from_probability,
)
from correlation_analyzer.modules.fuzz_harness import enumerate_small_multigraphs, random_instances
from correlation_analyzer.modules.multigraph import (
    EdgeSet,
    GraphOperationError,
    Universe,
    format_graph,
    parse_graph,
    random_multigraph,
    read_graph,
)
from correlation_analyzer.modules.paracel import verify_main_theorem
from correlation_analyzer.modules.polyring import MPoly, mpoly_exact_div, parse_mpoly
from correlation_analyzer.utils.splitmix import SplitMix64


def _graph(name):
    return read_graph(graph_path(name))


def test_k3_m_poly():
    g = _graph("K3")
    m = m_poly(g)
    assert m == parse_mpoly("x_g*q^3 + x_g^2*q^2", ("g",))
    assert str(m) == "x_g*q^3 + x_g^2*q^2"
    assert str(m.substitute_q(1)) == "x_g + x_g^2"


def test_m_poly_registry_is_other_edges():
    g = _graph("K4")
    assert m_poly(g).registry == ("g", "h", "k", "l")


def test_parallel_marked_edges_give_q_squared():
    g = parse_graph("vertices 2\nedge e 0 1\nedge f 0 1\nmark e e\nmark f f\n")
    assert m_poly(g) == MPoly.monomial((), {"q": 2})
    # F = ∅ is the single paracel, matching M(1) = 1
    assert squarefree_full_coeff(g, at_q_one=True) == 1


def test_loop_marked_edge_gives_zero():
    g = parse_graph("vertices 2\nedge e 0 0\nedge f 0 1\nedge g 0 1\nmark e e\nmark f f\n")
    assert m_poly(g).is_zero()
    assert correlation_difference(g).is_zero()


def test_partition_function_k3():
    g = _graph("K3")
    z = partition_function(g)
    ones = {name: 1 for name in g.edge_ids}
    assert z.evaluate(1, ones) == 8
    assert z.evaluate(2, ones) == 28


def test_restricted_sum_rejects_overlap():
    g = _graph("K3")
    e = EdgeSet(g.e_bit, Universe.FULL)
    with pytest.raises(GraphOperationError):
        restricted_sum(g, e, e)


def test_weight_from_probability():
    assert weight_from_probability("1/2") == 1
    assert weight_from_probability("1/4") == Fraction(1, 3)
    with pytest.raises(ValueError):
        weight_from_probability(1)


def test_classify_pair_k3():
    g = _graph("K3")
    empty, gset = g.edge_set([]), g.edge_set(["g"])
    assert classify_pair(g, gset, empty).sign is PairSign.POSITIVE
    assert classify_pair(g, gset, empty).k1 == 3
    assert classify_pair(g, gset, gset).k1 == 2
    assert classify_pair(g, empty, empty).sign is PairSign.NEUTRAL
    assert classify_pair(g, empty, gset).sign is PairSign.NEUTRAL


def test_classify_pair_negative():
    g = _graph("K4_minus_edge")
    pair = classify_pair(g, g.edge_set([]), g.edge_set(["g", "h", "k"]))
    assert (pair.k1, pair.k2) == (4, 3)
    assert pair.sign is PairSign.NEGATIVE


def test_classify_pair_rejects_marked_edges():
    g = _graph("K3")
    with pytest.raises(GraphOperationError):
        classify_pair(g, EdgeSet(g.e_bit, Universe.FULL), g.edge_set([]))


@pytest.mark.parametrize("name", ["K3", "K4_minus_edge", "K4"])
def test_pair_oracle_matches_restricted_sums(name):
    g = _graph(name)
    assert m_poly_from_pairs(g) == m_poly(g)


def test_pair_oracle_on_random_instances():
    for seed in range(25):
        g = random_multigraph(4, 3, seed)
        assert m_poly_from_pairs(g) == m_poly(g)


@pytest.mark.parametrize("name, count", [("K3", 1), ("K4_minus_edge", 3), ("K4", 2)])
def test_squarefree_full_coefficient(name, count):
    assert squarefree_full_coeff(_graph(name), at_q_one=True) == count


def test_reduction_deletes_to_triangle():
    g = _graph("K4_minus_edge")
    reduction = reduce_by_lambda(g, {"g": 1, "h": 0, "k": 0})
    assert reduction.graph.edge_ids == ("e", "f", "g")
    assert [s.action for s in reduction.steps] == ["delete", "delete"]
    assert reduced_coefficient(reduction) == lambda_coefficient(g, {"g": 1, "h": 0, "k": 0}) == 1


def test_reduction_short_circuits_on_parallel_edge():
    g = parse_graph(
        "vertices 3\nedge e 0 1\nedge f 1 2\nedge g 0 1\nedge h 0 2\nmark e e\nmark f f\n"
    )
    lam = {"g": 2, "h": 1}
    reduction = reduce_by_lambda(g, lam)
    assert reduction.short_circuit
    assert reduction.steps[-1].action == "short_circuit"
    assert reduced_coefficient(reduction) == 0
    assert lambda_coefficient(g, lam) == 0


def test_reduction_invariance_on_seeded_pairs():
    rng = SplitMix64(5)
    for seed in range(100):
        g = random_multigraph(4, 4, seed)
        lam = {name: rng.below(3) for name in g.other_ids}
        m = m_poly(g)
        assert lambda_coefficient(g, lam, m) == reduced_coefficient(reduce_by_lambda(g, lam))


def test_reduction_validates_lambda():
    g = _graph("K3")
    with pytest.raises(ValueError):
        reduce_by_lambda(g, {})
    with pytest.raises(ValueError):
        reduce_by_lambda(g, {"g": 3})


def test_degree_bound_at_q_one():
    for seed in range(20):
        g = random_multigraph(4, 4, seed)
        at_one = m_poly(g).substitute_q(1)
        assert all(at_one.max_exponent(name) <= 2 for name in g.other_ids)


def _product_form(g):
    both = g.edge_set([g.marked_e, g.marked_f], Universe.FULL)
    only_e = g.edge_set([g.marked_e], Universe.FULL)
    only_f = g.edge_set([g.marked_f], Universe.FULL)
    none = g.edge_set([], Universe.FULL)
    return restricted_sum(g, only_e, only_f) * restricted_sum(g, only_f, only_e) - restricted_sum(
        g, both, none
    ) * restricted_sum(g, none, both)


def _divide_product_form(g):
    marks = {g.marked_e: 1, g.marked_f: 1}
    divisor = MPoly.monomial(g.edge_ids, marks) - MPoly.monomial(g.edge_ids, {**marks, "q": 1})
    return mpoly_exact_div(_product_form(g), divisor).drop_variables([g.marked_e, g.marked_f])


def _kernel_graphs():
    graphs = [_graph(name) for name in ("K3", "K4_minus_edge", "K4")]
    graphs.append(parse_graph("vertices 2\nedge e 0 1\nedge f 0 1\nmark e e\nmark f f\n"))
    graphs.extend(random_multigraph(4, 4, seed) for seed in range(20))
    return graphs


def test_correlation_difference_matches_product_of_sums():
    for g in _kernel_graphs():
        assert correlation_difference(g) == _product_form(g)


def test_m_poly_matches_polynomial_division():
    for g in _kernel_graphs():
        assert m_poly(g) == _divide_product_form(g)


@pytest.mark.slow
def test_exhaustive_and_random_theorem_sweep_is_fast():
    start = time.time()
    checked = 0
    for g in enumerate_small_multigraphs(4, 4):
        assert verify_main_theorem(g).equal, format_graph(g)
        checked += 1
    for g, _seed in random_instances(5, 6, 500, seed=11):
        assert verify_main_theorem(g).equal, format_graph(g)
        checked += 1
    elapsed = time.time() - start
    assert checked == 107980 + 500
    assert elapsed < 120, f"sweep took {elapsed:.1f}s"
