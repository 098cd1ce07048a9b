import json
from fractions import Fraction
from itertools import product
from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from correlation_analyzer.data import BUNDLED_INSTANCES
from correlation_analyzer.modules.ansatz import (
    DEFAULT_GRID,
    AnsatzDecomp,
    DecompositionError,
    QuadForm,
    bundled_instance,
    decomp_from_json,
    decomp_to_json,
    greedy_decompose,
    identity_check,
    load_decomposition,
    negative_direction,
    paper_decomps,
    psd_check,
    psd_matrix,
    psd_sweep,
    q_zero_lowest_part,
    quadratic_value,
)
from correlation_analyzer.modules.polyring import QPoly
from correlation_analyzer.modules.ust import ust_square_check

F = Fraction


@pytest.mark.parametrize("name", BUNDLED_INSTANCES)
def test_bundled_decompositions_hold(name):
    g, decomp = bundled_instance(name)
    check = identity_check(g, decomp)
    assert check.holds
    assert check.residual.is_zero()
    for entry in decomp.entries:
        assert psd_sweep(entry.form).passed


@pytest.mark.parametrize("name", BUNDLED_INSTANCES)
def test_q_zero_part_matches_ust_square(name):
    g, decomp = bundled_instance(name)
    root = ust_square_check(g).root
    assert q_zero_lowest_part(g, decomp) == root * root


def test_bundled_table_sizes():
    assert len(paper_decomps("K3").entries) == 2
    assert len(paper_decomps("K4_minus_edge").entries) == 14
    with pytest.raises(ValueError):
        paper_decomps("K5")


def test_missing_entry_leaves_residual():
    g, decomp = bundled_instance("K3")
    partial = AnsatzDecomp(decomp.entries[:1])
    check = identity_check(g, partial)
    assert not check.holds
    assert str(check.residual) == "x_g*q"


def test_negative_direction_witness():
    matrix = [[F(1), F(-3, 2)], [F(-3, 2), F(1)]]
    result = psd_matrix(matrix)
    assert not result.psd
    assert result.witness == (1, 1)
    assert result.witness_value < 0
    assert quadratic_value(matrix, result.witness) == result.witness_value


def test_zero_diagonal_witness():
    matrix = [[F(0), F(1)], [F(1), F(0)]]
    direction = negative_direction(matrix)
    assert direction is not None
    assert quadratic_value(matrix, direction) < 0


def test_negative_diagonal_witness():
    matrix = [[F(2), F(0)], [F(0), F(-1)]]
    assert negative_direction(matrix) == [F(0), F(1)]


@pytest.mark.parametrize(
    "matrix",
    [
        [[F(2), F(1)], [F(1), F(2)]],
        [[F(1), F(-1)], [F(-1), F(1)]],
        [[F(0), F(0)], [F(0), F(0)]],
        [],
    ],
)
def test_psd_matrices(matrix):
    assert negative_direction(matrix) is None


def test_psd_sweep_reports_failing_points():
    g, _ = bundled_instance("K3")
    basis = (g.edge_set(["g"]), g.edge_set([]))
    # off-diagonal q: the form is PSD only while q <= 1/2
    form = QuadForm(
        basis,
        ((QPoly([F(1, 4)]), QPoly([0, 1])), (QPoly([0, 1]), QPoly([1]))),
    )
    sweep = psd_sweep(form)
    assert not sweep.passed
    assert sweep.failing == tuple(q for q in DEFAULT_GRID if q > F(1, 2))
    with pytest.raises(ValueError):
        psd_check(form, 2)


def test_quad_form_validation():
    g, _ = bundled_instance("K3")
    basis = (g.edge_set(["g"]), g.edge_set([]))
    with pytest.raises(DecompositionError):
        QuadForm(basis, ((QPoly([1]), QPoly([1])), (QPoly([2]), QPoly([1]))))
    with pytest.raises(DecompositionError):
        QuadForm(basis, ((QPoly([1]),),))


def test_json_files(tmp_path):
    g, decomp = bundled_instance("K4")
    target = tmp_path / "k4.json"
    target.write_text(json.dumps(decomp_to_json(g, decomp)), encoding="utf-8")
    assert load_decomposition(g, target) == decomp
    with pytest.raises(DecompositionError):
        decomp_from_json(g, {"entries": [{"beta": []}]})
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(DecompositionError):
        load_decomposition(g, bad)


def test_basis_outside_A_is_rejected():
    g, _ = bundled_instance("K3")
    data = {
        "entries": [
            {"beta": [], "gamma": [], "basis": [[]], "matrix": [[["1"]]]},
        ]
    }
    decomp = decomp_from_json(g, data)
    with pytest.raises(DecompositionError):
        identity_check(g, decomp)


def test_greedy_finds_k3_table():
    g, bundled = bundled_instance("K3")
    found = greedy_decompose(g)
    assert found is not None
    assert decomp_to_json(g, found) == decomp_to_json(g, bundled)
    assert identity_check(g, found).holds


def test_greedy_result_is_validated():
    g, _ = bundled_instance("K4_minus_edge")
    found = greedy_decompose(g)
    if found is not None:
        assert identity_check(g, found).holds
        assert all(psd_sweep(e.form).passed for e in found.entries)


def _grid_minimum(matrix, radius):
    n = len(matrix)
    best = 0
    for v in product(range(-radius, radius + 1), repeat=n):
        value = sum(matrix[i][j] * v[i] * v[j] for i in range(n) for j in range(n))
        best = min(best, value)
    return best


def test_witness_for_small_negative_pivot():
    matrix = [[F(0), F(-1)], [F(-1), F(8)]]
    assert quadratic_value(matrix, [1, F(1, 8)]) == F(-1, 8)
    result = psd_matrix(matrix)
    assert not result.psd
    assert result.witness == (8, 1)
    assert result.witness_value == -8


def test_psd_agrees_with_grid_search_2x2():
    # entries in [-2, 2]: any indefinite form has an integer witness in [-2, 2]^2
    for a, b, c in product(range(-2, 3), repeat=3):
        matrix = [[a, b], [b, c]]
        result = psd_matrix([[F(x) for x in row] for row in matrix])
        assert result.psd == (_grid_minimum(matrix, 2) == 0), matrix
        if not result.psd:
            assert quadratic_value(matrix, result.witness) < 0


def test_psd_agrees_with_grid_search_3x3():
    signs = (-1, 0, 1)
    for d0, d1, d2, b01, b02, b12 in product(range(3), range(3), range(3), signs, signs, signs):
        matrix = [[d0, b01, b02], [b01, d1, b12], [b02, b12, d2]]
        result = psd_matrix([[F(x) for x in row] for row in matrix])
        if result.psd:
            assert _grid_minimum(matrix, 2) == 0, matrix
        else:
            assert quadratic_value(matrix, result.witness) == result.witness_value < 0


@pytest.mark.parametrize(
    "rows",
    [
        [[1, 2, 0], [0, 1, -1]],
        [[1, 1, 1], [2, -1, 0], [0, 3, 1]],
        [[F(1, 2), -1, 2]],
    ],
)
def test_gram_matrices_are_psd(rows):
    n = len(rows[0])
    gram = [
        [sum(F(r[i]) * F(r[j]) for r in rows) for j in range(n)] for i in range(n)
    ]
    assert negative_direction(gram) is None
