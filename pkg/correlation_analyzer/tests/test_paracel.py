from pathlib import Path
import sys

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[2]))

from correlation_analyzer.data import graph_path
from correlation_analyzer.modules.cluster import squarefree_full_coeff
from correlation_analyzer.modules.multigraph import (
    GraphOperationError,
    parse_graph,
    random_multigraph,
    read_graph,
)
from correlation_analyzer.modules.paracel import (
    IncompatibleSetError,
    are_twins,
    canonical_split,
    check_complement_involution,
    check_unique_full_representation,
    full_monomial_representations,
    enumerate_A,
    enumerate_B,
    enumerate_paracels,
    format_edge_monomial,
    format_edge_set,
    is_compatible,
    is_paracel,
    rhs_theorem,
    theorem_table,
    verify_main_theorem,
)
from correlation_analyzer.modules.polyring import parse_mpoly

# Développement imprimé de M_ef(1) pour K4 privé d'une arête
K4_MINUS_EDGE_SUM = [
    "x_g^2", "x_g^2*x_h^2", "x_g^2*x_k^2", "x_g^2*x_h", "x_g^2*x_k", "x_g^2*x_h*x_k",
    "x_g", "x_g*x_h^2", "x_g*x_k^2", "x_g*x_h", "x_g*x_k", "x_g*x_h*x_k",
    "x_h*x_g^2", "x_k*x_g^2", "x_g*x_h", "x_g*x_k",
    "x_h*x_g^2*x_k^2", "x_h*x_g*x_k^2", "x_h*x_k*x_g^2", "x_h*x_g*x_k",
    "x_k*x_g^2*x_h^2", "x_k*x_g*x_h^2", "x_k*x_h*x_g^2", "x_k*x_g*x_h",
]


def _graph(name):
    return read_graph(graph_path(name))


def _names(g, sets):
    return [format_edge_set(g, s) for s in sets]


def test_paracels_of_bundled_instances():
    assert _names(_graph("K3"), [c.F for c in enumerate_paracels(_graph("K3"))]) == ["{g}"]
    g = _graph("K4_minus_edge")
    certs = enumerate_paracels(g)
    assert _names(g, [c.F for c in certs]) == ["{g}", "{g,h}", "{g,k}"]
    assert _names(g, [c.smoots for c in certs]) == ["∅", "{k}", "{h}"]
    k4 = _graph("K4")
    assert _names(k4, [c.F for c in enumerate_paracels(k4)]) == ["{g,h}", "{k,l}"]


def test_paracel_certificate_components():
    g = _graph("K4_minus_edge")
    cert = is_paracel(g, g.edge_set(["g"]))
    assert cert.c1 == frozenset({0})
    assert cert.c2 == frozenset({1, 2})
    assert is_paracel(g, g.edge_set(["h", "k"])) is None


def test_loop_marked_edge_has_no_paracel():
    g = parse_graph("vertices 2\nedge e 0 0\nedge f 0 1\nedge g 0 1\nmark e e\nmark f f\n")
    assert enumerate_paracels(g) == []
    check = verify_main_theorem(g)
    assert check.equal
    assert check.lhs.is_zero() and check.rhs.is_zero()


def test_compatibility():
    g = _graph("K4_minus_edge")
    empty = g.edge_set([])
    assert is_compatible(g, empty, g.edge_set(["g"]), g.edge_set(["h"]))
    assert not is_compatible(g, g.edge_set(["h"]), empty, g.edge_set(["g"]))
    with pytest.raises(GraphOperationError):
        is_compatible(g, g.edge_set(["g"]), g.edge_set(["g"]), empty)


def test_enumerate_A():
    g = _graph("K4_minus_edge")
    empty = g.edge_set([])
    assert _names(g, enumerate_A(g, empty, empty)) == ["{g}", "{g,h}", "{g,k}"]
    assert _names(g, enumerate_A(g, empty, g.edge_set(["g"]))) == ["∅", "{h}", "{k}"]
    assert _names(g, enumerate_A(g, g.edge_set(["h"]), g.edge_set(["g", "k"]))) == ["∅"]
    assert _names(g, enumerate_A(g, g.edge_set(["h"]), empty)) == ["{g,k}"]


def test_twins_and_B():
    g = _graph("K4_minus_edge")
    empty, gset = g.edge_set([]), g.edge_set(["g"])
    assert are_twins(g, empty, gset, g.edge_set(["h"]), g.edge_set(["k"]))
    with pytest.raises(IncompatibleSetError):
        are_twins(g, empty, gset, gset, empty)
    monomials = sorted(format_edge_monomial(g, m) for m in enumerate_B(g, empty, gset))
    assert monomials == sorted(["1", "x_h^2", "x_k^2", "x_h", "x_k", "x_h*x_k"])
    assert [format_edge_monomial(g, m) for m in enumerate_B(g, g.edge_set(["h"]), empty)] == [
        "x_g^2*x_k^2"
    ]


def test_theorem_table_sizes():
    assert len(theorem_table(_graph("K3"))) == 2
    assert len(theorem_table(_graph("K4_minus_edge"))) == 14
    edgeless = parse_graph("vertices 3\nedge e 0 1\nedge f 1 2\nmark e e\nmark f f\n")
    assert theorem_table(edgeless) == ()


def test_k3_rhs():
    assert rhs_theorem(_graph("K3")) == parse_mpoly("x_g + x_g^2", ("g",))


def test_k4_minus_edge_printed_sum():
    g = _graph("K4_minus_edge")
    expected = parse_mpoly(" + ".join(K4_MINUS_EDGE_SUM), g.other_ids)
    assert rhs_theorem(g) == expected
    assert expected.coefficient((1, 1, 1, 0)) == 3
    check = verify_main_theorem(g)
    assert check.equal
    assert check.mismatches == ()


@pytest.mark.parametrize("name", ["K3", "K4_minus_edge", "K4"])
def test_main_identity_bundled(name):
    assert verify_main_theorem(_graph(name)).equal


def test_main_identity_seeded():
    for seed in range(40):
        g = random_multigraph(4, 4, seed)
        assert verify_main_theorem(g).equal
        assert squarefree_full_coeff(g, at_q_one=True) == len(enumerate_paracels(g))


def test_canonical_split():
    g = _graph("K4_minus_edge")
    split = canonical_split(g, g.edge_set(["g"]))
    assert _names(g, [split.beta, split.alpha, split.alpha_prime]) == ["∅", "{h}", "{k}"]
    split = canonical_split(g, g.edge_set(["g", "k"]))
    assert _names(g, [split.beta, split.alpha, split.alpha_prime]) == ["{h}", "∅", "∅"]
    with pytest.raises(GraphOperationError):
        canonical_split(g, g.edge_set(["h"]))


def test_complement_involution_and_uniqueness():
    for name in ("K3", "K4_minus_edge", "K4"):
        g = _graph(name)
        assert check_complement_involution(g).ok
        report = check_unique_full_representation(g)
        assert report.ok
        assert set(report.representations.values()) <= {1}
    for seed in range(20):
        g = random_multigraph(4, 4, seed)
        assert check_complement_involution(g).ok
        assert check_unique_full_representation(g).ok


def test_full_monomial_representations_k4_minus_edge():
    g = _graph("K4_minus_edge")
    found = full_monomial_representations(g)
    assert sorted(found) == sorted(c.F.mask for c in enumerate_paracels(g))
    beta, mono = found[g.edge_set(["g"]).mask][0]
    assert format_edge_set(g, beta) == "∅"
    assert format_edge_monomial(g, mono) == "x_h*x_k"
    beta, mono = found[g.edge_set(["g", "k"]).mask][0]
    assert format_edge_set(g, beta) == "{h}"
    assert format_edge_monomial(g, mono) == "1"
