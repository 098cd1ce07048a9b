"""Random-cluster restricted sums and the correlation polynomial M_ef(q).

Restricted sums are left unnormalized: ``restricted_sum(g, A, B)`` is
``sum over A <= F <= E - B of x^F q^k(F)``. Divide by
``partition_function(g)`` for probabilities.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Tuple, Union

from correlation_analyzer.modules.multigraph import (
    EdgeSet,
    GraphOperationError,
    Multigraph,
    Universe,
    component_count,
    contract_edge,
    delete_edge,
)
from correlation_analyzer.modules.polyring import (
    Exponent,
    MPoly,
    NonDivisibleError,
    QPoly,
    mpoly_coeff_extract,
)
from correlation_analyzer.utils.rationals import RationalLike, parse_rational

logger = logging.getLogger(__name__)


class PairSign(str, Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    NEUTRAL = "neutral"


@dataclass(frozen=True)
class PairClass:
    A: EdgeSet
    B: EdgeSet
    k1: int
    k2: int

    @property
    def sign(self) -> PairSign:
        diff = self.k1 - self.k2
        if diff == -1:
            return PairSign.POSITIVE
        if diff == 1:
            return PairSign.NEGATIVE
        return PairSign.NEUTRAL


# ----------------------------------------------------------------------
# Restricted sums
# ----------------------------------------------------------------------
def restricted_sum(g: Multigraph, A: EdgeSet, B: EdgeSet) -> MPoly:
    """Enumerate ``A <= F <= E - B`` in Gray-code order, recounting components."""
    g.check_edge_set(A, Universe.FULL)
    g.check_edge_set(B, Universe.FULL)
    if not A.isdisjoint(B):
        raise GraphOperationError("restricted sum needs disjoint A and B")
    size = len(g.edges)
    free = [pos for pos in range(size) if not (A.mask | B.mask) >> pos & 1]
    terms: Dict[Exponent, Fraction] = {}
    mask = A.mask
    previous = 0
    for i in range(1 << len(free)):
        gray = i ^ (i >> 1)
        if i:
            flipped = (gray ^ previous).bit_length() - 1
            mask ^= 1 << free[flipped]
        previous = gray
        exp = tuple(mask >> pos & 1 for pos in range(size)) + (component_count(g, mask),)
        terms[exp] = terms.get(exp, 0) + 1
    return MPoly(g.edge_ids, terms)


def partition_function(g: Multigraph) -> MPoly:
    return restricted_sum(g, EdgeSet(0, Universe.FULL), EdgeSet(0, Universe.FULL))


def weight_from_probability(p: RationalLike) -> Fraction:
    """Edge weight ``p / (1 - p)`` for an edge probability ``p`` in ``[0, 1)``."""
    value = parse_rational(p)
    if value < 0 or value >= 1:
        raise ValueError(f"probability must lie in [0, 1), got {value}")
    return value / (1 - value)


def _pair_tables(g: Multigraph) -> Tuple[List[Tuple[int, int, int]], List[Tuple[int, int, int]]]:
    """Per subset S of ``E^{ef}``: packed exponent and component counts.

    The left table feeds ``Z_e^f`` and ``Z_{ef}`` (``k(S+e)``, ``k(S+e+f)``),
    the right one ``Z_f^e`` and ``Z^{ef}``
    (``k(T+f)``, ``k(T)``). Exponents are packed two bits per edge so the
    exponent of ``S+T`` is a plain integer sum.
    """
    positions = g.other_positions
    left: List[Tuple[int, int, int]] = []
    right: List[Tuple[int, int, int]] = []
    for combo in range(1 << len(positions)):
        mask = 0
        packed = 0
        for i, pos in enumerate(positions):
            if combo >> i & 1:
                mask |= 1 << pos
                packed |= 1 << (2 * i)
        left.append(
            (
                packed,
                component_count(g, mask | g.e_bit),
                component_count(g, mask | g.e_bit | g.f_bit),
            )
        )
        right.append((packed, component_count(g, mask | g.f_bit), component_count(g, mask)))
    return left, right


def _reduced_difference(g: Multigraph) -> Dict[int, Dict[int, int]]:
    """``D / (x_e x_f)`` as packed edge exponent -> {power of q: coefficient}.

    Each of the four restricted sums carries its forced edges as a common
    factor, so both products share ``x_e x_f`` and are multiplied here with
    the remaining ``E^{ef}`` parts grouped by edge exponent.
    """
    left, right = _pair_tables(g)
    slices: Dict[int, Dict[int, int]] = {}
    for packed_s, k_e, k_ef in left:
        for packed_t, k_f, k_0 in right:
            k1 = k_e + k_f
            k2 = k_ef + k_0
            if k1 == k2:
                continue
            row = slices.setdefault(packed_s + packed_t, {})
            row[k1] = row.get(k1, 0) + 1
            row[k2] = row.get(k2, 0) - 1
    return {key: {k: c for k, c in row.items() if c} for key, row in slices.items()}


def _unpack(packed: int, width: int) -> Tuple[int, ...]:
    return tuple(packed >> (2 * i) & 3 for i in range(width))


def correlation_difference(g: Multigraph) -> MPoly:
    """``Z_e^f Z_f^e - Z^{ef} Z_{ef}`` over the full edge registry."""
    width = len(g.other_ids)
    e_pos, f_pos = g.index_of(g.marked_e), g.index_of(g.marked_f)
    positions = g.other_positions
    terms: Dict[Exponent, int] = {}
    for packed, row in _reduced_difference(g).items():
        other = _unpack(packed, width)
        base = [0] * len(g.edges)
        base[e_pos] = base[f_pos] = 1
        for pos, x in zip(positions, other):
            base[pos] = x
        for k, c in row.items():
            terms[tuple(base) + (k,)] = c
    return MPoly(g.edge_ids, terms)


def m_poly(g: Multigraph) -> MPoly:
    """``M_ef(q)`` over the ``E^{ef}`` registry.

    ``D / (x_e x_f)`` is divided by ``1 - q`` slice by slice: the quotient
    coefficients are prefix sums, and a nonzero total is a remainder.
    """
    width = len(g.other_ids)
    terms: Dict[Exponent, int] = {}
    leftover: Dict[Exponent, int] = {}
    for packed, row in _reduced_difference(g).items():
        if not row:
            continue
        edge_exp = _unpack(packed, width)
        running = 0
        for k in range(min(row), max(row) + 1):
            running += row.get(k, 0)
            if running and k < max(row):
                terms[edge_exp + (k,)] = running
        if running:
            leftover[edge_exp + (0,)] = running
    if leftover:
        raise NonDivisibleError(MPoly(g.other_ids, leftover), "D is not divisible by 1 - q")
    return MPoly(g.other_ids, terms)


# ----------------------------------------------------------------------
# Pair decomposition
# ----------------------------------------------------------------------
def _check_other(g: Multigraph, *sets: EdgeSet) -> None:
    for es in sets:
        if es.mask & (g.e_bit | g.f_bit):
            raise GraphOperationError("pair sets must not contain e or f")
        g.check_edge_set(es, Universe.FULL)


def classify_pair(g: Multigraph, A: EdgeSet, B: EdgeSet) -> PairClass:
    _check_other(g, A, B)
    k1 = component_count(g, A.mask | g.e_bit) + component_count(g, B.mask | g.f_bit)
    k2 = component_count(g, A.mask | g.e_bit | g.f_bit) + component_count(g, B.mask)
    return PairClass(A, B, k1, k2)


def m_poly_from_pairs(g: Multigraph) -> MPoly:
    """Naive ``4^|E^{ef}|`` pair summation of ``M_ef(q)``.

    Positive pairs add ``q^k1 x^(A+B)``, negative pairs subtract
    ``q^k2 x^(A+B)``; neutral pairs cancel.
    """
    subsets = g.other_subsets()
    k_e = [component_count(g, s.mask | g.e_bit) for s in subsets]
    k_f = [component_count(g, s.mask | g.f_bit) for s in subsets]
    k_ef = [component_count(g, s.mask | g.e_bit | g.f_bit) for s in subsets]
    k_0 = [component_count(g, s.mask) for s in subsets]
    exps = [g.other_exponents(s) for s in subsets]
    terms: Dict[Exponent, Fraction] = {}
    for i, ea in enumerate(exps):
        for j, eb in enumerate(exps):
            k1 = k_e[i] + k_f[j]
            k2 = k_ef[i] + k_0[j]
            if k1 == k2:
                continue
            edge_exp = tuple(x + y for x, y in zip(ea, eb))
            if k1 - k2 == -1:
                key, sign = edge_exp + (k1,), 1
            elif k1 - k2 == 1:
                key, sign = edge_exp + (k2,), -1
            else:
                raise AssertionError(f"k1 - k2 = {k1 - k2} out of range")
            terms[key] = terms.get(key, 0) + sign
    return MPoly(g.other_ids, terms)


def squarefree_full_coeff(g: Multigraph, at_q_one: bool = False) -> Union[QPoly, int]:
    """Coefficient of the all-ones monomial ``x^{E^{ef}}`` in ``M_ef(q)``."""
    coeff = mpoly_coeff_extract(m_poly(g), (1,) * len(g.other_ids))
    if at_q_one:
        return int(coeff(1))
    return coeff


# ----------------------------------------------------------------------
# Deletion / contraction reduction
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class ReductionStep:
    edge_id: str
    action: str  # delete | contract | delete_loop | short_circuit
    reason: str = ""


@dataclass(frozen=True)
class Reduction:
    graph: Multigraph
    steps: Tuple[ReductionStep, ...]
    short_circuit: bool


def reduce_by_lambda(g: Multigraph, lam: Mapping[str, int]) -> Reduction:
    """Delete ``lambda=0`` edges, contract ``lambda=2`` edges.

    A doubled edge parallel to e or f forces a zero coefficient and stops
    the reduction; a doubled loop is deleted.
    """
    if set(lam) != set(g.other_ids):
        raise ValueError("lambda must give an exponent for every edge of E^ef")
    bad = {k: v for k, v in lam.items() if v not in (0, 1, 2)}
    if bad:
        raise ValueError(f"lambda exponents must be 0, 1 or 2: {bad}")
    steps: List[ReductionStep] = []
    current = g
    for edge_id in g.other_ids:
        if lam[edge_id] == 0:
            current = delete_edge(current, edge_id)
            steps.append(ReductionStep(edge_id, "delete"))
    for edge_id in g.other_ids:
        if lam[edge_id] != 2:
            continue
        edge = current.edge(edge_id)
        for marked in (current.e, current.f):
            if edge.same_endpoints(marked):
                steps.append(
                    ReductionStep(edge_id, "short_circuit", f"parallel to {marked.id}")
                )
                logger.debug("[REDUCE] %s parallèle à %s: coefficient 0", edge_id, marked.id)
                return Reduction(current, tuple(steps), True)
        if edge.is_loop:
            current = delete_edge(current, edge_id)
            steps.append(ReductionStep(edge_id, "delete_loop", "loop"))
        else:
            current = contract_edge(current, edge_id)
            steps.append(ReductionStep(edge_id, "contract"))
    return Reduction(current, tuple(steps), False)


def lambda_coefficient(
    g: Multigraph, lam: Mapping[str, int], poly: Optional[MPoly] = None
) -> Fraction:
    """Coefficient of ``x^lambda`` in ``M_ef(1)``."""
    poly = poly if poly is not None else m_poly(g)
    pattern = tuple(lam[i] for i in g.other_ids)
    return mpoly_coeff_extract(poly, pattern)(1)


def reduced_coefficient(reduction: Reduction) -> Fraction:
    if reduction.short_circuit:
        return Fraction(0)
    return Fraction(squarefree_full_coeff(reduction.graph, at_q_one=True))


__all__ = [
    "PairClass",
    "PairSign",
    "Reduction",
    "ReductionStep",
    "classify_pair",
    "correlation_difference",
    "lambda_coefficient",
    "m_poly",
    "m_poly_from_pairs",
    "partition_function",
    "reduce_by_lambda",
    "reduced_coefficient",
    "restricted_sum",
    "squarefree_full_coeff",
    "weight_from_probability",
]
