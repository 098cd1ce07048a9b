"""Paracels, smoots, twins and the combinatorial side of M_ef(1).

A paracel is a set ``F`` of non-marked edges such that e and f both join
the same two components of ``(V, F)``. Compatible sets, twins and the
monomial sets ``B_{beta,gamma}`` are all derived from the paracel index of
a graph, which is computed once per graph and cached.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from types import MappingProxyType
from typing import Dict, FrozenSet, Iterator, List, Mapping, Optional, Set, Tuple

from correlation_analyzer.modules.cluster import PairSign, classify_pair, m_poly
from correlation_analyzer.modules.multigraph import (
    EdgeSet,
    GraphOperationError,
    Multigraph,
    Universe,
    components,
)
from correlation_analyzer.modules.polyring import MPoly

logger = logging.getLogger(__name__)

EdgeExponent = Tuple[int, ...]


class IncompatibleSetError(ValueError):
    """A set expected in ``A_{beta,gamma}`` is not compatible."""


@dataclass(frozen=True)
class ParacelCert:
    F: EdgeSet
    c1: FrozenSet[int]
    c2: FrozenSet[int]
    smoots: EdgeSet


@dataclass(frozen=True)
class TwinFamily:
    beta: EdgeSet
    gamma: EdgeSet
    A: Tuple[EdgeSet, ...]
    B_monomials: FrozenSet[EdgeExponent]

    def sorted_monomials(self) -> List[EdgeExponent]:
        return sorted(self.B_monomials, key=lambda e: (sum(e), e))


@dataclass(frozen=True)
class CanonicalSplit:
    beta: EdgeSet
    alpha: EdgeSet
    alpha_prime: EdgeSet


@dataclass(frozen=True)
class Mismatch:
    monomial: str
    lhs: str
    rhs: str


@dataclass(frozen=True)
class TheoremCheck:
    equal: bool
    lhs: MPoly
    rhs: MPoly
    mismatches: Tuple[Mismatch, ...] = ()


@dataclass(frozen=True)
class InvolutionReport:
    checked: int
    matched: int
    violations: Tuple[Tuple[EdgeSet, EdgeSet], ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class UniquenessReport:
    paracel_count: int
    representations: Mapping[int, int] = field(default_factory=dict)
    offending: Tuple[int, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.offending


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------
def _submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _require_other(g: Multigraph, *sets: EdgeSet) -> None:
    for es in sets:
        if es.mask & ~g.ef_mask:
            raise GraphOperationError(
                f"{format_edge_set(g, es)} is not a subset of E^ef"
            )


def format_edge_set(g: Multigraph, es: EdgeSet) -> str:
    ids = g.ids_of(es, strict=False)
    return "{" + ",".join(ids) + "}" if ids else "∅"


def format_edge_monomial(g: Multigraph, exp: EdgeExponent) -> str:
    factors = []
    for name, power in zip(g.other_ids, exp):
        if power:
            factors.append(f"x_{name}" if power == 1 else f"x_{name}^{power}")
    return "*".join(factors) or "1"


# ----------------------------------------------------------------------
# Paracels
# ----------------------------------------------------------------------
def is_paracel(g: Multigraph, F: EdgeSet) -> Optional[ParacelCert]:
    _require_other(g, F)
    e, f = g.e, g.f
    if e.is_loop or f.is_loop:
        return None
    _, labels = components(g, EdgeSet(F.mask, Universe.FULL))
    joined = {labels[e.u], labels[e.v]}
    if len(joined) != 2 or {labels[f.u], labels[f.v]} != joined:
        return None
    a, b = sorted(joined)
    smoots = 0
    for pos in g.other_positions:
        if F.mask >> pos & 1:
            continue
        u, v = g.endpoints[pos]
        if {labels[u], labels[v]} == joined:
            smoots |= 1 << pos
    return ParacelCert(
        F=EdgeSet(F.mask),
        c1=frozenset(x for x in range(g.vertex_count) if labels[x] == a),
        c2=frozenset(x for x in range(g.vertex_count) if labels[x] == b),
        smoots=EdgeSet(smoots),
    )


@lru_cache(maxsize=256)
def paracel_index(g: Multigraph) -> Mapping[int, ParacelCert]:
    """Every paracel of ``g`` keyed by mask, ascending."""
    index: Dict[int, ParacelCert] = {}
    for subset in g.other_subsets():
        cert = is_paracel(g, subset)
        if cert is not None:
            index[subset.mask] = cert
    return MappingProxyType(index)


def enumerate_paracels(g: Multigraph) -> List[ParacelCert]:
    return list(paracel_index(g).values())


# ----------------------------------------------------------------------
# Compatibility and twins
# ----------------------------------------------------------------------
def is_compatible(g: Multigraph, beta: EdgeSet, gamma: EdgeSet, alpha: EdgeSet) -> bool:
    _require_other(g, beta, gamma, alpha)
    if not beta.isdisjoint(gamma):
        raise GraphOperationError("beta and gamma must be disjoint")
    if not alpha.isdisjoint(beta | gamma):
        return False
    cert = paracel_index(g).get((gamma | alpha).mask)
    return cert is not None and beta <= cert.smoots


def enumerate_A(g: Multigraph, beta: EdgeSet, gamma: EdgeSet) -> List[EdgeSet]:
    _require_other(g, beta, gamma)
    if not beta.isdisjoint(gamma):
        raise GraphOperationError("beta and gamma must be disjoint")
    rest = EdgeSet(g.ef_mask) - beta - gamma
    return [a for a in g.other_subsets() if a <= rest and is_compatible(g, beta, gamma, a)]


def are_twins(
    g: Multigraph, beta: EdgeSet, gamma: EdgeSet, alpha: EdgeSet, alpha_prime: EdgeSet
) -> bool:
    for candidate in (alpha, alpha_prime):
        if not is_compatible(g, beta, gamma, candidate):
            raise IncompatibleSetError(
                f"{format_edge_set(g, candidate)} is not in A_"
                f"{format_edge_set(g, beta)},{format_edge_set(g, gamma)}"
            )
    return is_compatible(g, beta, gamma, alpha & alpha_prime)


def _twin_monomials(g: Multigraph, A: List[EdgeSet]) -> FrozenSet[EdgeExponent]:
    members = {a.mask for a in A}
    exps = {a.mask: g.other_exponents(a) for a in A}
    out: Set[EdgeExponent] = set()
    for a in A:
        for b in A:
            if (a.mask & b.mask) in members:
                out.add(tuple(x + y for x, y in zip(exps[a.mask], exps[b.mask])))
    return frozenset(out)


def enumerate_B(g: Multigraph, beta: EdgeSet, gamma: EdgeSet) -> FrozenSet[EdgeExponent]:
    return _twin_monomials(g, enumerate_A(g, beta, gamma))


@lru_cache(maxsize=256)
def twin_families(g: Multigraph) -> Tuple[TwinFamily, ...]:
    """All ``(beta, gamma)`` with nonempty ``A``: gamma outer, beta inner, ascending.

    Generated from the paracels: ``P`` splits as ``gamma + alpha`` for each
    ``gamma <= P`` and admits every ``beta`` made of smoots of ``P``.
    """
    buckets: Dict[Tuple[int, int], Set[int]] = {}
    for mask, cert in paracel_index(g).items():
        for gamma in _submasks(mask):
            alpha = mask & ~gamma
            for beta in _submasks(cert.smoots.mask):
                buckets.setdefault((gamma, beta), set()).add(alpha)
    families = []
    for gamma, beta in sorted(buckets):
        A = [EdgeSet(a) for a in sorted(buckets[(gamma, beta)])]
        families.append(
            TwinFamily(EdgeSet(beta), EdgeSet(gamma), tuple(A), _twin_monomials(g, A))
        )
    logger.debug("[PARACEL] %d familles (beta, gamma)", len(families))
    return tuple(families)


def theorem_table(g: Multigraph) -> Tuple[TwinFamily, ...]:
    return twin_families(g)


# ----------------------------------------------------------------------
# Main identity
# ----------------------------------------------------------------------
def rhs_theorem(g: Multigraph) -> MPoly:
    """``sum x^beta x^gamma sum_{m in B} m`` over all ``(beta, gamma)``."""
    terms: Dict[Tuple[int, ...], int] = {}
    for family in twin_families(g):
        base = tuple(
            x + y
            for x, y in zip(g.other_exponents(family.beta), g.other_exponents(family.gamma))
        )
        for mono in family.B_monomials:
            exp = tuple(x + y for x, y in zip(base, mono)) + (0,)
            terms[exp] = terms.get(exp, 0) + 1
    return MPoly(g.other_ids, terms)


def verify_main_theorem(g: Multigraph, m: Optional[MPoly] = None) -> TheoremCheck:
    lhs = (m if m is not None else m_poly(g)).substitute_q(1)
    rhs = rhs_theorem(g)
    diff = lhs - rhs
    mismatches = tuple(
        Mismatch(
            monomial=format_edge_monomial(g, exp[:-1]),
            lhs=str(lhs.coefficient(exp)),
            rhs=str(rhs.coefficient(exp)),
        )
        for exp, _ in diff.sorted_terms()
    )
    if mismatches:
        logger.error("[VERIFY] %d monômes diffèrent", len(mismatches))
    return TheoremCheck(not mismatches, lhs, rhs, mismatches)


def canonical_split(g: Multigraph, gamma: EdgeSet) -> CanonicalSplit:
    """Unique ``(beta, alpha, alpha')`` producing the all-ones monomial for ``gamma``.

    alpha takes the remaining edges touching ``c1``, alpha' the others.
    """
    cert = is_paracel(g, gamma)
    if cert is None:
        raise GraphOperationError(f"{format_edge_set(g, gamma)} is not a paracel")
    beta = cert.smoots
    rest = EdgeSet(g.ef_mask) - gamma - beta
    alpha = 0
    for pos in rest:
        u, v = g.endpoints[pos]
        if u in cert.c1 or v in cert.c1:
            alpha |= 1 << pos
    return CanonicalSplit(beta, EdgeSet(alpha), rest - EdgeSet(alpha))


def check_complement_involution(g: Multigraph) -> InvolutionReport:
    """Swapping complementary non-paracel pairs turns negative pairs into positive ones."""
    index = paracel_index(g)
    full = EdgeSet(g.ef_mask)
    checked = matched = 0
    violations = []
    for A in g.other_subsets():
        other = full - A
        if A.mask in index or other.mask in index:
            continue
        checked += 1
        forward = classify_pair(g, A, other).sign
        backward = classify_pair(g, other, A).sign
        if (forward is PairSign.NEGATIVE) != (backward is PairSign.POSITIVE) or (
            forward is PairSign.POSITIVE
        ) != (backward is PairSign.NEGATIVE):
            violations.append((A, other))
        elif forward is PairSign.NEGATIVE:
            matched += 1
    return InvolutionReport(checked, matched, tuple(violations))


def full_monomial_representations(
    g: Multigraph,
) -> Dict[int, List[Tuple[EdgeSet, EdgeExponent]]]:
    """``(beta, m)`` per gamma mask with ``x^beta x^gamma m = x^{E^ef}``."""
    ones = (1,) * len(g.other_ids)
    found: Dict[int, List[Tuple[EdgeSet, EdgeExponent]]] = {}
    for family in twin_families(g):
        base = tuple(
            x + y
            for x, y in zip(g.other_exponents(family.beta), g.other_exponents(family.gamma))
        )
        for mono in family.B_monomials:
            if tuple(x + y for x, y in zip(base, mono)) == ones:
                found.setdefault(family.gamma.mask, []).append((family.beta, mono))
    return found


def check_unique_full_representation(g: Multigraph) -> UniquenessReport:
    index = paracel_index(g)
    found = full_monomial_representations(g)
    counts = {gamma: len(reps) for gamma, reps in found.items()}
    offending = sorted(
        {gamma for gamma, n in counts.items() if n != 1 or gamma not in index}
        | {gamma for gamma in index if gamma not in counts}
    )
    return UniquenessReport(len(index), counts, tuple(offending))


__all__ = [
    "CanonicalSplit",
    "IncompatibleSetError",
    "InvolutionReport",
    "Mismatch",
    "ParacelCert",
    "TheoremCheck",
    "TwinFamily",
    "UniquenessReport",
    "are_twins",
    "canonical_split",
    "check_complement_involution",
    "check_unique_full_representation",
    "enumerate_A",
    "enumerate_B",
    "enumerate_paracels",
    "format_edge_monomial",
    "format_edge_set",
    "full_monomial_representations",
    "is_compatible",
    "is_paracel",
    "paracel_index",
    "rhs_theorem",
    "theorem_table",
    "twin_families",
    "verify_main_theorem",
]
