"""Quadratic-form decompositions of M_ef(q)/q^2 and exact PSD checks.

A decomposition attaches to pairs ``(beta, gamma)`` a symmetric matrix of
polynomials in q over a basis of sets ``alpha`` in ``A_{beta,gamma}``; the
variable of ``alpha`` is the monomial ``x^alpha``. Off-diagonal entries hold
half of the cross coefficient.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from correlation_analyzer.data import BUNDLED_INSTANCES, decomposition_path, graph_path
from correlation_analyzer.modules.cluster import m_poly
from correlation_analyzer.modules.multigraph import EdgeSet, Multigraph, read_graph
from correlation_analyzer.modules.paracel import (
    EdgeExponent,
    format_edge_set,
    is_compatible,
    twin_families,
)
from correlation_analyzer.modules.polyring import (
    MPoly,
    NonDivisibleError,
    QPoly,
    mpoly_exact_div,
)
from correlation_analyzer.utils.rationals import RationalLike, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_GRID: Tuple[Fraction, ...] = tuple(Fraction(i, 10) for i in range(11))


class DecompositionError(ValueError):
    pass


# ----------------------------------------------------------------------
# Types
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class QuadForm:
    basis: Tuple[EdgeSet, ...]
    matrix: Tuple[Tuple[QPoly, ...], ...]

    def __post_init__(self) -> None:
        size = len(self.basis)
        if len(self.matrix) != size or any(len(row) != size for row in self.matrix):
            raise DecompositionError(f"matrix shape does not match a basis of {size}")
        for i in range(size):
            for j in range(i + 1, size):
                if self.matrix[i][j] != self.matrix[j][i]:
                    raise DecompositionError(f"matrix not symmetric at ({i}, {j})")

    @property
    def size(self) -> int:
        return len(self.basis)

    def is_zero(self) -> bool:
        return all(entry.is_zero() for row in self.matrix for entry in row)

    def at(self, q_value: RationalLike) -> List[List[Fraction]]:
        value = parse_rational(q_value)
        return [[entry(value) for entry in row] for row in self.matrix]


@dataclass(frozen=True)
class AnsatzEntry:
    beta: EdgeSet
    gamma: EdgeSet
    form: QuadForm


@dataclass(frozen=True)
class AnsatzDecomp:
    entries: Tuple[AnsatzEntry, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for entry in self.entries:
            key = (entry.beta.mask, entry.gamma.mask)
            if key in seen:
                raise DecompositionError("duplicate (beta, gamma) pair")
            if not entry.beta.isdisjoint(entry.gamma):
                raise DecompositionError("beta and gamma overlap")
            seen.add(key)

    def entry(self, beta: EdgeSet, gamma: EdgeSet) -> Optional[AnsatzEntry]:
        for item in self.entries:
            if item.beta.mask == beta.mask and item.gamma.mask == gamma.mask:
                return item
        return None


@dataclass(frozen=True)
class IdentityCheck:
    holds: bool
    residual: MPoly
    anomaly: Optional[str] = None


@dataclass(frozen=True)
class PsdResult:
    q_value: Fraction
    psd: bool
    witness: Optional[Tuple[int, ...]] = None
    witness_value: Optional[Fraction] = None


@dataclass(frozen=True)
class PsdSweep:
    results: Tuple[PsdResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.psd for r in self.results)

    @property
    def failing(self) -> Tuple[Fraction, ...]:
        return tuple(r.q_value for r in self.results if not r.psd)


# ----------------------------------------------------------------------
# Expansion and identity
# ----------------------------------------------------------------------
def _set_monomial(g: Multigraph, *sets: EdgeSet) -> MPoly:
    powers: Dict[str, int] = {}
    for es in sets:
        for name in g.ids_of(es):
            powers[name] = powers.get(name, 0) + 1
    return MPoly.monomial(g.other_ids, powers)


def expand_form(g: Multigraph, form: QuadForm) -> MPoly:
    total = MPoly.zero(g.other_ids)
    for i, a in enumerate(form.basis):
        for j, b in enumerate(form.basis):
            entry = form.matrix[i][j]
            if entry:
                total = total + entry.to_mpoly(g.other_ids) * _set_monomial(g, a, b)
    return total


def validate_decomp(g: Multigraph, d: AnsatzDecomp) -> None:
    for entry in d.entries:
        for alpha in entry.form.basis:
            if not is_compatible(g, entry.beta, entry.gamma, alpha):
                raise DecompositionError(
                    f"{format_edge_set(g, alpha)} is not in A_"
                    f"{format_edge_set(g, entry.beta)},{format_edge_set(g, entry.gamma)}"
                )


def expand_decomp(g: Multigraph, d: AnsatzDecomp) -> MPoly:
    validate_decomp(g, d)
    total = MPoly.zero(g.other_ids)
    for entry in d.entries:
        total = total + _set_monomial(g, entry.beta, entry.gamma) * expand_form(g, entry.form)
    return total


def _q_squared(g: Multigraph) -> MPoly:
    return MPoly.monomial(g.other_ids, {"q": 2})


def identity_check(g: Multigraph, d: AnsatzDecomp, M: Optional[MPoly] = None) -> IdentityCheck:
    M = M if M is not None else m_poly(g)
    try:
        target = mpoly_exact_div(M, _q_squared(g))
    except NonDivisibleError as exc:
        logger.warning("[ANOMALY] M_ef(q) n'est pas divisible par q^2")
        return IdentityCheck(False, exc.remainder, "M_ef(q) is not divisible by q^2")
    residual = target - expand_decomp(g, d)
    return IdentityCheck(residual.is_zero(), residual)


# ----------------------------------------------------------------------
# Positive semidefiniteness
# ----------------------------------------------------------------------
def quadratic_value(matrix: Sequence[Sequence[Fraction]], v: Sequence[RationalLike]) -> Fraction:
    vec = [Fraction(x) for x in v]
    return sum(
        (matrix[i][j] * vec[i] * vec[j] for i in range(len(vec)) for j in range(len(vec))),
        Fraction(0),
    )


def negative_direction(matrix: Sequence[Sequence[Fraction]]) -> Optional[List[Fraction]]:
    """Vector ``v`` with ``v^T S v < 0``, or None when ``S`` is PSD.

    The all-ones vector is tried first. Otherwise symmetric elimination with
    the largest diagonal as pivot; each remaining index carries its vector in
    original coordinates so a negative pivot is itself a witness.
    """
    n = len(matrix)
    S = [[Fraction(x) for x in row] for row in matrix]
    ones = [Fraction(1)] * n
    if n and quadratic_value(S, ones) < 0:
        return ones
    U = {r: [Fraction(int(r == c)) for c in range(n)] for r in range(n)}
    remaining = list(range(n))
    while remaining:
        for r in remaining:
            if S[r][r] < 0:
                return U[r]
        p = max(remaining, key=lambda r: (S[r][r], -r))
        d = S[p][p]
        if d == 0:
            for i in remaining:
                for j in remaining:
                    if i != j and S[i][j] != 0:
                        t = -(S[j][j] + 1) / (2 * S[i][j])
                        return [t * a + b for a, b in zip(U[i], U[j])]
            return None
        rest = [r for r in remaining if r != p]
        for r in rest:
            factor = S[r][p] / d
            if factor:
                U[r] = [a - factor * b for a, b in zip(U[r], U[p])]
        for r in rest:
            for s in rest:
                S[r][s] -= S[r][p] * S[p][s] / d
        remaining = rest
    return None


def _integral(v: Sequence[Fraction]) -> Tuple[int, ...]:
    scale = lcm(*(x.denominator for x in v)) if v else 1
    ints = [int(x * scale) for x in v]
    common = gcd(*ints) if any(ints) else 1
    return tuple(x // common for x in ints)


def psd_matrix(matrix: Sequence[Sequence[Fraction]], q_value: Fraction = Fraction(0)) -> PsdResult:
    direction = negative_direction(matrix)
    if direction is None:
        return PsdResult(q_value, True)
    witness = _integral(direction)
    return PsdResult(q_value, False, witness, quadratic_value(matrix, witness))


def psd_check(Q: QuadForm, q_value: RationalLike) -> PsdResult:
    value = parse_rational(q_value)
    if not 0 <= value <= 1:
        raise ValueError(f"q must lie in [0, 1], got {value}")
    return psd_matrix(Q.at(value), value)


def psd_sweep(Q: QuadForm, samples: Optional[Sequence[RationalLike]] = None) -> PsdSweep:
    grid = DEFAULT_GRID if samples is None else tuple(parse_rational(s) for s in samples)
    if not grid:
        raise ValueError("psd_sweep needs at least one sample")
    return PsdSweep(tuple(psd_check(Q, q) for q in grid))


# ----------------------------------------------------------------------
# JSON files and bundled tables
# ----------------------------------------------------------------------
def _qpoly_from_json(item: Any) -> QPoly:
    if not isinstance(item, list):
        raise DecompositionError(f"matrix entry must be a list of rationals, got {item!r}")
    try:
        return QPoly.from_strings([str(x) for x in item])
    except ValueError as exc:
        raise DecompositionError(str(exc)) from exc


def decomp_from_json(g: Multigraph, data: Mapping[str, Any]) -> AnsatzDecomp:
    entries = []
    try:
        for raw in data["entries"]:
            basis = tuple(g.edge_set(ids) for ids in raw["basis"])
            matrix = tuple(tuple(_qpoly_from_json(x) for x in row) for row in raw["matrix"])
            entries.append(
                AnsatzEntry(g.edge_set(raw["beta"]), g.edge_set(raw["gamma"]), QuadForm(basis, matrix))
            )
    except (KeyError, TypeError) as exc:
        raise DecompositionError(f"malformed decomposition: {exc}") from exc
    except ValueError as exc:
        if isinstance(exc, DecompositionError):
            raise
        raise DecompositionError(str(exc)) from exc
    return AnsatzDecomp(tuple(entries))


def decomp_to_json(g: Multigraph, d: AnsatzDecomp) -> Dict[str, Any]:
    return {
        "entries": [
            {
                "beta": list(g.ids_of(entry.beta)),
                "gamma": list(g.ids_of(entry.gamma)),
                "basis": [list(g.ids_of(a)) for a in entry.form.basis],
                "matrix": [[x.to_strings() for x in row] for row in entry.form.matrix],
            }
            for entry in d.entries
        ]
    }


def load_decomposition(g: Multigraph, path: Union[str, Path]) -> AnsatzDecomp:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DecompositionError(f"{path}: {exc}") from exc
    return decomp_from_json(g, data)


def bundled_instance(instance: str) -> Tuple[Multigraph, AnsatzDecomp]:
    if instance not in BUNDLED_INSTANCES:
        raise ValueError(f"unknown bundled instance {instance!r}; choose from {BUNDLED_INSTANCES}")
    g = read_graph(graph_path(instance))
    return g, load_decomposition(g, decomposition_path(instance))


def paper_decomps(instance: str) -> AnsatzDecomp:
    return bundled_instance(instance)[1]


def q_zero_lowest_part(g: Multigraph, d: AnsatzDecomp) -> MPoly:
    """Lowest-degree part of ``Q_{empty,empty}`` at ``q = 0``."""
    empty = EdgeSet(0)
    entry = d.entry(empty, empty)
    if entry is None:
        return MPoly.zero(g.other_ids)
    return expand_form(g, entry.form).substitute_q(0).lowest_degree_part()


# ----------------------------------------------------------------------
# Greedy search
# ----------------------------------------------------------------------
def greedy_decompose(
    g: Multigraph,
    M: Optional[MPoly] = None,
    samples: Optional[Sequence[RationalLike]] = None,
) -> Optional[AnsatzDecomp]:
    """Assign every monomial of ``M/q^2`` to the first fitting ``(beta, gamma)`` bucket.

    Diagonal placements ``x_alpha^2`` are tried before cross terms, buckets
    in table order. The grouping is one admissible choice among many; the
    result is post-validated and None is returned when validation fails.
    """
    M = M if M is not None else m_poly(g)
    if M.is_zero():
        return AnsatzDecomp(())
    try:
        target = mpoly_exact_div(M, _q_squared(g))
    except NonDivisibleError:
        return None

    families = twin_families(g)
    diagonal: Dict[EdgeExponent, List[Tuple[int, int, int]]] = {}
    cross: Dict[EdgeExponent, List[Tuple[int, int, int]]] = {}
    for fi, family in enumerate(families):
        base = [x + y for x, y in zip(g.other_exponents(family.beta), g.other_exponents(family.gamma))]
        exps = [g.other_exponents(a) for a in family.A]
        for i, ei in enumerate(exps):
            for j in range(i, len(exps)):
                mono = tuple(b + x + y for b, x, y in zip(base, ei, exps[j]))
                (diagonal if i == j else cross).setdefault(mono, []).append((fi, i, j))

    grouped: Dict[EdgeExponent, Dict[int, Fraction]] = {}
    for exp, coeff in target.terms.items():
        grouped.setdefault(exp[:-1], {})[exp[-1]] = coeff

    cells: Dict[int, Dict[Tuple[int, int], QPoly]] = {}
    for mono in sorted(grouped, key=lambda e: (sum(e), e)):
        powers = grouped[mono]
        coeff = QPoly(powers.get(k, 0) for k in range(max(powers) + 1))
        candidates = diagonal.get(mono, []) + cross.get(mono, [])
        if not candidates:
            logger.info("[SEARCH] aucun emplacement pour %s", mono)
            return None
        fi, i, j = candidates[0]
        bucket = cells.setdefault(fi, {})
        if i == j:
            bucket[(i, i)] = bucket.get((i, i), QPoly()) + coeff
        else:
            half = coeff * Fraction(1, 2)
            bucket[(i, j)] = bucket.get((i, j), QPoly()) + half
            bucket[(j, i)] = bucket.get((j, i), QPoly()) + half

    entries = []
    for fi in sorted(cells):
        family, bucket = families[fi], cells[fi]
        used = sorted({k for pair in bucket for k in pair})
        matrix = tuple(tuple(bucket.get((r, c), QPoly()) for c in used) for r in used)
        basis = tuple(family.A[k] for k in used)
        entries.append(AnsatzEntry(family.beta, family.gamma, QuadForm(basis, matrix)))
    decomp = AnsatzDecomp(tuple(entries))

    if not identity_check(g, decomp, M).holds:
        return None
    for entry in decomp.entries:
        if not psd_sweep(entry.form, samples).passed:
            logger.info(
                "[SEARCH] forme non PSD pour beta=%s gamma=%s",
                format_edge_set(g, entry.beta),
                format_edge_set(g, entry.gamma),
            )
            return None
    return decomp


__all__ = [
    "AnsatzDecomp",
    "AnsatzEntry",
    "DEFAULT_GRID",
    "DecompositionError",
    "IdentityCheck",
    "PsdResult",
    "PsdSweep",
    "QuadForm",
    "bundled_instance",
    "decomp_from_json",
    "decomp_to_json",
    "expand_decomp",
    "expand_form",
    "greedy_decompose",
    "identity_check",
    "load_decomposition",
    "negative_direction",
    "paper_decomps",
    "psd_check",
    "psd_matrix",
    "psd_sweep",
    "q_zero_lowest_part",
    "quadratic_value",
    "validate_decomp",
]
