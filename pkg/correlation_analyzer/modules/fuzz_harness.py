"""Seeded and exhaustive verification sweeps over small multigraphs.

Every instance runs the same battery: the main identity at q=1, the
paracel count of the all-ones coefficient, the degree bound, e/f symmetry,
the deletion/contraction reduction, the complement involution, uniqueness
of the all-ones representation, the pair-summation oracle, the UST square
and positivity sampling. Negative evaluations are findings, not failures:
they are reported as counterexamples and written to replay files.
"""

from __future__ import annotations

import concurrent.futures
import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Any, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from correlation_analyzer.modules.cluster import (
    lambda_coefficient,
    m_poly,
    m_poly_from_pairs,
    reduce_by_lambda,
    reduced_coefficient,
)
from correlation_analyzer.modules.multigraph import (
    Multigraph,
    build_multigraph,
    format_graph,
    random_multigraph,
    swap_marks,
)
from correlation_analyzer.modules.paracel import (
    check_complement_involution,
    check_unique_full_representation,
    paracel_index,
    verify_main_theorem,
)
from correlation_analyzer.modules.polyring import MPoly, mpoly_coeff_extract
from correlation_analyzer.modules.ust import (
    UstStatus,
    is_connected_nondegenerate,
    ust_square_check,
)
from correlation_analyzer.utils.rationals import parse_rational
from correlation_analyzer.utils.splitmix import SplitMix64

logger = logging.getLogger(__name__)

CHECKS = (
    "theorem",
    "paracel_count",
    "degree_bound",
    "symmetry",
    "reduction",
    "involution",
    "uniqueness",
    "oracle",
    "ust",
    "positivity",
)
_INSTANCE_SALT = 0x5DEECE66D


class CheckStatus(str, Enum):
    PASS = "pass"
    SKIPPED = "skipped"
    ANOMALY = "anomaly"
    COUNTEREXAMPLE = "counterexample"
    FAIL = "fail"


_SEVERITY = {
    CheckStatus.PASS: 0,
    CheckStatus.SKIPPED: 0,
    CheckStatus.ANOMALY: 1,
    CheckStatus.COUNTEREXAMPLE: 2,
    CheckStatus.FAIL: 3,
}


def worst(statuses: Sequence[CheckStatus]) -> CheckStatus:
    result = CheckStatus.PASS
    for status in statuses:
        if _SEVERITY[status] > _SEVERITY[result]:
            result = status
    return result


# ----------------------------------------------------------------------
# Settings
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PositivitySettings:
    weight_vectors: int = 25
    weight_max: int = 9
    q_values: Tuple[Fraction, ...] = (
        Fraction(0),
        Fraction(1, 4),
        Fraction(1, 2),
        Fraction(3, 4),
        Fraction(1),
    )


@dataclass(frozen=True)
class FuzzSettings:
    lambda_samples: int = 3
    oracle_max_edges: int = 4
    positivity: PositivitySettings = field(default_factory=PositivitySettings)
    replay_dir: Optional[Path] = None

    @classmethod
    def from_config(cls, config: Mapping[str, Any]) -> "FuzzSettings":
        fuzz = config.get("fuzz", {})
        pos = fuzz.get("positivity", {})
        positivity = PositivitySettings(
            weight_vectors=int(pos.get("weight_vectors", 25)),
            weight_max=int(pos.get("weight_max", 9)),
            q_values=tuple(
                parse_rational(str(q)) for q in pos.get("q_values", ["0", "1/4", "1/2", "3/4", "1"])
            ),
        )
        replay = fuzz.get("replay_dir")
        return cls(
            lambda_samples=int(fuzz.get("lambda_samples", 3)),
            oracle_max_edges=int(fuzz.get("oracle_max_edges", 4)),
            positivity=positivity,
            replay_dir=Path(replay) if replay else None,
        )


# ----------------------------------------------------------------------
# Outcomes
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Counterexample:
    weights: Mapping[str, str]
    q: str
    value: str


@dataclass(frozen=True)
class InstanceOutcome:
    index: int
    seed: Optional[int]
    graph_text: str
    checks: Mapping[str, CheckStatus]
    details: Tuple[str, ...] = ()
    counterexamples: Tuple[Counterexample, ...] = ()

    @property
    def outcome(self) -> CheckStatus:
        return worst(list(self.checks.values()))

    def to_payload(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "seed": self.seed,
            "graph": self.graph_text,
            "outcome": self.outcome.value,
            "checks": {name: status.value for name, status in self.checks.items()},
            "details": list(self.details),
            "counterexamples": [
                {"weights": dict(c.weights), "q": c.q, "value": c.value}
                for c in self.counterexamples
            ],
        }


@dataclass(frozen=True)
class FuzzReport:
    instances: Tuple[InstanceOutcome, ...]
    replay_files: Tuple[str, ...] = ()

    @property
    def outcome(self) -> CheckStatus:
        return worst([inst.outcome for inst in self.instances])

    def counts(self) -> Dict[str, Dict[str, int]]:
        table = {name: {s.value: 0 for s in CheckStatus} for name in CHECKS}
        for inst in self.instances:
            for name, status in inst.checks.items():
                table[name][status.value] += 1
        return table

    def summary_rows(self) -> List[Dict[str, Any]]:
        return [{"check": name, **row} for name, row in self.counts().items()]

    def passed(self) -> int:
        return sum(1 for inst in self.instances if inst.outcome is CheckStatus.PASS)


# ----------------------------------------------------------------------
# Instance generation
# ----------------------------------------------------------------------
def enumerate_small_multigraphs(max_vertices: int, max_other_edges: int) -> Iterator[Multigraph]:
    """All labeled multigraphs with ``n <= max_vertices`` and at most
    ``max_other_edges`` unmarked edges; e and f may be loops or parallel."""
    for n in range(1, max_vertices + 1):
        pairs = [(u, v) for u in range(n) for v in range(u, n)]
        for e in pairs:
            for f in pairs:
                for k in range(max_other_edges + 1):
                    for others in combinations_with_replacement(pairs, k):
                        yield build_multigraph(n, e, f, others)


def random_instances(
    vertices: int, edges: int, count: int, seed: int, fixed_size: bool = False
) -> List[Tuple[Multigraph, int]]:
    """``count`` seeded graphs; sizes drawn in ``[2, vertices]`` x ``[0, edges]``
    unless ``fixed_size``."""
    if vertices < 2:
        raise ValueError("fuzzing needs at least two vertices")
    master = SplitMix64(seed)
    out = []
    for _ in range(count):
        n = vertices if fixed_size else master.between(2, vertices)
        m = edges if fixed_size else master.between(0, edges)
        instance_seed = master.next()
        out.append((random_multigraph(n, m, instance_seed), instance_seed))
    return out


def random_lambda(g: Multigraph, rng: SplitMix64) -> Dict[str, int]:
    return {edge_id: rng.below(3) for edge_id in g.other_ids}


def random_weights(g: Multigraph, rng: SplitMix64, bound: int) -> Dict[str, Fraction]:
    return {edge_id: rng.positive_fraction(bound) for edge_id in g.other_ids}


# ----------------------------------------------------------------------
# Checks
# ----------------------------------------------------------------------
def check_instance(
    g: Multigraph,
    settings: FuzzSettings,
    rng: SplitMix64,
    index: int = 0,
    seed: Optional[int] = None,
    m: Optional[MPoly] = None,
) -> InstanceOutcome:
    m = m if m is not None else m_poly(g)
    checks: Dict[str, CheckStatus] = {}
    details: List[str] = []

    def record(name: str, ok: bool, detail: str = "") -> None:
        checks[name] = CheckStatus.PASS if ok else CheckStatus.FAIL
        if not ok:
            details.append(f"{name}: {detail}")

    theorem = verify_main_theorem(g, m)
    record("theorem", theorem.equal, f"{len(theorem.mismatches)} monomial(s) differ")

    ones = (1,) * len(g.other_ids)
    full = mpoly_coeff_extract(m, ones)(1)
    paracels = len(paracel_index(g))
    record("paracel_count", full == paracels, f"coefficient {full} vs {paracels} paracels")

    at_one = m.substitute_q(1)
    too_high = [name for name in g.other_ids if at_one.max_exponent(name) > 2]
    record("degree_bound", not too_high, f"degree > 2 in {too_high}")

    record("symmetry", m_poly(swap_marks(g)) == m, "M changes when e and f swap")

    bad_lambdas = []
    for _ in range(settings.lambda_samples):
        lam = random_lambda(g, rng)
        before = lambda_coefficient(g, lam, m)
        after = reduced_coefficient(reduce_by_lambda(g, lam))
        if before != after:
            bad_lambdas.append(f"{lam}: {before} vs {after}")
    record("reduction", not bad_lambdas, "; ".join(bad_lambdas))

    involution = check_complement_involution(g)
    record("involution", involution.ok, f"{len(involution.violations)} unmatched pair(s)")

    uniqueness = check_unique_full_representation(g)
    record("uniqueness", uniqueness.ok, f"gamma masks {list(uniqueness.offending)}")

    if len(g.other_ids) <= settings.oracle_max_edges:
        record("oracle", m_poly_from_pairs(g) == m, "pair summation differs")
    else:
        checks["oracle"] = CheckStatus.SKIPPED

    if is_connected_nondegenerate(g):
        ust = ust_square_check(g, m)
        if ust.status is UstStatus.NOT_SQUARE:
            record("ust", False, f"not a square: {ust.component}")
        elif ust.anomaly:
            checks["ust"] = CheckStatus.ANOMALY
            details.append(f"ust: {ust.anomaly}")
        else:
            checks["ust"] = CheckStatus.PASS
    else:
        checks["ust"] = CheckStatus.SKIPPED

    counterexamples: List[Counterexample] = []
    positivity = settings.positivity
    for _ in range(positivity.weight_vectors):
        weights = random_weights(g, rng, positivity.weight_max)
        for q in positivity.q_values:
            value = m.evaluate(q, weights)
            if value < 0:
                counterexamples.append(
                    Counterexample({k: str(v) for k, v in weights.items()}, str(q), str(value))
                )
    checks["positivity"] = (
        CheckStatus.COUNTEREXAMPLE if counterexamples else CheckStatus.PASS
    )
    if counterexamples:
        logger.warning("[COUNTEREXAMPLE] instance %d: M < 0 (%d cas)", index, len(counterexamples))

    return InstanceOutcome(
        index, seed, format_graph(g), checks, tuple(details), tuple(counterexamples)
    )


# ----------------------------------------------------------------------
# Harness
# ----------------------------------------------------------------------
class FuzzHarness:
    """Runs the check battery over instance lists, optionally on a thread pool."""

    def __init__(self, settings: Optional[FuzzSettings] = None, workers: int = 1) -> None:
        self.settings = settings or FuzzSettings()
        self.workers = max(1, int(workers))

    def run_random(
        self, vertices: int, edges: int, count: int, seed: int, fixed_size: bool = False
    ) -> FuzzReport:
        logger.info(
            "[FUZZ] %d instance(s), n<=%d, m<=%d, graine %d", count, vertices, edges, seed
        )
        instances = random_instances(vertices, edges, count, seed, fixed_size)
        return self.run_graphs(instances, label=f"fuzz-{seed}")

    def run_exhaustive(self, max_vertices: int, max_other_edges: int) -> FuzzReport:
        graphs = [(g, None) for g in enumerate_small_multigraphs(max_vertices, max_other_edges)]
        logger.info("[FUZZ] balayage exhaustif: %d graphe(s)", len(graphs))
        return self.run_graphs(graphs, label=f"exhaustive-{max_vertices}-{max_other_edges}")

    def run_graphs(
        self, graphs: Sequence[Tuple[Multigraph, Optional[int]]], label: str = "run"
    ) -> FuzzReport:
        def task(index: int) -> InstanceOutcome:
            g, seed = graphs[index]
            rng = SplitMix64((seed if seed is not None else index) ^ _INSTANCE_SALT)
            return check_instance(g, self.settings, rng, index, seed)

        results: Dict[int, InstanceOutcome] = {}
        if self.workers == 1:
            for index in range(len(graphs)):
                results[index] = task(index)
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=self.workers) as executor:
                future_to_index = {
                    executor.submit(task, index): index for index in range(len(graphs))
                }
                for future in concurrent.futures.as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()

        ordered = tuple(results[i] for i in range(len(graphs)))
        for inst in ordered:
            if inst.outcome is CheckStatus.FAIL:
                logger.error("[FAIL] instance %d: %s", inst.index, "; ".join(inst.details))
        replays = self._write_replays(ordered, label)
        return FuzzReport(ordered, replays)

    def _write_replays(self, instances: Sequence[InstanceOutcome], label: str) -> Tuple[str, ...]:
        directory = self.settings.replay_dir
        findings = [inst for inst in instances if inst.counterexamples]
        if not findings or directory is None:
            return ()
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for inst in findings:
            path = directory / f"{label}-{inst.index}.json"
            path.write_text(
                json.dumps(inst.to_payload(), sort_keys=True, indent=2, ensure_ascii=False),
                encoding="utf-8",
            )
            written.append(str(path))
            logger.warning("[REPLAY] %s", path)
        return tuple(written)


__all__ = [
    "CHECKS",
    "CheckStatus",
    "Counterexample",
    "FuzzHarness",
    "FuzzReport",
    "FuzzSettings",
    "InstanceOutcome",
    "PositivitySettings",
    "check_instance",
    "enumerate_small_multigraphs",
    "random_instances",
    "random_lambda",
    "random_weights",
    "worst",
]
