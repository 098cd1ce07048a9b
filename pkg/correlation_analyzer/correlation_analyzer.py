#!/usr/bin/env python3
"""
Correlation Analyzer - Orchestrateur principal
Polynômes de corrélation du modèle random-cluster, paracels et ansatz αβγ
"""

import json
import logging
import os
import sys
import time
import argparse
import functools
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, TypeVar

import yaml

if __package__ in {None, ""}:
    sys.path.insert(0, str(Path(__file__).resolve().parents[1]))
    __package__ = "correlation_analyzer"

from correlation_analyzer.data import BUNDLED_INSTANCES
from correlation_analyzer.modules.ansatz import (
    AnsatzDecomp,
    DecompositionError,
    bundled_instance,
    decomp_to_json,
    greedy_decompose,
    identity_check,
    load_decomposition,
    psd_sweep,
)
from correlation_analyzer.modules.cluster import classify_pair, m_poly
from correlation_analyzer.modules.fuzz_harness import (
    CheckStatus,
    FuzzHarness,
    FuzzReport,
    FuzzSettings,
)
from correlation_analyzer.modules.multigraph import (
    GraphOperationError,
    GraphParseError,
    Multigraph,
    format_graph,
    read_graph,
)
from correlation_analyzer.modules.paracel import (
    canonical_split,
    enumerate_paracels,
    format_edge_set,
    theorem_table,
    verify_main_theorem,
)
from correlation_analyzer.modules.polyring import MPoly
from correlation_analyzer.modules.report_renderer import ReportRenderer
from correlation_analyzer.modules.run_store import (
    DEFAULT_MAX_AGE_DAYS,
    DEFAULT_MAX_ENTRIES,
    DEFAULT_MAX_REPORTS,
    ResultsCache,
)
from correlation_analyzer.modules.ust import UstStatus, is_connected_nondegenerate, ust_square_check
from correlation_analyzer.utils.rationals import parse_rational

logger = logging.getLogger(__name__)

DEFAULT_CONFIG = Path(__file__).resolve().parent / "config" / "analyzer_config.yaml"
BITMASK_WIDTH = 30

EXIT_CODES = {
    CheckStatus.PASS.value: 0,
    CheckStatus.FAIL.value: 1,
    CheckStatus.ANOMALY.value: 2,
    CheckStatus.COUNTEREXAMPLE.value: 3,
}
EXIT_USAGE = 64


class EnumerationCapError(ValueError):
    """Graph too large for subset enumeration."""


@dataclass
class RunReport:
    command: str
    graph: Optional[Dict[str, Any]]
    outcome: str
    payload: Dict[str, Any]
    elapsed_ms: float = 0.0
    text: str = field(default="", repr=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "graph": self.graph,
            "outcome": self.outcome,
            "payload": self.payload,
            "elapsed_ms": self.elapsed_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, ensure_ascii=False)

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.outcome]


_Command = TypeVar("_Command", bound=Callable[..., RunReport])


def _timed(method: _Command) -> _Command:
    """Start the command clock; ``_finish`` stamps ``elapsed_ms``."""

    @functools.wraps(method)
    def wrapper(self: "CorrelationAnalyzer", *args: Any, **kwargs: Any) -> RunReport:
        self._started = time.perf_counter()
        return method(self, *args, **kwargs)

    return wrapper  # type: ignore[return-value]


def _split_ids(value: str) -> List[str]:
    return [token for token in value.replace(" ", "").split(",") if token]


class CorrelationAnalyzer:
    """Orchestrateur des commandes: graphe -> calcul exact -> rapport."""

    def __init__(self, config_path: Optional[Path] = None, use_cache: Optional[bool] = None) -> None:
        self.config_path = Path(config_path) if config_path else DEFAULT_CONFIG
        with open(self.config_path, "r", encoding="utf-8") as f:
            self.config = yaml.safe_load(f)

        limits = self.config.get("limits", {})
        self.max_edges = int(limits.get("max_edges", BITMASK_WIDTH))
        self.warn_edges = int(limits.get("warn_edges", 22))
        env_name = limits.get("env_override", "RC_MAX_EDGES")
        override = os.environ.get(env_name)
        if override:
            try:
                self.max_edges = int(override)
                logger.warning("[CAP] plafond d'énumération forcé à %d via %s", self.max_edges, env_name)
            except ValueError:
                logger.warning("[CAP] valeur %s=%r ignorée", env_name, override)
            if self.max_edges > BITMASK_WIDTH:
                logger.warning("[CAP] %d arêtes dépasse la largeur nominale %d", self.max_edges, BITMASK_WIDTH)

        cache_cfg = self.config.get("cache", {})
        enabled = cache_cfg.get("enabled", True) if use_cache is None else use_cache
        self.cache: Optional[ResultsCache] = None
        if enabled:
            self.cache = ResultsCache(
                cache_cfg.get("db_path", "correlation_cache.db"),
                pool_size=int(cache_cfg.get("pool_size", 2)),
                busy_timeout_ms=int(cache_cfg.get("busy_timeout_ms", 5000)),
                max_entries=int(cache_cfg.get("max_entries", DEFAULT_MAX_ENTRIES)),
                max_reports=int(cache_cfg.get("max_reports", DEFAULT_MAX_REPORTS)),
                max_age_days=cache_cfg.get("max_age_days", DEFAULT_MAX_AGE_DAYS),
            )
        self.renderer = ReportRenderer(self.config)
        self.fuzz_settings = FuzzSettings.from_config(self.config)
        self.grid = [parse_rational(str(q)) for q in self.config.get("ansatz", {}).get("grid", [])] or None
        self._closed = False
        self._started = time.perf_counter()
        logger.info("Initialisation Correlation Analyzer (cap %d arêtes)", self.max_edges)

    def close(self) -> None:
        if self._closed:
            return
        if self.cache is not None:
            self.cache.close()
        self._closed = True

    def __enter__(self) -> "CorrelationAnalyzer":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        self.close()

    # ------------------------------------------------------------------
    # Shared steps
    # ------------------------------------------------------------------
    def check_cap(self, g: Multigraph) -> None:
        size = len(g.edges)
        if size > self.max_edges:
            raise EnumerationCapError(f"{size} edges exceed the enumeration cap of {self.max_edges}")
        if size > self.warn_edges:
            logger.warning("[CAP] %d arêtes: énumération de 2^%d sous-ensembles", size, size)

    def load_graph(self, path: Path) -> Multigraph:
        g = read_graph(path)
        self.check_cap(g)
        return g

    def compute_m(self, g: Multigraph) -> MPoly:
        if self.cache is not None:
            cached = self.cache.get_m_poly(g)
            if cached is not None:
                return cached
        poly = m_poly(g)
        if self.cache is not None:
            self.cache.store_m_poly(g, poly)
        return poly

    def _finish(self, report: RunReport, template: str, **context: Any) -> RunReport:
        report.text = self.renderer.render(template, **context)
        report.elapsed_ms = round((time.perf_counter() - self._started) * 1000, 3)
        if self.cache is not None:
            self.cache.record_report(report.command, report.outcome, report.to_json())
        return report

    # ------------------------------------------------------------------
    # Commands
    # ------------------------------------------------------------------
    @_timed
    def cmd_mpoly(self, path: Path, at_q: Optional[str] = None) -> RunReport:
        g = self.load_graph(path)
        poly = self.compute_m(g)
        payload: Dict[str, Any] = {"m_poly": poly.to_json()}
        shown = poly
        if at_q is not None:
            value = parse_rational(at_q)
            shown = poly.substitute_q(value)
            payload["at_q"] = str(value)
            payload["specialized"] = shown.to_json()
        payload["text"] = str(shown)
        report = RunReport("mpoly", g.summary(), CheckStatus.PASS.value, payload)
        return self._finish(report, "mpoly", polynomial=str(shown))

    @_timed
    def cmd_verify(self, path: Path) -> RunReport:
        g = self.load_graph(path)
        check = verify_main_theorem(g, self.compute_m(g))
        mismatches = [
            {"monomial": m.monomial, "lhs": m.lhs, "rhs": m.rhs} for m in check.mismatches
        ]
        payload = {
            "equal": check.equal,
            "lhs": str(check.lhs),
            "rhs": str(check.rhs),
            "mismatches": mismatches,
        }
        outcome = CheckStatus.PASS if check.equal else CheckStatus.FAIL
        report = RunReport("verify", g.summary(), outcome.value, payload)
        return self._finish(report, "verify", **payload)

    @_timed
    def cmd_paracels(self, path: Path, table: bool = False, csv_path: Optional[Path] = None) -> RunReport:
        g = self.load_graph(path)
        paracels = [
            {
                "F": format_edge_set(g, cert.F),
                "c1": sorted(cert.c1),
                "c2": sorted(cert.c2),
                "smoots": format_edge_set(g, cert.smoots),
            }
            for cert in enumerate_paracels(g)
        ]
        payload: Dict[str, Any] = {"paracels": paracels}
        table_text = ""
        if table or csv_path is not None:
            frame = ReportRenderer.theorem_table_frame(g, theorem_table(g))
            payload["table"] = ReportRenderer.frame_records(frame)
            table_text = ReportRenderer.frame_to_text(frame) if table else ""
            if csv_path is not None:
                ReportRenderer.export_csv(frame, csv_path)
        report = RunReport("paracels", g.summary(), CheckStatus.PASS.value, payload)
        return self._finish(report, "paracels", paracels=paracels, table=table_text)

    @_timed
    def cmd_split(self, path: Path, gamma: str) -> RunReport:
        g = self.load_graph(path)
        gamma_set = g.edge_set(_split_ids(gamma))
        split = canonical_split(g, gamma_set)
        payload = {
            "gamma": format_edge_set(g, gamma_set),
            "beta": format_edge_set(g, split.beta),
            "alpha": format_edge_set(g, split.alpha),
            "alpha_prime": format_edge_set(g, split.alpha_prime),
        }
        report = RunReport("split", g.summary(), CheckStatus.PASS.value, payload)
        return self._finish(report, "split", **payload)

    @_timed
    def cmd_classify(self, path: Path, A: str, B: str) -> RunReport:
        g = self.load_graph(path)
        pair = classify_pair(g, g.edge_set(_split_ids(A)), g.edge_set(_split_ids(B)))
        payload = {
            "A": format_edge_set(g, pair.A),
            "B": format_edge_set(g, pair.B),
            "k1": pair.k1,
            "k2": pair.k2,
            "sign": pair.sign.value,
        }
        report = RunReport("classify", g.summary(), CheckStatus.PASS.value, payload)
        return self._finish(report, "classify", **payload)

    @_timed
    def cmd_ust(self, path: Path) -> RunReport:
        g = self.load_graph(path)
        check = ust_square_check(g, self.compute_m(g))
        outcome = CheckStatus.PASS
        if check.status is UstStatus.NOT_SQUARE:
            outcome = CheckStatus.FAIL if is_connected_nondegenerate(g) else CheckStatus.ANOMALY
        elif check.anomaly:
            outcome = CheckStatus.ANOMALY
        payload = {
            "status": check.status.value,
            "q_order": check.q_order,
            "part": str(check.part),
            "component": str(check.component),
            "root": str(check.root) if check.root is not None else None,
            "full_part_is_square": check.full_part_is_square,
            "unit_coefficients": check.unit_coefficients,
            "anomaly": check.anomaly,
        }
        report = RunReport("ust", g.summary(), outcome.value, payload)
        return self._finish(report, "ust", **payload)

    @_timed
    def cmd_ansatz(
        self,
        path: Optional[Path] = None,
        decomp_path: Optional[Path] = None,
        paper: Optional[str] = None,
        search: bool = False,
    ) -> RunReport:
        if paper is not None:
            g, decomp = bundled_instance(paper)
            self.check_cap(g)
            source = f"paper:{paper}"
        else:
            if path is None:
                raise ValueError("ansatz needs a graph file unless --paper is given")
            g = self.load_graph(path)
            decomp = None
            source = "search"
            if decomp_path is not None:
                decomp = load_decomposition(g, decomp_path)
                source = str(decomp_path)
            elif not search:
                raise ValueError("ansatz needs --decomp, --paper or --search")

        M = self.compute_m(g)
        payload: Dict[str, Any] = {"source": source}
        if decomp is None:
            decomp = greedy_decompose(g, M, self.grid)
            payload["found"] = decomp is not None
            if decomp is None:
                logger.info("[SEARCH] aucune décomposition trouvée")
                payload.update(entries=0, holds=False, residual="", psd=False, failures=[])
                report = RunReport("ansatz", g.summary(), CheckStatus.PASS.value, payload)
                report = self._finish(report, "ansatz", **payload)
                report.text += "\naucune décomposition trouvée (none found)"
                return report
            payload["decomposition"] = decomp_to_json(g, decomp)

        identity = identity_check(g, decomp, M)
        failures = self._psd_failures(g, decomp)
        payload.update(
            entries=len(decomp.entries),
            holds=identity.holds,
            residual="" if identity.holds else str(identity.residual),
            psd=not failures,
            failures=failures,
        )
        if identity.anomaly:
            payload["anomaly"] = identity.anomaly
            outcome = CheckStatus.ANOMALY
        elif not identity.holds:
            outcome = CheckStatus.FAIL
        elif failures:
            # tableau embarqué non PSD: contre-exemple; fichier utilisateur: échec
            outcome = CheckStatus.COUNTEREXAMPLE if paper else CheckStatus.FAIL
        else:
            outcome = CheckStatus.PASS

        report = RunReport("ansatz", g.summary(), outcome.value, payload)
        if outcome is CheckStatus.COUNTEREXAMPLE:
            payload["replay_files"] = [self._write_ansatz_replay(g, source, payload)]
        return self._finish(report, "ansatz", **payload)

    def _psd_failures(self, g: Multigraph, decomp: AnsatzDecomp) -> List[Dict[str, Any]]:
        failures = []
        for entry in decomp.entries:
            for result in psd_sweep(entry.form, self.grid).results:
                if not result.psd:
                    failures.append(
                        {
                            "beta": format_edge_set(g, entry.beta),
                            "gamma": format_edge_set(g, entry.gamma),
                            "q": str(result.q_value),
                            "witness": list(result.witness or ()),
                            "value": str(result.witness_value),
                        }
                    )
        return failures

    def _write_ansatz_replay(self, g: Multigraph, source: str, payload: Dict[str, Any]) -> str:
        directory = self.fuzz_settings.replay_dir or Path("replays")
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / f"ansatz-{source.replace(':', '-').replace('/', '_')}-0.json"
        target.write_text(
            json.dumps(
                {"graph": format_graph(g), "source": source, "failures": payload["failures"]},
                sort_keys=True,
                indent=2,
                ensure_ascii=False,
            ),
            encoding="utf-8",
        )
        logger.warning("[COUNTEREXAMPLE] forme non PSD, rejeu: %s", target)
        return str(target)

    @_timed
    def cmd_fuzz(
        self,
        vertices: int,
        edges: int,
        count: int,
        seed: int,
        workers: Optional[int] = None,
        exhaustive: bool = False,
        fixed_size: bool = False,
    ) -> RunReport:
        if edges + 2 > self.max_edges:
            raise EnumerationCapError(f"{edges + 2} edges exceed the enumeration cap of {self.max_edges}")
        fuzz_cfg = self.config.get("fuzz", {})
        harness = FuzzHarness(self.fuzz_settings, workers or int(fuzz_cfg.get("workers", 1)))
        if exhaustive:
            result = harness.run_exhaustive(vertices, edges)
        else:
            result = harness.run_random(vertices, edges, count, seed, fixed_size)
        return self._fuzz_report(result, vertices, edges, seed, exhaustive)

    def _fuzz_report(
        self, result: FuzzReport, vertices: int, edges: int, seed: int, exhaustive: bool
    ) -> RunReport:
        frame = ReportRenderer.summary_frame(
            result.summary_rows(), ["check"] + [s.value for s in CheckStatus]
        )
        payload = {
            "mode": "exhaustive" if exhaustive else "random",
            "vertices": vertices,
            "edges": edges,
            "seed": None if exhaustive else seed,
            "instances": len(result.instances),
            "passed": result.passed(),
            "summary": ReportRenderer.frame_records(frame),
            "findings": [
                inst.to_payload()
                for inst in result.instances
                if inst.outcome is not CheckStatus.PASS
            ],
            "replay_files": list(result.replay_files),
        }
        report = RunReport("fuzz", None, result.outcome.value, payload)
        return self._finish(
            report,
            "fuzz",
            instances=len(result.instances),
            outcome=result.outcome.value,
            table=ReportRenderer.frame_to_text(frame),
        )


# ----------------------------------------------------------------------
# Command line
# ----------------------------------------------------------------------
class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    """argparse with the usage exit code of this tool."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(
        prog="correlation-analyzer",
        description="Correlation Analyzer: polynômes M_ef(q), paracels et ansatz αβγ",
    )
    parser.add_argument("--config", type=Path, help="fichier YAML de configuration")
    parser.add_argument("--json", action="store_true", help="rapport JSON sur stdout")
    parser.add_argument("--log-level", help="niveau de log (DEBUG, INFO, ...)")
    parser.add_argument("--no-cache", action="store_true", help="désactive le cache SQLite")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    p = sub.add_parser("mpoly", help="M_ef(q) d'un graphe")
    p.add_argument("graph", type=Path)
    p.add_argument("--at-q", dest="at_q", help="spécialise q (rationnel)")

    p = sub.add_parser("verify", help="identité M_ef(1) = somme sur les jumeaux")
    p.add_argument("graph", type=Path)

    p = sub.add_parser("paracels", help="liste des paracels")
    p.add_argument("graph", type=Path)
    p.add_argument("--table", action="store_true", help="tableau beta | gamma | A | B")
    p.add_argument("--csv", type=Path, help="exporte le tableau en CSV")

    p = sub.add_parser("split", help="décomposition canonique d'un paracel gamma")
    p.add_argument("graph", type=Path)
    p.add_argument("--gamma", required=True, help="ids séparés par des virgules ('' pour ∅)")

    p = sub.add_parser("classify", help="classe d'une paire (A, B)")
    p.add_argument("graph", type=Path)
    p.add_argument("--A", dest="A", default="", help="ids séparés par des virgules")
    p.add_argument("--B", dest="B", default="", help="ids séparés par des virgules")

    p = sub.add_parser("ust", help="partie de plus bas ordre en q et racine carrée")
    p.add_argument("graph", type=Path)

    p = sub.add_parser("ansatz", help="vérifie une décomposition αβγ")
    p.add_argument("graph", type=Path, nargs="?")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--decomp", type=Path, help="fichier JSON de décomposition")
    group.add_argument("--paper", choices=BUNDLED_INSTANCES, help="tableau embarqué")
    group.add_argument("--search", action="store_true", help="recherche gloutonne")

    p = sub.add_parser("fuzz", help="campagne de vérification aléatoire ou exhaustive")
    p.add_argument("--vertices", type=int)
    p.add_argument("--edges", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--exhaustive", action="store_true", help="tous les multigraphes étiquetés")
    p.add_argument("--fixed-size", action="store_true", help="n et m exacts au lieu de bornes")
    p.add_argument("--replay-dir", type=Path)
    return parser


def _configure_logging(config: Dict[str, Any], level: Optional[str]) -> None:
    log_cfg = config.get("logging", {})
    logging.basicConfig(
        level=getattr(logging, (level or log_cfg.get("level", "WARNING")).upper(), logging.WARNING),
        format=log_cfg.get("format", "%(asctime)s - %(name)s - %(levelname)s - %(message)s"),
        stream=sys.stderr,
    )


def run_command(analyzer: CorrelationAnalyzer, args: argparse.Namespace) -> RunReport:
    if args.command == "mpoly":
        return analyzer.cmd_mpoly(args.graph, args.at_q)
    if args.command == "verify":
        return analyzer.cmd_verify(args.graph)
    if args.command == "paracels":
        return analyzer.cmd_paracels(args.graph, args.table, args.csv)
    if args.command == "split":
        return analyzer.cmd_split(args.graph, args.gamma)
    if args.command == "classify":
        return analyzer.cmd_classify(args.graph, args.A, args.B)
    if args.command == "ust":
        return analyzer.cmd_ust(args.graph)
    if args.command == "ansatz":
        if args.paper is None and args.graph is None:
            raise UsageError("ansatz needs a graph file with --decomp or --search")
        if args.paper is not None and args.graph is not None:
            raise UsageError("--paper uses its bundled graph; drop the graph argument")
        return analyzer.cmd_ansatz(args.graph, args.decomp, args.paper, args.search)
    if args.command == "fuzz":
        defaults = analyzer.config.get("fuzz", {})
        if args.replay_dir is not None:
            analyzer.fuzz_settings = FuzzSettings(
                analyzer.fuzz_settings.lambda_samples,
                analyzer.fuzz_settings.oracle_max_edges,
                analyzer.fuzz_settings.positivity,
                args.replay_dir,
            )
        return analyzer.cmd_fuzz(
            args.vertices if args.vertices is not None else int(defaults.get("vertices", 4)),
            args.edges if args.edges is not None else int(defaults.get("edges", 5)),
            args.count if args.count is not None else int(defaults.get("count", 100)),
            args.seed if args.seed is not None else int(defaults.get("seed", 7)),
            args.workers,
            args.exhaustive,
            args.fixed_size,
        )
    raise UsageError(f"unknown command {args.command!r}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Point d'entrée principal"""
    parser = build_parser()
    args = parser.parse_args(argv)

    config_path = args.config or DEFAULT_CONFIG
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            config = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as exc:
        print(f"error: cannot read configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _configure_logging(config, args.log_level)

    try:
        with CorrelationAnalyzer(config_path, use_cache=False if args.no_cache else None) as analyzer:
            report = run_command(analyzer, args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphParseError, OSError) as exc:
        logger.error("Lecture du graphe impossible: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES[CheckStatus.FAIL.value]
    except (EnumerationCapError, GraphOperationError, DecompositionError, ValueError) as exc:
        logger.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES[CheckStatus.FAIL.value]

    print(report.to_json() if args.json else report.text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
