"""Modules du Correlation Analyzer."""

from .multigraph import Multigraph, parse_graph, read_graph
from .polyring import MPoly, QPoly, parse_mpoly
from .cluster import m_poly, classify_pair, reduce_by_lambda
from .paracel import enumerate_paracels, twin_families, verify_main_theorem
from .ust import ust_square_check
from .ansatz import AnsatzDecomp, identity_check, psd_sweep
from .fuzz_harness import FuzzHarness
from .run_store import ResultsCache
from .report_renderer import ReportRenderer

__all__ = [
    "Multigraph",
    "parse_graph",
    "read_graph",
    "MPoly",
    "QPoly",
    "parse_mpoly",
    "m_poly",
    "classify_pair",
    "reduce_by_lambda",
    "enumerate_paracels",
    "twin_families",
    "verify_main_theorem",
    "ust_square_check",
    "AnsatzDecomp",
    "identity_check",
    "psd_sweep",
    "FuzzHarness",
    "ResultsCache",
    "ReportRenderer",
]
