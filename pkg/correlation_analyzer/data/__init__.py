"""Bundled reconstructed instances and their tabulated decompositions."""

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent
BUNDLED_INSTANCES = ("K3", "K4_minus_edge", "K4")


def graph_path(instance: str) -> Path:
    return DATA_DIR / "graphs" / f"{instance}.graph"


def decomposition_path(instance: str) -> Path:
    return DATA_DIR / "decompositions" / f"{instance}.json"


__all__ = ["BUNDLED_INSTANCES", "DATA_DIR", "decomposition_path", "graph_path"]
