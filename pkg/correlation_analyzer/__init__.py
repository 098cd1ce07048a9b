"""
rc-correlation-analyzer
Polynômes de corrélation du modèle random-cluster sur multigraphes,
paracels, jumeaux et décompositions de l'ansatz αβγ en arithmétique exacte
"""

__version__ = "1.0.0"

__all__ = ["CorrelationAnalyzer"]

try:
    from .correlation_analyzer import CorrelationAnalyzer
except Exception:
    CorrelationAnalyzer = None
