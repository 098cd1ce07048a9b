"""Rendu des rapports: templates Jinja2 de la configuration et tableaux pandas."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Sequence, Tuple, Union

import jinja2
import pandas as pd
import yaml

from correlation_analyzer.modules.multigraph import Multigraph
from correlation_analyzer.modules.paracel import (
    TwinFamily,
    format_edge_monomial,
    format_edge_set,
)

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ["beta", "gamma", "A", "B"]


class ReportRenderer:
    """Gestionnaire des templates de rapport."""

    def __init__(self, config: Union[Path, Mapping[str, Any]]) -> None:
        if isinstance(config, Mapping):
            self.cfg = dict(config)
        else:
            with open(config, "r", encoding="utf-8") as f:
                self.cfg = yaml.safe_load(f)
        self.env = jinja2.Environment(autoescape=False, undefined=jinja2.StrictUndefined)

    def get_available_templates(self) -> List[str]:
        return list(self.cfg.get("templates", {}).keys())

    def validate_template(self, name: str) -> Tuple[bool, str]:
        source = self.cfg.get("templates", {}).get(name)
        if source is None:
            return False, "template_not_found"
        try:
            self.env.parse(source)
            return True, "ok"
        except jinja2.TemplateSyntaxError as exc:
            return False, str(exc)

    def render(self, name: str, **context: Any) -> str:
        source = self.cfg.get("templates", {}).get(name)
        if source is None:
            raise ValueError(f"Unknown template: {name}")
        return self.env.from_string(source).render(**context).rstrip()

    # ------------------------------------------------------------------
    # Tables
    # ------------------------------------------------------------------
    @staticmethod
    def theorem_table_frame(g: Multigraph, families: Sequence[TwinFamily]) -> pd.DataFrame:
        rows = []
        for family in families:
            rows.append(
                {
                    "beta": format_edge_set(g, family.beta),
                    "gamma": format_edge_set(g, family.gamma),
                    "A": "{" + ", ".join(format_edge_set(g, a) for a in family.A) + "}",
                    "B": "{" + ", ".join(
                        format_edge_monomial(g, m) for m in family.sorted_monomials()
                    ) + "}",
                }
            )
        return pd.DataFrame(rows, columns=TABLE_COLUMNS)

    @staticmethod
    def summary_frame(rows: Sequence[Mapping[str, Any]], columns: Sequence[str]) -> pd.DataFrame:
        return pd.DataFrame(list(rows), columns=list(columns))

    @staticmethod
    def frame_to_text(frame: pd.DataFrame) -> str:
        if frame.empty:
            return "(vide)"
        return frame.to_string(index=False)

    @staticmethod
    def frame_records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
        return json.loads(frame.to_json(orient="records"))

    @staticmethod
    def export_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(target, index=False)
        logger.info("[EXPORT] %d ligne(s) -> %s", len(frame), target)
        return target


__all__ = ["ReportRenderer", "TABLE_COLUMNS"]
