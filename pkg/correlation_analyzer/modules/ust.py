"""q -> 0 specialization of M_ef(q) and its perfect-square structure.

The lowest power of q isolates spanning-forest terms. Their lowest-degree
homogeneous component is a square of a signed forest sum; higher-degree
terms of the same q-order need not be.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from correlation_analyzer.modules.cluster import m_poly
from correlation_analyzer.modules.multigraph import EdgeSet, Multigraph, Universe, components
from correlation_analyzer.modules.polyring import MPoly, mpoly_sqrt

logger = logging.getLogger(__name__)


class UstStatus(str, Enum):
    SQUARE = "square"
    NOT_SQUARE = "not_square"
    ZERO = "zero"


@dataclass(frozen=True)
class LowestQPart:
    q_order: Optional[int]  # None when M is identically zero
    part: MPoly

    @property
    def lowest_degree(self) -> MPoly:
        return self.part.lowest_degree_part()


@dataclass(frozen=True)
class UstCheck:
    status: UstStatus
    q_order: Optional[int]
    part: MPoly
    component: MPoly
    root: Optional[MPoly] = None
    full_part_is_square: bool = False
    unit_coefficients: bool = True
    anomaly: Optional[str] = None


def lowest_q_part(M: MPoly) -> LowestQPart:
    parts = M.q_power_parts()
    if not parts:
        return LowestQPart(None, MPoly.zero(M.registry))
    order = min(parts)
    return LowestQPart(order, parts[order])


def is_connected_nondegenerate(g: Multigraph) -> bool:
    count, _ = components(g, EdgeSet(g.full_mask, Universe.FULL))
    return count == 1 and not g.e.is_loop and not g.f.is_loop


def ust_square_check(g: Multigraph, M: Optional[MPoly] = None) -> UstCheck:
    M = M if M is not None else m_poly(g)
    low = lowest_q_part(M)
    if low.q_order is None:
        return UstCheck(UstStatus.ZERO, None, low.part, low.part)

    anomaly = None
    if is_connected_nondegenerate(g) and low.q_order != 2:
        anomaly = f"lowest q-order {low.q_order} on a connected instance (expected 2)"
        logger.warning("[ANOMALY] %s", anomaly)

    component = low.lowest_degree
    root = mpoly_sqrt(component)
    if root is None:
        logger.error("[UST] composante de plus bas degré non carrée: %s", component)
        return UstCheck(
            UstStatus.NOT_SQUARE,
            low.q_order,
            low.part,
            component,
            full_part_is_square=mpoly_sqrt(low.part) is not None,
            anomaly=anomaly,
        )
    units = all(abs(c) == 1 for c in root.terms.values())
    if not units:
        logger.info("[UST] racine à coefficients non unitaires: %s", root)
    return UstCheck(
        UstStatus.SQUARE,
        low.q_order,
        low.part,
        component,
        root=root,
        full_part_is_square=component == low.part or mpoly_sqrt(low.part) is not None,
        unit_coefficients=units,
        anomaly=anomaly,
    )


__all__ = [
    "LowestQPart",
    "UstCheck",
    "UstStatus",
    "is_connected_nondegenerate",
    "lowest_q_part",
    "ust_square_check",
]
