"""Credit propagation over the citation graph.

Credit flows from a product to its contributors by multiplying weights
along citation paths. Registered products are expanded recursively;
terminals absorb their share. Allocations conserve the total: shares
always sum to 1, at any depth limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

from .graph import CreditGraph, GraphError, NodeKind, topological_order
from .model import CreditMap, EntityId


class UnknownProduct(GraphError):
    """The requested product id is not a registered product in the graph."""


@dataclass(frozen=True)
class PropagationOptions:
    """Knobs for credit propagation.

    max_depth limits how many citation steps from the root are expanded:
    registered products sitting exactly max_depth steps down are treated as
    terminals and absorb their share. None means unlimited.
    """

    max_depth: int | None = None

    def __post_init__(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")


@dataclass(frozen=True)
class Allocation:
    """Credit shares of one product, keyed by terminal entity id.

    truncated_at is the depth limit that actually cut off expansion, or
    None when no registered product was truncated.
    """

    product: EntityId
    shares: Mapping[EntityId, float]
    truncated_at: int | None = None


class RankScope(Enum):
    """Which registered products aggregate_rank sums over."""

    ALL_PRODUCTS = "all"
    ROOTS_ONLY = "roots"


def _fold(buckets: dict[EntityId, list[float]]) -> dict[EntityId, float]:
    return {entity: math.fsum(parts) for entity, parts in buckets.items()}


def direct_credit(creditmap: CreditMap) -> Allocation:
    """First-level allocation: the map's own entries, nothing expanded."""
    buckets: dict[EntityId, list[float]] = {}
    for entry in creditmap.entries:
        buckets.setdefault(entry.entity, []).append(entry.weight)
    return Allocation(product=creditmap.product.id, shares=_fold(buckets))


def _require_registered(graph: CreditGraph, product: EntityId) -> None:
    node = graph.nodes.get(product)
    if node is None or node.kind is not NodeKind.REGISTERED_PRODUCT:
        raise UnknownProduct(f"{product.text} is not a registered product")


def _full_allocations(
    graph: CreditGraph, order: list[EntityId]
) -> dict[EntityId, dict[EntityId, float]]:
    """Unlimited-depth shares for every product in order, bottom-up."""
    alloc: dict[EntityId, dict[EntityId, float]] = {}
    for pid in order:
        buckets: dict[EntityId, list[float]] = {}
        for edge in graph.edges[pid]:
            if edge.target in alloc:
                for entity, share in alloc[edge.target].items():
                    buckets.setdefault(entity, []).append(edge.weight * share)
            else:
                buckets.setdefault(edge.target, []).append(edge.weight)
        alloc[pid] = _fold(buckets)
    return alloc


def _limited_shares(
    graph: CreditGraph,
    pid: EntityId,
    remaining: int,
    memo: dict[tuple[EntityId, int], tuple[dict[EntityId, float], bool]],
) -> tuple[dict[EntityId, float], bool]:
    """Depth-limited shares of pid with a budget of remaining more steps."""
    key = (pid, remaining)
    if key in memo:
        return memo[key]
    buckets: dict[EntityId, list[float]] = {}
    truncated = False
    for edge in graph.edges[pid]:
        target = edge.target
        if target in graph.edges and remaining > 1:
            child, child_truncated = _limited_shares(graph, target, remaining - 1, memo)
            truncated = truncated or child_truncated
            for entity, share in child.items():
                buckets.setdefault(entity, []).append(edge.weight * share)
        elif target in graph.edges:
            truncated = True
            buckets.setdefault(target, []).append(edge.weight)
        else:
            buckets.setdefault(target, []).append(edge.weight)
    result = (_fold(buckets), truncated)
    memo[key] = result
    return result


def transitive_credit(
    graph: CreditGraph,
    product: EntityId,
    options: PropagationOptions | None = None,
) -> Allocation:
    """Propagate credit from a registered product down to terminals.

    Shares multiply along citation paths and sum per entity; the result
    conserves the unit total at any depth limit. Deterministic for a given
    corpus, independent of corpus input order.

    Raises:
        UnknownProduct: product is not registered in this graph.
    """
    options = options or PropagationOptions()
    _require_registered(graph, product)

    if options.max_depth is None:
        reachable = {product}
        stack = [product]
        while stack:
            for edge in graph.edges[stack.pop()]:
                if edge.target in graph.edges and edge.target not in reachable:
                    reachable.add(edge.target)
                    stack.append(edge.target)
        order = [pid for pid in topological_order(graph) if pid in reachable]
        shares = _full_allocations(graph, order)[product]
        return Allocation(product=product, shares=shares, truncated_at=None)

    memo: dict[tuple[EntityId, int], tuple[dict[EntityId, float], bool]] = {}
    shares, truncated = _limited_shares(graph, product, options.max_depth, memo)
    return Allocation(
        product=product,
        shares=shares,
        truncated_at=options.max_depth if truncated else None,
    )


def entity_credit(
    graph: CreditGraph,
    product: EntityId,
    entity: EntityId,
    options: PropagationOptions | None = None,
) -> float:
    """Share of a product's credit reaching one entity (0.0 when none)."""
    return transitive_credit(graph, product, options).shares.get(entity, 0.0)


def aggregate_rank(
    graph: CreditGraph,
    scope: RankScope = RankScope.ALL_PRODUCTS,
    options: PropagationOptions | None = None,
) -> list[tuple[EntityId, float]]:
    """Total credit per entity, summed over products in scope, descending.

    Scope ALL_PRODUCTS sums every registered product's allocation;
    ROOTS_ONLY sums only products nothing else cites. Ties are ordered by
    canonical id text.
    """
    options = options or PropagationOptions()
    in_scope = graph.registered() if scope is RankScope.ALL_PRODUCTS else graph.roots()

    buckets: dict[EntityId, list[float]] = {}
    if options.max_depth is None:
        alloc = _full_allocations(graph, topological_order(graph))
        for pid in in_scope:
            for entity, share in alloc[pid].items():
                buckets.setdefault(entity, []).append(share)
    else:
        memo: dict[tuple[EntityId, int], tuple[dict[EntityId, float], bool]] = {}
        for pid in in_scope:
            shares, _ = _limited_shares(graph, pid, options.max_depth, memo)
            for entity, share in shares.items():
                buckets.setdefault(entity, []).append(share)

    totals = _fold(buckets)
    return sorted(totals.items(), key=lambda item: (-item[1], item[0].text))
