"""Weighted credit maps for scholarly products, propagated transitively.

Parse and validate creditmap documents, register them in a file-backed
registry, build the citation graph, and compute how each product's unit of
credit divides among the people and products it ultimately rests on.
"""

from .engine import (
    Allocation,
    PropagationOptions,
    RankScope,
    UnknownProduct,
    aggregate_rank,
    direct_credit,
    entity_credit,
    transitive_credit,
)
from .graph import (
    CreditGraph,
    CycleError,
    DuplicateProductId,
    GraphEdge,
    GraphError,
    GraphNode,
    NodeKind,
    build_graph,
    dangling_references,
    topological_order,
)
from .jsonld import (
    CreditmapDocument,
    ParseError,
    ParseMode,
    ParseWarning,
    parse_creditmap,
    serialize_creditmap,
)
from .model import (
    CATEGORY_ORDER,
    Category,
    CategoryWeights,
    CreditEntry,
    CreditLedgerError,
    CreditMap,
    EntityId,
    EntryDisplay,
    IdScheme,
    InvalidIdentifier,
    ProductKind,
    ProductMeta,
    Violation,
    WEIGHT_SUM_TOLERANCE,
    canonicalize_id,
    expand_category_weights,
    validate_creditmap,
    validate_orcid_checksum,
)
from .registry import (
    DuplicateProduct,
    NotFound,
    Registry,
    RegistryError,
    StorageError,
    ValidationFailed,
)

__all__ = [
    "Allocation",
    "CATEGORY_ORDER",
    "Category",
    "CategoryWeights",
    "CreditEntry",
    "CreditGraph",
    "CreditLedgerError",
    "CreditMap",
    "CreditmapDocument",
    "CycleError",
    "DuplicateProduct",
    "DuplicateProductId",
    "EntityId",
    "EntryDisplay",
    "GraphEdge",
    "GraphError",
    "GraphNode",
    "IdScheme",
    "InvalidIdentifier",
    "NodeKind",
    "NotFound",
    "ParseError",
    "ParseMode",
    "ParseWarning",
    "ProductKind",
    "ProductMeta",
    "PropagationOptions",
    "RankScope",
    "Registry",
    "RegistryError",
    "StorageError",
    "UnknownProduct",
    "ValidationFailed",
    "Violation",
    "WEIGHT_SUM_TOLERANCE",
    "aggregate_rank",
    "build_graph",
    "canonicalize_id",
    "dangling_references",
    "direct_credit",
    "entity_credit",
    "expand_category_weights",
    "parse_creditmap",
    "serialize_creditmap",
    "topological_order",
    "transitive_credit",
    "validate_creditmap",
    "validate_orcid_checksum",
]

__version__ = "0.1.0"
