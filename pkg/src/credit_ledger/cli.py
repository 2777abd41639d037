"""Command line interface: validate, ingest, credit, rank, graph.

Exit codes: 0 success, 1 domain error (validation, cycles, duplicates,
unknown products), 2 I/O or usage error. Stdout stays machine-readable;
warnings and error explanations go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .engine import (
    PropagationOptions,
    RankScope,
    UnknownProduct,
    aggregate_rank,
    transitive_credit,
)
from .graph import CreditGraph, CycleError, NodeKind, build_graph
from .jsonld import ParseError, ParseMode, parse_creditmap
from .model import (
    CreditLedgerError,
    EntityId,
    IdScheme,
    InvalidIdentifier,
    validate_creditmap,
)
from .registry import (
    DuplicateProduct,
    Registry,
    StorageError,
    ValidationFailed,
)

_DEFAULT_REGISTRY_ENV = "CREDIT_LEDGER_HOME"
_DEFAULT_REGISTRY_DIR = ".credit-ledger"


def _default_registry() -> str:
    return os.environ.get(_DEFAULT_REGISTRY_ENV, _DEFAULT_REGISTRY_DIR)


def _fraction(value: float) -> str:
    """Decimal fraction with 12 significant digits."""
    if value == 0:
        return "0.000000000000"
    return format(value, "#.12g")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="credit-ledger",
        description="Register weighted credit maps and propagate credit "
        "through citation chains.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_registry_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--registry",
            default=_default_registry(),
            help=f"registry directory (default: ${_DEFAULT_REGISTRY_ENV} "
            f"or ./{_DEFAULT_REGISTRY_DIR})",
        )

    p = sub.add_parser("validate", help="check creditmap files without storing them")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.add_argument("--strict", action="store_true", help="reject unrecognized keys and types")

    p = sub.add_parser("ingest", help="validate and store creditmap files")
    p.add_argument("files", nargs="+", metavar="FILE")
    add_registry_arg(p)
    p.add_argument("--force", action="store_true", help="replace an existing registration")

    p = sub.add_parser("credit", help="credit allocation of one registered product")
    add_registry_arg(p)
    p.add_argument("--product", required=True, help="canonical product id, e.g. doi:10.1/x")
    p.add_argument("--entity", help="print only this entity's share")
    p.add_argument("--max-depth", type=int, help="expand at most this many citation steps")
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("rank", help="total credit per entity across the registry")
    add_registry_arg(p)
    p.add_argument("--scope", choices=("all", "roots"), default="all")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--format", choices=("table", "json"), default="table")

    p = sub.add_parser("graph", help="export the citation graph")
    add_registry_arg(p)
    p.add_argument("--format", choices=("dot",), default="dot")

    return parser


def _print_parse_failure(path: str, exc: CreditLedgerError) -> None:
    print(f"{path}:{type(exc).__name__}:{exc}")


def cmd_validate(args: argparse.Namespace) -> int:
    mode = ParseMode.STRICT if args.strict else ParseMode.LENIENT
    worst = 0
    for path in args.files:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        try:
            creditmap, warnings = parse_creditmap(data, mode)
        except (ParseError, InvalidIdentifier) as exc:
            _print_parse_failure(path, exc)
            worst = max(worst, 1)
            continue
        for warning in warnings:
            print(f"{path}:{warning.code}:{warning.message}")
        violations = validate_creditmap(creditmap)
        for violation in violations:
            print(f"{path}:{violation.code}:{violation.message}")
        if violations:
            worst = max(worst, 1)
    return worst


def cmd_ingest(args: argparse.Namespace) -> int:
    registry = Registry(args.registry)
    worst = 0
    for path in args.files:
        try:
            data = Path(path).read_bytes()
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        try:
            product_id = registry.ingest(data, force=args.force)
        except ValidationFailed as exc:
            for violation in exc.violations:
                print(f"{path}:{violation.code}:{violation.message}")
            worst = max(worst, 1)
            continue
        except DuplicateProduct as exc:
            print(f"{path}:DuplicateProduct:{exc}")
            worst = max(worst, 1)
            continue
        except (ParseError, InvalidIdentifier) as exc:
            _print_parse_failure(path, exc)
            worst = max(worst, 1)
            continue
        except StorageError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            worst = max(worst, 2)
            continue
        if product_id.scheme is IdScheme.NAME:
            print(
                f"warning: {path}: product has no persistent identifier; "
                f"registered as {product_id.text}",
                file=sys.stderr,
            )
        print(f"registered {product_id.text}")
    return worst


def _load_graph(registry_dir: str) -> CreditGraph:
    graph = build_graph(Registry(registry_dir).load_all())
    for warning in graph.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    return graph


def _parse_cli_id(text: str, what: str) -> EntityId:
    try:
        return EntityId.from_text(text)
    except InvalidIdentifier as exc:
        raise SystemExit(_usage_error(f"bad {what} {text!r}: {exc}"))


def _usage_error(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _options(args: argparse.Namespace) -> PropagationOptions:
    try:
        return PropagationOptions(max_depth=args.max_depth)
    except ValueError as exc:
        raise SystemExit(_usage_error(str(exc)))


def cmd_credit(args: argparse.Namespace) -> int:
    product = _parse_cli_id(args.product, "--product")
    entity = _parse_cli_id(args.entity, "--entity") if args.entity else None
    options = _options(args)
    try:
        graph = _load_graph(args.registry)
        allocation = transitive_credit(graph, product, options)
    except CycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except UnknownProduct as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if entity is not None:
        share = allocation.shares.get(entity, 0.0)
        if args.format == "json":
            doc = {"product": product.text, "entity": entity.text, "credit": share}
            print(json.dumps(doc, indent=2))
        else:
            print(_fraction(share))
        return 0

    rows = sorted(
        allocation.shares.items(), key=lambda item: (-item[1], item[0].text)
    )
    if args.format == "json":
        doc = {
            "product": product.text,
            "max_depth": options.max_depth,
            "truncated_at": allocation.truncated_at,
            "shares": {eid.text: share for eid, share in rows},
        }
        print(json.dumps(doc, indent=2))
    else:
        width = max((len(eid.text) for eid, _ in rows), default=0)
        for eid, share in rows:
            print(f"{eid.text:<{width}}  {_fraction(share)}")
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    scope = RankScope.ALL_PRODUCTS if args.scope == "all" else RankScope.ROOTS_ONLY
    options = _options(args)
    try:
        graph = _load_graph(args.registry)
        rows = aggregate_rank(graph, scope, options)
    except CycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.format == "json":
        doc = {
            "scope": scope.value,
            "max_depth": options.max_depth,
            "totals": [
                {"rank": i, "entity": eid.text, "total": total}
                for i, (eid, total) in enumerate(rows, start=1)
            ],
        }
        print(json.dumps(doc, indent=2))
    else:
        rank_width = len(str(len(rows))) if rows else 1
        id_width = max((len(eid.text) for eid, _ in rows), default=0)
        for i, (eid, total) in enumerate(rows, start=1):
            print(f"{i:>{rank_width}}  {eid.text:<{id_width}}  {_fraction(total)}")
    return 0


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_dot(graph: CreditGraph) -> str:
    if not graph.nodes:
        return "digraph creditmap {}\n"
    lines = ["digraph creditmap {"]
    for eid in sorted(graph.nodes, key=lambda e: e.text):
        kind = graph.nodes[eid].kind
        if kind is NodeKind.REGISTERED_PRODUCT:
            attrs = "[shape=box]"
        elif kind is NodeKind.TERMINAL_PERSON:
            attrs = "[shape=ellipse]"
        else:
            attrs = "[shape=box, style=dashed]"
        lines.append(f"  {_quote(eid.text)} {attrs};")
    all_edges = [edge for out in graph.edges.values() for edge in out]
    all_edges.sort(key=lambda e: (e.source.text, e.target.text, e.weight))
    for edge in all_edges:
        lines.append(
            f"  {_quote(edge.source.text)} -> {_quote(edge.target.text)} "
            f'[label="{edge.weight:.4f}"];'
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_graph(args: argparse.Namespace) -> int:
    try:
        graph = _load_graph(args.registry)
    except CycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    sys.stdout.write(_render_dot(graph))
    return 0


_HANDLERS = {
    "validate": cmd_validate,
    "ingest": cmd_ingest,
    "credit": cmd_credit,
    "rank": cmd_rank,
    "graph": cmd_graph,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except StorageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CreditLedgerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
