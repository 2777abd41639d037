"""File-backed registry of ingested creditmap documents.

Layout under the registry root: normalized documents live in
objects/<sha256-of-canonical-id>.jsonld, a tab-separated index.tsv maps
canonical product ids to object paths and headlines, and .lock is an
advisory write lock. Writes go to a temp file first and are renamed into
place, and the index can always be rebuilt from the object files alone.
"""

from __future__ import annotations

import fcntl
import hashlib
import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator

from .jsonld import parse_creditmap, serialize_creditmap
from .model import CreditLedgerError, CreditMap, EntityId, ProductMeta, Violation, validate_creditmap


class RegistryError(CreditLedgerError):
    """Base class for registry failures."""


class StorageError(RegistryError):
    """The underlying files are unreadable, unwritable, locked, or drifted."""


class DuplicateProduct(RegistryError):
    """A document for this canonical product id is already registered."""


class NotFound(RegistryError):
    """No registered document for the requested product id."""


class ValidationFailed(RegistryError):
    """The document parsed but failed credit map validation."""

    def __init__(self, violations: list[Violation]):
        self.violations = violations
        summary = "; ".join(str(v) for v in violations)
        super().__init__(f"document failed validation: {summary}")


def _sanitize_cell(text: str) -> str:
    return text.replace("\t", " ").replace("\n", " ").replace("\r", " ")


class Registry:
    """Registry of creditmap documents rooted at a directory.

    The directory springs into existence on the first write; read
    operations on a missing root behave like an empty registry.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._objects = self.root / "objects"
        self._index = self.root / "index.tsv"

    def _ensure_layout(self) -> None:
        try:
            self._objects.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot create registry at {self.root}: {exc}") from exc

    @contextmanager
    def _write_lock(self) -> Iterator[None]:
        self._ensure_layout()
        lock_path = self.root / ".lock"
        try:
            fd = os.open(lock_path, os.O_RDWR | os.O_CREAT, 0o644)
        except OSError as exc:
            raise StorageError(f"cannot open lock file {lock_path}: {exc}") from exc
        try:
            try:
                fcntl.flock(fd, fcntl.LOCK_EX | fcntl.LOCK_NB)
            except OSError as exc:
                raise StorageError(
                    f"registry at {self.root} is locked by another writer"
                ) from exc
            yield
        finally:
            os.close(fd)

    def _atomic_write(self, path: Path, data: bytes) -> None:
        try:
            fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
            try:
                os.write(fd, data)
                os.fsync(fd)
            finally:
                os.close(fd)
            os.replace(tmp_name, path)
        except OSError as exc:
            raise StorageError(f"cannot write {path}: {exc}") from exc

    def _object_name(self, product_id: EntityId) -> str:
        digest = hashlib.sha256(product_id.text.encode("utf-8")).hexdigest()
        return f"objects/{digest}.jsonld"

    def _scan_objects(self) -> dict[str, tuple[str, str]]:
        rows: dict[str, tuple[str, str]] = {}
        if not self._objects.is_dir():
            return rows
        for path in sorted(self._objects.glob("*.jsonld")):
            try:
                creditmap, _ = parse_creditmap(path.read_bytes())
            except OSError as exc:
                raise StorageError(f"cannot read {path}: {exc}") from exc
            except CreditLedgerError as exc:
                raise StorageError(f"stored document {path} does not parse: {exc}") from exc
            rows[creditmap.product.id.text] = (
                f"objects/{path.name}",
                _sanitize_cell(creditmap.product.headline),
            )
        return rows

    def _load_rows(self) -> dict[str, tuple[str, str]]:
        if self._index.is_file():
            rows: dict[str, tuple[str, str]] = {}
            try:
                content = self._index.read_text("utf-8")
            except OSError as exc:
                raise StorageError(f"cannot read index {self._index}: {exc}") from exc
            for line in content.splitlines():
                if not line:
                    continue
                parts = line.split("\t", 2)
                if len(parts) != 3:
                    raise StorageError(f"malformed index row in {self._index}: {line!r}")
                rows[parts[0]] = (parts[1], parts[2])
            return rows
        return self._scan_objects()

    def _write_rows(self, rows: dict[str, tuple[str, str]]) -> None:
        lines = [
            f"{pid}\t{path}\t{headline}\n"
            for pid, (path, headline) in sorted(rows.items())
        ]
        self._atomic_write(self._index, "".join(lines).encode("utf-8"))

    def ingest(self, text: str | bytes, *, force: bool = False) -> EntityId:
        """Validate a document and store its normalized form.

        Args:
            text: raw creditmap document.
            force: replace an existing document with the same product id
                instead of raising DuplicateProduct.

        Returns:
            The canonical product id the document was registered under.

        Raises:
            ValidationFailed: the parsed map has validation violations.
            DuplicateProduct: id already registered and force is false.
            StorageError: lock or filesystem trouble.
        """
        creditmap, _ = parse_creditmap(text)
        violations = validate_creditmap(creditmap)
        if violations:
            raise ValidationFailed(violations)

        product_id = creditmap.product.id
        with self._write_lock():
            rows = self._load_rows()
            if product_id.text in rows and not force:
                raise DuplicateProduct(f"{product_id.text} is already registered")
            rel_path = self._object_name(product_id)
            self._atomic_write(self.root / rel_path, serialize_creditmap(creditmap))
            rows[product_id.text] = (
                rel_path,
                _sanitize_cell(creditmap.product.headline),
            )
            self._write_rows(rows)
        return product_id

    def get(self, product_id: EntityId) -> CreditMap:
        """Load the registered document for a canonical product id.

        Raises:
            NotFound: nothing registered under this id.
            StorageError: the index points at a missing or drifted file.
        """
        rows = self._load_rows()
        row = rows.get(product_id.text)
        if row is None:
            raise NotFound(f"no registered product {product_id.text}")
        path = self.root / row[0]
        try:
            creditmap, _ = parse_creditmap(path.read_bytes())
        except OSError as exc:
            raise StorageError(
                f"index points at unreadable {path}; run rebuild_index: {exc}"
            ) from exc
        if creditmap.product.id != product_id:
            raise StorageError(
                f"index drift: {path} holds {creditmap.product.id.text}, "
                f"expected {product_id.text}; run rebuild_index"
            )
        return creditmap

    def list(self) -> list[tuple[EntityId, ProductMeta]]:
        """All registered products, sorted by canonical id text."""
        return [(m.product.id, m.product) for m in self.load_all()]

    def load_all(self) -> list[CreditMap]:
        """Every registered credit map, sorted by canonical product id text."""
        rows = self._load_rows()
        maps = []
        for pid_text in sorted(rows):
            path = self.root / rows[pid_text][0]
            try:
                creditmap, _ = parse_creditmap(path.read_bytes())
            except OSError as exc:
                raise StorageError(
                    f"index points at unreadable {path}; run rebuild_index: {exc}"
                ) from exc
            maps.append(creditmap)
        return maps

    def rebuild_index(self) -> None:
        """Regenerate index.tsv from the object files, fixing any drift."""
        with self._write_lock():
            self._write_rows(self._scan_objects())
