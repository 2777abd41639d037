"""Core domain types: canonical entity identifiers, credit entries, credit maps.

A credit map assigns fractional weights to everything that contributed to a
scholarly product. Weights within one map sum to 1, every contribution is
identified by a canonical EntityId, and downstream modules (graph, engine)
treat these values as immutable.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import Mapping, Sequence


class CreditLedgerError(Exception):
    """Base class for every error this package raises on purpose."""


class InvalidIdentifier(CreditLedgerError):
    """An identifier string cannot be turned into a canonical EntityId."""


class EmptyIdentifier(InvalidIdentifier):
    """The identifier is empty or whitespace."""


class MalformedOrcid(InvalidIdentifier):
    """The value looks like an ORCID but fails pattern or checksum checks."""


class MalformedDoi(InvalidIdentifier):
    """The value was declared a DOI but is not one."""


class CategorySumError(CreditLedgerError):
    """Category totals do not form a valid distribution."""


class WithinSumError(CreditLedgerError):
    """Weights inside one category do not form a valid distribution."""


class IdScheme(Enum):
    """Identifier schemes, strongest first: orcid, doi, url, email, name."""

    ORCID = "orcid"
    DOI = "doi"
    URL = "url"
    EMAIL = "email"
    NAME = "name"


class Category(Enum):
    """Contribution category of a credit entry."""

    AUTHOR = "author"
    ARTICLE = "article"
    SOFTWARE = "software"
    ACKNOWLEDGMENT = "acknowledgment"
    OTHER = "other"


#: Serialization and expansion order for categories.
CATEGORY_ORDER: tuple[Category, ...] = (
    Category.AUTHOR,
    Category.ARTICLE,
    Category.SOFTWARE,
    Category.ACKNOWLEDGMENT,
    Category.OTHER,
)

#: Categories whose entries denote people rather than products.
PERSON_CATEGORIES = frozenset({Category.AUTHOR, Category.ACKNOWLEDGMENT})


class ProductKind(Enum):
    """Kind of scholarly product a credit map describes."""

    SCHOLARLY_ARTICLE = "scholarly_article"
    CODE = "code"
    DATASET = "dataset"
    BLOG_POSTING = "blog_posting"
    OTHER = "other"


#: Tolerance for "weights sum to one" checks.
WEIGHT_SUM_TOLERANCE = 1e-9

_ORCID_RE = re.compile(r"\d{4}-\d{4}-\d{4}-\d{3}[\dX]")
_ORCID_URI_RE = re.compile(r"https?://(?:www\.)?orcid\.org/(.+)", re.IGNORECASE)
_DOI_URI_RE = re.compile(r"https?://(?:dx\.)?doi\.org/(.+)", re.IGNORECASE)


def validate_orcid_checksum(digits: str) -> bool:
    """True when the last character is the ISO 7064 mod 11-2 check digit.

    Args:
        digits: 16-character ORCID, hyphenated or bare. The final character
            may be 'X' (value ten).
    """
    bare = digits.replace("-", "")
    if len(bare) != 16 or not bare[:15].isdigit():
        return False
    total = 0
    for ch in bare[:15]:
        total = (total + int(ch)) * 2
    result = (12 - total % 11) % 11
    expected = "X" if result == 10 else str(result)
    return bare[15].upper() == expected


@dataclass(frozen=True, slots=True)
class EntityId:
    """Canonical identifier for a person or product.

    Values are normalized on construction (DOIs lowercased, URLs stripped of
    trailing slashes, names lowercased with whitespace collapsed) and then
    validated, so an EntityId that exists is canonical.
    """

    scheme: IdScheme
    value: str

    def __post_init__(self) -> None:
        raw = self.value.strip()
        if not raw:
            raise EmptyIdentifier(f"empty {self.scheme.value} identifier")
        if self.scheme is IdScheme.ORCID:
            raw = raw.upper()
            if not _ORCID_RE.fullmatch(raw):
                raise MalformedOrcid(f"not a hyphenated ORCID: {raw!r}")
            if not validate_orcid_checksum(raw):
                raise MalformedOrcid(f"ORCID checksum failure: {raw!r}")
        elif self.scheme is IdScheme.DOI:
            raw = raw.lower()
            if not raw.startswith("10.") or "/" not in raw:
                raise MalformedDoi(f"not a DOI: {raw!r}")
        elif self.scheme is IdScheme.URL:
            raw = raw.rstrip("/")
            if not raw.lower().startswith(("http://", "https://")):
                raise InvalidIdentifier(f"not an absolute http(s) URL: {raw!r}")
        elif self.scheme is IdScheme.EMAIL:
            raw = raw.lower()
            if "@" not in raw or any(c.isspace() for c in raw):
                raise InvalidIdentifier(f"not an email address: {raw!r}")
        else:
            raw = " ".join(raw.lower().split())
        object.__setattr__(self, "value", raw)

    @property
    def text(self) -> str:
        """Canonical text form, `<scheme>:<value>`."""
        return f"{self.scheme.value}:{self.value}"

    @classmethod
    def from_text(cls, text: str) -> EntityId:
        """Parse the canonical text form produced by `.text`."""
        scheme_name, sep, value = text.partition(":")
        if not sep:
            raise InvalidIdentifier(f"missing scheme prefix: {text!r}")
        try:
            scheme = IdScheme(scheme_name)
        except ValueError:
            raise InvalidIdentifier(f"unknown scheme {scheme_name!r} in {text!r}") from None
        return cls(scheme, value)

    def __str__(self) -> str:
        return self.text


def canonicalize_id(raw: str, hint: Category | None = None) -> EntityId:
    """Detect the identifier scheme of a raw string and canonicalize it.

    Detection precedence: ORCID (URI, orcid: prefix, or bare), DOI (URI,
    doi: prefix, or bare 10.x/...), absolute http(s) URL, email address,
    free-text name. Idempotent over its own rendered text form.

    Args:
        raw: identifier as found in a document.
        hint: category context of the reference. Accepted for callers that
            have it; scheme detection does not currently depend on it.

    Raises:
        EmptyIdentifier: raw is empty or whitespace.
        MalformedOrcid: ORCID shape with a bad pattern or checksum.
        MalformedDoi: doi-prefixed value that is not a DOI.
    """
    del hint
    text = raw.strip()
    if not text:
        raise EmptyIdentifier(f"empty identifier: {raw!r}")

    lowered = text.lower()
    for prefix, scheme in (
        ("orcid:", IdScheme.ORCID),
        ("doi:", IdScheme.DOI),
        ("url:", IdScheme.URL),
        ("email:", IdScheme.EMAIL),
        ("name:", IdScheme.NAME),
    ):
        if lowered.startswith(prefix):
            return EntityId(scheme, text[len(prefix):])

    if m := _ORCID_URI_RE.fullmatch(text):
        return EntityId(IdScheme.ORCID, m.group(1))
    if _ORCID_RE.fullmatch(text.upper()):
        return EntityId(IdScheme.ORCID, text)
    if m := _DOI_URI_RE.fullmatch(text):
        return EntityId(IdScheme.DOI, m.group(1))
    if text.startswith("10.") and "/" in text:
        return EntityId(IdScheme.DOI, text)
    if lowered.startswith(("http://", "https://")):
        return EntityId(IdScheme.URL, text)
    if "@" in text and not any(c.isspace() for c in text):
        return EntityId(IdScheme.EMAIL, text)
    return EntityId(IdScheme.NAME, text)


@dataclass(frozen=True)
class EntryDisplay:
    """Descriptive metadata carried alongside an entry, never used for identity.

    extra holds unrecognized document keys preserved by lenient parsing.
    """

    type_tag: str | None = None
    name: str | None = None
    headline: str | None = None
    email: str | None = None
    license: str | None = None
    repository: str | None = None
    url: str | None = None
    extra: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class CreditEntry:
    """One weighted contribution: who or what, in which category, how much.

    The weight invariant (0 < weight <= 1) is enforced at system boundaries
    (parsing, expansion) and reported by validate_creditmap, not raised here,
    so that broken states remain representable as violation values.
    """

    entity: EntityId
    category: Category
    weight: float
    display: EntryDisplay = field(default_factory=EntryDisplay)


@dataclass(frozen=True)
class ProductMeta:
    """Identity and descriptive fields of the product a map belongs to."""

    id: EntityId
    kind: ProductKind
    headline: str = ""
    date_created: date | None = None
    keywords: tuple[str, ...] = ()
    extra: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class CreditMap:
    """A product plus its complete, conserving credit distribution."""

    product: ProductMeta
    entries: tuple[CreditEntry, ...]


@dataclass(frozen=True, slots=True)
class Violation:
    """One failed validation check, as a value rather than an exception."""

    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.message}"


WEIGHT_SUM = "WeightSum"
NON_POSITIVE_WEIGHT = "NonPositiveWeight"
DUPLICATE_ENTITY = "DuplicateEntity"
NO_AUTHOR = "NoAuthor"


def validate_creditmap(creditmap: CreditMap) -> list[Violation]:
    """Check the credit map invariants and return one Violation per failure.

    Checks, in reporting order: every weight in (0, 1], weights sum to 1
    within WEIGHT_SUM_TOLERANCE, no duplicate canonical entity ids, and at
    least one author entry. An empty list means the map is valid.
    """
    violations: list[Violation] = []
    for position, entry in enumerate(creditmap.entries):
        if not (0.0 < entry.weight <= 1.0):
            violations.append(
                Violation(
                    NON_POSITIVE_WEIGHT,
                    f"entry {position} ({entry.entity.text}) has weight "
                    f"{entry.weight!r}, outside (0, 1]",
                )
            )

    total = math.fsum(entry.weight for entry in creditmap.entries)
    if abs(total - 1.0) > WEIGHT_SUM_TOLERANCE:
        violations.append(
            Violation(WEIGHT_SUM, f"credit weights sum to {total!r}, not 1")
        )

    seen: dict[EntityId, int] = {}
    reported: set[EntityId] = set()
    for entry in creditmap.entries:
        seen[entry.entity] = seen.get(entry.entity, 0) + 1
    for entry in creditmap.entries:
        eid = entry.entity
        if seen[eid] > 1 and eid not in reported:
            reported.add(eid)
            violations.append(
                Violation(
                    DUPLICATE_ENTITY,
                    f"{eid.text} appears {seen[eid]} times",
                )
            )

    if not any(e.category is Category.AUTHOR for e in creditmap.entries):
        violations.append(Violation(NO_AUTHOR, "no author entry"))
    return violations


@dataclass(frozen=True)
class CategoryWeights:
    """Two-level weighting: a total per category, then weights within each.

    within maps a category to (entity, weight) pairs in presentation order.
    """

    totals: Mapping[Category, float]
    within: Mapping[Category, Sequence[tuple[EntityId, float]]]


def expand_category_weights(weights: CategoryWeights) -> list[CreditEntry]:
    """Flatten two-level category weights into per-entity credit entries.

    Each entry weight is total(category) * within-weight, so the output sums
    to 1 whenever both levels do. Categories come out in CATEGORY_ORDER and
    members keep their within-category order.

    Raises:
        CategorySumError: category totals are missing, non-positive, or do
            not sum to 1 within tolerance.
        WithinSumError: a category's member weights are missing,
            non-positive, or do not sum to 1 within tolerance.
    """
    totals = dict(weights.totals)
    for category in weights.within:
        if category not in totals:
            raise CategorySumError(
                f"category {category.value!r} has member weights but no total"
            )

    grand = math.fsum(totals.values())
    if abs(grand - 1.0) > WEIGHT_SUM_TOLERANCE:
        raise CategorySumError(f"category totals sum to {grand!r}, not 1")

    entries: list[CreditEntry] = []
    for category in CATEGORY_ORDER:
        if category not in totals:
            continue
        total = totals[category]
        if not (0.0 < total <= 1.0):
            raise CategorySumError(
                f"category {category.value!r} total {total!r} outside (0, 1]"
            )
        members = list(weights.within.get(category, ()))
        if not members:
            raise WithinSumError(f"category {category.value!r} has no member weights")
        inner = math.fsum(w for _, w in members)
        if abs(inner - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise WithinSumError(
                f"weights within {category.value!r} sum to {inner!r}, not 1"
            )
        for entity, w in members:
            if not (0.0 < w <= 1.0):
                raise WithinSumError(
                    f"weight {w!r} for {entity.text} in {category.value!r} "
                    f"outside (0, 1]"
                )
            entries.append(CreditEntry(entity, category, total * w))
    return entries
