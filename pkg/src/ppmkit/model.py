"""Typed in-memory representation of a privacy policy instance.

All values are immutable after construction (frozen dataclasses, tuples and
frozensets), so instances are safe to share between threads. Structural
invariants that real-world policies routinely violate (missing contacts,
dangling data references, ...) are deliberately *not* enforced here; they are
reported by `ppmkit.rules`.
"""

from __future__ import annotations

import datetime
import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Union


def normalize_name(name: str) -> str:
    """Canonical form used for uniqueness checks and cross-reference matching.

    Trims, collapses internal whitespace and case-folds, so that
    ``"Heart  Rate "`` and ``"heart rate"`` refer to the same thing.
    """
    return " ".join(name.split()).casefold()


# ---------------------------------------------------------------------------
# Enumerations. The enum value is the canonical text token used both in the
# .ppm language and in the JSON projection; construction from a token is
# simply ``ActorKind("user")``.
# ---------------------------------------------------------------------------


class ActorKind(enum.Enum):
    USER = "user"
    MANUFACTURER = "manufacturer"
    EXTERNAL_DATA_RECIPIENT = "external-data-recipient"
    EXTERNAL_DATA_PROVIDER = "external-data-provider"


class LocationKind(enum.Enum):
    WEARABLE = "wearable"
    APP = "app"
    MANUFACTURER_WEBSITE = "manufacturer-website"
    MANUFACTURER_INFRASTRUCTURE = "manufacturer-infrastructure"
    THIRD_PARTY_INFRASTRUCTURE = "third-party-infrastructure"


class RightType(enum.Enum):
    DELETION = "deletion"
    RESTRICTION_OF_PROCESSING = "restriction-of-processing"
    ACCESS = "access"
    CORRECTION = "correction"
    OBJECTION = "objection"
    WITHDRAW_CONSENT = "withdraw-consent"
    PORTABILITY = "portability"
    COMPLAINT = "complaint"
    OTHER = "other"


class ContactKind(enum.Enum):
    EMAIL = "email"
    POSTAL = "postal"
    URL = "url"
    PHONE = "phone"


class FormOfAgreement(enum.Enum):
    OPTIONAL = "optional"
    REQUIRED_FOR_FUNCTION = "required-for-function"
    MANDATORY = "mandatory"


class LawfulBasisType(enum.Enum):
    CONSENT = "consent"
    CONTRACTUAL_LIABILITY = "contractual-liability"
    LEGAL_LIABILITY = "legal-liability"
    LEGITIMATE_INTEREST = "legitimate-interest"
    NOT_APPLICABLE = "not-applicable"


class Timing(enum.Enum):
    CONTINUOUS = "continuous"
    EVENT_BASED = "event-based"
    UNSPECIFIED = "unspecified"


class RecipientArea(enum.Enum):
    EUROPEAN_UNION = "eu"
    ADEQUACY_DECISION = "adequacy"
    OTHER_COUNTRY = "other-country"


class RecipientKind(enum.Enum):
    USER = "user"
    MANUFACTURER = "manufacturer"
    THIRD_PARTY = "third-party"
    OTHER = "other"


class FurtherKindName(enum.Enum):
    TRANSFORMATION = "transformation"
    ANALYSIS = "analysis"
    ORGANIZATION = "organization"
    ALIGNMENT = "alignment"
    COMBINATION = "combination"
    OTHER = "other"


class StorageDurationKind(enum.Enum):
    FIXED_PERIOD = "fixed"
    UNTIL_EVENT = "until-event"


class DurationUnit(enum.Enum):
    DAYS = "days"
    MONTHS = "months"
    YEARS = "years"


# ---------------------------------------------------------------------------
# Model paths
# ---------------------------------------------------------------------------

# Field names that appear in paths, ranked in canonical document order per
# nesting level. Used to sort diagnostics deterministically.
_FIELD_RANK = {
    "name": 0,
    "vendor_name": 1,
    "url_to_original": 2,
    "full_text": 3,
    "effective_date": 4,
    "date_of_last_change": 5,
    "date_of_creation": 6,
    "version_label": 7,
    "minimum_user_age": 8,
    "update_policies": 9,
    "regions": 10,
    "data_entries": 11,
    "data_categories": 12,
    "processings": 13,
    # nested within a region
    "controllers": 0,
    "dpo": 1,
    "rights": 2,
    # nested within controllers / rights / dpo
    "location": 0,
    "contacts": 1,
    "representative": 2,
    "types": 0,
    "description": 2,
    "law": 3,
    "authority": 4,
    # nested within a category
    "member_entries": 1,
    "sub_categories": 2,
    # nested within a processing
    "scenario": 0,
    "actor": 2,
    "locations": 3,
    "detail": 4,
    "purposes": 5,
    # nested within a purpose
    "agreement": 1,
    "revocation": 2,
    "lawful_basis": 3,
    "data": 4,
}

# Path segment name -> model attribute, where they differ.
_SEGMENT_ATTR = {"data": "data_refs"}


@dataclass(frozen=True)
class ModelPath:
    """Address of exactly one element inside a `PolicyInstance`.

    Rendered as e.g. ``regions[0].controllers[1].contacts[0]``; meta
    attributes render without an index (``minimum_user_age``).
    """

    segments: tuple[tuple[str, Optional[int]], ...] = ()

    def child(self, name: str, index: Optional[int] = None) -> "ModelPath":
        return ModelPath(self.segments + ((name, index),))

    def __str__(self) -> str:
        parts = []
        for name, index in self.segments:
            parts.append(name if index is None else f"{name}[{index}]")
        return ".".join(parts)

    @classmethod
    def parse(cls, text: str) -> "ModelPath":
        segments: list[tuple[str, Optional[int]]] = []
        for part in text.split(".") if text else []:
            if part.endswith("]"):
                name, _, idx = part[:-1].partition("[")
                segments.append((name, int(idx)))
            else:
                segments.append((part, None))
        return cls(tuple(segments))

    def sort_key(self) -> tuple:
        key: list[tuple[int, int]] = []
        for name, index in self.segments:
            key.append((_FIELD_RANK.get(name, 99), -1 if index is None else index))
        return tuple(key)

    def resolve(self, instance: "PolicyInstance"):
        """Return the element this path addresses.

        Raises `LookupError` if any segment does not address an element.
        """
        obj = instance
        for name, index in self.segments:
            attr = _SEGMENT_ATTR.get(name, name)
            try:
                obj = getattr(obj, attr)
            except AttributeError:
                raise LookupError(f"no field {name!r} at {obj!r}")
            if index is not None:
                items = obj
                if isinstance(items, frozenset):
                    items = sorted(items, key=_set_sort_key)
                try:
                    obj = items[index]
                except (IndexError, TypeError):
                    raise LookupError(f"index {index} out of range for {name!r}")
            if obj is None:
                raise LookupError(f"{self} addresses an absent optional element")
        return obj


def _set_sort_key(value):
    if isinstance(value, enum.Enum):
        return value.value
    return str(value)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Contact:
    kind: ContactKind
    value: str


@dataclass(frozen=True)
class Representative:
    name: str
    contacts: tuple[Contact, ...]


@dataclass(frozen=True)
class Controller:
    name: str
    contacts: tuple[Contact, ...]
    location: Optional[str] = None
    representative: Optional[Representative] = None


@dataclass(frozen=True)
class DataProtectionOfficer:
    contacts: tuple[Contact, ...]
    name: Optional[str] = None


@dataclass(frozen=True)
class SupervisoryAuthority:
    name: str
    contacts: tuple[Contact, ...]


@dataclass(frozen=True)
class Right:
    types: frozenset[RightType]
    contacts: tuple[Contact, ...]
    description: Optional[str] = None
    law: Optional[str] = None
    authority: Optional[SupervisoryAuthority] = None


@dataclass(frozen=True)
class Region:
    name: str
    controllers: tuple[Controller, ...]
    dpo: Optional[DataProtectionOfficer] = None
    rights: tuple[Right, ...] = ()


@dataclass(frozen=True)
class DataEntry:
    name: str


@dataclass(frozen=True)
class DataCategory:
    name: str
    member_entries: frozenset[str] = frozenset()
    sub_categories: frozenset[str] = frozenset()


@dataclass(frozen=True)
class LawfulBasis:
    type: LawfulBasisType
    description: Optional[str] = None


@dataclass(frozen=True)
class Purpose:
    description: str
    agreement: FormOfAgreement
    data_refs: frozenset[str]
    lawful_basis: Optional[LawfulBasis] = None
    revocation: Optional[str] = None


@dataclass(frozen=True)
class CollectingDetail:
    collection_controller: Optional[str] = None


@dataclass(frozen=True)
class StorageDuration:
    kind: StorageDurationKind
    length: Optional[int] = None
    unit: Optional[DurationUnit] = None
    event: Optional[str] = None


@dataclass(frozen=True)
class StoringDetail:
    duration: StorageDuration
    data_protection: Optional[str] = None
    storage_locations: frozenset[str] = frozenset()


@dataclass(frozen=True)
class RecipientType:
    kind: RecipientKind
    other_text: Optional[str] = None


@dataclass(frozen=True)
class TransmittingDetail:
    recipient_type: RecipientType
    timing: Timing
    legal_transmission: bool
    recipient_actor: Optional[ActorKind] = None
    recipient_locations: frozenset[LocationKind] = frozenset()
    protection_measures: Optional[str] = None
    commissioned: Optional[bool] = None
    recipient_areas: frozenset[RecipientArea] = frozenset()
    safeguards_for_regions: Optional[str] = None


@dataclass(frozen=True)
class DeletingDetail:
    pass


@dataclass(frozen=True)
class FurtherKind:
    name: FurtherKindName
    other_text: Optional[str] = None


@dataclass(frozen=True)
class FurtherProcessingDetail:
    kinds: frozenset[FurtherKind]
    timing: Timing
    automated_decision_making: bool
    adm_logic: Optional[str] = None


ProcessingDetail = Union[
    CollectingDetail,
    StoringDetail,
    TransmittingDetail,
    DeletingDetail,
    FurtherProcessingDetail,
]

# Processing kind token <-> detail class.
PROCESSING_KINDS: dict[str, type] = {
    "collect": CollectingDetail,
    "store": StoringDetail,
    "transmit": TransmittingDetail,
    "delete": DeletingDetail,
    "further": FurtherProcessingDetail,
}
_DETAIL_KIND = {cls: kind for kind, cls in PROCESSING_KINDS.items()}


@dataclass(frozen=True)
class ProcessingRecord:
    id: str
    scenario: str
    actor: ActorKind
    locations: frozenset[LocationKind]
    purposes: tuple[Purpose, ...]
    detail: ProcessingDetail
    description: Optional[str] = None

    @property
    def kind(self) -> str:
        """Processing kind token: collect, store, transmit, delete, further."""
        return _DETAIL_KIND[type(self.detail)]


@dataclass(frozen=True)
class PolicyInstance:
    name: str
    vendor_name: str
    url_to_original: str
    effective_date: datetime.date
    version_label: str
    minimum_user_age: int
    regions: tuple[Region, ...]
    full_text: Optional[str] = None
    date_of_last_change: Optional[datetime.date] = None
    date_of_creation: Optional[datetime.date] = None
    update_policies: Optional[str] = None
    data_entries: tuple[DataEntry, ...] = ()
    data_categories: tuple[DataCategory, ...] = ()
    processings: tuple[ProcessingRecord, ...] = ()

    def entry_names(self) -> set[str]:
        return {normalize_name(e.name) for e in self.data_entries}

    def category_names(self) -> set[str]:
        return {normalize_name(c.name) for c in self.data_categories}

    def category_by_name(self, name: str) -> Optional[DataCategory]:
        wanted = normalize_name(name)
        for category in self.data_categories:
            if normalize_name(category.name) == wanted:
                return category
        return None


# ---------------------------------------------------------------------------
# Reference resolution and category-graph queries
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class UnresolvedReference:
    path: ModelPath
    name: str


def resolve_references(instance: PolicyInstance) -> tuple[UnresolvedReference, ...]:
    """Find every reference that does not name a declared element.

    Covers purpose data references (which may name an entry or a category),
    category member references (entries) and sub-category references
    (categories). Returns an empty tuple when the instance is fully resolved.
    """
    entries = instance.entry_names()
    categories = instance.category_names()
    unresolved: list[UnresolvedReference] = []

    for ci, category in enumerate(instance.data_categories):
        base = ModelPath().child("data_categories", ci)
        for mi, member in enumerate(sorted(category.member_entries, key=normalize_name)):
            if normalize_name(member) not in entries:
                unresolved.append(
                    UnresolvedReference(base.child("member_entries", mi), member)
                )
        for si, sub in enumerate(sorted(category.sub_categories, key=normalize_name)):
            if normalize_name(sub) not in categories:
                unresolved.append(
                    UnresolvedReference(base.child("sub_categories", si), sub)
                )

    referencable = entries | categories
    for pi, processing in enumerate(instance.processings):
        for ui, purpose in enumerate(processing.purposes):
            base = ModelPath().child("processings", pi).child("purposes", ui)
            for di, ref in enumerate(sorted(purpose.data_refs, key=normalize_name)):
                if normalize_name(ref) not in referencable:
                    unresolved.append(UnresolvedReference(base.child("data", di), ref))

    unresolved.sort(key=lambda u: u.path.sort_key())
    return tuple(unresolved)


class UnknownCategoryError(LookupError):
    def __init__(self, name: str):
        super().__init__(f"unknown data category: {name!r}")
        self.name = name


class CategoryCycleError(ValueError):
    """The sub-category relation contains a cycle; `cycle` names one."""

    def __init__(self, cycle: tuple[str, ...]):
        super().__init__("data category cycle: " + " -> ".join(cycle + (cycle[0],)))
        self.cycle = cycle


def find_category_cycle(instance: PolicyInstance) -> Optional[tuple[str, ...]]:
    """Return one cycle in the sub-category graph, or None if it is acyclic."""
    graph: dict[str, list[str]] = {}
    display: dict[str, str] = {}
    for category in instance.data_categories:
        key = normalize_name(category.name)
        display[key] = category.name
        graph.setdefault(key, [])
        for sub in sorted(category.sub_categories, key=normalize_name):
            sub_key = normalize_name(sub)
            if sub_key in {normalize_name(c.name) for c in instance.data_categories}:
                graph[key].append(sub_key)

    WHITE, GRAY, BLACK = 0, 1, 2
    color = {node: WHITE for node in graph}
    stack: list[str] = []

    def visit(node: str) -> Optional[tuple[str, ...]]:
        color[node] = GRAY
        stack.append(node)
        for nxt in graph[node]:
            if color[nxt] == GRAY:
                start = stack.index(nxt)
                return tuple(display[n] for n in stack[start:])
            if color[nxt] == WHITE:
                found = visit(nxt)
                if found:
                    return found
        stack.pop()
        color[node] = BLACK
        return None

    for node in sorted(graph):
        if color[node] == WHITE:
            found = visit(node)
            if found:
                return found
    return None


def category_closure(instance: PolicyInstance, category_name: str) -> set[str]:
    """All entry names reachable from a category, transitively through
    sub-categories. Entry names are returned in their declared spelling.
    """
    start = instance.category_by_name(category_name)
    if start is None:
        raise UnknownCategoryError(category_name)
    cycle = find_category_cycle(instance)
    if cycle is not None:
        raise CategoryCycleError(cycle)

    by_name = {normalize_name(c.name): c for c in instance.data_categories}
    entry_display = {normalize_name(e.name): e.name for e in instance.data_entries}

    result: set[str] = set()
    seen: set[str] = set()
    queue = deque([normalize_name(start.name)])
    while queue:
        key = queue.popleft()
        if key in seen:
            continue
        seen.add(key)
        category = by_name.get(key)
        if category is None:
            continue
        for member in category.member_entries:
            member_key = normalize_name(member)
            result.add(entry_display.get(member_key, member))
        for sub in category.sub_categories:
            queue.append(normalize_name(sub))
    return result


def processings_by_kind(instance: PolicyInstance, kind: str) -> list[ProcessingRecord]:
    """Order-preserving filter of the processing records on the detail kind."""
    if kind not in PROCESSING_KINDS:
        raise ValueError(f"unknown processing kind: {kind!r}")
    detail_cls = PROCESSING_KINDS[kind]
    return [p for p in instance.processings if isinstance(p.detail, detail_cls)]


def iter_contacts(instance: PolicyInstance) -> Iterable[tuple[ModelPath, Contact]]:
    """Every contact in the instance with its path; used by rules and analysis."""
    for ri, region in enumerate(instance.regions):
        region_path = ModelPath().child("regions", ri)
        for ci, controller in enumerate(region.controllers):
            cpath = region_path.child("controllers", ci)
            for ki, contact in enumerate(controller.contacts):
                yield cpath.child("contacts", ki), contact
            if controller.representative:
                for ki, contact in enumerate(controller.representative.contacts):
                    yield cpath.child("representative").child("contacts", ki), contact
        if region.dpo:
            for ki, contact in enumerate(region.dpo.contacts):
                yield region_path.child("dpo").child("contacts", ki), contact
        for gi, right in enumerate(region.rights):
            rpath = region_path.child("rights", gi)
            for ki, contact in enumerate(right.contacts):
                yield rpath.child("contacts", ki), contact
            if right.authority:
                for ki, contact in enumerate(right.authority.contacts):
                    yield rpath.child("authority").child("contacts", ki), contact
