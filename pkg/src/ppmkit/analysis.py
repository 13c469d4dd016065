"""Cross-policy analytics: taxonomy coverage, corpus statistics and
pairwise comparison."""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Iterable, Optional

from ppmkit import model
from ppmkit.model import (
    ActorKind,
    FormOfAgreement,
    LawfulBasisType,
    ModelPath,
    PolicyInstance,
    RecipientKind,
    RightType,
    StorageDurationKind,
    normalize_name,
)


class TaxonomyItem(enum.Enum):
    FIRST_PARTY_COLLECTION = "first-party-collection"
    THIRD_PARTY_COLLECTION = "third-party-collection"
    LEGAL_BASIS = "legal-basis"
    DATA_SUBJECT_RIGHTS = "data-subject-rights"
    DATA_RETENTION = "data-retention"
    DATA_SECURITY = "data-security"
    POLICY_CHANGE = "policy-change"
    SPECIFIC_AUDIENCES = "specific-audiences"
    DO_NOT_TRACK = "do-not-track"
    OTHER = "other"


class CoverageStatus(enum.Enum):
    COVERED = "covered"
    UNCOVERED = "uncovered"
    NOT_APPLICABLE = "not-applicable"


@dataclass(frozen=True)
class CoverageItem:
    status: CoverageStatus
    evidence: tuple[ModelPath, ...] = ()


@dataclass(frozen=True)
class CoverageReport:
    items: dict[TaxonomyItem, CoverageItem]

    def covered(self) -> set[TaxonomyItem]:
        return {k for k, v in self.items.items() if v.status is CoverageStatus.COVERED}

    def to_obj(self) -> dict:
        return {
            item.value: {
                "status": self.items[item].status.value,
                "evidence": [str(p) for p in self.items[item].evidence],
            }
            for item in TaxonomyItem
        }


def taxonomy_coverage(instance: PolicyInstance) -> CoverageReport:
    """Map an instance onto the standard privacy-policy taxonomy topics.

    Do-not-track is always not applicable: the manufacturer controls the
    device's server communication, so the browser-style header has no
    equivalent here.
    """
    items: dict[TaxonomyItem, CoverageItem] = {}

    def covered_if(item: TaxonomyItem, evidence: list[ModelPath]) -> None:
        if evidence:
            items[item] = CoverageItem(CoverageStatus.COVERED, tuple(evidence))
        else:
            items[item] = CoverageItem(CoverageStatus.UNCOVERED)

    first_party: list[ModelPath] = []
    third_party: list[ModelPath] = []
    retention: list[ModelPath] = []
    security: list[ModelPath] = []
    for pi, record in enumerate(instance.processings):
        path = ModelPath().child("processings", pi)
        detail = record.detail
        if isinstance(detail, model.CollectingDetail):
            if record.actor in (ActorKind.MANUFACTURER, ActorKind.USER):
                first_party.append(path)
            if record.actor in (
                ActorKind.EXTERNAL_DATA_RECIPIENT,
                ActorKind.EXTERNAL_DATA_PROVIDER,
            ):
                third_party.append(path)
        if isinstance(detail, model.StoringDetail):
            retention.append(path)
            if detail.data_protection:
                security.append(path)
        if isinstance(detail, model.TransmittingDetail) and detail.protection_measures:
            security.append(path)
    covered_if(TaxonomyItem.FIRST_PARTY_COLLECTION, first_party)
    covered_if(TaxonomyItem.THIRD_PARTY_COLLECTION, third_party)
    covered_if(TaxonomyItem.DATA_RETENTION, retention)
    covered_if(TaxonomyItem.DATA_SECURITY, security)

    bases: list[ModelPath] = []
    for pi, record in enumerate(instance.processings):
        for ui, purpose in enumerate(record.purposes):
            if (
                purpose.lawful_basis is not None
                and purpose.lawful_basis.type is not LawfulBasisType.NOT_APPLICABLE
            ):
                bases.append(
                    ModelPath().child("processings", pi).child("purposes", ui)
                )
    covered_if(TaxonomyItem.LEGAL_BASIS, bases)

    rights: list[ModelPath] = []
    other: list[ModelPath] = []
    for ri, region in enumerate(instance.regions):
        region_path = ModelPath().child("regions", ri)
        for gi, _right in enumerate(region.rights):
            rights.append(region_path.child("rights", gi))
        if region.dpo is not None:
            other.append(region_path.child("dpo"))
        for ci, controller in enumerate(region.controllers):
            if controller.contacts:
                other.append(region_path.child("controllers", ci))
    covered_if(TaxonomyItem.DATA_SUBJECT_RIGHTS, rights)
    covered_if(TaxonomyItem.OTHER, other)

    if instance.update_policies is not None:
        items[TaxonomyItem.POLICY_CHANGE] = CoverageItem(
            CoverageStatus.COVERED, (ModelPath().child("update_policies"),)
        )
    else:
        items[TaxonomyItem.POLICY_CHANGE] = CoverageItem(CoverageStatus.UNCOVERED)

    named_regions = [
        ModelPath().child("regions", ri)
        for ri, region in enumerate(instance.regions)
        if region.name.strip()
    ]
    if instance.minimum_user_age > 0 and named_regions:
        items[TaxonomyItem.SPECIFIC_AUDIENCES] = CoverageItem(
            CoverageStatus.COVERED,
            (ModelPath().child("minimum_user_age"),) + tuple(named_regions),
        )
    else:
        items[TaxonomyItem.SPECIFIC_AUDIENCES] = CoverageItem(CoverageStatus.UNCOVERED)

    items[TaxonomyItem.DO_NOT_TRACK] = CoverageItem(CoverageStatus.NOT_APPLICABLE)
    return CoverageReport(items)


# ---------------------------------------------------------------------------
# Corpus statistics
# ---------------------------------------------------------------------------

STAT_CATEGORIES = (
    "data_type",
    "data_processing",
    "data_owner",
    "data_source",
    "data_receiver",
    "processing_purpose",
    "processing_decision",
    "data_protection",
    "data_storage_period",
    "legal_basis",
)

REVOCATION_OFFERED = "revocation-offered"


@dataclass(frozen=True)
class CorpusStats:
    """Unique normalized values per information category across a corpus."""

    values: dict[str, tuple[str, ...]]

    @property
    def counts(self) -> dict[str, int]:
        return {category: len(vals) for category, vals in self.values.items()}

    def to_obj(self) -> dict:
        return {
            category: {
                "count": len(self.values[category]),
                "values": list(self.values[category]),
            }
            for category in STAT_CATEGORIES
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["category", "value"])
        for category in STAT_CATEGORIES:
            for value in self.values[category]:
                writer.writerow([category, value])
        return buffer.getvalue()


def _duration_text(detail: model.StoringDetail) -> str:
    duration = detail.duration
    if duration.kind is StorageDurationKind.FIXED_PERIOD:
        return f"fixed {duration.length} {duration.unit.value}"
    return f"until-event {duration.event}"


def _recipient_text(recipient: model.RecipientType) -> str:
    if recipient.kind is RecipientKind.OTHER and recipient.other_text is not None:
        return recipient.other_text
    return recipient.kind.value


def _instance_stat_values(instance: PolicyInstance) -> dict[str, list[str]]:
    values: dict[str, list[str]] = {category: [] for category in STAT_CATEGORIES}
    values["data_type"] = [e.name for e in instance.data_entries]
    for record in instance.processings:
        values["data_processing"].append(record.kind)
        values["data_owner"].append(record.actor.value)
        detail = record.detail
        if isinstance(detail, model.CollectingDetail):
            values["data_source"].append(record.actor.value)
        if isinstance(detail, model.StoringDetail):
            values["data_storage_period"].append(_duration_text(detail))
            if detail.data_protection:
                values["data_protection"].append(detail.data_protection)
        if isinstance(detail, model.TransmittingDetail):
            values["data_receiver"].append(_recipient_text(detail.recipient_type))
            if detail.recipient_actor is not None:
                values["data_owner"].append(detail.recipient_actor.value)
            if detail.protection_measures:
                values["data_protection"].append(detail.protection_measures)
        if isinstance(detail, model.FurtherProcessingDetail):
            for kind in detail.kinds:
                values["data_processing"].append(kind.other_text or kind.name.value)
        for purpose in record.purposes:
            values["processing_purpose"].append(purpose.description)
            values["processing_decision"].append(purpose.agreement.value)
            if purpose.revocation:
                values["processing_decision"].append(REVOCATION_OFFERED)
            if purpose.lawful_basis is not None:
                values["legal_basis"].append(purpose.lawful_basis.type.value)
    return values


def corpus_stats(instances: Iterable[PolicyInstance]) -> CorpusStats:
    """Union of unique values per information category across the corpus;
    values are deduplicated under name normalization, keeping the first
    spelling seen, and returned sorted by their normalized form."""
    merged: dict[str, dict[str, str]] = {category: {} for category in STAT_CATEGORIES}
    for instance in instances:
        for category, vals in _instance_stat_values(instance).items():
            for value in vals:
                merged[category].setdefault(normalize_name(value), value)
    return CorpusStats(
        values={
            category: tuple(display for _key, display in sorted(merged[category].items()))
            for category in STAT_CATEGORIES
        }
    )


# ---------------------------------------------------------------------------
# Pairwise comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PolicyDiff:
    entries_only_in_a: frozenset[str]
    entries_only_in_b: frozenset[str]
    categories_only_in_a: frozenset[str]
    categories_only_in_b: frozenset[str]
    rights_only_in_a: frozenset[RightType]
    rights_only_in_b: frozenset[RightType]
    lawful_bases_only_in_a: frozenset[LawfulBasisType]
    lawful_bases_only_in_b: frozenset[LawfulBasisType]
    processing_count_by_kind_a: dict[str, int]
    processing_count_by_kind_b: dict[str, int]
    agreement_distribution_a: dict[str, int]
    agreement_distribution_b: dict[str, int]

    def is_empty(self) -> bool:
        return (
            not self.entries_only_in_a
            and not self.entries_only_in_b
            and not self.categories_only_in_a
            and not self.categories_only_in_b
            and not self.rights_only_in_a
            and not self.rights_only_in_b
            and not self.lawful_bases_only_in_a
            and not self.lawful_bases_only_in_b
            and self.processing_count_by_kind_a == self.processing_count_by_kind_b
            and self.agreement_distribution_a == self.agreement_distribution_b
        )

    def swapped(self) -> "PolicyDiff":
        return PolicyDiff(
            entries_only_in_a=self.entries_only_in_b,
            entries_only_in_b=self.entries_only_in_a,
            categories_only_in_a=self.categories_only_in_b,
            categories_only_in_b=self.categories_only_in_a,
            rights_only_in_a=self.rights_only_in_b,
            rights_only_in_b=self.rights_only_in_a,
            lawful_bases_only_in_a=self.lawful_bases_only_in_b,
            lawful_bases_only_in_b=self.lawful_bases_only_in_a,
            processing_count_by_kind_a=self.processing_count_by_kind_b,
            processing_count_by_kind_b=self.processing_count_by_kind_a,
            agreement_distribution_a=self.agreement_distribution_b,
            agreement_distribution_b=self.agreement_distribution_a,
        )

    def to_obj(self) -> dict:
        return {
            "entries_only_in_a": sorted(self.entries_only_in_a, key=normalize_name),
            "entries_only_in_b": sorted(self.entries_only_in_b, key=normalize_name),
            "categories_only_in_a": sorted(self.categories_only_in_a, key=normalize_name),
            "categories_only_in_b": sorted(self.categories_only_in_b, key=normalize_name),
            "rights_only_in_a": sorted(r.value for r in self.rights_only_in_a),
            "rights_only_in_b": sorted(r.value for r in self.rights_only_in_b),
            "lawful_bases_only_in_a": sorted(b.value for b in self.lawful_bases_only_in_a),
            "lawful_bases_only_in_b": sorted(b.value for b in self.lawful_bases_only_in_b),
            "processing_count_by_kind": {
                "a": self.processing_count_by_kind_a,
                "b": self.processing_count_by_kind_b,
            },
            "agreement_distribution": {
                "a": self.agreement_distribution_a,
                "b": self.agreement_distribution_b,
            },
        }


def _named_set(names: Iterable[str]) -> dict[str, str]:
    result: dict[str, str] = {}
    for name in names:
        result.setdefault(normalize_name(name), name)
    return result


def _rights_used(instance: PolicyInstance) -> set[RightType]:
    return {t for region in instance.regions for right in region.rights for t in right.types}


def _bases_used(instance: PolicyInstance) -> set[LawfulBasisType]:
    return {
        purpose.lawful_basis.type
        for record in instance.processings
        for purpose in record.purposes
        if purpose.lawful_basis is not None
    }


def _kind_counts(instance: PolicyInstance) -> dict[str, int]:
    counts = {kind: 0 for kind in model.PROCESSING_KINDS}
    for record in instance.processings:
        counts[record.kind] += 1
    return counts


def _agreement_distribution(instance: PolicyInstance) -> dict[str, int]:
    counts = {form.value: 0 for form in FormOfAgreement}
    for record in instance.processings:
        for purpose in record.purposes:
            counts[purpose.agreement.value] += 1
    return counts


def compare(a: PolicyInstance, b: PolicyInstance) -> PolicyDiff:
    """Set differences (under name normalization) and per-side distributions
    between two instances. Swapping the arguments swaps the fields exactly."""
    entries_a = _named_set(e.name for e in a.data_entries)
    entries_b = _named_set(e.name for e in b.data_entries)
    cats_a = _named_set(c.name for c in a.data_categories)
    cats_b = _named_set(c.name for c in b.data_categories)
    rights_a, rights_b = _rights_used(a), _rights_used(b)
    bases_a, bases_b = _bases_used(a), _bases_used(b)
    return PolicyDiff(
        entries_only_in_a=frozenset(entries_a[k] for k in entries_a.keys() - entries_b.keys()),
        entries_only_in_b=frozenset(entries_b[k] for k in entries_b.keys() - entries_a.keys()),
        categories_only_in_a=frozenset(cats_a[k] for k in cats_a.keys() - cats_b.keys()),
        categories_only_in_b=frozenset(cats_b[k] for k in cats_b.keys() - cats_a.keys()),
        rights_only_in_a=frozenset(rights_a - rights_b),
        rights_only_in_b=frozenset(rights_b - rights_a),
        lawful_bases_only_in_a=frozenset(bases_a - bases_b),
        lawful_bases_only_in_b=frozenset(bases_b - bases_a),
        processing_count_by_kind_a=_kind_counts(a),
        processing_count_by_kind_b=_kind_counts(b),
        agreement_distribution_a=_agreement_distribution(a),
        agreement_distribution_b=_agreement_distribution(b),
    )
