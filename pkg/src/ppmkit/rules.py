"""Semantic validation of policy instances.

Every rule has a stable id (`PPM-E-nnn` / `PPM-W-nnn` / `PPM-I-nnn`), a
severity matching the letter, and a rationale naming the GDPR duty or
modeling constraint it encodes. Validation never hard-fails: partially
specified instances are analyzable and all findings are data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from ppmkit import model
from ppmkit.model import (
    ContactKind,
    LawfulBasisType,
    ModelPath,
    PolicyInstance,
    RecipientArea,
    RightType,
    normalize_name,
)
from ppmkit.parser import SourceSpan


class Severity(enum.Enum):
    ERROR = "error"
    WARNING = "warning"
    INFO = "info"


_SEVERITY_LETTER = {"E": Severity.ERROR, "W": Severity.WARNING, "I": Severity.INFO}


@dataclass(frozen=True)
class Rule:
    id: str
    title: str
    rationale: str

    @property
    def severity(self) -> Severity:
        return _SEVERITY_LETTER[self.id.split("-")[1]]


@dataclass(frozen=True)
class Diagnostic:
    rule_id: str
    severity: Severity
    message: str
    path: ModelPath
    span: Optional[SourceSpan] = None

    def to_obj(self) -> dict:
        obj = {
            "rule": self.rule_id,
            "severity": self.severity.value,
            "message": self.message,
            "path": str(self.path),
        }
        obj["span"] = self.span.to_obj() if self.span else None
        return obj


@dataclass(frozen=True)
class ValidationReport:
    diagnostics: tuple[Diagnostic, ...]

    @property
    def counts(self) -> dict[str, int]:
        counts = {s.value: 0 for s in Severity}
        for diag in self.diagnostics:
            counts[diag.severity.value] += 1
        return counts

    @property
    def error_count(self) -> int:
        return self.counts["error"]

    def to_obj(self) -> dict:
        return {
            "diagnostics": [d.to_obj() for d in self.diagnostics],
            "counts": self.counts,
        }


# ---------------------------------------------------------------------------
# Rule registry
# ---------------------------------------------------------------------------

_CHECKERS: dict[str, Callable[[PolicyInstance], Iterable[tuple[ModelPath, str]]]] = {}
_RULES: list[Rule] = []


def _rule(rule_id: str, title: str, rationale: str):
    def register(fn):
        _RULES.append(Rule(rule_id, title, rationale))
        _CHECKERS[rule_id] = fn
        return fn

    return register


def rule_catalog() -> list[Rule]:
    """All registered rules, ordered by id."""
    return sorted(_RULES, key=lambda r: r.id)


class UnknownRuleError(LookupError):
    def __init__(self, rule_id: str):
        super().__init__(f"unknown rule id: {rule_id}")
        self.rule_id = rule_id


def run_rule(
    instance: PolicyInstance,
    rule_id: str,
    spans: Optional[dict[str, SourceSpan]] = None,
) -> list[Diagnostic]:
    if rule_id not in _CHECKERS:
        raise UnknownRuleError(rule_id)
    rule = next(r for r in _RULES if r.id == rule_id)
    diagnostics = [
        Diagnostic(
            rule_id=rule.id,
            severity=rule.severity,
            message=message,
            path=path,
            span=(spans or {}).get(str(path)),
        )
        for path, message in _CHECKERS[rule_id](instance)
    ]
    diagnostics.sort(key=lambda d: (d.path.sort_key(), d.rule_id))
    return diagnostics


def validate(
    instance: PolicyInstance,
    spans: Optional[dict[str, SourceSpan]] = None,
) -> ValidationReport:
    """Run every registered rule once; diagnostics come back in document
    order, then rule id. When a span map from parsing is supplied, findings
    carry the source location of the offending element."""
    diagnostics: list[Diagnostic] = []
    for rule in _RULES:
        diagnostics.extend(run_rule(instance, rule.id, spans))
    diagnostics.sort(key=lambda d: (d.path.sort_key(), d.rule_id))
    return ValidationReport(tuple(diagnostics))


# ---------------------------------------------------------------------------
# Structural rules
# ---------------------------------------------------------------------------


def _region_paths(instance: PolicyInstance):
    for ri, region in enumerate(instance.regions):
        yield ModelPath().child("regions", ri), region


def _processing_paths(instance: PolicyInstance):
    for pi, record in enumerate(instance.processings):
        yield ModelPath().child("processings", pi), record


def _purpose_paths(instance: PolicyInstance):
    for ppath, record in _processing_paths(instance):
        for ui, purpose in enumerate(record.purposes):
            yield ppath.child("purposes", ui), purpose


@_rule(
    "PPM-E-001",
    "region lacks a controller",
    "Every region needs at least one accountable controller (GDPR Art. 4 §7, "
    "Art. 13 §1.a).",
)
def _check_region_controller(instance):
    for path, region in _region_paths(instance):
        if not region.controllers:
            yield path, f"region {region.name!r} declares no controller"


@_rule(
    "PPM-E-002",
    "controller lacks contact data",
    "Controllers must be reachable via publicly accessible contact data "
    "(GDPR Art. 13 §1.a).",
)
def _check_controller_contacts(instance):
    for path, region in _region_paths(instance):
        for ci, controller in enumerate(region.controllers):
            if not controller.contacts:
                yield (
                    path.child("controllers", ci),
                    f"controller {controller.name!r} has no contact",
                )


@_rule(
    "PPM-E-003",
    "processing without a purpose",
    "Every data processing must state at least one purpose (GDPR Art. 13 §1.c).",
)
def _check_processing_purpose(instance):
    for path, record in _processing_paths(instance):
        if not record.purposes:
            yield path, f"processing {record.id!r} declares no purpose"


@_rule(
    "PPM-E-004",
    "purpose without a data reference",
    "A purpose must name the data entries or categories it covers.",
)
def _check_purpose_data(instance):
    for path, purpose in _purpose_paths(instance):
        if not purpose.data_refs:
            yield path, "purpose references no data entry or category"


@_rule(
    "PPM-E-005",
    "purpose without a lawful basis",
    "Each purpose needs a lawful basis for the processing (GDPR Art. 6 §1, "
    "Art. 13 §1.c).",
)
def _check_purpose_basis(instance):
    for path, purpose in _purpose_paths(instance):
        if purpose.lawful_basis is None:
            yield path, "purpose states no lawful basis"


@_rule(
    "PPM-E-006",
    "policy without a region",
    "A policy instance must describe at least one region of applicability.",
)
def _check_has_region(instance):
    if not instance.regions:
        yield ModelPath().child("regions", None), "policy declares no region"


@_rule(
    "PPM-E-007",
    "data protection officer lacks contact data",
    "A designated DPO must be reachable (GDPR Art. 13 §1.b, Art. 37 §7).",
)
def _check_dpo_contacts(instance):
    for path, region in _region_paths(instance):
        if region.dpo is not None and not region.dpo.contacts:
            yield path.child("dpo"), "data protection officer has no contact"


@_rule(
    "PPM-E-008",
    "right without contact data",
    "A right is only exercisable when a way to invoke it is given "
    "(GDPR Art. 12 §2).",
)
def _check_right_contacts(instance):
    for path, region in _region_paths(instance):
        for gi, right in enumerate(region.rights):
            if not right.contacts:
                yield path.child("rights", gi), "right has no contact"


@_rule(
    "PPM-E-009",
    "right of type `other` without a description",
    "The catch-all right type carries no meaning without a description.",
)
def _check_other_right(instance):
    for path, region in _region_paths(instance):
        for gi, right in enumerate(region.rights):
            if RightType.OTHER in right.types and not right.description:
                yield (
                    path.child("rights", gi),
                    "right of type `other` must carry a description",
                )


@_rule(
    "PPM-E-010",
    "dangling data reference",
    "Purposes and categories may only reference declared data entries and "
    "categories.",
)
def _check_dangling_refs(instance):
    for unresolved in model.resolve_references(instance):
        yield (
            unresolved.path,
            f"reference {unresolved.name!r} does not name a declared data "
            f"entry or category",
        )


@_rule(
    "PPM-E-011",
    "data category cycle",
    "Category decomposition must be acyclic; cycles make the entry closure "
    "ill-defined.",
)
def _check_category_cycle(instance):
    cycle = model.find_category_cycle(instance)
    if cycle is not None:
        names = {normalize_name(c.name): i for i, c in enumerate(instance.data_categories)}
        index = names[normalize_name(cycle[0])]
        rendered = " -> ".join(cycle + (cycle[0],))
        yield (
            ModelPath().child("data_categories", index),
            f"data categories form a cycle: {rendered}",
        )


@_rule(
    "PPM-E-012",
    "complaint right without a supervisory authority",
    "The right to lodge a complaint is exercised with a supervisory "
    "authority, which must be contactable (GDPR Art. 13 §2.d, Art. 77).",
)
def _check_complaint_authority(instance):
    for path, region in _region_paths(instance):
        for gi, right in enumerate(region.rights):
            if RightType.COMPLAINT not in right.types:
                continue
            if right.authority is None or not right.authority.contacts:
                yield (
                    path.child("rights", gi),
                    "complaint right lacks a contactable supervisory authority",
                )


@_rule(
    "PPM-E-013",
    "last change predates creation",
    "A policy cannot have been changed before it was created.",
)
def _check_date_order(instance):
    if (
        instance.date_of_creation is not None
        and instance.date_of_last_change is not None
        and instance.date_of_last_change < instance.date_of_creation
    ):
        yield (
            ModelPath().child("date_of_last_change"),
            f"date of last change {instance.date_of_last_change.isoformat()} is "
            f"before date of creation {instance.date_of_creation.isoformat()}",
        )


# ---------------------------------------------------------------------------
# Transmission and decision-making rules
# ---------------------------------------------------------------------------


def _legal_transmissions(instance: PolicyInstance):
    for path, record in _processing_paths(instance):
        detail = record.detail
        if isinstance(detail, model.TransmittingDetail) and detail.legal_transmission:
            yield path, record, detail


@_rule(
    "PPM-E-020",
    "legal transmission to another country without safeguards",
    "Transfers to countries without an adequacy decision require stated "
    "safeguards (GDPR Art. 13 §1.f, Art. 46 §1).",
)
def _check_transfer_safeguards(instance):
    for path, record, detail in _legal_transmissions(instance):
        for area in detail.recipient_areas:
            if area is RecipientArea.OTHER_COUNTRY and not detail.safeguards_for_regions:
                yield (
                    path,
                    f"transmission {record.id!r} reaches a country without an "
                    f"adequacy decision but states no safeguards",
                )


@_rule(
    "PPM-E-021",
    "legal transmission underspecified",
    "A transfer to another legal entity must state whether it is "
    "commissioned processing and name the recipient areas "
    "(GDPR Art. 13 §1.e-f, Art. 28).",
)
def _check_transfer_completeness(instance):
    for path, record, detail in _legal_transmissions(instance):
        missing = []
        if detail.commissioned is None:
            missing.append("the commissioned flag")
        if not detail.recipient_areas:
            missing.append("recipient areas")
        if missing:
            yield (
                path,
                f"legal transmission {record.id!r} is missing " + " and ".join(missing),
            )


@_rule(
    "PPM-E-022",
    "automated decision making without logic description",
    "Automated decision making requires meaningful information about the "
    "logic involved (GDPR Art. 13 §2.f, Art. 22).",
)
def _check_adm_logic(instance):
    for path, record in _processing_paths(instance):
        detail = record.detail
        if (
            isinstance(detail, model.FurtherProcessingDetail)
            and detail.automated_decision_making
            and not detail.adm_logic
        ):
            yield (
                path,
                f"processing {record.id!r} makes automated decisions but does "
                f"not describe the logic involved",
            )


@_rule(
    "PPM-E-023",
    "not-applicable lawful basis without explanation",
    "Opting out of the GDPR basis enumeration is only meaningful with an "
    "explanation of the applicable legal ground.",
)
def _check_na_basis(instance):
    for path, purpose in _purpose_paths(instance):
        basis = purpose.lawful_basis
        if (
            basis is not None
            and basis.type is LawfulBasisType.NOT_APPLICABLE
            and not basis.description
        ):
            yield path, "lawful basis `not-applicable` lacks a description"


# ---------------------------------------------------------------------------
# Warnings and informational findings
# ---------------------------------------------------------------------------


@_rule(
    "PPM-W-030",
    "consent-based purpose without revocation options",
    "Consent must be revocable and the options should be stated "
    "(GDPR Art. 7 §3); many policies omit this.",
)
def _check_consent_revocation(instance):
    for path, purpose in _purpose_paths(instance):
        basis = purpose.lawful_basis
        if (
            basis is not None
            and basis.type is LawfulBasisType.CONSENT
            and not purpose.revocation
        ):
            yield path, "consent-based purpose states no revocation options"


@_rule(
    "PPM-W-031",
    "minimum user age below 13",
    "13 is the lowest parental-consent age threshold in major "
    "jurisdictions (COPPA; GDPR Art. 8 allows 13-16).",
)
def _check_minimum_age(instance):
    if instance.minimum_user_age < 13:
        yield (
            ModelPath().child("minimum_user_age"),
            f"minimum user age {instance.minimum_user_age} is below 13",
        )


@_rule(
    "PPM-W-032",
    "duplicate data entry names",
    "Entry names must be unique under normalization for references and "
    "comparisons to be deterministic.",
)
def _check_duplicate_entries(instance):
    seen: dict[str, int] = {}
    for ei, entry in enumerate(instance.data_entries):
        key = normalize_name(entry.name)
        if key in seen:
            yield (
                ModelPath().child("data_entries", ei),
                f"data entry {entry.name!r} duplicates entry "
                f"{instance.data_entries[seen[key]].name!r}",
            )
        else:
            seen[key] = ei


@_rule(
    "PPM-W-033",
    "duplicate data category names",
    "Category names must be unique under normalization for references and "
    "comparisons to be deterministic.",
)
def _check_duplicate_categories(instance):
    seen: dict[str, int] = {}
    for ci, category in enumerate(instance.data_categories):
        key = normalize_name(category.name)
        if key in seen:
            yield (
                ModelPath().child("data_categories", ci),
                f"data category {category.name!r} duplicates category "
                f"{instance.data_categories[seen[key]].name!r}",
            )
        else:
            seen[key] = ci


@_rule(
    "PPM-W-034",
    "implausible email contact",
    "An email contact should contain exactly one `@`.",
)
def _check_email_contacts(instance):
    for path, contact in model.iter_contacts(instance):
        if contact.kind is ContactKind.EMAIL and contact.value.count("@") != 1:
            yield path, f"email contact {contact.value!r} is not a plausible address"


@_rule(
    "PPM-I-040",
    "storing record without data protection description",
    "Policies often omit how stored data is protected; stating it helps "
    "users judge data security.",
)
def _check_storage_protection(instance):
    for path, record in _processing_paths(instance):
        detail = record.detail
        if isinstance(detail, model.StoringDetail) and not detail.data_protection:
            yield (
                path,
                f"storing record {record.id!r} gives no data protection information",
            )
