"""Canonical printer for policy instances.

Output is fully deterministic: fixed block order (metadata, regions, data
entries, data categories, processings), two-space indentation, attributes in
the grammar's declared order, sets in canonical order, LF line endings.
``parse(print_canonical(x))`` reproduces ``x`` and a second print is
byte-identical.
"""

from __future__ import annotations

from ppmkit import model
from ppmkit.model import (
    DataCategory,
    FurtherKind,
    PolicyInstance,
    ProcessingRecord,
    Purpose,
    RecipientKind,
    Region,
    StorageDurationKind,
    normalize_name,
    resolve_references,
)


class UnresolvedInstanceError(ValueError):
    """The instance has dangling references and cannot be printed faithfully."""

    def __init__(self, path: model.ModelPath, name: str):
        super().__init__(f"unresolved reference {name!r} at {path}")
        self.path = path
        self.name = name


def _quote(text: str) -> str:
    escaped = (
        text.replace("\\", "\\\\")
        .replace('"', '\\"')
        .replace("\n", "\\n")
        .replace("\t", "\\t")
    )
    return f'"{escaped}"'


def _enum_order(value) -> int:
    return list(type(value)).index(value)


def _sorted_enums(values) -> list:
    return sorted(values, key=_enum_order)


class _Writer:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.depth = 0

    def line(self, text: str) -> None:
        self.lines.append("  " * self.depth + text)

    def attr(self, key: str, rendered: str) -> None:
        self.line(f"{key}: {rendered}")

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


def print_canonical(instance: PolicyInstance) -> str:
    unresolved = resolve_references(instance)
    if unresolved:
        first = unresolved[0]
        raise UnresolvedInstanceError(first.path, first.name)

    w = _Writer()
    w.line(f"policy {_quote(instance.name)} {{")
    w.depth += 1

    w.attr("vendor", _quote(instance.vendor_name))
    w.attr("url", _quote(instance.url_to_original))
    w.attr("effective", instance.effective_date.isoformat())
    if instance.date_of_last_change is not None:
        w.attr("last-change", instance.date_of_last_change.isoformat())
    if instance.date_of_creation is not None:
        w.attr("created", instance.date_of_creation.isoformat())
    w.attr("version", _quote(instance.version_label))
    w.attr("min-age", str(instance.minimum_user_age))
    if instance.update_policies is not None:
        w.attr("update-policy", _quote(instance.update_policies))
    if instance.full_text is not None:
        w.attr("full-text", _quote(instance.full_text))

    for region in instance.regions:
        _print_region(w, region)

    containing = _membership_index(instance)
    for entry in instance.data_entries:
        _print_named_decl(w, "data-entry", entry.name, containing.get(normalize_name(entry.name), []))
    parents = _parent_index(instance)
    for category in instance.data_categories:
        _print_named_decl(
            w, "data-category", category.name, parents.get(normalize_name(category.name), [])
        )

    for record in instance.processings:
        _print_processing(w, record)

    w.depth -= 1
    w.line("}")
    return w.text()


def _membership_index(instance: PolicyInstance) -> dict[str, list[str]]:
    """entry name (normalized) -> declared names of categories containing it."""
    index: dict[str, list[str]] = {}
    for category in instance.data_categories:
        for member in category.member_entries:
            index.setdefault(normalize_name(member), []).append(category.name)
    for names in index.values():
        names.sort(key=normalize_name)
    return index


def _parent_index(instance: PolicyInstance) -> dict[str, list[str]]:
    """category name (normalized) -> declared names of its parent categories."""
    index: dict[str, list[str]] = {}
    for category in instance.data_categories:
        for sub in category.sub_categories:
            index.setdefault(normalize_name(sub), []).append(category.name)
    for names in index.values():
        names.sort(key=normalize_name)
    return index


def _print_named_decl(w: _Writer, keyword: str, name: str, owners: list[str]) -> None:
    suffix = ""
    if owners:
        suffix = " in [" + ", ".join(_quote(o) for o in owners) + "]"
    w.line(f"{keyword} {_quote(name)}{suffix}")


def _print_contact(w: _Writer, contact: model.Contact) -> None:
    w.line(f"contact {contact.kind.value} {_quote(contact.value)}")


def _print_region(w: _Writer, region: Region) -> None:
    w.line(f"region {_quote(region.name)} {{")
    w.depth += 1
    for controller in region.controllers:
        w.line(f"controller {_quote(controller.name)} {{")
        w.depth += 1
        if controller.location is not None:
            w.attr("location", _quote(controller.location))
        for contact in controller.contacts:
            _print_contact(w, contact)
        if controller.representative is not None:
            w.line(f"representative {_quote(controller.representative.name)} {{")
            w.depth += 1
            for contact in controller.representative.contacts:
                _print_contact(w, contact)
            w.depth -= 1
            w.line("}")
        w.depth -= 1
        w.line("}")
    if region.dpo is not None:
        w.line("dpo {")
        w.depth += 1
        if region.dpo.name is not None:
            w.attr("name", _quote(region.dpo.name))
        for contact in region.dpo.contacts:
            _print_contact(w, contact)
        w.depth -= 1
        w.line("}")
    for right in region.rights:
        types = ", ".join(t.value for t in _sorted_enums(right.types))
        w.line(f"right [{types}] {{")
        w.depth += 1
        for contact in right.contacts:
            _print_contact(w, contact)
        if right.description is not None:
            w.attr("description", _quote(right.description))
        if right.law is not None:
            w.attr("law", _quote(right.law))
        if right.authority is not None:
            w.line(f"authority {_quote(right.authority.name)} {{")
            w.depth += 1
            for contact in right.authority.contacts:
                _print_contact(w, contact)
            w.depth -= 1
            w.line("}")
        w.depth -= 1
        w.line("}")
    w.depth -= 1
    w.line("}")


def _render_further_kind(kind: FurtherKind) -> str:
    if kind.other_text is not None:
        return f"other {_quote(kind.other_text)}"
    return kind.name.value


def _print_processing(w: _Writer, record: ProcessingRecord) -> None:
    w.line(f"processing {record.kind} {_quote(record.id)} {{")
    w.depth += 1
    w.attr("scenario", _quote(record.scenario))
    if record.description is not None:
        w.attr("description", _quote(record.description))
    w.attr("actor", record.actor.value)
    locations = ", ".join(l.value for l in _sorted_enums(record.locations))
    w.attr("location", f"[{locations}]")

    detail = record.detail
    if isinstance(detail, model.CollectingDetail):
        if detail.collection_controller is not None:
            w.attr("collection-controller", _quote(detail.collection_controller))
    elif isinstance(detail, model.StoringDetail):
        duration = detail.duration
        if duration.kind is StorageDurationKind.FIXED_PERIOD:
            w.attr("duration", f"fixed {duration.length} {duration.unit.value}")
        else:
            w.attr("duration", f"until-event {_quote(duration.event)}")
        if detail.data_protection is not None:
            w.attr("protection", _quote(detail.data_protection))
        if detail.storage_locations:
            w.attr("storage-location", "[" + ", ".join(sorted(detail.storage_locations)) + "]")
    elif isinstance(detail, model.TransmittingDetail):
        if detail.recipient_actor is not None:
            w.attr("recipient-actor", detail.recipient_actor.value)
        if detail.recipient_type.kind is RecipientKind.OTHER:
            w.attr("recipient-type", f"other {_quote(detail.recipient_type.other_text)}")
        else:
            w.attr("recipient-type", detail.recipient_type.kind.value)
        if detail.recipient_locations:
            rendered = ", ".join(l.value for l in _sorted_enums(detail.recipient_locations))
            w.attr("recipient-location", f"[{rendered}]")
        w.attr("timing", detail.timing.value)
        if detail.protection_measures is not None:
            w.attr("protection", _quote(detail.protection_measures))
        w.attr("legal", "true" if detail.legal_transmission else "false")
        if detail.commissioned is not None:
            w.attr("commissioned", "true" if detail.commissioned else "false")
        if detail.recipient_areas:
            rendered = ", ".join(a.value for a in _sorted_enums(detail.recipient_areas))
            w.attr("recipient-area", f"[{rendered}]")
        if detail.safeguards_for_regions is not None:
            w.attr("safeguards", _quote(detail.safeguards_for_regions))
    elif isinstance(detail, model.FurtherProcessingDetail):
        kinds = sorted(
            detail.kinds, key=lambda k: (_enum_order(k.name), k.other_text or "")
        )
        w.attr("kind", "[" + ", ".join(_render_further_kind(k) for k in kinds) + "]")
        w.attr("timing", detail.timing.value)
        w.attr("automated-decision", "true" if detail.automated_decision_making else "false")
        if detail.adm_logic is not None:
            w.attr("adm-logic", _quote(detail.adm_logic))

    for purpose in record.purposes:
        _print_purpose(w, purpose)
    w.depth -= 1
    w.line("}")


def _print_purpose(w: _Writer, purpose: Purpose) -> None:
    w.line("purpose {")
    w.depth += 1
    w.attr("description", _quote(purpose.description))
    w.attr("agreement", purpose.agreement.value)
    if purpose.revocation is not None:
        w.attr("revocation", _quote(purpose.revocation))
    if purpose.lawful_basis is not None:
        rendered = purpose.lawful_basis.type.value
        if purpose.lawful_basis.description is not None:
            rendered += f" {_quote(purpose.lawful_basis.description)}"
        w.attr("basis", rendered)
    refs = sorted(purpose.data_refs, key=normalize_name)
    w.attr("data", "[" + ", ".join(_quote(r) for r in refs) + "]")
    w.depth -= 1
    w.line("}")
