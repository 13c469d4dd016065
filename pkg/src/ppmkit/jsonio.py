"""JSON projection of policy instances and analysis reports.

Key order is fixed (insertion order of the dicts built here), enum values are
their canonical text names, and `dumps` is the single serialization used by
the HTTP service and the CLI so their payloads are byte-identical.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass
from typing import Any, Optional, Union

from ppmkit import model
from ppmkit.model import (
    ActorKind,
    Contact,
    ContactKind,
    Controller,
    DataCategory,
    DataEntry,
    DataProtectionOfficer,
    DurationUnit,
    FormOfAgreement,
    FurtherKind,
    FurtherKindName,
    LawfulBasis,
    LawfulBasisType,
    LocationKind,
    PolicyInstance,
    ProcessingRecord,
    Purpose,
    RecipientArea,
    RecipientKind,
    RecipientType,
    Region,
    Representative,
    Right,
    RightType,
    StorageDuration,
    StorageDurationKind,
    SupervisoryAuthority,
    Timing,
    normalize_name,
)


def dumps(obj: Any) -> str:
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


@dataclass(frozen=True)
class JsonDiagnostic:
    """A schema violation found while reading a JSON instance."""

    pointer: str
    message: str
    code: str = "PPM-J-001"

    def to_obj(self) -> dict:
        return {"code": self.code, "message": self.message, "pointer": self.pointer}


class JsonSchemaError(ValueError):
    def __init__(self, diagnostics: list[JsonDiagnostic]):
        super().__init__("; ".join(f"{d.pointer}: {d.message}" for d in diagnostics))
        self.diagnostics = diagnostics


# ---------------------------------------------------------------------------
# instance -> JSON object
# ---------------------------------------------------------------------------


def _opt(value):
    return value


def _contact_obj(contact: Contact) -> dict:
    return {"kind": contact.kind.value, "value": contact.value}


def _contacts(contacts) -> list:
    return [_contact_obj(c) for c in contacts]


def _sorted_enum_values(values) -> list[str]:
    order = {v: i for i, v in enumerate(type(next(iter(values))))} if values else {}
    return [v.value for v in sorted(values, key=lambda v: order[v])]


def instance_to_obj(instance: PolicyInstance) -> dict:
    return {
        "name": instance.name,
        "vendor_name": instance.vendor_name,
        "url_to_original": instance.url_to_original,
        "full_text": instance.full_text,
        "effective_date": instance.effective_date.isoformat(),
        "date_of_last_change": _date_or_none(instance.date_of_last_change),
        "date_of_creation": _date_or_none(instance.date_of_creation),
        "version_label": instance.version_label,
        "minimum_user_age": instance.minimum_user_age,
        "update_policies": instance.update_policies,
        "regions": [_region_obj(r) for r in instance.regions],
        "data_entries": [{"name": e.name} for e in instance.data_entries],
        "data_categories": [_category_obj(c) for c in instance.data_categories],
        "processings": [_processing_obj(p) for p in instance.processings],
    }


def _date_or_none(value: Optional[datetime.date]) -> Optional[str]:
    return value.isoformat() if value is not None else None


def _region_obj(region: Region) -> dict:
    return {
        "name": region.name,
        "controllers": [
            {
                "name": c.name,
                "location": c.location,
                "contacts": _contacts(c.contacts),
                "representative": (
                    {
                        "name": c.representative.name,
                        "contacts": _contacts(c.representative.contacts),
                    }
                    if c.representative
                    else None
                ),
            }
            for c in region.controllers
        ],
        "dpo": (
            {"name": region.dpo.name, "contacts": _contacts(region.dpo.contacts)}
            if region.dpo
            else None
        ),
        "rights": [
            {
                "types": _sorted_enum_values(r.types),
                "contacts": _contacts(r.contacts),
                "description": r.description,
                "law": r.law,
                "authority": (
                    {"name": r.authority.name, "contacts": _contacts(r.authority.contacts)}
                    if r.authority
                    else None
                ),
            }
            for r in region.rights
        ],
    }


def _category_obj(category: DataCategory) -> dict:
    return {
        "name": category.name,
        "member_entries": sorted(category.member_entries, key=normalize_name),
        "sub_categories": sorted(category.sub_categories, key=normalize_name),
    }


def _detail_obj(detail) -> dict:
    if isinstance(detail, model.CollectingDetail):
        return {"collection_controller": detail.collection_controller}
    if isinstance(detail, model.StoringDetail):
        duration: dict[str, Any] = {"kind": detail.duration.kind.value}
        if detail.duration.kind is StorageDurationKind.FIXED_PERIOD:
            duration["length"] = detail.duration.length
            duration["unit"] = detail.duration.unit.value
        else:
            duration["event"] = detail.duration.event
        return {
            "duration": duration,
            "data_protection": detail.data_protection,
            "storage_locations": sorted(detail.storage_locations),
        }
    if isinstance(detail, model.TransmittingDetail):
        recipient: dict[str, Any] = {"kind": detail.recipient_type.kind.value}
        if detail.recipient_type.other_text is not None:
            recipient["text"] = detail.recipient_type.other_text
        return {
            "recipient_actor": detail.recipient_actor.value if detail.recipient_actor else None,
            "recipient_type": recipient,
            "recipient_locations": _sorted_enum_values(detail.recipient_locations),
            "timing": detail.timing.value,
            "protection_measures": detail.protection_measures,
            "legal_transmission": detail.legal_transmission,
            "commissioned": detail.commissioned,
            "recipient_areas": _sorted_enum_values(detail.recipient_areas),
            "safeguards_for_regions": detail.safeguards_for_regions,
        }
    if isinstance(detail, model.DeletingDetail):
        return {}
    kinds = sorted(
        detail.kinds,
        key=lambda k: (list(FurtherKindName).index(k.name), k.other_text or ""),
    )
    return {
        "kinds": [
            {"kind": k.name.value, "text": k.other_text} if k.other_text is not None
            else {"kind": k.name.value}
            for k in kinds
        ],
        "timing": detail.timing.value,
        "automated_decision_making": detail.automated_decision_making,
        "adm_logic": detail.adm_logic,
    }


def _processing_obj(record: ProcessingRecord) -> dict:
    return {
        "id": record.id,
        "kind": record.kind,
        "scenario": record.scenario,
        "description": record.description,
        "actor": record.actor.value,
        "locations": _sorted_enum_values(record.locations),
        "purposes": [_purpose_obj(p) for p in record.purposes],
        "detail": _detail_obj(record.detail),
    }


def _purpose_obj(purpose: Purpose) -> dict:
    return {
        "description": purpose.description,
        "agreement": purpose.agreement.value,
        "revocation": purpose.revocation,
        "lawful_basis": (
            {
                "type": purpose.lawful_basis.type.value,
                "description": purpose.lawful_basis.description,
            }
            if purpose.lawful_basis
            else None
        ),
        "data_refs": sorted(purpose.data_refs, key=normalize_name),
    }


def to_json(instance: PolicyInstance) -> str:
    return dumps(instance_to_obj(instance))


# ---------------------------------------------------------------------------
# JSON object -> instance, with pointer-addressed schema diagnostics
# ---------------------------------------------------------------------------


class _Reader:
    """Walks a decoded JSON value, collecting schema violations with
    JSON-pointer paths instead of raising on the first problem."""

    def __init__(self) -> None:
        self.diagnostics: list[JsonDiagnostic] = []

    def fail(self, pointer: str, message: str) -> None:
        self.diagnostics.append(JsonDiagnostic(pointer, message))

    def obj(self, value, pointer: str) -> Optional[dict]:
        if isinstance(value, dict):
            return value
        self.fail(pointer, "expected an object")
        return None

    def str_(self, value, pointer: str, optional: bool = False) -> Optional[str]:
        if value is None and optional:
            return None
        if isinstance(value, str):
            return value
        self.fail(pointer, "expected a string")
        return None

    def int_(self, value, pointer: str) -> Optional[int]:
        if isinstance(value, int) and not isinstance(value, bool):
            return value
        self.fail(pointer, "expected an integer")
        return None

    def bool_(self, value, pointer: str, optional: bool = False) -> Optional[bool]:
        if value is None and optional:
            return None
        if isinstance(value, bool):
            return value
        self.fail(pointer, "expected a boolean")
        return None

    def list_(self, value, pointer: str, optional: bool = False) -> list:
        if value is None and optional:
            return []
        if isinstance(value, list):
            return value
        self.fail(pointer, "expected an array")
        return []

    def date(self, value, pointer: str, optional: bool = False) -> Optional[datetime.date]:
        if value is None and optional:
            return None
        if isinstance(value, str):
            try:
                return datetime.date.fromisoformat(value)
            except ValueError:
                pass
        self.fail(pointer, "expected an ISO-8601 calendar date")
        return None

    def enum(self, enum_cls, value, pointer: str, optional: bool = False):
        if value is None and optional:
            return None
        if isinstance(value, str):
            try:
                return enum_cls(value)
            except ValueError:
                pass
        allowed = ", ".join(v.value for v in enum_cls)
        self.fail(pointer, f"expected one of: {allowed}")
        return None

    # -- structures -------------------------------------------------------

    def contact(self, value, pointer: str) -> Optional[Contact]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        kind = self.enum(ContactKind, obj.get("kind"), f"{pointer}/kind")
        text = self.str_(obj.get("value"), f"{pointer}/value")
        if kind is None or text is None:
            return None
        return Contact(kind, text)

    def contacts(self, value, pointer: str) -> tuple[Contact, ...]:
        result = []
        for i, item in enumerate(self.list_(value, pointer, optional=True)):
            contact = self.contact(item, f"{pointer}/{i}")
            if contact is not None:
                result.append(contact)
        return tuple(result)

    def region(self, value, pointer: str) -> Optional[Region]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        name = self.str_(obj.get("name"), f"{pointer}/name")
        controllers = []
        for i, item in enumerate(self.list_(obj.get("controllers"), f"{pointer}/controllers", optional=True)):
            controller = self.controller(item, f"{pointer}/controllers/{i}")
            if controller is not None:
                controllers.append(controller)
        dpo = None
        if obj.get("dpo") is not None:
            dobj = self.obj(obj["dpo"], f"{pointer}/dpo")
            if dobj is not None:
                dpo = DataProtectionOfficer(
                    contacts=self.contacts(dobj.get("contacts"), f"{pointer}/dpo/contacts"),
                    name=self.str_(dobj.get("name"), f"{pointer}/dpo/name", optional=True),
                )
        rights = []
        for i, item in enumerate(self.list_(obj.get("rights"), f"{pointer}/rights", optional=True)):
            right = self.right(item, f"{pointer}/rights/{i}")
            if right is not None:
                rights.append(right)
        if name is None:
            return None
        return Region(name=name, controllers=tuple(controllers), dpo=dpo, rights=tuple(rights))

    def controller(self, value, pointer: str) -> Optional[Controller]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        name = self.str_(obj.get("name"), f"{pointer}/name")
        location = self.str_(obj.get("location"), f"{pointer}/location", optional=True)
        contacts = self.contacts(obj.get("contacts"), f"{pointer}/contacts")
        representative = None
        if obj.get("representative") is not None:
            robj = self.obj(obj["representative"], f"{pointer}/representative")
            if robj is not None:
                rep_name = self.str_(robj.get("name"), f"{pointer}/representative/name")
                rep_contacts = self.contacts(
                    robj.get("contacts"), f"{pointer}/representative/contacts"
                )
                if rep_name is not None:
                    representative = Representative(rep_name, rep_contacts)
        if name is None:
            return None
        return Controller(name=name, contacts=contacts, location=location, representative=representative)

    def right(self, value, pointer: str) -> Optional[Right]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        types = []
        for i, item in enumerate(self.list_(obj.get("types"), f"{pointer}/types", optional=True)):
            rtype = self.enum(RightType, item, f"{pointer}/types/{i}")
            if rtype is not None:
                types.append(rtype)
        contacts = self.contacts(obj.get("contacts"), f"{pointer}/contacts")
        authority = None
        if obj.get("authority") is not None:
            aobj = self.obj(obj["authority"], f"{pointer}/authority")
            if aobj is not None:
                auth_name = self.str_(aobj.get("name"), f"{pointer}/authority/name")
                auth_contacts = self.contacts(aobj.get("contacts"), f"{pointer}/authority/contacts")
                if auth_name is not None:
                    authority = SupervisoryAuthority(auth_name, auth_contacts)
        return Right(
            types=frozenset(types),
            contacts=contacts,
            description=self.str_(obj.get("description"), f"{pointer}/description", optional=True),
            law=self.str_(obj.get("law"), f"{pointer}/law", optional=True),
            authority=authority,
        )

    def purpose(self, value, pointer: str) -> Optional[Purpose]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        description = self.str_(obj.get("description"), f"{pointer}/description")
        agreement = self.enum(FormOfAgreement, obj.get("agreement"), f"{pointer}/agreement")
        refs = []
        for i, item in enumerate(self.list_(obj.get("data_refs"), f"{pointer}/data_refs", optional=True)):
            ref = self.str_(item, f"{pointer}/data_refs/{i}")
            if ref is not None:
                refs.append(ref)
        basis = None
        if obj.get("lawful_basis") is not None:
            bobj = self.obj(obj["lawful_basis"], f"{pointer}/lawful_basis")
            if bobj is not None:
                btype = self.enum(LawfulBasisType, bobj.get("type"), f"{pointer}/lawful_basis/type")
                btext = self.str_(
                    bobj.get("description"), f"{pointer}/lawful_basis/description", optional=True
                )
                if btype is not None:
                    basis = LawfulBasis(btype, btext)
        if description is None or agreement is None:
            return None
        return Purpose(
            description=description,
            agreement=agreement,
            data_refs=frozenset(refs),
            lawful_basis=basis,
            revocation=self.str_(obj.get("revocation"), f"{pointer}/revocation", optional=True),
        )

    def detail(self, kind: str, value, pointer: str):
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        if kind == "collect":
            return model.CollectingDetail(
                self.str_(obj.get("collection_controller"), f"{pointer}/collection_controller", optional=True)
            )
        if kind == "store":
            dobj = self.obj(obj.get("duration"), f"{pointer}/duration")
            duration = None
            if dobj is not None:
                dkind = self.enum(StorageDurationKind, dobj.get("kind"), f"{pointer}/duration/kind")
                if dkind is StorageDurationKind.FIXED_PERIOD:
                    length = self.int_(dobj.get("length"), f"{pointer}/duration/length")
                    unit = self.enum(DurationUnit, dobj.get("unit"), f"{pointer}/duration/unit")
                    if length is not None and length <= 0:
                        self.fail(f"{pointer}/duration/length", "must be positive")
                        length = None
                    if length is not None and unit is not None:
                        duration = StorageDuration(dkind, length=length, unit=unit)
                elif dkind is StorageDurationKind.UNTIL_EVENT:
                    event = self.str_(dobj.get("event"), f"{pointer}/duration/event")
                    if event is not None:
                        duration = StorageDuration(dkind, event=event)
            if duration is None:
                return None
            locations = []
            for i, item in enumerate(
                self.list_(obj.get("storage_locations"), f"{pointer}/storage_locations", optional=True)
            ):
                code = self.str_(item, f"{pointer}/storage_locations/{i}")
                if code is not None:
                    if len(code) == 2 and code.isalpha() and code.isupper():
                        locations.append(code)
                    else:
                        self.fail(
                            f"{pointer}/storage_locations/{i}",
                            "expected an ISO 3166-1 alpha-2 country code",
                        )
            return model.StoringDetail(
                duration=duration,
                data_protection=self.str_(obj.get("data_protection"), f"{pointer}/data_protection", optional=True),
                storage_locations=frozenset(locations),
            )
        if kind == "transmit":
            robj = self.obj(obj.get("recipient_type"), f"{pointer}/recipient_type")
            recipient = None
            if robj is not None:
                rkind = self.enum(RecipientKind, robj.get("kind"), f"{pointer}/recipient_type/kind")
                rtext = self.str_(robj.get("text"), f"{pointer}/recipient_type/text", optional=True)
                if rkind is not None:
                    recipient = RecipientType(rkind, rtext)
            timing = self.enum(Timing, obj.get("timing"), f"{pointer}/timing")
            legal = self.bool_(obj.get("legal_transmission"), f"{pointer}/legal_transmission")
            if recipient is None or timing is None or legal is None:
                return None
            rec_locations = []
            for i, item in enumerate(
                self.list_(obj.get("recipient_locations"), f"{pointer}/recipient_locations", optional=True)
            ):
                loc = self.enum(LocationKind, item, f"{pointer}/recipient_locations/{i}")
                if loc is not None:
                    rec_locations.append(loc)
            areas = []
            for i, item in enumerate(
                self.list_(obj.get("recipient_areas"), f"{pointer}/recipient_areas", optional=True)
            ):
                area = self.enum(RecipientArea, item, f"{pointer}/recipient_areas/{i}")
                if area is not None:
                    areas.append(area)
            return model.TransmittingDetail(
                recipient_type=recipient,
                timing=timing,
                legal_transmission=legal,
                recipient_actor=self.enum(
                    ActorKind, obj.get("recipient_actor"), f"{pointer}/recipient_actor", optional=True
                ),
                recipient_locations=frozenset(rec_locations),
                protection_measures=self.str_(
                    obj.get("protection_measures"), f"{pointer}/protection_measures", optional=True
                ),
                commissioned=self.bool_(obj.get("commissioned"), f"{pointer}/commissioned", optional=True),
                recipient_areas=frozenset(areas),
                safeguards_for_regions=self.str_(
                    obj.get("safeguards_for_regions"), f"{pointer}/safeguards_for_regions", optional=True
                ),
            )
        if kind == "delete":
            return model.DeletingDetail()
        if kind == "further":
            kinds = []
            for i, item in enumerate(self.list_(obj.get("kinds"), f"{pointer}/kinds", optional=True)):
                kobj = self.obj(item, f"{pointer}/kinds/{i}")
                if kobj is None:
                    continue
                kname = self.enum(FurtherKindName, kobj.get("kind"), f"{pointer}/kinds/{i}/kind")
                ktext = self.str_(kobj.get("text"), f"{pointer}/kinds/{i}/text", optional=True)
                if kname is not None:
                    kinds.append(FurtherKind(kname, ktext))
            timing = self.enum(Timing, obj.get("timing"), f"{pointer}/timing")
            adm = self.bool_(obj.get("automated_decision_making"), f"{pointer}/automated_decision_making")
            if timing is None or adm is None:
                return None
            return model.FurtherProcessingDetail(
                kinds=frozenset(kinds),
                timing=timing,
                automated_decision_making=adm,
                adm_logic=self.str_(obj.get("adm_logic"), f"{pointer}/adm_logic", optional=True),
            )
        self.fail(f"{pointer}", f"unknown processing kind {kind!r}")
        return None

    def processing(self, value, pointer: str, ordinal: dict) -> Optional[ProcessingRecord]:
        obj = self.obj(value, pointer)
        if obj is None:
            return None
        kind = self.str_(obj.get("kind"), f"{pointer}/kind")
        if kind is not None and kind not in model.PROCESSING_KINDS:
            self.fail(f"{pointer}/kind", "expected one of: collect, store, transmit, delete, further")
            kind = None
        scenario = self.str_(obj.get("scenario"), f"{pointer}/scenario")
        actor = self.enum(ActorKind, obj.get("actor"), f"{pointer}/actor")
        locations = []
        for i, item in enumerate(self.list_(obj.get("locations"), f"{pointer}/locations", optional=True)):
            loc = self.enum(LocationKind, item, f"{pointer}/locations/{i}")
            if loc is not None:
                locations.append(loc)
        purposes = []
        for i, item in enumerate(self.list_(obj.get("purposes"), f"{pointer}/purposes", optional=True)):
            purpose = self.purpose(item, f"{pointer}/purposes/{i}")
            if purpose is not None:
                purposes.append(purpose)
        if kind is None or scenario is None or actor is None:
            return None
        detail = self.detail(kind, obj.get("detail", {}), f"{pointer}/detail")
        if detail is None:
            return None
        ordinal[kind] = ordinal.get(kind, 0) + 1
        record_id = obj.get("id")
        if record_id is None:
            record_id = f"{kind}-{ordinal[kind]}"
        elif not isinstance(record_id, str):
            self.fail(f"{pointer}/id", "expected a string")
            return None
        return ProcessingRecord(
            id=record_id,
            scenario=scenario,
            actor=actor,
            locations=frozenset(locations),
            purposes=tuple(purposes),
            detail=detail,
            description=self.str_(obj.get("description"), f"{pointer}/description", optional=True),
        )


def obj_to_instance(data: Any) -> Union[PolicyInstance, list[JsonDiagnostic]]:
    reader = _Reader()
    obj = reader.obj(data, "")
    if obj is None:
        return reader.diagnostics
    name = reader.str_(obj.get("name"), "/name")
    vendor = reader.str_(obj.get("vendor_name"), "/vendor_name")
    url = reader.str_(obj.get("url_to_original"), "/url_to_original")
    effective = reader.date(obj.get("effective_date"), "/effective_date")
    version = reader.str_(obj.get("version_label"), "/version_label")
    min_age = reader.int_(obj.get("minimum_user_age"), "/minimum_user_age")
    if min_age is not None and min_age < 0:
        reader.fail("/minimum_user_age", "must be >= 0")
        min_age = None

    regions = []
    for i, item in enumerate(reader.list_(obj.get("regions"), "/regions", optional=True)):
        region = reader.region(item, f"/regions/{i}")
        if region is not None:
            regions.append(region)
    entries = []
    for i, item in enumerate(reader.list_(obj.get("data_entries"), "/data_entries", optional=True)):
        eobj = reader.obj(item, f"/data_entries/{i}")
        if eobj is None:
            continue
        entry_name = reader.str_(eobj.get("name"), f"/data_entries/{i}/name")
        if entry_name is not None:
            entries.append(DataEntry(entry_name))
    categories = []
    for i, item in enumerate(reader.list_(obj.get("data_categories"), "/data_categories", optional=True)):
        cobj = reader.obj(item, f"/data_categories/{i}")
        if cobj is None:
            continue
        cat_name = reader.str_(cobj.get("name"), f"/data_categories/{i}/name")
        members = [
            m
            for j, m in enumerate(
                reader.list_(cobj.get("member_entries"), f"/data_categories/{i}/member_entries", optional=True)
            )
            if reader.str_(m, f"/data_categories/{i}/member_entries/{j}") is not None
        ]
        subs = [
            s
            for j, s in enumerate(
                reader.list_(cobj.get("sub_categories"), f"/data_categories/{i}/sub_categories", optional=True)
            )
            if reader.str_(s, f"/data_categories/{i}/sub_categories/{j}") is not None
        ]
        if cat_name is not None:
            categories.append(
                DataCategory(name=cat_name, member_entries=frozenset(members), sub_categories=frozenset(subs))
            )
    processings = []
    ordinal: dict[str, int] = {}
    for i, item in enumerate(reader.list_(obj.get("processings"), "/processings", optional=True)):
        record = reader.processing(item, f"/processings/{i}", ordinal)
        if record is not None:
            processings.append(record)

    if reader.diagnostics:
        return reader.diagnostics
    return PolicyInstance(
        name=name,
        vendor_name=vendor,
        url_to_original=url,
        effective_date=effective,
        version_label=version,
        minimum_user_age=min_age,
        regions=tuple(regions),
        full_text=reader.str_(obj.get("full_text"), "/full_text", optional=True),
        date_of_last_change=reader.date(obj.get("date_of_last_change"), "/date_of_last_change", optional=True),
        date_of_creation=reader.date(obj.get("date_of_creation"), "/date_of_creation", optional=True),
        update_policies=reader.str_(obj.get("update_policies"), "/update_policies", optional=True),
        data_entries=tuple(entries),
        data_categories=tuple(categories),
        processings=tuple(processings),
    )


def from_json(text: str) -> Union[PolicyInstance, list[JsonDiagnostic]]:
    """Read a JSON policy instance; returns the instance or a list of
    pointer-addressed schema diagnostics."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        return [JsonDiagnostic("", f"invalid JSON: {exc.msg} at line {exc.lineno}")]
    return obj_to_instance(data)
