"""Shared fixtures and random instance generation.

`make_instance` builds fully resolved instances from a seeded `random.Random`
so round-trip and equivalence properties can run over many structurally
diverse documents deterministically.
"""

from __future__ import annotations

import datetime
import random
from typing import Optional

import pytest

from ppmkit import model, parser
from ppmkit.fixtures import fixture_text
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
    StoringDetail,
    SupervisoryAuthority,
    Timing,
)

_WORDS = (
    "heart", "rate", "sleep", "steps", "profile", "account", "position",
    "support", "billing", "device", "sensor", "weight", "route", "contact",
    "usage", "calendar", "voice", "photo", "token", "session",
)

_COUNTRIES = ("US", "GB", "AU", "JP", "CH", "BR", "IN", "CA")


def _name(rng: random.Random, used: set[str], tag: str) -> str:
    while True:
        base = " ".join(rng.sample(_WORDS, rng.randint(1, 3)))
        candidate = f"{base} {tag}{rng.randint(0, 999)}"
        if model.normalize_name(candidate) not in used:
            used.add(model.normalize_name(candidate))
            return candidate


def _text(rng: random.Random) -> str:
    pieces = rng.choices(_WORDS, k=rng.randint(1, 5))
    if rng.random() < 0.2:
        pieces.append('quo"te')
    if rng.random() < 0.2:
        pieces.append("line\nbreak")
    if rng.random() < 0.1:
        pieces.append("back\\slash\ttab")
    return " ".join(pieces)


def _date(rng: random.Random) -> datetime.date:
    return datetime.date(2015, 1, 1) + datetime.timedelta(days=rng.randint(0, 4000))


def _contact(rng: random.Random) -> Contact:
    kind = rng.choice(list(ContactKind))
    if kind is ContactKind.EMAIL:
        return Contact(kind, f"user{rng.randint(0, 99)}@example.com")
    return Contact(kind, _text(rng) or "value")


def _contacts(rng: random.Random, minimum: int = 0) -> tuple[Contact, ...]:
    return tuple(_contact(rng) for _ in range(rng.randint(minimum, 2)))


def _region(rng: random.Random, used: set[str]) -> Region:
    controllers = tuple(
        Controller(
            name=_name(rng, used, "ctl"),
            contacts=_contacts(rng, minimum=1),
            location=_text(rng) if rng.random() < 0.5 else None,
            representative=(
                Representative(_name(rng, used, "rep"), _contacts(rng))
                if rng.random() < 0.3
                else None
            ),
        )
        for _ in range(rng.randint(1, 2))
    )
    rights = []
    for _ in range(rng.randint(0, 3)):
        types = frozenset(rng.sample(list(RightType), rng.randint(1, 3)))
        rights.append(
            Right(
                types=types,
                contacts=_contacts(rng, minimum=1),
                description=_text(rng) if rng.random() < 0.7 else None,
                law=_text(rng) if rng.random() < 0.3 else None,
                authority=(
                    SupervisoryAuthority(_name(rng, used, "auth"), _contacts(rng, minimum=1))
                    if rng.random() < 0.4
                    else None
                ),
            )
        )
    dpo = None
    if rng.random() < 0.6:
        dpo = DataProtectionOfficer(
            contacts=_contacts(rng, minimum=1),
            name=_name(rng, used, "dpo") if rng.random() < 0.5 else None,
        )
    return Region(
        name=_name(rng, used, "reg"),
        controllers=controllers,
        dpo=dpo,
        rights=tuple(rights),
    )


def make_category_graph(
    rng: random.Random, entry_count: int, category_count: int
) -> tuple[tuple[DataEntry, ...], tuple[DataCategory, ...]]:
    """Random acyclic category graph: category i may only point at
    categories with larger index, so cycles are impossible by construction."""
    used: set[str] = set()
    entries = tuple(DataEntry(_name(rng, used, "ent")) for _ in range(entry_count))
    names = [_name(rng, used, "cat") for _ in range(category_count)]
    categories = []
    for i, name in enumerate(names):
        members = frozenset(
            e.name for e in rng.sample(entries, rng.randint(0, min(4, len(entries))))
        )
        later = names[i + 1 :]
        subs = frozenset(rng.sample(later, rng.randint(0, min(3, len(later)))))
        categories.append(DataCategory(name=name, member_entries=members, sub_categories=subs))
    return entries, tuple(categories)


def _purpose(rng: random.Random, referencable: list[str]) -> Purpose:
    basis = None
    if rng.random() < 0.8:
        basis_type = rng.choice(list(LawfulBasisType))
        basis = LawfulBasis(
            basis_type, _text(rng) if rng.random() < 0.5 else None
        )
    refs = frozenset(
        rng.sample(referencable, rng.randint(0, min(3, len(referencable))))
    )
    return Purpose(
        description=_text(rng) or "purpose",
        agreement=rng.choice(list(FormOfAgreement)),
        data_refs=refs,
        lawful_basis=basis,
        revocation=_text(rng) if rng.random() < 0.4 else None,
    )


def make_transmit_detail(rng: random.Random) -> model.TransmittingDetail:
    recipient_kind = rng.choice(list(RecipientKind))
    return model.TransmittingDetail(
        recipient_type=RecipientType(
            recipient_kind,
            _text(rng) or "recipient" if recipient_kind is RecipientKind.OTHER else None,
        ),
        timing=rng.choice(list(Timing)),
        legal_transmission=rng.random() < 0.7,
        recipient_actor=rng.choice(list(ActorKind)) if rng.random() < 0.5 else None,
        recipient_locations=frozenset(
            rng.sample(list(LocationKind), rng.randint(0, 2))
        ),
        protection_measures=_text(rng) if rng.random() < 0.4 else None,
        commissioned=rng.choice([None, True, False]),
        recipient_areas=frozenset(rng.sample(list(RecipientArea), rng.randint(0, 3))),
        safeguards_for_regions=_text(rng) if rng.random() < 0.4 else None,
    )


def _detail(rng: random.Random, kind: str):
    if kind == "collect":
        return model.CollectingDetail(
            _text(rng) if rng.random() < 0.4 else None
        )
    if kind == "store":
        if rng.random() < 0.5:
            duration = StorageDuration(
                StorageDurationKind.FIXED_PERIOD,
                length=rng.randint(1, 120),
                unit=rng.choice(list(DurationUnit)),
            )
        else:
            duration = StorageDuration(
                StorageDurationKind.UNTIL_EVENT, event=_text(rng) or "event"
            )
        return StoringDetail(
            duration=duration,
            data_protection=_text(rng) if rng.random() < 0.5 else None,
            storage_locations=frozenset(rng.sample(_COUNTRIES, rng.randint(0, 3))),
        )
    if kind == "transmit":
        return make_transmit_detail(rng)
    if kind == "delete":
        return model.DeletingDetail()
    kinds = set()
    for _ in range(rng.randint(1, 3)):
        name = rng.choice(list(FurtherKindName))
        kinds.add(
            FurtherKind(name, _text(rng) or "form" if name is FurtherKindName.OTHER else None)
        )
    automated = rng.random() < 0.4
    return model.FurtherProcessingDetail(
        kinds=frozenset(kinds),
        timing=rng.choice(list(Timing)),
        automated_decision_making=automated,
        adm_logic=_text(rng) if automated and rng.random() < 0.8 else None,
    )


def make_instance(
    rng: random.Random,
    entry_count: Optional[int] = None,
    category_count: Optional[int] = None,
    processing_count: Optional[int] = None,
) -> PolicyInstance:
    used: set[str] = set()
    entries, categories = make_category_graph(
        rng,
        entry_count if entry_count is not None else rng.randint(0, 8),
        category_count if category_count is not None else rng.randint(0, 5),
    )
    referencable = [e.name for e in entries] + [c.name for c in categories]

    processings = []
    kind_counts: dict[str, int] = {}
    count = processing_count if processing_count is not None else rng.randint(0, 6)
    for _ in range(count):
        kind = rng.choice(list(model.PROCESSING_KINDS))
        kind_counts[kind] = kind_counts.get(kind, 0) + 1
        processings.append(
            ProcessingRecord(
                id=f"{kind}-{kind_counts[kind]}",
                scenario=_text(rng) or "scenario",
                actor=rng.choice(list(ActorKind)),
                locations=frozenset(rng.sample(list(LocationKind), rng.randint(1, 3))),
                purposes=tuple(
                    _purpose(rng, referencable) for _ in range(rng.randint(0, 3))
                ),
                detail=_detail(rng, kind),
                description=_text(rng) if rng.random() < 0.3 else None,
            )
        )

    effective = _date(rng)
    return PolicyInstance(
        name=_name(rng, used, "pol"),
        vendor_name=_text(rng) or "vendor",
        url_to_original=f"https://example.com/{rng.randint(0, 9999)}",
        effective_date=effective,
        version_label=_text(rng) or "v1",
        minimum_user_age=rng.randint(0, 21),
        regions=tuple(_region(rng, used) for _ in range(rng.randint(0, 2))),
        full_text=_text(rng) if rng.random() < 0.2 else None,
        date_of_last_change=(
            effective + datetime.timedelta(days=rng.randint(0, 900))
            if rng.random() < 0.6
            else None
        ),
        date_of_creation=(
            effective - datetime.timedelta(days=rng.randint(0, 200))
            if rng.random() < 0.5
            else None
        ),
        update_policies=_text(rng) if rng.random() < 0.6 else None,
        data_entries=entries,
        data_categories=categories,
        processings=tuple(processings),
    )


@pytest.fixture(scope="session")
def garmin_text() -> str:
    return fixture_text("garmin")


@pytest.fixture(scope="session")
def fitbit_text() -> str:
    return fixture_text("fitbit")


@pytest.fixture(scope="session")
def garmin(garmin_text) -> PolicyInstance:
    result = parser.parse(garmin_text)
    assert result.ok, [d.to_obj() for d in result.diagnostics]
    return result.instance


@pytest.fixture(scope="session")
def fitbit(fitbit_text) -> PolicyInstance:
    result = parser.parse(fitbit_text)
    assert result.ok, [d.to_obj() for d in result.diagnostics]
    return result.instance
