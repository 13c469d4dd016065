import dataclasses
import random

import pytest

from ppmkit import model, parser, rules
from ppmkit.model import (
    DataCategory,
    DataEntry,
    LawfulBasis,
    LawfulBasisType,
    RecipientArea,
    RightType,
)
from ppmkit.rules import Severity, UnknownRuleError, rule_catalog, run_rule, validate

from conftest import make_instance, make_transmit_detail


def rule_ids(report) -> list[str]:
    return [d.rule_id for d in report.diagnostics]


def replace_processing(instance, index, **changes):
    record = dataclasses.replace(instance.processings[index], **changes)
    processings = list(instance.processings)
    processings[index] = record
    return dataclasses.replace(instance, processings=tuple(processings))


def replace_region(instance, index, **changes):
    region = dataclasses.replace(instance.regions[index], **changes)
    regions = list(instance.regions)
    regions[index] = region
    return dataclasses.replace(instance, regions=tuple(regions))


def transfer_safeguard_oracle(instance) -> set[str]:
    """Exhaustive scan: every legal transmission whose recipient areas
    include a non-adequate country while no safeguards are stated."""
    offending = set()
    for pi, record in enumerate(instance.processings):
        detail = record.detail
        if not isinstance(detail, model.TransmittingDetail):
            continue
        if not detail.legal_transmission:
            continue
        hits = [
            area
            for area in detail.recipient_areas
            if area is RecipientArea.OTHER_COUNTRY
        ]
        if hits and not detail.safeguards_for_regions:
            offending.add(f"processings[{pi}]")
    return offending


class TestCatalog:
    def test_severity_follows_id_letter(self):
        for rule in rule_catalog():
            letter = rule.id.split("-")[1]
            assert rule.severity.value == {"E": "error", "W": "warning", "I": "info"}[letter]

    def test_minimum_rule_set_present(self):
        ids = {rule.id for rule in rule_catalog()}
        required = (
            [f"PPM-E-00{i}" for i in range(1, 6)]
            + ["PPM-E-010", "PPM-E-011", "PPM-E-012", "PPM-E-013"]
            + ["PPM-E-020", "PPM-E-021", "PPM-E-022"]
            + ["PPM-W-030", "PPM-W-031", "PPM-W-032", "PPM-I-040"]
        )
        assert set(required) <= ids
        assert len(ids) >= 16

    def test_unknown_rule(self, garmin):
        with pytest.raises(UnknownRuleError):
            run_rule(garmin, "PPM-E-999")


class TestFixtureBaseline:
    def test_garmin_has_no_errors(self, garmin):
        report = validate(garmin)
        assert report.error_count == 0
        assert rule_ids(report) == ["PPM-I-040"]

    def test_fitbit_is_clean(self, fitbit):
        assert rule_ids(validate(fitbit)) == []

    def test_spans_attached_when_available(self, garmin_text):
        result = parser.parse(garmin_text)
        report = validate(result.instance, result.spans)
        assert all(d.span is not None for d in report.diagnostics)


class TestStructuralRules:
    def test_e001_region_without_controller(self, garmin):
        broken = replace_region(garmin, 0, controllers=())
        hits = run_rule(broken, "PPM-E-001")
        assert [str(d.path) for d in hits] == ["regions[0]"]

    def test_e002_controller_without_contact(self, garmin):
        controller = dataclasses.replace(garmin.regions[0].controllers[0], contacts=())
        broken = replace_region(garmin, 0, controllers=(controller,))
        assert [str(d.path) for d in run_rule(broken, "PPM-E-002")] == [
            "regions[0].controllers[0]"
        ]

    def test_e003_processing_without_purpose(self, garmin):
        broken = replace_processing(garmin, 0, purposes=())
        assert [str(d.path) for d in run_rule(broken, "PPM-E-003")] == ["processings[0]"]

    def test_e004_purpose_without_data(self, garmin):
        purpose = dataclasses.replace(
            garmin.processings[0].purposes[0], data_refs=frozenset()
        )
        broken = replace_processing(garmin, 0, purposes=(purpose,))
        assert [str(d.path) for d in run_rule(broken, "PPM-E-004")] == [
            "processings[0].purposes[0]"
        ]

    def test_e005_purpose_without_basis(self, garmin):
        purpose = dataclasses.replace(
            garmin.processings[0].purposes[0], lawful_basis=None
        )
        broken = replace_processing(garmin, 0, purposes=(purpose,))
        assert "PPM-E-005" in rule_ids(validate(broken))

    def test_e006_policy_without_region(self, garmin):
        broken = dataclasses.replace(garmin, regions=())
        assert "PPM-E-006" in rule_ids(validate(broken))

    def test_e007_dpo_without_contact(self, garmin):
        dpo = dataclasses.replace(garmin.regions[0].dpo, contacts=())
        broken = replace_region(garmin, 0, dpo=dpo)
        assert [str(d.path) for d in run_rule(broken, "PPM-E-007")] == ["regions[0].dpo"]

    def test_e008_right_without_contact(self, garmin):
        right = dataclasses.replace(garmin.regions[0].rights[0], contacts=())
        broken = replace_region(
            garmin, 0, rights=(right,) + garmin.regions[0].rights[1:]
        )
        assert [str(d.path) for d in run_rule(broken, "PPM-E-008")] == [
            "regions[0].rights[0]"
        ]

    def test_e009_other_right_needs_description(self, garmin):
        right = dataclasses.replace(
            garmin.regions[0].rights[0],
            types=frozenset({RightType.OTHER}),
            description=None,
        )
        broken = replace_region(garmin, 0, rights=(right,))
        assert "PPM-E-009" in rule_ids(validate(broken))

    def test_e010_dangling_reference(self, garmin):
        category = DataCategory("extra", frozenset({"ghost"}), frozenset())
        broken = dataclasses.replace(
            garmin, data_categories=garmin.data_categories + (category,)
        )
        hits = run_rule(broken, "PPM-E-010")
        assert len(hits) == 1 and "ghost" in hits[0].message

    def test_e011_category_cycle(self, garmin):
        a = DataCategory("a", frozenset(), frozenset({"b"}))
        b = DataCategory("b", frozenset(), frozenset({"a"}))
        broken = dataclasses.replace(garmin, data_categories=(a, b))
        hits = run_rule(broken, "PPM-E-011")
        assert len(hits) == 1 and "cycle" in hits[0].message

    def test_e012_complaint_right_needs_authority(self, garmin):
        complaint = dataclasses.replace(garmin.regions[0].rights[1], authority=None)
        broken = replace_region(
            garmin, 0, rights=(garmin.regions[0].rights[0], complaint)
        )
        assert [str(d.path) for d in run_rule(broken, "PPM-E-012")] == [
            "regions[0].rights[1]"
        ]

    def test_e012_also_fires_on_uncontactable_authority(self, garmin):
        authority = dataclasses.replace(
            garmin.regions[0].rights[1].authority, contacts=()
        )
        complaint = dataclasses.replace(garmin.regions[0].rights[1], authority=authority)
        broken = replace_region(
            garmin, 0, rights=(garmin.regions[0].rights[0], complaint)
        )
        assert len(run_rule(broken, "PPM-E-012")) == 1

    def test_e013_change_before_creation(self, garmin):
        broken = dataclasses.replace(
            garmin,
            date_of_creation=garmin.date_of_last_change,
            date_of_last_change=garmin.date_of_creation,
        )
        assert "PPM-E-013" in rule_ids(validate(broken))


class TestTransferRules:
    def test_e020_fires_without_safeguards(self, garmin):
        detail = dataclasses.replace(
            garmin.processings[3].detail,
            recipient_areas=frozenset({RecipientArea.OTHER_COUNTRY}),
        )
        broken = replace_processing(garmin, 3, detail=detail)
        assert [str(d.path) for d in run_rule(broken, "PPM-E-020")] == ["processings[3]"]

    def test_e020_quiet_with_safeguards(self, garmin):
        detail = dataclasses.replace(
            garmin.processings[3].detail,
            recipient_areas=frozenset({RecipientArea.OTHER_COUNTRY}),
            safeguards_for_regions="standard contractual clauses",
        )
        fixed = replace_processing(garmin, 3, detail=detail)
        assert run_rule(fixed, "PPM-E-020") == []

    def test_e020_quiet_for_non_legal_transmission(self, garmin):
        detail = dataclasses.replace(
            garmin.processings[3].detail,
            legal_transmission=False,
            recipient_areas=frozenset({RecipientArea.OTHER_COUNTRY}),
            commissioned=None,
        )
        technical = replace_processing(garmin, 3, detail=detail)
        assert run_rule(technical, "PPM-E-020") == []
        assert run_rule(technical, "PPM-E-021") == []

    def test_e020_matches_exhaustive_oracle(self, garmin):
        rng = random.Random(41)
        for _ in range(300):
            transmits = tuple(
                dataclasses.replace(
                    garmin.processings[3],
                    id=f"t-{i}",
                    detail=make_transmit_detail(rng),
                )
                for i in range(rng.randint(0, 5))
            )
            instance = dataclasses.replace(garmin, processings=transmits)
            hits = {str(d.path) for d in run_rule(instance, "PPM-E-020")}
            assert hits == transfer_safeguard_oracle(instance)

    def test_e021_missing_commissioned_and_areas(self, garmin):
        detail = dataclasses.replace(
            garmin.processings[3].detail,
            commissioned=None,
            recipient_areas=frozenset(),
        )
        broken = replace_processing(garmin, 3, detail=detail)
        hits = run_rule(broken, "PPM-E-021")
        assert len(hits) == 1
        assert "commissioned" in hits[0].message and "recipient areas" in hits[0].message

    def test_e022_automated_decision_without_logic(self, garmin):
        detail = dataclasses.replace(
            garmin.processings[5].detail, automated_decision_making=True
        )
        broken = replace_processing(garmin, 5, detail=detail)
        assert [str(d.path) for d in run_rule(broken, "PPM-E-022")] == ["processings[5]"]
        fixed = replace_processing(
            garmin,
            5,
            detail=dataclasses.replace(detail, adm_logic="threshold on heart rate"),
        )
        assert run_rule(fixed, "PPM-E-022") == []

    def test_e023_na_basis_needs_description(self, garmin):
        purpose = dataclasses.replace(
            garmin.processings[0].purposes[0],
            lawful_basis=LawfulBasis(LawfulBasisType.NOT_APPLICABLE),
        )
        broken = replace_processing(garmin, 0, purposes=(purpose,))
        assert "PPM-E-023" in rule_ids(validate(broken))


class TestWarningsAndInfo:
    def test_w030_consent_without_revocation(self, garmin):
        purpose = dataclasses.replace(
            garmin.processings[3].purposes[0], revocation=None
        )
        broken = replace_processing(garmin, 3, purposes=(purpose,))
        assert "PPM-W-030" in rule_ids(validate(broken))

    def test_w031_low_minimum_age(self, garmin):
        broken = dataclasses.replace(garmin, minimum_user_age=10)
        assert "PPM-W-031" in rule_ids(validate(broken))

    def test_w032_duplicate_entries(self, garmin):
        broken = dataclasses.replace(
            garmin, data_entries=garmin.data_entries + (DataEntry("Heart  RATE"),)
        )
        hits = run_rule(broken, "PPM-W-032")
        assert len(hits) == 1

    def test_w033_duplicate_categories(self, garmin):
        broken = dataclasses.replace(
            garmin,
            data_categories=garmin.data_categories
            + (DataCategory("PERSONAL DATA", frozenset(), frozenset()),),
        )
        assert len(run_rule(broken, "PPM-W-033")) == 1

    def test_w034_implausible_email(self, garmin):
        dpo = dataclasses.replace(
            garmin.regions[0].dpo,
            contacts=(model.Contact(model.ContactKind.EMAIL, "not-an-address"),),
        )
        broken = replace_region(garmin, 0, dpo=dpo)
        assert "PPM-W-034" in rule_ids(validate(broken))

    def test_i040_storage_without_protection(self, garmin):
        hits = run_rule(garmin, "PPM-I-040")
        assert [str(d.path) for d in hits] == ["processings[2]"]


class TestReportShape:
    def test_deterministic_order(self):
        rng = random.Random(53)
        for _ in range(30):
            instance = make_instance(rng)
            first = validate(instance)
            second = validate(instance)
            assert first == second
            keys = [(d.path.sort_key(), d.rule_id) for d in first.diagnostics]
            assert keys == sorted(keys)

    def test_counts(self, garmin):
        report = validate(dataclasses.replace(garmin, minimum_user_age=5))
        assert report.counts == {"error": 0, "warning": 1, "info": 1}
        assert report.error_count == 0

    def test_to_obj_shape(self, garmin):
        obj = validate(garmin).to_obj()
        assert set(obj) == {"diagnostics", "counts"}
        assert obj["diagnostics"][0]["rule"] == "PPM-I-040"
