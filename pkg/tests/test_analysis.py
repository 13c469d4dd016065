import dataclasses
import random

from ppmkit import analysis, jsonio
from ppmkit.analysis import (
    CoverageStatus,
    TaxonomyItem,
    compare,
    corpus_stats,
    taxonomy_coverage,
)
from ppmkit.model import normalize_name

from conftest import make_instance


def stats_enumeration_oracle(instances) -> dict[str, set[str]]:
    """Independent count: walk the serialized JSON of each instance and
    collect the normalized value sets per information category."""
    found: dict[str, set[str]] = {c: set() for c in analysis.STAT_CATEGORIES}

    def norm(value: str) -> str:
        return normalize_name(value)

    for instance in instances:
        obj = jsonio.instance_to_obj(instance)
        for entry in obj["data_entries"]:
            found["data_type"].add(norm(entry["name"]))
        for proc in obj["processings"]:
            found["data_processing"].add(proc["kind"])
            found["data_owner"].add(proc["actor"])
            detail = proc["detail"]
            if proc["kind"] == "collect":
                found["data_source"].add(proc["actor"])
            if proc["kind"] == "store":
                duration = detail["duration"]
                if duration["kind"] == "fixed":
                    rendered = f"fixed {duration['length']} {duration['unit']}"
                else:
                    rendered = f"until-event {duration['event']}"
                found["data_storage_period"].add(norm(rendered))
                if detail["data_protection"]:
                    found["data_protection"].add(norm(detail["data_protection"]))
            if proc["kind"] == "transmit":
                recipient = detail["recipient_type"]
                found["data_receiver"].add(
                    norm(recipient.get("text") or recipient["kind"])
                )
                if detail["recipient_actor"]:
                    found["data_owner"].add(detail["recipient_actor"])
                if detail["protection_measures"]:
                    found["data_protection"].add(norm(detail["protection_measures"]))
            if proc["kind"] == "further":
                for kind in detail["kinds"]:
                    found["data_processing"].add(norm(kind.get("text") or kind["kind"]))
            for purpose in proc["purposes"]:
                found["processing_purpose"].add(norm(purpose["description"]))
                found["processing_decision"].add(purpose["agreement"])
                if purpose["revocation"]:
                    found["processing_decision"].add(analysis.REVOCATION_OFFERED)
                if purpose["lawful_basis"]:
                    found["legal_basis"].add(purpose["lawful_basis"]["type"])
    return found


class TestTaxonomyCoverage:
    def test_fixture_coverage(self, garmin):
        report = taxonomy_coverage(garmin)
        assert report.covered() == {
            TaxonomyItem.FIRST_PARTY_COLLECTION,
            TaxonomyItem.LEGAL_BASIS,
            TaxonomyItem.DATA_SUBJECT_RIGHTS,
            TaxonomyItem.DATA_RETENTION,
            TaxonomyItem.POLICY_CHANGE,
            TaxonomyItem.SPECIFIC_AUDIENCES,
            TaxonomyItem.OTHER,
        }
        assert (
            report.items[TaxonomyItem.DO_NOT_TRACK].status
            is CoverageStatus.NOT_APPLICABLE
        )

    def test_covered_items_carry_evidence(self, garmin):
        report = taxonomy_coverage(garmin)
        for item, entry in report.items.items():
            if entry.status is CoverageStatus.COVERED:
                assert entry.evidence, item
            else:
                assert not entry.evidence, item

    def test_retention_evidence_points_at_storing(self, garmin):
        report = taxonomy_coverage(garmin)
        assert [str(p) for p in report.items[TaxonomyItem.DATA_RETENTION].evidence] == [
            "processings[2]"
        ]

    def test_data_security_via_protection(self, fitbit):
        report = taxonomy_coverage(fitbit)
        assert report.items[TaxonomyItem.DATA_SECURITY].status is CoverageStatus.COVERED

    def test_do_not_track_always_na(self):
        rng = random.Random(3)
        for _ in range(25):
            report = taxonomy_coverage(make_instance(rng))
            assert (
                report.items[TaxonomyItem.DO_NOT_TRACK].status
                is CoverageStatus.NOT_APPLICABLE
            )

    def test_specific_audiences_needs_age_and_region(self, garmin):
        ageless = dataclasses.replace(garmin, minimum_user_age=0)
        report = taxonomy_coverage(ageless)
        assert (
            report.items[TaxonomyItem.SPECIFIC_AUDIENCES].status
            is CoverageStatus.UNCOVERED
        )

    def test_to_obj_lists_all_items(self, garmin):
        obj = taxonomy_coverage(garmin).to_obj()
        assert set(obj) == {item.value for item in TaxonomyItem}
        assert obj["do-not-track"]["status"] == "not-applicable"


class TestCorpusStats:
    def test_matches_enumeration_oracle_on_fixtures(self, garmin, fitbit):
        stats = corpus_stats([garmin, fitbit])
        oracle = stats_enumeration_oracle([garmin, fitbit])
        for category in analysis.STAT_CATEGORIES:
            got = {normalize_name(v) for v in stats.values[category]}
            assert got == oracle[category], category

    def test_matches_enumeration_oracle_on_random_corpora(self):
        rng = random.Random(67)
        for _ in range(20):
            corpus = [make_instance(rng) for _ in range(rng.randint(1, 4))]
            stats = corpus_stats(corpus)
            oracle = stats_enumeration_oracle(corpus)
            for category in analysis.STAT_CATEGORIES:
                got = {normalize_name(v) for v in stats.values[category]}
                assert got == oracle[category], category

    def test_dedup_under_normalization(self, garmin):
        doubled = corpus_stats([garmin, garmin])
        single = corpus_stats([garmin])
        assert doubled == single

    def test_csv_shape(self, garmin):
        lines = corpus_stats([garmin]).to_csv().splitlines()
        assert lines[0] == "category,value"
        assert len(lines) == 1 + sum(corpus_stats([garmin]).counts.values())

    def test_to_obj(self, garmin):
        obj = corpus_stats([garmin]).to_obj()
        assert set(obj) == set(analysis.STAT_CATEGORIES)
        assert obj["data_type"]["count"] == len(obj["data_type"]["values"])


class TestCompare:
    def test_fixture_diff(self, garmin, fitbit):
        diff = compare(garmin, fitbit)
        assert "heart rate" in diff.entries_only_in_a
        assert "heart rate" not in diff.entries_only_in_b
        assert "steps" in diff.entries_only_in_b
        assert diff.processing_count_by_kind_a["delete"] == 1
        assert diff.processing_count_by_kind_b["delete"] == 0

    def test_reflexively_empty(self, garmin, fitbit):
        assert compare(garmin, garmin).is_empty()
        assert compare(fitbit, fitbit).is_empty()

    def test_swap_symmetric_random(self):
        rng = random.Random(71)
        for _ in range(50):
            a = make_instance(rng)
            b = make_instance(rng)
            assert compare(b, a) == compare(a, b).swapped()
            assert compare(a, a).is_empty()

    def test_to_obj_sorted(self, garmin, fitbit):
        obj = compare(garmin, fitbit).to_obj()
        assert obj["entries_only_in_a"] == sorted(
            obj["entries_only_in_a"], key=normalize_name
        )
        assert set(obj["agreement_distribution"]) == {"a", "b"}
