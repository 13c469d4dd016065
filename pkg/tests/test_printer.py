import dataclasses
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ppmkit import parser, printer
from ppmkit.model import DataCategory
from ppmkit.printer import UnresolvedInstanceError, print_canonical

from conftest import make_instance


class TestDeterminism:
    def test_idempotent_on_fixture(self, garmin):
        once = print_canonical(garmin)
        again = print_canonical(parser.parse(once).instance)
        assert once == again

    def test_lf_only_and_trailing_newline(self, garmin):
        text = print_canonical(garmin)
        assert "\r" not in text
        assert text.endswith("}\n")

    def test_same_instance_same_bytes(self):
        rng = random.Random(5)
        instance = make_instance(rng)
        assert print_canonical(instance) == print_canonical(instance)

    def test_block_order_is_fixed(self, garmin):
        text = print_canonical(garmin)
        first_region = text.index("region ")
        first_entry = text.index("data-entry ")
        first_category = text.index("data-category ")
        first_processing = text.index("processing ")
        assert first_region < first_entry < first_category < first_processing


class TestUnresolved:
    def test_rejects_dangling_reference(self, garmin):
        broken = dataclasses.replace(
            garmin,
            data_categories=garmin.data_categories
            + (DataCategory("extra", frozenset({"ghost entry"}), frozenset()),),
        )
        with pytest.raises(UnresolvedInstanceError) as exc:
            print_canonical(broken)
        assert exc.value.name == "ghost entry"


@st.composite
def tricky_strings(draw):
    return draw(
        st.text(
            alphabet=st.sampled_from('abc XYZ 123 "\\\n\t üß'),
            min_size=1,
            max_size=30,
        )
    )


class TestEscaping:
    @given(tricky_strings())
    @settings(max_examples=200, deadline=None)
    def test_string_escaping_round_trips(self, garmin, value):
        instance = dataclasses.replace(garmin, vendor_name=value)
        result = parser.parse(print_canonical(instance))
        assert result.ok
        assert result.instance.vendor_name == value
