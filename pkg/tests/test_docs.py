import pathlib
import re

from ppmkit.rules import rule_catalog

README = pathlib.Path(__file__).parent.parent / "README.md"


def test_readme_rule_table_matches_catalog():
    rows = re.findall(
        r"^\| (PPM-[EWI]-\d{3}) \| (error|warning|info) \| (.+?) \|$",
        README.read_text(encoding="utf-8"),
        flags=re.MULTILINE,
    )
    documented = {rule_id: (severity, title) for rule_id, severity, title in rows}
    actual = {r.id: (r.severity.value, r.title) for r in rule_catalog()}
    assert documented == actual
