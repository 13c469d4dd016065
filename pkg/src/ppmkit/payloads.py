"""JSON payload builders shared by the HTTP service and the CLI.

Both surfaces must emit byte-identical JSON for the same inputs, so every
payload shape lives here and is serialized through `jsonio.dumps`.
"""

from __future__ import annotations

from typing import Optional

from ppmkit import analysis, jsonio, rules
from ppmkit.parser import ParseResult
from ppmkit.model import PolicyInstance


def validation_obj(result: ParseResult) -> dict:
    """Parse diagnostics plus, when the document parsed, validation findings."""
    obj: dict = {
        "ok": result.ok,
        "parse_diagnostics": [d.to_obj() for d in result.diagnostics],
    }
    if result.instance is not None:
        report = rules.validate(result.instance, result.spans)
        obj["validation_report"] = report.to_obj()
    return obj


def rules_obj() -> dict:
    return {
        "rules": [
            {
                "id": rule.id,
                "severity": rule.severity.value,
                "title": rule.title,
                "rationale": rule.rationale,
            }
            for rule in rules.rule_catalog()
        ]
    }


def taxonomy_obj(instance: PolicyInstance) -> dict:
    return {"taxonomy": analysis.taxonomy_coverage(instance).to_obj()}


def compare_obj(a: PolicyInstance, b: PolicyInstance, label_a: str, label_b: str) -> dict:
    return {
        "a": label_a,
        "b": label_b,
        "diff": analysis.compare(a, b).to_obj(),
    }


def stats_obj(stats: analysis.CorpusStats, policy_count: int) -> dict:
    return {"policies": policy_count, "stats": stats.to_obj()}


def policy_obj(key: str, info, instance: PolicyInstance) -> dict:
    return {
        "key": key,
        "version": info.to_obj(),
        "policy": jsonio.instance_to_obj(instance),
    }


def listing_obj(entries: list[tuple[str, object]]) -> dict:
    return {
        "policies": [
            {"key": key, "latest": info.to_obj()} for key, info in entries
        ]
    }


def put_obj(key: str, info, error_count: int) -> dict:
    return {"key": key, "stored": info.to_obj(), "errors": error_count}


def dumps(obj) -> str:
    return jsonio.dumps(obj)
