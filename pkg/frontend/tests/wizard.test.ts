import { describe, expect, it } from "vitest";

import type { RulesPayload, ValidatePayload } from "../src/types";
import {
  FORM_FIELDS,
  diagnosticRows,
  fieldTooltip,
  mandatoryFieldIds,
  saveEnabled,
} from "../src/wizard";
import { loadFixture } from "./helpers";

const rules = loadFixture<RulesPayload>("rules.json");
const cleanDraft = loadFixture<ValidatePayload>("validate_garmin.json");
const emptyDraft = loadFixture<ValidatePayload>("validate_empty.json");

describe("displayed diagnostics", () => {
  it("equal the raw validate payload one-to-one", () => {
    const rows = diagnosticRows(cleanDraft);
    const raw = cleanDraft.validation_report?.diagnostics ?? [];
    expect(rows.length).toBe(cleanDraft.parse_diagnostics.length + raw.length);
    raw.forEach((diagnostic, index) => {
      const row = rows[cleanDraft.parse_diagnostics.length + index];
      expect(row.rule).toBe(diagnostic.rule);
      expect(row.severity).toBe(diagnostic.severity);
      expect(row.message).toBe(diagnostic.message);
      expect(row.path).toBe(diagnostic.path);
    });
  });

  it("renders parse diagnostics for an unparseable draft", () => {
    const rows = diagnosticRows(emptyDraft);
    expect(rows.map((r) => r.rule)).toEqual(
      emptyDraft.parse_diagnostics.map((d) => d.code),
    );
    expect(rows.every((r) => r.severity === "error")).toBe(true);
  });

  it("routes a forced controller-contact error to its field card", () => {
    const payload: ValidatePayload = {
      ok: true,
      parse_diagnostics: [],
      validation_report: {
        diagnostics: [
          {
            rule: "PPM-E-002",
            severity: "error",
            message: "controller 'X' has no contact",
            path: "regions[0].controllers[0]",
            span: null,
          },
        ],
        counts: { error: 1, warning: 0, info: 0 },
      },
    };
    expect(diagnosticRows(payload)[0].fieldId).toBe("controller-contact");
    expect(saveEnabled(payload)).toBe(false);
  });

  it("re-enables save once the errors are gone", () => {
    expect(saveEnabled(cleanDraft)).toBe(true);
    expect(saveEnabled(emptyDraft)).toBe(false);
  });
});

describe("mandatory-field asterisks", () => {
  it("match exactly the fields backed by an error-severity rule", () => {
    const errorRules = new Set(
      rules.rules.filter((r) => r.severity === "error").map((r) => r.id),
    );
    const expected = FORM_FIELDS.filter(
      (f) => f.mandatoryRule !== undefined && errorRules.has(f.mandatoryRule),
    ).map((f) => f.id);
    expect(mandatoryFieldIds()).toEqual(expected);
    for (const field of FORM_FIELDS) {
      if (field.mandatoryRule !== undefined) {
        expect(errorRules.has(field.mandatoryRule)).toBe(true);
      }
    }
  });
});

describe("tooltips", () => {
  it("come from the rule catalog rationales", () => {
    for (const field of FORM_FIELDS) {
      const tooltip = fieldTooltip(field, rules);
      expect(tooltip.length).toBeGreaterThan(0);
      const ruleId = field.tooltipRule ?? field.mandatoryRule;
      if (ruleId !== undefined) {
        const rule = rules.rules.find((r) => r.id === ruleId);
        expect(tooltip).toBe(rule?.rationale);
      }
    }
  });
});
