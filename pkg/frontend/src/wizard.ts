/**
 * Authoring wizard view model. Steps and fields are static descriptors; the
 * diagnostics shown next to them are taken verbatim from the validate
 * endpoint's payload and routed to the owning field via the model path.
 */

import type { Rule, RulesPayload, ValidatePayload, ValidationDiagnostic } from "./types";

export type StepId = "BasicInfo" | "Regions" | "DataEntries" | "Processing" | "Review";

export interface FieldDescriptor {
  id: string;
  label: string;
  step: StepId;
  /** Model-path prefix whose diagnostics belong to this field. */
  pathPrefix: string;
  /** Error rule that fires when the field is missing; set iff mandatory. */
  mandatoryRule?: string;
  /** Rule whose rationale supplies the tooltip; defaults to mandatoryRule. */
  tooltipRule?: string;
}

export const FORM_FIELDS: FieldDescriptor[] = [
  { id: "policy-name", label: "Policy name", step: "BasicInfo", pathPrefix: "name" },
  { id: "vendor", label: "Vendor", step: "BasicInfo", pathPrefix: "vendor_name" },
  {
    id: "min-age",
    label: "Minimum user age",
    step: "BasicInfo",
    pathPrefix: "minimum_user_age",
    tooltipRule: "PPM-W-031",
  },
  {
    id: "dates",
    label: "Creation and change dates",
    step: "BasicInfo",
    pathPrefix: "date_of_last_change",
    tooltipRule: "PPM-E-013",
  },
  {
    id: "regions",
    label: "Regions",
    step: "Regions",
    pathPrefix: "regions",
    mandatoryRule: "PPM-E-006",
  },
  {
    id: "controllers",
    label: "Controllers",
    step: "Regions",
    pathPrefix: "regions",
    mandatoryRule: "PPM-E-001",
  },
  {
    id: "controller-contact",
    label: "Controller contact",
    step: "Regions",
    pathPrefix: "regions",
    mandatoryRule: "PPM-E-002",
  },
  {
    id: "rights",
    label: "Data subject rights",
    step: "Regions",
    pathPrefix: "regions",
    tooltipRule: "PPM-E-008",
  },
  {
    id: "data-entries",
    label: "Data entries",
    step: "DataEntries",
    pathPrefix: "data_entries",
    tooltipRule: "PPM-W-032",
  },
  {
    id: "data-categories",
    label: "Data categories",
    step: "DataEntries",
    pathPrefix: "data_categories",
    tooltipRule: "PPM-E-011",
  },
  {
    id: "purposes",
    label: "Processing purposes",
    step: "Processing",
    pathPrefix: "processings",
    mandatoryRule: "PPM-E-003",
  },
  {
    id: "purpose-data",
    label: "Purpose data references",
    step: "Processing",
    pathPrefix: "processings",
    mandatoryRule: "PPM-E-004",
  },
  {
    id: "purpose-basis",
    label: "Lawful basis",
    step: "Processing",
    pathPrefix: "processings",
    mandatoryRule: "PPM-E-005",
  },
  {
    id: "transfer-safeguards",
    label: "Transfer safeguards",
    step: "Processing",
    pathPrefix: "processings",
    tooltipRule: "PPM-E-020",
  },
];

/** Fields rendered with an asterisk: exactly those backed by an error rule. */
export function mandatoryFieldIds(): string[] {
  return FORM_FIELDS.filter((f) => f.mandatoryRule !== undefined).map((f) => f.id);
}

/** Tooltip text for a field, sourced from the rule catalog's rationales. */
export function fieldTooltip(field: FieldDescriptor, rules: RulesPayload): string {
  const ruleId = field.tooltipRule ?? field.mandatoryRule;
  if (ruleId === undefined) {
    return field.label;
  }
  const rule: Rule | undefined = rules.rules.find((r) => r.id === ruleId);
  return rule === undefined ? field.label : rule.rationale;
}

export interface DiagnosticRow {
  rule: string;
  severity: string;
  message: string;
  path: string;
  /** Owning field card, or null for diagnostics with no matching field. */
  fieldId: string | null;
}

function owningField(path: string, rule: string): string | null {
  const byRule = FORM_FIELDS.find(
    (f) => f.mandatoryRule === rule || f.tooltipRule === rule,
  );
  if (byRule !== undefined) {
    return byRule.id;
  }
  const byPath = FORM_FIELDS.find((f) => path.startsWith(f.pathPrefix));
  return byPath === undefined ? null : byPath.id;
}

/**
 * One row per diagnostic of the raw payload, in payload order; nothing is
 * filtered, merged or re-ranked client-side.
 */
export function diagnosticRows(payload: ValidatePayload): DiagnosticRow[] {
  const parsed: DiagnosticRow[] = payload.parse_diagnostics.map((d) => ({
    rule: d.code,
    severity: "error",
    message: d.message,
    path: `${d.span.start_line}:${d.span.start_col}`,
    fieldId: null,
  }));
  const validated: DiagnosticRow[] = (payload.validation_report?.diagnostics ?? []).map(
    (d: ValidationDiagnostic) => ({
      rule: d.rule,
      severity: d.severity,
      message: d.message,
      path: d.path,
      fieldId: owningField(d.path, d.rule),
    }),
  );
  return parsed.concat(validated);
}

/** The save button stays disabled while error-severity diagnostics exist. */
export function saveEnabled(payload: ValidatePayload): boolean {
  if (!payload.ok || payload.validation_report === undefined) {
    return false;
  }
  return payload.validation_report.counts.error === 0;
}
