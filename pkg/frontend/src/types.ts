/**
 * Shapes of the HTTP API payloads. The UI never derives policy facts on its
 * own; everything rendered comes out of these structures.
 */

export type Severity = "error" | "warning" | "info";

export interface SourceSpan {
  start_line: number;
  start_col: number;
  end_line: number;
  end_col: number;
}

export interface ParseDiagnostic {
  code: string;
  message: string;
  span: SourceSpan;
}

export interface ValidationDiagnostic {
  rule: string;
  severity: Severity;
  message: string;
  path: string;
  span: SourceSpan | null;
}

export interface ValidationReport {
  diagnostics: ValidationDiagnostic[];
  counts: Record<Severity, number>;
}

export interface ValidatePayload {
  ok: boolean;
  parse_diagnostics: ParseDiagnostic[];
  validation_report?: ValidationReport;
}

export interface Rule {
  id: string;
  severity: Severity;
  title: string;
  rationale: string;
}

export interface RulesPayload {
  rules: Rule[];
}

export interface Contact {
  kind: string;
  value: string;
}

export interface PurposeObj {
  description: string;
  agreement: string;
  revocation: string | null;
  lawful_basis: { type: string; description: string | null } | null;
  data_refs: string[];
}

export interface ProcessingObj {
  id: string;
  kind: "collect" | "store" | "transmit" | "delete" | "further";
  scenario: string;
  description: string | null;
  actor: string;
  locations: string[];
  detail: Record<string, unknown>;
  purposes: PurposeObj[];
}

export interface CategoryObj {
  name: string;
  member_entries: string[];
  sub_categories: string[];
}

export interface PolicyObj {
  name: string;
  vendor_name: string;
  minimum_user_age: number;
  regions: unknown[];
  data_entries: { name: string }[];
  data_categories: CategoryObj[];
  processings: ProcessingObj[];
  [key: string]: unknown;
}

export interface PolicyPayload {
  key: string;
  version: { version: number; timestamp: string; digest: string };
  policy: PolicyObj;
}

export interface ListingPayload {
  policies: { key: string; latest: { version: number } }[];
}

export interface DiffPayload {
  entries_only_in_a: string[];
  entries_only_in_b: string[];
  categories_only_in_a: string[];
  categories_only_in_b: string[];
  rights_only_in_a: string[];
  rights_only_in_b: string[];
  lawful_bases_only_in_a: string[];
  lawful_bases_only_in_b: string[];
  processing_count_by_kind: { a: Record<string, number>; b: Record<string, number> };
  agreement_distribution: { a: Record<string, number>; b: Record<string, number> };
}

export interface ComparePayload {
  a: string;
  b: string;
  diff: DiffPayload;
}

export interface TaxonomyPayload {
  taxonomy: Record<string, { status: string; evidence: string[] }>;
}
