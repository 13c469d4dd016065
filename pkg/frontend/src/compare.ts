/**
 * Compare view model: a flat list of rows rendered one-to-one from the
 * compare endpoint's diff payload. Differences are never computed here.
 */

import type { ComparePayload, DiffPayload } from "./types";

export interface DiffRow {
  section: string;
  value: string;
  /** Which side the value appears on, or "both" for count mismatches. */
  side: "a" | "b" | "both";
}

const SET_SECTIONS: Array<{
  section: string;
  a: keyof DiffPayload;
  b: keyof DiffPayload;
}> = [
  { section: "data entries", a: "entries_only_in_a", b: "entries_only_in_b" },
  { section: "data categories", a: "categories_only_in_a", b: "categories_only_in_b" },
  { section: "rights", a: "rights_only_in_a", b: "rights_only_in_b" },
  { section: "lawful bases", a: "lawful_bases_only_in_a", b: "lawful_bases_only_in_b" },
];

export function diffRows(payload: ComparePayload): DiffRow[] {
  const diff = payload.diff;
  const rows: DiffRow[] = [];
  for (const { section, a, b } of SET_SECTIONS) {
    for (const value of diff[a] as string[]) {
      rows.push({ section, value, side: "a" });
    }
    for (const value of diff[b] as string[]) {
      rows.push({ section, value, side: "b" });
    }
  }
  const kinds = diff.processing_count_by_kind;
  for (const kind of Object.keys(kinds.a)) {
    if (kinds.a[kind] !== kinds.b[kind]) {
      rows.push({
        section: "processing counts",
        value: `${kind}: ${kinds.a[kind]} vs ${kinds.b[kind]}`,
        side: "both",
      });
    }
  }
  const agreements = diff.agreement_distribution;
  for (const form of Object.keys(agreements.a)) {
    if (agreements.a[form] !== agreements.b[form]) {
      rows.push({
        section: "agreement distribution",
        value: `${form}: ${agreements.a[form]} vs ${agreements.b[form]}`,
        side: "both",
      });
    }
  }
  return rows;
}

/** True when the payload describes two indistinguishable policies. */
export function isNoDifference(payload: ComparePayload): boolean {
  return diffRows(payload).length === 0;
}

/** Rows with the a/b columns swapped, for mirrored rendering. */
export function mirrorRows(rows: DiffRow[]): DiffRow[] {
  return rows.map((row) => ({
    ...row,
    side: row.side === "a" ? "b" : row.side === "b" ? "a" : "both",
  }));
}
