/**
 * Explorer view model: filter and highlight the processing records of a
 * stored policy. All data comes from the policy payload returned by the
 * service; this module only selects what to show.
 */

import type { PolicyObj, ProcessingObj } from "./types";

export interface ExplorerFilter {
  kind?: ProcessingObj["kind"];
  actor?: string;
  agreement?: string;
  category?: string;
}

export const EMPTY_FILTER: ExplorerFilter = {};

function norm(name: string): string {
  return name.trim().replace(/\s+/g, " ").toLowerCase();
}

/**
 * Entry names reachable from a category through the payload's membership
 * and sub-category lists (the server serializes the full graph).
 */
export function reachableEntries(policy: PolicyObj, category: string): Set<string> {
  const byName = new Map(policy.data_categories.map((c) => [norm(c.name), c]));
  const result = new Set<string>();
  const seen = new Set<string>();
  const queue = [norm(category)];
  while (queue.length > 0) {
    const key = queue.shift() as string;
    if (seen.has(key)) {
      continue;
    }
    seen.add(key);
    const node = byName.get(key);
    if (node === undefined) {
      continue;
    }
    for (const member of node.member_entries) {
      result.add(norm(member));
    }
    for (const sub of node.sub_categories) {
      queue.push(norm(sub));
    }
  }
  return result;
}

function purposeTouchesCategory(
  policy: PolicyObj,
  refs: string[],
  category: string,
): boolean {
  const reachable = reachableEntries(policy, category);
  return refs.some(
    (ref) => norm(ref) === norm(category) || reachable.has(norm(ref)),
  );
}

/**
 * Processings passing the filter, in payload order. An empty filter passes
 * everything; the kind facet alone is equivalent to grouping by kind.
 */
export function filterProcessings(
  policy: PolicyObj,
  filter: ExplorerFilter,
): ProcessingObj[] {
  return policy.processings.filter((record) => {
    if (filter.kind !== undefined && record.kind !== filter.kind) {
      return false;
    }
    if (filter.actor !== undefined && record.actor !== filter.actor) {
      return false;
    }
    if (
      filter.agreement !== undefined &&
      !record.purposes.some((p) => p.agreement === filter.agreement)
    ) {
      return false;
    }
    if (
      filter.category !== undefined &&
      !record.purposes.some((p) =>
        purposeTouchesCategory(policy, p.data_refs, filter.category as string),
      )
    ) {
      return false;
    }
    return true;
  });
}

export function countByKind(policy: PolicyObj): Record<string, number> {
  const counts: Record<string, number> = {
    collect: 0,
    store: 0,
    transmit: 0,
    delete: 0,
    further: 0,
  };
  for (const record of policy.processings) {
    counts[record.kind] += 1;
  }
  return counts;
}

export interface HighlightedPurpose {
  processingId: string;
  purposeIndex: number;
}

/** Purposes whose data references reach the category, for highlighting. */
export function highlightPurposes(
  policy: PolicyObj,
  category: string,
): HighlightedPurpose[] {
  const hits: HighlightedPurpose[] = [];
  for (const record of policy.processings) {
    record.purposes.forEach((purpose, index) => {
      if (purposeTouchesCategory(policy, purpose.data_refs, category)) {
        hits.push({ processingId: record.id, purposeIndex: index });
      }
    });
  }
  return hits;
}
