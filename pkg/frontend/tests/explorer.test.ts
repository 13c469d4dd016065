import { describe, expect, it } from "vitest";

import {
  EMPTY_FILTER,
  countByKind,
  filterProcessings,
  highlightPurposes,
  reachableEntries,
} from "../src/explorer";
import type { PolicyPayload } from "../src/types";
import { loadFixture } from "./helpers";

const garmin = loadFixture<PolicyPayload>("policy_garmin.json").policy;
const fitbit = loadFixture<PolicyPayload>("policy_fitbit.json").policy;

describe("kind filter", () => {
  it("empty filter shows every processing", () => {
    expect(filterProcessings(garmin, EMPTY_FILTER)).toEqual(garmin.processings);
  });

  it("counts match a per-kind grouping of the payload", () => {
    const counts = countByKind(garmin);
    for (const kind of ["collect", "store", "transmit", "delete", "further"] as const) {
      expect(filterProcessings(garmin, { kind }).length).toBe(counts[kind]);
    }
    expect(counts).toEqual({ collect: 2, store: 1, transmit: 1, delete: 1, further: 1 });
  });

  it("one transmit of three processings gives exactly one card", () => {
    expect(filterProcessings(fitbit, { kind: "transmit" }).length).toBe(1);
    expect(fitbit.processings.length).toBe(3);
  });
});

describe("attribute filters", () => {
  it("actor facet", () => {
    const manufacturerOnly = filterProcessings(garmin, { actor: "manufacturer" });
    expect(manufacturerOnly.map((p) => p.id)).toEqual([
      "account-data",
      "child-data",
      "calorie-calc",
    ]);
  });

  it("agreement facet", () => {
    expect(filterProcessings(garmin, { agreement: "optional" }).map((p) => p.id)).toEqual([
      "livetrack",
    ]);
  });

  it("category facet follows the payload's category graph", () => {
    const hits = filterProcessings(garmin, { category: "health data" });
    expect(hits.map((p) => p.id)).toEqual(["account-data", "calorie-calc"]);
  });
});

describe("category highlighting", () => {
  it("reaches entries through sub-categories", () => {
    expect(reachableEntries(garmin, "personal data")).toEqual(
      new Set([
        "e-mail address",
        "support request content",
        "profile data",
        "heart rate",
        "activity data",
      ]),
    );
  });

  it("highlights every purpose whose closure contains a referenced entry", () => {
    const hits = highlightPurposes(garmin, "personal data");
    expect(hits).toEqual([
      { processingId: "support-email", purposeIndex: 0 },
      { processingId: "device-setup", purposeIndex: 0 },
      { processingId: "account-data", purposeIndex: 0 },
      { processingId: "child-data", purposeIndex: 0 },
      { processingId: "calorie-calc", purposeIndex: 0 },
    ]);
  });
});
