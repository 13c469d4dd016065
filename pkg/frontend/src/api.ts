/**
 * Thin client for the policy service. All knowledge about policies flows
 * through these calls; the UI modules only reshape the returned payloads.
 */

import type {
  ComparePayload,
  ListingPayload,
  PolicyPayload,
  RulesPayload,
  TaxonomyPayload,
  ValidatePayload,
} from "./types";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private baseUrl: string = "http://127.0.0.1:8642",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path);
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as T;
  }

  async validate(document: string): Promise<ValidatePayload> {
    const response = await this.fetchImpl(this.baseUrl + "/api/validate", {
      method: "POST",
      headers: { "Content-Type": "text/plain; charset=utf-8" },
      body: document,
    });
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as ValidatePayload;
  }

  listPolicies(): Promise<ListingPayload> {
    return this.getJson("/api/policies");
  }

  async getPolicy(key: string, version?: number): Promise<PolicyPayload> {
    const query = version === undefined ? "" : `?version=${version}`;
    const response = await this.fetchImpl(
      `${this.baseUrl}/api/policies/${key}${query}`,
      { headers: { Accept: "application/json" } },
    );
    if (!response.ok) {
      throw new ApiError(response.status, await response.text());
    }
    return (await response.json()) as PolicyPayload;
  }

  taxonomy(key: string): Promise<TaxonomyPayload> {
    return this.getJson(`/api/policies/${key}/taxonomy`);
  }

  compare(a: string, b: string): Promise<ComparePayload> {
    const params = new URLSearchParams({ a, b });
    return this.getJson(`/api/compare?${params}`);
  }

  rules(): Promise<RulesPayload> {
    return this.getJson("/api/rules");
  }
}

/**
 * Debounce with latest-wins semantics: at most one call per quiet period,
 * and results from superseded calls are dropped via a sequence number.
 */
export function debounceLatest<A extends unknown[], R>(
  fn: (...args: A) => Promise<R>,
  waitMs: number,
  onResult: (result: R) => void,
  onError: (error: unknown) => void = () => undefined,
): (...args: A) => void {
  let timer: ReturnType<typeof setTimeout> | undefined;
  let sequence = 0;
  return (...args: A) => {
    if (timer !== undefined) {
      clearTimeout(timer);
    }
    timer = setTimeout(() => {
      const ticket = ++sequence;
      fn(...args).then(
        (result) => {
          if (ticket === sequence) {
            onResult(result);
          }
        },
        (error) => {
          if (ticket === sequence) {
            onError(error);
          }
        },
      );
    }, waitMs);
  };
}

/** Debounce period for live validation, per the authoring-form design. */
export const VALIDATE_DEBOUNCE_MS = 500;
