import type {
  AssembliesResponse,
  ModelInfo,
  PredictResponse,
  SimulateResponse,
} from "./types.js";

export class ServiceError extends Error {
  constructor(
    readonly status: number,
    readonly kind: string,
    message: string,
  ) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin JSON client for the prediction service. */
export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const err = body as { error?: string; message?: string };
      throw new ServiceError(
        resp.status,
        err.error ?? "unknown",
        err.message ?? `HTTP ${resp.status}`,
      );
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  assemblies(): Promise<AssembliesResponse> {
    return this.request<AssembliesResponse>("/api/assemblies");
  }

  model(): Promise<ModelInfo> {
    return this.request<ModelInfo>("/api/model");
  }

  predict(pattern: ReadonlyArray<number>): Promise<PredictResponse> {
    return this.post<PredictResponse>("/api/predict", { pattern });
  }

  simulate(pattern: ReadonlyArray<number>): Promise<SimulateResponse> {
    return this.post<SimulateResponse>("/api/simulate", { pattern });
  }
}
