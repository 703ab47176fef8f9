// Thin typed client for the extraction service. The UI never computes
// extraction or simulation itself; everything shown comes from here.

export type ParameterInfo = {
  name: string;
  stage: "cgg" | "id";
  global_min: number;
  global_max: number;
};

export type ExtractionResponse = {
  stage: string;
  params: Record<string, number>;
  constraints: Record<string, [number, number]>;
  saturation: Record<string, "low" | "high" | "none">;
  rmse_percent: number;
  reconstructed_curve: number[];
  model_hash: string;
};

export type SimulateResponse = {
  stage: string;
  curve: number[];
  scaled?: number[];
  log10?: number[];
};

export type TwoStageResponse = {
  cgg: ExtractionResponse & { provenance: string };
  id: ExtractionResponse & { provenance: string };
};

export class ApiError extends Error {
  status: number;
  parameter?: string;

  constructor(status: number, message: string, parameter?: string) {
    super(message);
    this.status = status;
    this.parameter = parameter;
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  const body = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, body.error ?? resp.statusText,
      body.parameter);
  }
  return body as T;
}

function post<T>(path: string, payload: unknown): Promise<T> {
  return request<T>(path, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
}

export const api = {
  parameters: () => request<ParameterInfo[]>("/api/parameters"),
  health: () => request<{ status: string }>("/api/health"),
  extract: (payload: unknown) =>
    post<ExtractionResponse>("/api/extract", payload),
  simulate: (payload: unknown) =>
    post<SimulateResponse>("/api/simulate", payload),
  twoStage: (payload: unknown) =>
    post<TwoStageResponse>("/api/two-stage-extract", payload),
};
