// Wire types of the prediction service (schema v1).

export interface TrajectoryPoint {
  index: number;
  time_efpd: number;
  rho: number;
}

export interface ModelInfo {
  v: number;
  layer_dims: number[];
  dropout: number;
  output_activation: string;
  metadata: Record<string, unknown>;
}

export interface PredictResponse {
  v: number;
  pattern: number[];
  features: number[];
  rho_max: number;
  trajectory: TrajectoryPoint[];
  cycle_length_efpd: number;
  model: ModelInfo;
}

export interface SimulateResponse {
  v: number;
  pattern: number[];
  times: number[];
  k_eff: number[];
  rho: number[];
  rho_max: number;
  cycle_length_efpd: number | null;
  censored: boolean;
}

export interface AssemblyInfo {
  id: number;
  name: string;
  enrichment_wt_pct: number | null;
  ba_rods: number | null;
  reference_cycle_efpd: number;
}

export interface AssembliesResponse {
  v: number;
  assemblies: AssemblyInfo[];
}

export interface ApiError {
  error: string;
  message: string;
}
