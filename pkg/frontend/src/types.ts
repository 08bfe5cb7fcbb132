// Shapes of the artifacts published by the analysis pipeline
// (results.json + psa_samples.csv) and of the explorer's own state.

export type PerspectiveName = "health_system" | "societal";

export interface SubgroupInfo {
  name: string;
  population_share: number;
  baseline_health: number;
}

export interface Manifest {
  schema_version: number;
  tool: string;
  tool_version: string;
  spec_digest: string;
  master_seed: number;
  generated_at: string;
  wtp_threshold: number;
  inequality_aversion: number;
  iterations: number;
  comparator: string;
  strategies: string[];
  states: string[];
  subgroups: SubgroupInfo[];
  horizon_cycles: number;
  cycle_length_years: number;
  discount: { costs: number; effects: number };
}

export interface LedgerComponents {
  cost_direct_medical: number;
  cost_productivity: number;
  cost_out_of_pocket: number;
  qalys: number;
}

export interface StoredDecision {
  wtp: number;
  perspective: string;
  chosen_strategy: string;
  nmb_per_strategy: Record<string, number>;
  discordant_with: string | null;
}

export interface ResultsBundle {
  manifest: Manifest;
  deterministic: {
    per_strategy: Record<string, LedgerComponents>;
    per_subgroup: Record<string, Record<string, LedgerComponents>>;
    perspectives: Record<
      PerspectiveName,
      { icer: Record<string, unknown>; decision: StoredDecision }
    >;
    vop: { deterministic_loss: number };
  };
  psa_summary: {
    iterations: number;
    ceac: {
      wtp_grid: number[];
      strategies: string[];
      societal: number[][];
      health_system: number[][];
    };
  };
  dcea: Record<string, unknown>;
  voi: {
    evpi_per_person: Record<PerspectiveName, number>;
    evop: number;
    deterministic_vop: number;
    discordance_probability: number;
  };
  files: Record<string, string>;
}

/** Column-parsed psa_samples.csv: one Float64Array per outcome column. */
export interface PsaSamples {
  iterations: number;
  parameterNames: string[];
  parameters: Record<string, Float64Array>;
  /** outcome[strategy][subgroup] = 4 columns */
  outcomes: Record<
    string,
    Record<
      string,
      {
        costDirect: Float64Array;
        costProd: Float64Array;
        costOop: Float64Array;
        qalys: Float64Array;
      }
    >
  >;
}

export interface ExplorerState {
  lambda: number;
  epsilon: number;
  activePerspective: PerspectiveName | "both";
  bundle: ResultsBundle;
  samples: PsaSamples;
}

export interface DecisionView {
  chosen: string;
  nmbPerStrategy: Record<string, number>;
}

export interface ViewModel {
  lambda: number;
  epsilon: number;
  decisions: Record<PerspectiveName, DecisionView>;
  discordant: boolean;
  deterministicVop: number;
  evop: number;
  discordanceProbability: number;
  ceac: {
    grid: number[];
    strategies: string[];
    probabilities: Record<PerspectiveName, number[][]>;
    atLambda: Record<PerspectiveName, number[]>;
  };
  deltaNmb: {
    mean: number;
    quantiles: Record<string, number>;
    histogram: { edges: number[]; counts: number[] };
  };
  equity: {
    weights: Record<string, number>;
    referenceHealth: number;
    nmbEq: number;
    nmbUnweighted: number;
    plane: { netHealthBenefit: Float64Array; equityImpact: Float64Array } | null;
  };
  cePlane: {
    deltaEffect: Float64Array;
    deltaCost: Record<PerspectiveName, Float64Array>;
  };
}

export const LAMBDA_MIN = 0;
export const LAMBDA_MAX = 150_000;
export const LAMBDA_STEP = 500;
export const EPSILON_MIN = 0;
export const EPSILON_MAX = 3;
export const EPSILON_STEP = 0.05;

export const SUPPORTED_SCHEMA_VERSION = 1;

export class SchemaMismatchError extends Error {}

export class DataFormatError extends Error {}
