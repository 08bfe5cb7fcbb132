// Explorer state: loading the published artifacts, recomputing the view
// model, and exporting snapshots. recomputeView is a pure function of the
// state; the UI layer owns all mutation.

import { computeView } from "./compute.js";
import { parsePsaSamplesCsv } from "./csv.js";
import {
  EPSILON_MAX,
  EPSILON_MIN,
  ExplorerState,
  LAMBDA_MAX,
  LAMBDA_MIN,
  ResultsBundle,
  SchemaMismatchError,
  SUPPORTED_SCHEMA_VERSION,
  ViewModel,
} from "./types.js";

export function loadBundle(resultsJson: string, samplesCsv: string): ExplorerState {
  let bundle: ResultsBundle;
  try {
    bundle = JSON.parse(resultsJson) as ResultsBundle;
  } catch (err) {
    throw new SchemaMismatchError(`results.json is not valid JSON: ${err}`);
  }
  const version = bundle?.manifest?.schema_version;
  if (version !== SUPPORTED_SCHEMA_VERSION) {
    throw new SchemaMismatchError(
      `results.json schema_version ${version} is not supported ` +
        `(expected ${SUPPORTED_SCHEMA_VERSION})`
    );
  }
  const samples = parsePsaSamplesCsv(samplesCsv, bundle.manifest);
  return {
    lambda: clamp(bundle.manifest.wtp_threshold, LAMBDA_MIN, LAMBDA_MAX),
    epsilon: clamp(bundle.manifest.inequality_aversion, EPSILON_MIN, EPSILON_MAX),
    activePerspective: "both",
    bundle,
    samples,
  };
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

export function recomputeView(state: ExplorerState): ViewModel {
  return computeView(state.bundle, state.samples, state.lambda, state.epsilon);
}

export interface Snapshot {
  lambda: number;
  epsilon: number;
  active_perspective: string;
  spec_digest: string;
  master_seed: number;
  decisions: Record<string, { chosen: string; nmb_per_strategy: Record<string, number> }>;
  deterministic_vop: number;
  evop: number;
  discordance_probability: number;
  nmb_eq: number;
  nmb_unweighted: number;
  equity_weights: Record<string, number>;
}

/** Settings plus derived numbers, ready to paste into a brief. */
export function exportSnapshot(state: ExplorerState): Snapshot {
  const view = recomputeView(state);
  return {
    lambda: state.lambda,
    epsilon: state.epsilon,
    active_perspective: state.activePerspective,
    spec_digest: state.bundle.manifest.spec_digest,
    master_seed: state.bundle.manifest.master_seed,
    decisions: {
      health_system: {
        chosen: view.decisions.health_system.chosen,
        nmb_per_strategy: view.decisions.health_system.nmbPerStrategy,
      },
      societal: {
        chosen: view.decisions.societal.chosen,
        nmb_per_strategy: view.decisions.societal.nmbPerStrategy,
      },
    },
    deterministic_vop: view.deterministicVop,
    evop: view.evop,
    discordance_probability: view.discordanceProbability,
    nmb_eq: view.equity.nmbEq,
    nmb_unweighted: view.equity.nmbUnweighted,
    equity_weights: view.equity.weights,
  };
}
