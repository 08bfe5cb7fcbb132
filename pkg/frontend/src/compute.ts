// Client-side recomputation of every threshold- and aversion-dependent
// quantity from the per-iteration samples. The arithmetic mirrors the
// analysis engine exactly: perspective cost composition, population-share
// aggregation, the comparator-favoring 1e-9 tie rule, Atkinson weights,
// and the per-iteration value-of-perspective loss.

import {
  DecisionView,
  LedgerComponents,
  Manifest,
  PerspectiveName,
  PsaSamples,
  ResultsBundle,
  ViewModel,
} from "./types.js";

export const NMB_TIE_TOL = 1e-9;

export const CEAC_GRID: number[] = Array.from({ length: 31 }, (_, i) => i * 5000);

// Accumulation order mirrors the engine exactly (direct, then productivity,
// then out-of-pocket) so recomputed NMBs reproduce stored ones bit for bit.
function perspectiveCost(components: LedgerComponents, perspective: PerspectiveName): number {
  let cost = 0.0;
  cost += components.cost_direct_medical;
  if (perspective === "societal") {
    cost += components.cost_productivity;
    cost += components.cost_out_of_pocket;
  }
  return cost;
}

/** Comparator-favoring argmax: challenger must win by more than 1e-9. */
export function chooseStrategy(
  nmbPerStrategy: Record<string, number>,
  strategies: string[],
  comparator: string
): string {
  let best = comparator;
  let bestValue = nmbPerStrategy[comparator];
  for (const name of strategies) {
    if (name === comparator) continue;
    const value = nmbPerStrategy[name];
    if (value > bestValue + NMB_TIE_TOL) {
      best = name;
      bestValue = value;
    }
  }
  return best;
}

/** Deterministic decision from the stored per-strategy components. */
export function deterministicDecision(
  bundle: ResultsBundle,
  lambda: number,
  perspective: PerspectiveName
): DecisionView {
  const nmbPerStrategy: Record<string, number> = {};
  for (const name of bundle.manifest.strategies) {
    const comp = bundle.deterministic.per_strategy[name];
    nmbPerStrategy[name] = comp.qalys * lambda - perspectiveCost(comp, perspective);
  }
  return {
    chosen: chooseStrategy(
      nmbPerStrategy,
      bundle.manifest.strategies,
      bundle.manifest.comparator
    ),
    nmbPerStrategy,
  };
}

/** Societal net benefit forgone by the health-system choice, at base parameters. */
export function deterministicVop(bundle: ResultsBundle, lambda: number): number {
  const societal = deterministicDecision(bundle, lambda, "societal");
  const healthSystem = deterministicDecision(bundle, lambda, "health_system");
  const loss =
    societal.nmbPerStrategy[societal.chosen] -
    societal.nmbPerStrategy[healthSystem.chosen];
  return Math.max(0, loss);
}

/** Population per-capita NMB matrix [iteration][strategy] at one threshold. */
export function nmbMatrix(
  samples: PsaSamples,
  manifest: Manifest,
  lambda: number,
  perspective: PerspectiveName
): Float64Array[] {
  const n = samples.iterations;
  const out = manifest.strategies.map(() => new Float64Array(n));
  manifest.strategies.forEach((strategy, k) => {
    const column = out[k];
    for (const subgroup of manifest.subgroups) {
      const block = samples.outcomes[strategy][subgroup.name];
      const share = subgroup.population_share;
      for (let i = 0; i < n; i++) {
        let cost = block.costDirect[i];
        if (perspective === "societal") {
          cost += block.costProd[i];
          cost += block.costOop[i];
        }
        column[i] += share * (block.qalys[i] * lambda - cost);
      }
    }
  });
  return out;
}

function chosenIndices(
  nmb: Float64Array[],
  strategies: string[],
  comparator: string
): Int32Array {
  const comparatorIndex = strategies.indexOf(comparator);
  const n = nmb[0].length;
  const chosen = new Int32Array(n);
  for (let i = 0; i < n; i++) {
    let best = comparatorIndex;
    let bestValue = nmb[comparatorIndex][i];
    for (let k = 0; k < strategies.length; k++) {
      if (k === comparatorIndex) continue;
      if (nmb[k][i] > bestValue + NMB_TIE_TOL) {
        best = k;
        bestValue = nmb[k][i];
      }
    }
    chosen[i] = best;
  }
  return chosen;
}

export interface EvopView {
  evop: number;
  discordanceProbability: number;
}

/** Expected value of perspective over the sampled iterations. */
export function evopAt(
  samples: PsaSamples,
  manifest: Manifest,
  lambda: number
): EvopView {
  const nmbHs = nmbMatrix(samples, manifest, lambda, "health_system");
  const nmbSoc = nmbMatrix(samples, manifest, lambda, "societal");
  const { strategies, comparator } = manifest;
  const chosenHs = chosenIndices(nmbHs, strategies, comparator);
  const chosenSoc = chosenIndices(nmbSoc, strategies, comparator);
  const n = samples.iterations;
  let lossSum = 0;
  let discordant = 0;
  for (let i = 0; i < n; i++) {
    const loss = nmbSoc[chosenSoc[i]][i] - nmbSoc[chosenHs[i]][i];
    lossSum += Math.max(0, loss);
    if (chosenHs[i] !== chosenSoc[i]) discordant += 1;
  }
  return { evop: lossSum / n, discordanceProbability: discordant / n };
}

/** Probability each strategy is NMB-optimal, per grid threshold. */
export function ceacCurve(
  samples: PsaSamples,
  manifest: Manifest,
  grid: number[],
  perspective: PerspectiveName
): number[][] {
  const { strategies, comparator } = manifest;
  return grid.map((lambda) => {
    const nmb = nmbMatrix(samples, manifest, lambda, perspective);
    const chosen = chosenIndices(nmb, strategies, comparator);
    const counts = new Array(strategies.length).fill(0);
    for (let i = 0; i < chosen.length; i++) counts[chosen[i]] += 1;
    return counts.map((c) => c / samples.iterations);
  });
}

function sortedQuantile(sorted: Float64Array, q: number): number {
  const h = (sorted.length - 1) * q;
  const lo = Math.floor(h);
  const hi = Math.ceil(h);
  return sorted[lo] + (h - lo) * (sorted[hi] - sorted[lo]);
}

export interface DeltaNmbView {
  series: Float64Array;
  mean: number;
  quantiles: Record<string, number>;
  histogram: { edges: number[]; counts: number[] };
}

/** Societal-minus-health-system incremental NMB distribution. */
export function deltaNmbAt(
  samples: PsaSamples,
  manifest: Manifest,
  lambda: number
): DeltaNmbView {
  const intervention = manifest.strategies.find((s) => s !== manifest.comparator)!;
  const comparatorIndex = manifest.strategies.indexOf(manifest.comparator);
  const interventionIndex = manifest.strategies.indexOf(intervention);
  const nmbHs = nmbMatrix(samples, manifest, lambda, "health_system");
  const nmbSoc = nmbMatrix(samples, manifest, lambda, "societal");
  const n = samples.iterations;
  const series = new Float64Array(n);
  let sum = 0;
  for (let i = 0; i < n; i++) {
    series[i] =
      nmbSoc[interventionIndex][i] -
      nmbSoc[comparatorIndex][i] -
      (nmbHs[interventionIndex][i] - nmbHs[comparatorIndex][i]);
    sum += series[i];
  }
  const sorted = Float64Array.from(series).sort();
  const quantiles: Record<string, number> = {};
  for (const q of [2.5, 25, 50, 75, 97.5]) {
    quantiles[String(q)] = sortedQuantile(sorted, q / 100);
  }
  const binCount = 30;
  const lo = sorted[0];
  const hi = sorted[n - 1];
  const width = hi > lo ? (hi - lo) / binCount : 1;
  const counts = new Array(binCount).fill(0);
  for (let i = 0; i < n; i++) {
    const bin = Math.min(binCount - 1, Math.floor((series[i] - lo) / width));
    counts[bin] += 1;
  }
  const edges = Array.from({ length: binCount + 1 }, (_, i) => lo + i * width);
  return { series, mean: sum / n, quantiles, histogram: { edges, counts } };
}

// --- Equity -----------------------------------------------------------

export function atkinsonWeights(
  manifest: Manifest,
  epsilon: number
): { weights: Record<string, number>; referenceHealth: number } {
  let reference = 0;
  for (const g of manifest.subgroups) {
    reference += g.population_share * g.baseline_health;
  }
  const weights: Record<string, number> = {};
  for (const g of manifest.subgroups) {
    weights[g.name] = Math.pow(reference / g.baseline_health, epsilon);
  }
  return { weights, referenceHealth: reference };
}

/** Equity-weighted incremental NMB from the deterministic subgroup results. */
export function equityWeightedNmb(
  bundle: ResultsBundle,
  lambda: number,
  epsilon: number
): { nmbEq: number; nmbUnweighted: number; weights: Record<string, number>; referenceHealth: number } {
  const manifest = bundle.manifest;
  const intervention = manifest.strategies.find((s) => s !== manifest.comparator)!;
  const { weights, referenceHealth } = atkinsonWeights(manifest, epsilon);
  let nmbEq = 0;
  let nmbUnweighted = 0;
  for (const g of manifest.subgroups) {
    const byStrategy = bundle.deterministic.per_subgroup[g.name];
    const dQalys = byStrategy[intervention].qalys - byStrategy[manifest.comparator].qalys;
    const dCost =
      perspectiveCost(byStrategy[intervention], "societal") -
      perspectiveCost(byStrategy[manifest.comparator], "societal");
    nmbEq += g.population_share * weights[g.name] * (dQalys * lambda - dCost);
    nmbUnweighted += g.population_share * (dQalys * lambda - dCost);
  }
  return { nmbEq, nmbUnweighted, weights, referenceHealth };
}

export function atkinsonIndex(
  levels: number[],
  shares: number[],
  epsilon: number
): number {
  const total = shares.reduce((a, b) => a + b, 0);
  let mean = 0;
  for (let i = 0; i < levels.length; i++) mean += (shares[i] / total) * levels[i];
  let ede: number;
  if (epsilon === 1) {
    let logSum = 0;
    for (let i = 0; i < levels.length; i++) {
      logSum += (shares[i] / total) * Math.log(levels[i]);
    }
    ede = Math.exp(logSum);
  } else {
    let powSum = 0;
    for (let i = 0; i < levels.length; i++) {
      powSum += (shares[i] / total) * Math.pow(levels[i], 1 - epsilon);
    }
    ede = Math.pow(powSum, 1 / (1 - epsilon));
  }
  return 1 - ede / mean;
}

export interface EquityPlaneView {
  netHealthBenefit: Float64Array;
  equityImpact: Float64Array;
}

/** Per-iteration equity plane coordinates (societal costs). */
export function equityPlaneAt(
  samples: PsaSamples,
  manifest: Manifest,
  lambda: number,
  epsilon: number
): EquityPlaneView | null {
  if (manifest.subgroups.length < 2 || lambda <= 0) return null;
  const intervention = manifest.strategies.find((s) => s !== manifest.comparator)!;
  const n = samples.iterations;
  const shares = manifest.subgroups.map((g) => g.population_share);
  const baseline = manifest.subgroups.map((g) => g.baseline_health);
  const preIndex = atkinsonIndex(baseline, shares, epsilon);
  const netHealthBenefit = new Float64Array(n);
  const equityImpact = new Float64Array(n);
  const postLevels = new Array(manifest.subgroups.length).fill(0);
  for (let i = 0; i < n; i++) {
    let nhb = 0;
    manifest.subgroups.forEach((g, gi) => {
      const blockNew = samples.outcomes[intervention][g.name];
      const blockComp = samples.outcomes[manifest.comparator][g.name];
      const dQalys = blockNew.qalys[i] - blockComp.qalys[i];
      const dCost =
        blockNew.costDirect[i] +
        blockNew.costProd[i] +
        blockNew.costOop[i] -
        (blockComp.costDirect[i] + blockComp.costProd[i] + blockComp.costOop[i]);
      nhb += g.population_share * (dQalys - dCost / lambda);
      postLevels[gi] = g.baseline_health + dQalys;
    });
    netHealthBenefit[i] = nhb;
    equityImpact[i] = -(atkinsonIndex(postLevels, shares, epsilon) - preIndex);
  }
  return { netHealthBenefit, equityImpact };
}

// --- Assembled view ----------------------------------------------------

export function computeView(
  bundle: ResultsBundle,
  samples: PsaSamples,
  lambda: number,
  epsilon: number
): ViewModel {
  const manifest = bundle.manifest;
  const decisions = {
    health_system: deterministicDecision(bundle, lambda, "health_system"),
    societal: deterministicDecision(bundle, lambda, "societal"),
  };
  const equity = equityWeightedNmb(bundle, lambda, epsilon);
  const evopView = evopAt(samples, manifest, lambda);
  const probabilities = {
    health_system: ceacCurve(samples, manifest, CEAC_GRID, "health_system"),
    societal: ceacCurve(samples, manifest, CEAC_GRID, "societal"),
  };
  const atLambda = {
    health_system: ceacCurve(samples, manifest, [lambda], "health_system")[0],
    societal: ceacCurve(samples, manifest, [lambda], "societal")[0],
  };
  const intervention = manifest.strategies.find((s) => s !== manifest.comparator)!;
  const n = samples.iterations;
  const deltaEffect = new Float64Array(n);
  const deltaCost: Record<PerspectiveName, Float64Array> = {
    health_system: new Float64Array(n),
    societal: new Float64Array(n),
  };
  for (const g of manifest.subgroups) {
    const blockNew = samples.outcomes[intervention][g.name];
    const blockComp = samples.outcomes[manifest.comparator][g.name];
    for (let i = 0; i < n; i++) {
      deltaEffect[i] += g.population_share * (blockNew.qalys[i] - blockComp.qalys[i]);
      const dDirect = blockNew.costDirect[i] - blockComp.costDirect[i];
      const dOther =
        blockNew.costProd[i] +
        blockNew.costOop[i] -
        (blockComp.costProd[i] + blockComp.costOop[i]);
      deltaCost.health_system[i] += g.population_share * dDirect;
      deltaCost.societal[i] += g.population_share * (dDirect + dOther);
    }
  }
  return {
    lambda,
    epsilon,
    decisions,
    discordant: decisions.health_system.chosen !== decisions.societal.chosen,
    deterministicVop: deterministicVop(bundle, lambda),
    evop: evopView.evop,
    discordanceProbability: evopView.discordanceProbability,
    ceac: {
      grid: CEAC_GRID,
      strategies: manifest.strategies,
      probabilities,
      atLambda,
    },
    deltaNmb: (({ mean, quantiles, histogram }) => ({ mean, quantiles, histogram }))(
      deltaNmbAt(samples, manifest, lambda)
    ),
    equity: {
      weights: equity.weights,
      referenceHealth: equity.referenceHealth,
      nmbEq: equity.nmbEq,
      nmbUnweighted: equity.nmbUnweighted,
      plane: equityPlaneAt(samples, manifest, lambda, epsilon),
    },
    cePlane: { deltaEffect, deltaCost },
  };
}
