// DOM wiring and hand-rolled SVG charts. No framework, no chart library:
// the dashboard is a static page fed by results.json + psa_samples.csv.

import { exportSnapshot, loadBundle, recomputeView } from "./state.js";
import {
  EPSILON_MAX,
  EPSILON_MIN,
  EPSILON_STEP,
  ExplorerState,
  LAMBDA_MAX,
  LAMBDA_MIN,
  LAMBDA_STEP,
  PerspectiveName,
  ViewModel,
} from "./types.js";

let state: ExplorerState | null = null;

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};

function money(value: number): string {
  const sign = value < 0 ? "-" : "";
  return `${sign}$${Math.abs(value).toLocaleString("en-US", {
    maximumFractionDigits: 0,
  })}`;
}

function showError(message: string): void {
  const banner = $("error-banner");
  banner.textContent = message;
  banner.classList.remove("hidden");
}

function clearError(): void {
  $("error-banner").classList.add("hidden");
}

export async function boot(): Promise<void> {
  const lambdaSlider = $("lambda") as HTMLInputElement;
  const epsilonSlider = $("epsilon") as HTMLInputElement;
  lambdaSlider.min = String(LAMBDA_MIN);
  lambdaSlider.max = String(LAMBDA_MAX);
  lambdaSlider.step = String(LAMBDA_STEP);
  epsilonSlider.min = String(EPSILON_MIN);
  epsilonSlider.max = String(EPSILON_MAX);
  epsilonSlider.step = String(EPSILON_STEP);

  lambdaSlider.addEventListener("input", () => {
    if (!state) return;
    state.lambda = Number(lambdaSlider.value);
    render();
  });
  epsilonSlider.addEventListener("input", () => {
    if (!state) return;
    state.epsilon = Number(epsilonSlider.value);
    render();
  });
  ($("perspective") as HTMLSelectElement).addEventListener("change", (ev) => {
    if (!state) return;
    state.activePerspective = (ev.target as HTMLSelectElement)
      .value as ExplorerState["activePerspective"];
    render();
  });
  $("snapshot").addEventListener("click", () => {
    if (!state) return;
    const payload = JSON.stringify(exportSnapshot(state), null, 2);
    const blob = new Blob([payload], { type: "application/json" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = `snapshot_wtp${state.lambda}_eps${state.epsilon}.json`;
    link.click();
    URL.revokeObjectURL(link.href);
  });
  $("load-files").addEventListener("click", async () => {
    const resultsInput = $("results-file") as HTMLInputElement;
    const samplesInput = $("samples-file") as HTMLInputElement;
    if (!resultsInput.files?.length || !samplesInput.files?.length) {
      showError("Choose both results.json and psa_samples.csv first.");
      return;
    }
    await loadFrom(
      await resultsInput.files[0].text(),
      await samplesInput.files[0].text()
    );
  });

  // Static deployments can drop the two artifacts next to the page.
  try {
    const [results, samples] = await Promise.all([
      fetch("data/results.json"),
      fetch("data/psa_samples.csv"),
    ]);
    if (results.ok && samples.ok) {
      await loadFrom(await results.text(), await samples.text());
      return;
    }
  } catch {
    // No bundled data; wait for file inputs.
  }
  $("file-picker").classList.remove("hidden");
}

async function loadFrom(resultsJson: string, samplesCsv: string): Promise<void> {
  try {
    state = loadBundle(resultsJson, samplesCsv);
  } catch (err) {
    showError(String(err instanceof Error ? err.message : err));
    return;
  }
  clearError();
  ($("lambda") as HTMLInputElement).value = String(state.lambda);
  ($("epsilon") as HTMLInputElement).value = String(state.epsilon);
  $("file-picker").classList.add("hidden");
  $("dashboard").classList.remove("hidden");
  const m = state.bundle.manifest;
  $("model-line").textContent =
    `${m.strategies.join(" vs ")} | ${m.iterations} iterations | ` +
    `seed ${m.master_seed} | digest ${m.spec_digest.slice(0, 12)}`;
  render();
}

function render(): void {
  if (!state) return;
  const view = recomputeView(state);
  $("lambda-readout").textContent = `${money(view.lambda)}/QALY`;
  $("epsilon-readout").textContent = view.epsilon.toFixed(2);

  renderDecision("health_system", view);
  renderDecision("societal", view);

  const badge = $("vop-badge");
  badge.textContent = view.discordant
    ? `perspectives disagree: losing ${money(view.deterministicVop)}/person`
    : "perspectives agree";
  badge.className = view.discordant ? "badge discordant" : "badge concordant";
  $("evop-line").textContent =
    `EVoP ${money(view.evop)}/person | P(discordance) ` +
    `${(view.discordanceProbability * 100).toFixed(1)}%`;

  $("nmb-eq").textContent = money(view.equity.nmbEq);
  $("nmb-plain").textContent = money(view.equity.nmbUnweighted);
  $("equity-weights").textContent = Object.entries(view.equity.weights)
    .map(([name, w]) => `${name}: ${w.toFixed(3)}`)
    .join("   ");

  const dn = view.deltaNmb;
  $("delta-nmb-line").textContent =
    `mean ${money(dn.mean)} | 95% interval ` +
    `[${money(dn.quantiles["2.5"])}, ${money(dn.quantiles["97.5"])}]`;

  drawCeac(view);
  drawHistogram(view);
  drawEquityPlane(view);
}

function renderDecision(perspective: PerspectiveName, view: ViewModel): void {
  const decision = view.decisions[perspective];
  const comparator = state!.bundle.manifest.comparator;
  const card = $(`${perspective}-card`);
  const verdict = decision.chosen === comparator ? "Reject" : "Accept";
  card.querySelector(".verdict")!.textContent = verdict;
  card.querySelector(".chosen")!.textContent = decision.chosen;
  card.querySelector(".nmbs")!.textContent = Object.entries(decision.nmbPerStrategy)
    .map(([name, value]) => `${name}: ${money(value)}`)
    .join("   ");
  card.classList.toggle("accept", verdict === "Accept");
}

const CEAC_COLORS = ["#4477aa", "#ee6677", "#228833", "#ccbb44"];

function drawCeac(view: ViewModel): void {
  const svg = $("ceac-chart");
  const width = 560;
  const height = 240;
  const pad = 36;
  const active = state!.activePerspective;
  const perspectives: PerspectiveName[] =
    active === "both" ? ["societal", "health_system"] : [active];
  const x = (wtp: number) =>
    pad + ((width - 2 * pad) * wtp) / view.ceac.grid[view.ceac.grid.length - 1];
  const y = (p: number) => height - pad - (height - 2 * pad) * p;
  let parts = `
    <line x1="${pad}" y1="${y(0)}" x2="${width - pad}" y2="${y(0)}" class="axis"/>
    <line x1="${pad}" y1="${y(0)}" x2="${pad}" y2="${y(1)}" class="axis"/>
    <text x="${pad - 6}" y="${y(1) + 4}" class="tick" text-anchor="end">1</text>
    <text x="${pad - 6}" y="${y(0) + 4}" class="tick" text-anchor="end">0</text>
    <text x="${x(150000)}" y="${y(0) + 16}" class="tick" text-anchor="end">$150k</text>
  `;
  perspectives.forEach((perspective, pi) => {
    view.ceac.strategies.forEach((_name, k) => {
      const points = view.ceac.grid
        .map((wtp, li) => `${x(wtp)},${y(view.ceac.probabilities[perspective][li][k])}`)
        .join(" ");
      const dash = perspective === "health_system" ? 'stroke-dasharray="5 4"' : "";
      parts += `<polyline points="${points}" fill="none" ${dash}
        stroke="${CEAC_COLORS[k % CEAC_COLORS.length]}" stroke-width="2"
        opacity="${pi === 0 ? 1 : 0.8}"/>`;
    });
  });
  parts += `<line x1="${x(view.lambda)}" y1="${y(0)}" x2="${x(view.lambda)}"
    y2="${y(1)}" class="marker"/>`;
  const legend = view.ceac.strategies
    .map(
      (name, k) =>
        `<tspan fill="${CEAC_COLORS[k % CEAC_COLORS.length]}">&#9632; ${name}</tspan>`
    )
    .join("  ");
  parts += `<text x="${pad}" y="14" class="tick">${legend}
    (solid societal, dashed health system)</text>`;
  svg.innerHTML = parts;
}

function drawHistogram(view: ViewModel): void {
  const svg = $("delta-chart");
  const { edges, counts } = view.deltaNmb.histogram;
  const width = 560;
  const height = 180;
  const pad = 30;
  const maxCount = Math.max(...counts, 1);
  const lo = edges[0];
  const hi = edges[edges.length - 1];
  const span = hi > lo ? hi - lo : 1;
  const x = (v: number) => pad + ((width - 2 * pad) * (v - lo)) / span;
  const y = (c: number) => height - pad - ((height - 2 * pad) * c) / maxCount;
  let parts = `<line x1="${pad}" y1="${height - pad}" x2="${width - pad}"
    y2="${height - pad}" class="axis"/>`;
  counts.forEach((count, i) => {
    parts += `<rect x="${x(edges[i])}" y="${y(count)}"
      width="${Math.max(1, x(edges[i + 1]) - x(edges[i]) - 1)}"
      height="${height - pad - y(count)}" class="bar"/>`;
  });
  if (lo < 0 && hi > 0) {
    parts += `<line x1="${x(0)}" y1="${pad}" x2="${x(0)}"
      y2="${height - pad}" class="zero"/>`;
  }
  for (const q of ["2.5", "50", "97.5"]) {
    const v = view.deltaNmb.quantiles[q];
    parts += `<line x1="${x(v)}" y1="${pad}" x2="${x(v)}" y2="${height - pad}"
      class="marker"/>`;
  }
  svg.innerHTML = parts;
}

function drawEquityPlane(view: ViewModel): void {
  const svg = $("equity-chart");
  const plane = view.equity.plane;
  if (!plane) {
    svg.innerHTML = `<text x="20" y="40" class="tick">single-subgroup model:
      equity plane unavailable</text>`;
    return;
  }
  const width = 560;
  const height = 240;
  const pad = 36;
  const xs = plane.equityImpact;
  const ys = plane.netHealthBenefit;
  const xLo = Math.min(0, ...xs);
  const xHi = Math.max(0, ...xs);
  const yLo = Math.min(0, ...ys);
  const yHi = Math.max(0, ...ys);
  const x = (v: number) =>
    pad + ((width - 2 * pad) * (v - xLo)) / (xHi - xLo || 1);
  const y = (v: number) =>
    height - pad - ((height - 2 * pad) * (v - yLo)) / (yHi - yLo || 1);
  let parts = `
    <line x1="${x(0)}" y1="${pad}" x2="${x(0)}" y2="${height - pad}" class="zero"/>
    <line x1="${pad}" y1="${y(0)}" x2="${width - pad}" y2="${y(0)}" class="zero"/>
    <text x="${width - pad}" y="${y(0) - 6}" class="tick" text-anchor="end">
      inequality reduced &#8594;</text>
    <text x="${x(0) + 6}" y="${pad + 4}" class="tick">&#8593; net health benefit</text>
  `;
  const step = Math.max(1, Math.floor(xs.length / 500));
  let winWin = 0;
  for (let i = 0; i < xs.length; i++) {
    if (xs[i] > 0 && ys[i] > 0) winWin += 1;
    if (i % step === 0) {
      parts += `<circle cx="${x(xs[i])}" cy="${y(ys[i])}" r="2" class="dot"/>`;
    }
  }
  parts += `<text x="${pad}" y="14" class="tick">win-win share:
    ${((winWin / xs.length) * 100).toFixed(1)}%</text>`;
  svg.innerHTML = parts;
}
