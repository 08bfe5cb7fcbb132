// Parser for the psa_samples.csv contract: one row per iteration with
// sampled parameter columns followed by per strategy x subgroup outcome
// blocks (cost_direct, cost_prod, cost_oop, qalys).

import { DataFormatError, Manifest, PsaSamples } from "./types.js";

export function parsePsaSamplesCsv(text: string, manifest: Manifest): PsaSamples {
  const lines = text.split(/\r?\n/).filter((line) => line.length > 0);
  if (lines.length < 2) {
    throw new DataFormatError("psa_samples.csv has no data rows");
  }
  const header = lines[0].split(",");
  if (header[0] !== "iteration") {
    throw new DataFormatError("psa_samples.csv must start with an iteration column");
  }
  const columnIndex = new Map<string, number>();
  header.forEach((name, i) => columnIndex.set(name, i));

  const outcomeColumns: string[] = [];
  for (const strategy of manifest.strategies) {
    for (const subgroup of manifest.subgroups) {
      for (const comp of ["cost_direct", "cost_prod", "cost_oop", "qalys"]) {
        outcomeColumns.push(`${strategy}.${subgroup.name}.${comp}`);
      }
    }
  }
  for (const column of outcomeColumns) {
    if (!columnIndex.has(column)) {
      throw new DataFormatError(`psa_samples.csv is missing column ${column}`);
    }
  }
  const parameterNames = header.slice(1, header.length - outcomeColumns.length);

  const n = lines.length - 1;
  if (n !== manifest.iterations) {
    throw new DataFormatError(
      `psa_samples.csv has ${n} rows but the manifest declares ` +
        `${manifest.iterations} iterations`
    );
  }

  const matrix: Float64Array[] = header.map(() => new Float64Array(n));
  for (let i = 0; i < n; i++) {
    const cells = lines[i + 1].split(",");
    if (cells.length !== header.length) {
      throw new DataFormatError(
        `psa_samples.csv row ${i + 1} has ${cells.length} cells, ` +
          `expected ${header.length}`
      );
    }
    for (let c = 0; c < cells.length; c++) {
      const value = Number(cells[c]);
      if (!Number.isFinite(value)) {
        throw new DataFormatError(
          `psa_samples.csv row ${i + 1}, column ${header[c]}: ` +
            `unparseable value ${cells[c]}`
        );
      }
      matrix[c][i] = value;
    }
  }

  const column = (name: string): Float64Array => matrix[columnIndex.get(name)!];

  const outcomes: PsaSamples["outcomes"] = {};
  for (const strategy of manifest.strategies) {
    outcomes[strategy] = {};
    for (const subgroup of manifest.subgroups) {
      const prefix = `${strategy}.${subgroup.name}`;
      outcomes[strategy][subgroup.name] = {
        costDirect: column(`${prefix}.cost_direct`),
        costProd: column(`${prefix}.cost_prod`),
        costOop: column(`${prefix}.cost_oop`),
        qalys: column(`${prefix}.qalys`),
      };
    }
  }
  const parameters: Record<string, Float64Array> = {};
  for (const name of parameterNames) {
    parameters[name] = column(name);
  }
  return { iterations: n, parameterNames, parameters, outcomes };
}
