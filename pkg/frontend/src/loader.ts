import { readFileSync } from "node:fs";

import type { FeatureMode, GraphSample } from "./types.js";
import { NUM_CLASSES } from "./types.js";

function fail(path: string, lineno: number, message: string): never {
  throw new Error(`${path}:${lineno}: ${message}`);
}

function checkNumberMatrix(value: unknown): value is number[][] {
  return (
    Array.isArray(value) &&
    value.every(
      (row) => Array.isArray(row) && row.every((v) => typeof v === "number" && Number.isFinite(v)),
    )
  );
}

/**
 * Load a line-delimited JSON graph dataset.
 *
 * Every record must carry nodes, edges, node features, feature names, and an
 * integer label in 0..9; feature dimensionality must be uniform across the
 * dataset. Errors name the offending line.
 */
export function loadDataset(path: string): GraphSample[] {
  const text = readFileSync(path, "utf8");
  const samples: GraphSample[] = [];
  let expectedDim: number | null = null;
  const lines = text.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const line = lines[i].trim();
    if (line.length === 0) continue;
    const lineno = i + 1;
    let record: Record<string, unknown>;
    try {
      record = JSON.parse(line) as Record<string, unknown>;
    } catch (err) {
      fail(path, lineno, `invalid JSON (${(err as Error).message})`);
    }
    for (const key of ["nodes", "edges", "node_features", "feature_names"]) {
      if (!(key in record)) fail(path, lineno, `missing field '${key}'`);
    }
    const nodes = record.nodes;
    const edges = record.edges;
    const features = record.node_features;
    if (!checkNumberMatrix(nodes)) fail(path, lineno, "'nodes' must be a numeric matrix");
    if (!checkNumberMatrix(edges)) fail(path, lineno, "'edges' must be index pairs");
    if (!checkNumberMatrix(features)) fail(path, lineno, "'node_features' must be a numeric matrix");
    if (features.length !== nodes.length) {
      fail(path, lineno, `expected ${nodes.length} feature rows, found ${features.length}`);
    }
    const dims = new Set(features.map((row) => row.length));
    if (dims.size > 1) fail(path, lineno, "ragged feature rows");
    const dim = features.length > 0 ? features[0].length : 0;
    if (expectedDim === null) {
      expectedDim = dim;
    } else if (dim !== expectedDim) {
      fail(path, lineno, `feature dimension ${dim} != ${expectedDim} seen earlier`);
    }
    const names = record.feature_names;
    if (!Array.isArray(names) || names.some((n) => typeof n !== "string")) {
      fail(path, lineno, "'feature_names' must be a string list");
    }
    if ((names as string[]).length !== dim) {
      fail(path, lineno, `${(names as string[]).length} feature names for dimension ${dim}`);
    }
    const label = record.label;
    if (typeof label !== "number" || !Number.isInteger(label) || label < 0 || label >= NUM_CLASSES) {
      fail(path, lineno, `label must be an integer in 0..${NUM_CLASSES - 1}, got ${String(label)}`);
    }
    for (const [a, b] of edges as number[][]) {
      if (!Number.isInteger(a) || !Number.isInteger(b) || a < 0 || b < 0 || a >= nodes.length || b >= nodes.length) {
        fail(path, lineno, `edge [${a}, ${b}] references a node out of range`);
      }
    }
    const edgeSaliency = Array.isArray(record.edge_saliency)
      ? (record.edge_saliency as number[])
      : [];
    samples.push({
      nodePositions: nodes,
      edgeIndexPairs: edges as number[][],
      nodeFeatures: features,
      featureNames: names as string[],
      edgeSaliency,
      label,
    });
  }
  return samples;
}

/** Column indices realizing a feature mode, resolved against feature names. */
export function featureColumns(sample: GraphSample, mode: FeatureMode): number[] {
  const wanted = mode === "both" ? ["intensity", "saliency"] : [mode];
  return wanted.map((name) => {
    const col = sample.featureNames.indexOf(name);
    if (col < 0) {
      throw new Error(`dataset has no '${name}' feature (available: ${sample.featureNames.join(", ")})`);
    }
    return col;
  });
}

/** Node feature matrix restricted to the columns of a feature mode. */
export function selectFeatures(sample: GraphSample, mode: FeatureMode): number[][] {
  const cols = featureColumns(sample, mode);
  return sample.nodeFeatures.map((row) => cols.map((c) => row[c]));
}
