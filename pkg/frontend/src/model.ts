import * as tf from "@tensorflow/tfjs";

import { mulberry32 } from "./rng.js";
import type { GraphSample } from "./types.js";
import { NUM_CLASSES } from "./types.js";

export interface ModelConfig {
  hidden: number;
  directionBins: number;
  seed: number;
}

export const DEFAULT_MODEL: ModelConfig = { hidden: 32, directionBins: 4, seed: 0 };

/**
 * Direction-binned neighborhood operators of one graph.
 *
 * Bin b of the result is a row-normalized adjacency matrix restricted to
 * neighbors whose relative offset falls in the b-th angular sector, so a
 * graph convolution can weight neighbors by direction (a coarse stand-in
 * for spline-weighted continuous kernels).
 */
export function buildAdjacency(sample: GraphSample, directionBins: number): Float32Array {
  const n = sample.nodePositions.length;
  const adj = new Float32Array(directionBins * n * n);
  const degree = new Float32Array(n);
  for (const [a, b] of sample.edgeIndexPairs) {
    degree[a] += 1;
    degree[b] += 1;
  }
  const put = (dst: number, src: number) => {
    const dr = sample.nodePositions[src][0] - sample.nodePositions[dst][0];
    const dc = sample.nodePositions[src][1] - sample.nodePositions[dst][1];
    const angle = Math.atan2(dr, dc); // [-pi, pi]
    let bin = Math.floor(((angle + Math.PI) / (2 * Math.PI)) * directionBins);
    if (bin === directionBins) bin = 0;
    adj[bin * n * n + dst * n + src] += 1 / Math.max(degree[dst], 1);
  };
  for (const [a, b] of sample.edgeIndexPairs) {
    put(a, b);
    put(b, a);
  }
  return adj;
}

/** Per-class counts of a label list (diagnostics and chance baselines). */
export function classHistogram(labels: number[]): number[] {
  const hist = new Array<number>(NUM_CLASSES).fill(0);
  for (const l of labels) hist[l] += 1;
  return hist;
}

function glorot(rand: () => number, rows: number, cols: number): tf.Variable {
  const limit = Math.sqrt(6 / (rows + cols));
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) data[i] = (2 * rand() - 1) * limit;
  return tf.variable(tf.tensor2d(data, [rows, cols]));
}

// row-stack of per-bin glorot blocks, so each [rows, cols] block keeps the
// fan-in of a single bin's weight matrix
function glorotStack(rand: () => number, bins: number, rows: number, cols: number): tf.Variable {
  const limit = Math.sqrt(6 / (rows + cols));
  const data = new Float32Array(bins * rows * cols);
  for (let i = 0; i < data.length; i++) data[i] = (2 * rand() - 1) * limit;
  return tf.variable(tf.tensor2d(data, [bins * rows, cols]));
}

/**
 * Two-layer spatial graph-convolution classifier with mean pooling.
 *
 * Each layer computes relu(X W_self + sum_b (A_b X) W_b + bias); the readout
 * is a dense softmax over the node-mean embedding. All parameters are
 * initialized from a seeded PRNG, so runs are reproducible.
 */
export class GraphClassifier {
  readonly cfg: ModelConfig;
  readonly featureDim: number;
  private readonly selfWeights: tf.Variable[];
  private readonly binWeights: tf.Variable[];
  private readonly biases: tf.Variable[];
  private readonly outWeight: tf.Variable;
  private readonly outBias: tf.Variable;

  constructor(featureDim: number, cfg: ModelConfig = DEFAULT_MODEL) {
    if (featureDim < 1) throw new Error("featureDim must be positive");
    this.cfg = cfg;
    this.featureDim = featureDim;
    const rand = mulberry32(cfg.seed);
    const dims: Array<[number, number]> = [
      [featureDim, cfg.hidden],
      [cfg.hidden, cfg.hidden],
    ];
    this.selfWeights = dims.map(([i, o]) => glorot(rand, i, o));
    this.binWeights = dims.map(([i, o]) => glorotStack(rand, cfg.directionBins, i, o));
    this.biases = dims.map(([, o]) => tf.variable(tf.zeros([o])));
    this.outWeight = glorot(rand, cfg.hidden, NUM_CLASSES);
    this.outBias = tf.variable(tf.zeros([NUM_CLASSES]));
  }

  get trainableVariables(): tf.Variable[] {
    return [
      ...this.selfWeights,
      ...this.binWeights,
      ...this.biases,
      this.outWeight,
      this.outBias,
    ];
  }

  /**
   * Forward pass.
   *
   * The per-bin neighbor aggregations A_b X are computed in a single batched
   * matMul over [batch * bins, nodes, nodes], and the per-bin weights of each
   * layer are row-stacked into one matrix, so sum_b (A_b X) W_b becomes one
   * dense product of the concatenated aggregates. Looping bins with separate
   * matMuls computes the same thing but is several times slower on the pure
   * JS backend.
   *
   * @param features [batch, nodes, featureDim]
   * @param adjacency [batch, directionBins, nodes, nodes]
   * @returns logits [batch, NUM_CLASSES]
   */
  logits(features: tf.Tensor3D, adjacency: tf.Tensor4D): tf.Tensor2D {
    return tf.tidy(() => {
      const [batch, bins, nodes] = adjacency.shape;
      const flatAdj = adjacency.reshape<tf.Tensor3D>([batch * bins, nodes, nodes]);
      let x = features;
      for (let layer = 0; layer < this.selfWeights.length; layer++) {
        const dim = x.shape[2];
        const tiled = x
          .expandDims(1)
          .tile([1, bins, 1, 1])
          .reshape<tf.Tensor3D>([batch * bins, nodes, dim]);
        const mixed = tf
          .matMul(flatAdj, tiled)
          .reshape([batch, bins, nodes, dim])
          .transpose([0, 2, 1, 3])
          .reshape<tf.Tensor3D>([batch, nodes, bins * dim]);
        const acc = this.dense(x, this.selfWeights[layer]).add(
          this.dense(mixed, this.binWeights[layer]),
        );
        x = acc.add(this.biases[layer]).relu();
      }
      const pooled = x.mean<tf.Tensor2D>(1); // [batch, hidden]
      return tf.matMul(pooled, this.outWeight).add(this.outBias) as tf.Tensor2D;
    });
  }

  private dense(x: tf.Tensor3D, w: tf.Variable): tf.Tensor3D {
    const [batch, nodes, dim] = x.shape;
    const flat = x.reshape([batch * nodes, dim]);
    return tf.matMul(flat, w).reshape([batch, nodes, w.shape[1] as number]) as tf.Tensor3D;
  }

  dispose(): void {
    for (const v of this.trainableVariables) v.dispose();
  }
}
