import * as tf from "@tensorflow/tfjs";

import { initBackend } from "./backend.js";
import { selectFeatures } from "./loader.js";
import { GraphClassifier, buildAdjacency } from "./model.js";
import { mulberry32, shuffledIndices } from "./rng.js";
import type { FeatureMode, GraphSample } from "./types.js";
import { NUM_CLASSES } from "./types.js";

export interface TrainOptions {
  featureMode: FeatureMode;
  seed: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  hidden: number;
  directionBins: number;
}

export const DEFAULT_TRAIN: TrainOptions = {
  featureMode: "both",
  seed: 0,
  epochs: 60,
  batchSize: 100,
  learningRate: 0.01,
  hidden: 32,
  directionBins: 4,
};

export interface EvalResult {
  accuracy: number;
  trainCount: number;
  testCount: number;
  featureMode: FeatureMode;
  seed: number;
}

export interface Prepared {
  features: tf.Tensor3D;
  adjacency: tf.Tensor4D;
  labels: number[];
}

export function columnStats(rows: number[][]): { mean: number[]; std: number[] } {
  const dim = rows[0].length;
  const mean = new Array<number>(dim).fill(0);
  const std = new Array<number>(dim).fill(0);
  for (const row of rows) for (let c = 0; c < dim; c++) mean[c] += row[c];
  for (let c = 0; c < dim; c++) mean[c] /= rows.length;
  for (const row of rows) for (let c = 0; c < dim; c++) std[c] += (row[c] - mean[c]) ** 2;
  for (let c = 0; c < dim; c++) std[c] = Math.sqrt(std[c] / rows.length) || 1;
  return { mean, std };
}

export function prepare(
  samples: GraphSample[],
  mode: FeatureMode,
  bins: number,
  stats: { mean: number[]; std: number[] },
): Prepared {
  const n = samples[0].nodePositions.length;
  const dim = stats.mean.length;
  const feats = new Float32Array(samples.length * n * dim);
  const adj = new Float32Array(samples.length * bins * n * n);
  samples.forEach((sample, s) => {
    if (sample.nodePositions.length !== n) {
      throw new Error(
        `non-uniform node count: sample ${s} has ${sample.nodePositions.length}, expected ${n}`,
      );
    }
    const rows = selectFeatures(sample, mode);
    rows.forEach((row, i) => {
      row.forEach((v, c) => {
        feats[(s * n + i) * dim + c] = (v - stats.mean[c]) / stats.std[c];
      });
    });
    adj.set(buildAdjacency(sample, bins), s * bins * n * n);
  });
  return {
    features: tf.tensor3d(feats, [samples.length, n, dim]),
    adjacency: tf.tensor4d(adj, [samples.length, bins, n, n]),
    labels: samples.map((sample) => sample.label),
  };
}

export function accuracyOf(model: GraphClassifier, data: Prepared, batchSize: number): number {
  let correct = 0;
  const total = data.labels.length;
  for (let start = 0; start < total; start += batchSize) {
    const count = Math.min(batchSize, total - start);
    const predictions = tf.tidy(() => {
      const f = data.features.slice([start, 0, 0], [count, -1, -1]) as tf.Tensor3D;
      const a = data.adjacency.slice([start, 0, 0, 0], [count, -1, -1, -1]) as tf.Tensor4D;
      return model.logits(f, a).argMax(1);
    });
    const values = predictions.dataSync();
    predictions.dispose();
    for (let i = 0; i < count; i++) {
      if (values[i] === data.labels[start + i]) correct += 1;
    }
  }
  return correct / total;
}

/**
 * Train a seeded graph classifier on the train split, report test accuracy.
 *
 * Feature-mode comparisons are paired by construction: the same seed drives
 * parameter init and batch order regardless of the mode, so accuracy
 * differences are attributable to the features.
 */
export async function trainEval(
  train: GraphSample[],
  test: GraphSample[],
  options: Partial<TrainOptions> = {},
): Promise<EvalResult> {
  const opts: TrainOptions = { ...DEFAULT_TRAIN, ...options };
  if (train.length === 0 || test.length === 0) {
    throw new Error("train and test splits must be non-empty");
  }
  await initBackend();
  const stats = columnStats(train.flatMap((s) => selectFeatures(s, opts.featureMode)));
  const trainData = prepare(train, opts.featureMode, opts.directionBins, stats);
  const testData = prepare(test, opts.featureMode, opts.directionBins, stats);
  const dim = stats.mean.length;
  const model = new GraphClassifier(dim, {
    hidden: opts.hidden,
    directionBins: opts.directionBins,
    seed: opts.seed,
  });
  const optimizer = tf.train.adam(opts.learningRate);
  const labelTensor = tf.oneHot(tf.tensor1d(trainData.labels, "int32"), NUM_CLASSES);
  const rand = mulberry32(opts.seed + 1);
  try {
    for (let epoch = 0; epoch < opts.epochs; epoch++) {
      const order = shuffledIndices(train.length, rand);
      for (let start = 0; start < train.length; start += opts.batchSize) {
        const batch = order.slice(start, start + opts.batchSize);
        const idx = tf.tensor1d(batch, "int32");
        // gathered inputs are constants of the step; keep them off the tape
        const f = tf.gather(trainData.features, idx) as tf.Tensor3D;
        const a = tf.gather(trainData.adjacency, idx) as tf.Tensor4D;
        const y = tf.gather(labelTensor, idx);
        optimizer.minimize(
          () => tf.losses.softmaxCrossEntropy(y, model.logits(f, a)) as tf.Scalar,
        );
        tf.dispose([idx, f, a, y]);
      }
      await tf.nextFrame();
    }
    const accuracy = accuracyOf(model, testData, opts.batchSize);
    return {
      accuracy,
      trainCount: train.length,
      testCount: test.length,
      featureMode: opts.featureMode,
      seed: opts.seed,
    };
  } finally {
    model.dispose();
    optimizer.dispose();
    labelTensor.dispose();
    trainData.features.dispose();
    trainData.adjacency.dispose();
    testData.features.dispose();
    testData.adjacency.dispose();
  }
}

/** Deterministic train/test split by shuffled index. */
export function splitDataset(
  samples: GraphSample[],
  trainFraction: number,
  seed: number,
): { train: GraphSample[]; test: GraphSample[] } {
  if (!(trainFraction > 0 && trainFraction < 1)) {
    throw new Error("trainFraction must be in (0, 1)");
  }
  const order = shuffledIndices(samples.length, mulberry32(seed));
  const cut = Math.round(samples.length * trainFraction);
  return {
    train: order.slice(0, cut).map((i) => samples[i]),
    test: order.slice(cut).map((i) => samples[i]),
  };
}
