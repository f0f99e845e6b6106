export interface GraphSample {
  /** (row, col) node positions. */
  nodePositions: number[][];
  /** Undirected edges as node index pairs. */
  edgeIndexPairs: number[][];
  /** One feature row per node; dimensionality uniform within a dataset. */
  nodeFeatures: number[][];
  /** Column names for nodeFeatures, e.g. ["intensity", "saliency"]. */
  featureNames: string[];
  /** Per-edge saliency, parallel to edgeIndexPairs. */
  edgeSaliency: number[];
  /** Digit class in 0..9. */
  label: number;
}

export type FeatureMode = "intensity" | "saliency" | "both";

export const FEATURE_MODES: FeatureMode[] = ["intensity", "saliency", "both"];

export const NUM_CLASSES = 10;
