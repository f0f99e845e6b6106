import * as tf from "@tensorflow/tfjs";
import { setWasmPaths, setThreadsCount } from "@tensorflow/tfjs-backend-wasm";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

let ready: Promise<string> | undefined;

/**
 * Select the fastest available TensorFlow.js backend.
 *
 * Prefers the WASM backend (XNNPACK kernels, several times faster than the
 * plain JS backend at this model's matMul shapes) and falls back to the
 * default backend if it cannot initialize. Runs single-threaded so repeated
 * runs with the same seed reproduce bit-identical results.
 */
export function initBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      try {
        const wasmDir = join(
          dirname(fileURLToPath(import.meta.url)),
          "..",
          "node_modules",
          "@tensorflow",
          "tfjs-backend-wasm",
          "dist",
        );
        setWasmPaths(wasmDir + "/");
        setThreadsCount(1);
        if (!(await tf.setBackend("wasm"))) throw new Error("wasm backend rejected");
      } catch {
        await tf.setBackend("cpu");
      }
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
