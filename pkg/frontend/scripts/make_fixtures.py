"""Build the JSONL fixtures for the harness tests.

Renders scikit-learn's bundled 8x8 digit images to 32x32 PGMs named
"<label>_<index>.pgm" and exports adapted 64-node graphs through the
gridadapt CLI. Outputs: train.jsonl (1000), test.jsonl (200), tiny.jsonl
(10, one per class where possible).
"""
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits

OUT = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    digits = load_digits()
    rng = np.random.default_rng(0)
    order = rng.permutation(len(digits.images))
    splits = {"train": order[:1000], "test": order[1000:1200]}
    # one sample per class for the tiny fixture
    tiny = []
    for cls in range(10):
        tiny.append(order[1200:][digits.target[order[1200:]] == cls][0])
    splits["tiny"] = np.array(tiny)

    OUT.mkdir(parents=True, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        tmpdir = Path(tmp)
        for name, idx in splits.items():
            paths = []
            for n, i in enumerate(idx):
                img = np.kron(digits.images[i], np.ones((4, 4)))  # 8x8 -> 32x32
                data = np.round(img / 16.0 * 255.0).astype(np.uint8)
                path = tmpdir / f"{digits.target[i]}_{name}{n:04d}.pgm"
                header = f"P5\n32 32\n255\n".encode()
                path.write_bytes(header + data.tobytes())
                paths.append(str(path))
            out = OUT / f"{name}.jsonl"
            subprocess.run(
                [sys.executable, "-m", "gridadapt.cli", "export-gdl", *paths,
                 "--nodes", "64", "--features", "both", "--label-from-name",
                 "-o", str(out)],
                check=True,
                env={"PATH": "/usr/bin:/bin", "GRIDADAPT_THREADS": "4"},
            )
            print(f"wrote {out} ({len(paths)} records)")


if __name__ == "__main__":
    main()
