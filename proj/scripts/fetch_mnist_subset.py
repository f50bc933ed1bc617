#!/usr/bin/env python3
# Copyright 2026 The Weave Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds a 10,000-sample MNIST subset in IDX format.

The full MNIST archives are not always reachable from build machines, but the
`mnist` npm package ships 10,000 genuine MNIST digits (about 1,000 per class)
as JSON pixel arrays normalised to [0, 1] with three decimals. This script
fetches that package through npm, recovers the original bytes, shuffles the
samples with a fixed seed and writes gzip-compressed IDX files:

    data/mnist-subset-images-idx3-ubyte.gz   (magic 0x00000803)
    data/mnist-subset-labels-idx1-ubyte.gz   (magic 0x00000801)
"""
import argparse
import gzip
import json
import random
import struct
import subprocess
import tarfile
import tempfile
from pathlib import Path

ROWS = COLS = 28


def load_digits(package_dir: Path):
    samples = []
    for label in range(10):
        raw = json.loads((package_dir / "src" / "digits" / f"{label}.json").read_text())["data"]
        count = len(raw) // (ROWS * COLS)
        for k in range(count):
            pixels = raw[k * ROWS * COLS:(k + 1) * ROWS * COLS]
            samples.append((bytes(min(255, max(0, round(v * 255))) for v in pixels), label))
    return samples


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    parser.add_argument("--seed", type=int, default=20200101)
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(["npm", "pack", "mnist@1.1.0", "--silent"], cwd=tmp, check=True,
                       stdout=subprocess.DEVNULL)
        tgz = next(Path(tmp).glob("mnist-*.tgz"))
        with tarfile.open(tgz) as tar:
            tar.extractall(tmp)
        samples = load_digits(Path(tmp) / "package")

    random.Random(args.seed).shuffle(samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with gzip.GzipFile(out / "mnist-subset-images-idx3-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 0x803, len(samples), ROWS, COLS))
        for pixels, _ in samples:
            f.write(pixels)
    with gzip.GzipFile(out / "mnist-subset-labels-idx1-ubyte.gz", "wb", mtime=0) as f:
        f.write(struct.pack(">II", 0x801, len(samples)))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {len(samples)} samples to {out}")


if __name__ == "__main__":
    main()
