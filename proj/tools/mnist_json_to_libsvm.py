#!/usr/bin/env python3
"""Convert the per-digit JSON files of the `mnist` npm package into LIBSVM text.

Usage:
  npm pack mnist && tar xzf mnist-*.tgz
  python3 tools/mnist_json_to_libsvm.py package/src/digits data/mnist10k.libsvm

Each JSON file holds a flat array of 28x28 grey levels in [0, 1]; the digit
is the file name. Only nonzero pixels are written (1-based indices).
"""
import json
import sys
from pathlib import Path

PIXELS = 28 * 28


def main() -> int:
    if len(sys.argv) != 3:
        print(__doc__, file=sys.stderr)
        return 2
    src, dst = Path(sys.argv[1]), Path(sys.argv[2])
    rows = 0
    with dst.open("w", encoding="utf-8") as out:
        for digit in range(10):
            data = json.loads((src / f"{digit}.json").read_text())["data"]
            for start in range(0, len(data) - PIXELS + 1, PIXELS):
                image = data[start:start + PIXELS]
                feats = " ".join(f"{j + 1}:{v:g}" for j, v in enumerate(image) if v != 0)
                out.write(f"{digit} {feats}\n")
                rows += 1
    print(f"wrote {rows} rows to {dst}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
