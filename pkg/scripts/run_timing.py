"""Per-step timing of the windowed filter against the exact classical filter.

    python3 scripts/run_timing.py [--out results]
"""

import argparse
import sys
from pathlib import Path

from smfkit.harness import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    args = ap.parse_args()
    return cli.main(["timing", "--config", str(ROOT / "configs" / "timing.json"), "--out", args.out, "--svg"])


if __name__ == "__main__":
    sys.exit(main())
