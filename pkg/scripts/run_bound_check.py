"""Windowed OIT diameters on random observable systems against the a-priori bound.

    python3 scripts/run_bound_check.py [--out results]
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
    return cli.main(["bound-check", "--config", str(ROOT / "configs" / "bound_check.json"), "--out", args.out])


if __name__ == "__main__":
    sys.exit(main())
