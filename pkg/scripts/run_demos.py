"""Run both three-filter demonstrations and write CSV and SVG output.

    python3 scripts/run_demos.py [--out results]
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
    for name in ("observable", "detectable"):
        code = cli.main([f"demo-{name}", "--config", str(ROOT / "configs" / f"demo_{name}.json"),
                         "--out", args.out, "--svg"])
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
