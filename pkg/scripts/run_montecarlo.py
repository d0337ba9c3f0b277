"""Monte-Carlo stability runs on random observable and detectable systems.

    python3 scripts/run_montecarlo.py [--trials N] [--out results]

Trials run in worker processes when more than one CPU is available
(cap with SMFKIT_THREADS).
"""

import argparse
import json
import sys
import tempfile
from pathlib import Path

from smfkit.harness import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "results"))
    ap.add_argument("--trials", type=int, help="override the configured trial count")
    args = ap.parse_args()
    for kind in ("observable", "detectable"):
        cfg = json.loads((ROOT / "configs" / f"montecarlo_{kind}.json").read_text())
        if args.trials is not None:
            cfg["trials"] = args.trials
        with tempfile.NamedTemporaryFile("w", suffix=".json", delete=False) as f:
            json.dump(cfg, f)
        code = cli.main(["montecarlo", "--config", f.name, "--out", str(Path(args.out) / kind), "--svg"])
        Path(f.name).unlink()
        if code:
            return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
