"""Command-line entry point.

Exit codes: 0 on success, 2 on configuration errors, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .. import sysid
from ..matlib import NumericalFailure
from ..sysid import ConfigError
from . import experiments as ex
from .config import BoundCheckConfig, DemoConfig, MonteCarloConfig, SystemConfig, TimingConfig
from .records import fmt_float, write_csv, write_svg

COMMANDS = ("demo-observable", "demo-detectable", "montecarlo", "timing", "bound-check", "oit-bound", "decompose")


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="smfkit", description="Set-membership filtering experiments.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="JSON configuration file")
    ap.add_argument("--seed", type=int, help="override the configured seed")
    ap.add_argument("--horizon", type=int, help="override the configured horizon")
    ap.add_argument("--out", help="directory for CSV (and SVG) output")
    ap.add_argument("--svg", action="store_true", help="also write an SVG plot")
    return ap


def _load(cls, args, required: bool = False):
    if args.config is None:
        if required:
            raise ConfigError(f"{args.command} needs --config <json>")
        cfg = cls()
    else:
        cfg = cls.from_json(args.config)
    if args.seed is not None and hasattr(cfg, "seed"):
        cfg.seed = args.seed
    if args.horizon is not None and hasattr(cfg, "horizon"):
        if args.horizon < 0:
            raise ConfigError("horizon must be nonnegative")
        cfg.horizon = args.horizon
    return cfg


def _out(args, name: str) -> Path | None:
    return Path(args.out) / name if args.out else None


def _demo(args, detectable: bool) -> None:
    cfg = _load(DemoConfig, args)
    if args.config is None and args.horizon is None and detectable:
        cfg.horizon = 30
    res = ex.demo_detectable(cfg) if detectable else ex.demo_observable(cfg)
    H = cfg.horizon
    comments = [
        f"experiment={args.command} seed={res.trajectory.seed} horizon={H} delta_bar={res.delta_bar}",
        "trial ids: " + ", ".join(f"{i}={name}" for i, name in enumerate(ex.LABELS)),
    ]
    print(comments[0])
    for k in sorted({0, min(cfg.check_k, H), H}):
        gaps = " ".join(f"{a}-{b}={fmt_float(g)}" for (a, b), g in zip(ex.PAIRS, res.gaps[k]))
        comments.append(f"k={k} {gaps}")
        print(f"  k={k:3d} {gaps}")
    if res.oit_gaps:
        line = f"k={cfg.check_k} distance to tower: " + " ".join(
            f"{name}={fmt_float(g)}" for name, g in res.oit_gaps.items()
        )
        comments.append(line)
        print("  " + line)
    if detectable:
        print(f"  hidden block: {np.array2string(res.dec.A_obar, precision=6)}")
    stem = args.command
    path = _out(args, f"{stem}.csv")
    if path:
        write_csv(path, res.records.values(), comments)
        print(f"wrote {path}")
        if args.svg:
            ks = np.arange(H + 1)
            series = {name: (ks, rec.column("diam_hull")) for name, rec in res.records.items()}
            series.update({f"{a}-{b} gap": (ks, res.gaps[:, j]) for j, (a, b) in enumerate(ex.PAIRS)})
            svg = write_svg(_out(args, f"{stem}.svg"), series, title=stem, ylabel="hull diameter / gap",
                            log_y=detectable)
            print(f"wrote {svg}")


def _montecarlo(args) -> None:
    cfg = _load(MonteCarloConfig, args)
    res = ex.montecarlo(cfg)
    comments = [
        f"experiment=montecarlo kind={cfg.kind} trials={cfg.trials} seed={cfg.seed} horizon={cfg.horizon} "
        f"n={cfg.n} n_o={cfg.n_o} p={cfg.p} m={cfg.m} epsilon={fmt_float(cfg.epsilon)} refine_prior={cfg.refine_prior}",
        "trial seeds: SeedSequence([seed, trial])",
        f"pass_rate={fmt_float(res.pass_rate())} nonempty={fmt_float(res.rate('nonempty'))} "
        f"contained={fmt_float(res.rate('contained_after'))} bounded={fmt_float(res.rate('bounded'))}",
    ]
    for c in comments:
        print(c)
    firsts = [s.first_inclusion for s in res.summaries]
    seen = [f for f in firsts if f is not None]
    print(f"first inclusion step: max={max(seen) if seen else None} never={firsts.count(None)}")
    path = _out(args, "montecarlo.csv")
    if path:
        write_csv(path, res.records, comments)
        print(f"wrote {path}")
        if args.svg:
            agg = res.aggregate("diam_hull")
            series = {label: (agg[:, 0], agg[:, i]) for i, label in ((1, "min"), (2, "mean"), (3, "max"))}
            print(f"wrote {write_svg(_out(args, 'montecarlo.svg'), series, title='hull diameter', ylabel='diameter')}")


def _timing(args) -> None:
    cfg = _load(TimingConfig, args)
    res = ex.timing_bench(cfg)
    g, c = res.slopes()
    late = (max(cfg.horizon - 20, 0), cfg.horizon)
    lines = [
        f"experiment=timing n={cfg.n} p={cfg.p} m={cfg.m} horizon={cfg.horizon} seed={cfg.seed} "
        f"delta_bar={res.delta_bar} repeats={cfg.repeats}",
        f"oitcz late/early step time ratio={res.oit_ratio(late):.3f}",
        f"classical late/early step time ratio={res.classical_ratio(late):.3f}",
        f"classical generator increments={sorted(g)} expected={res.expected_gen_slope}",
        f"classical constraint increments={sorted(c)} expected={res.expected_con_slope}",
    ]
    for line in lines:
        print(line)
    path = _out(args, "timing.csv")
    if path:
        write_csv(path, res.records(), lines)
        print(f"wrote {path}")
        if args.svg:
            ks = np.arange(cfg.horizon + 1)
            series = {"oitcz": (ks, res.oit_time_ns / 1e3), "classical": (ks, res.classical_time_ns / 1e3)}
            print(f"wrote {write_svg(_out(args, 'timing.svg'), series, title='step time', ylabel='microseconds')}")


def _bound_check(args) -> None:
    cfg = _load(BoundCheckConfig, args)
    res = ex.bound_check(cfg)
    lines = [
        f"experiment=bound-check trials={cfg.trials} max_n={cfg.max_n} horizon={cfg.horizon} seed={cfg.seed}",
        f"set diameter over bound: {res.violations()}/{len(res.rows)} worst ratio={res.worst_ratio():.6f}",
        f"interval-hull diameter over bound: {res.violations(7)}/{len(res.rows)} worst ratio={res.worst_ratio(7):.6f}",
    ]
    for line in lines:
        print(line)
    path = _out(args, "bound_check.csv")
    if path:
        path.parent.mkdir(parents=True, exist_ok=True)
        body = ["# " + line for line in lines] + ["trial,n,p,m,delta,k,diam_set,diam_hull,bound"]
        for r in res.rows:
            body.append(",".join([str(int(v)) for v in r[:6]] + [fmt_float(v) for v in r[6:]]))
        path.write_text("\n".join(body) + "\n")
        print(f"wrote {path}")


def _oit_bound(args) -> None:
    cfg = _load(SystemConfig, args, required=True)
    s = cfg.system
    b = sysid.oit_bound(s.A, s.B, s.C, s.d_w, s.d_v, cfg.delta)
    print(f"delta={b.delta} sigma_min={fmt_float(b.sigma_min)} d_bar={fmt_float(b.d_bar)}")


def _decompose(args) -> None:
    cfg = _load(SystemConfig, args, required=True)
    s = cfg.system
    dec = sysid.decompose(s.A, s.B, s.C)
    det = sysid.is_detectable(dec)
    print(f"n={dec.n} n_o={dec.n_o} mu_o={dec.mu_o} detectable={det}")
    print("P =\n" + np.array2string(dec.P, precision=6))
    if dec.n_obar:
        print("hidden block =\n" + np.array2string(dec.A_obar, precision=6))
        if det:
            print(f"upsilon_inf={fmt_float(sysid.upsilon_inf(dec.A_obar))}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "demo-observable":
            _demo(args, detectable=False)
        elif args.command == "demo-detectable":
            _demo(args, detectable=True)
        elif args.command == "montecarlo":
            _montecarlo(args)
        elif args.command == "timing":
            _timing(args)
        elif args.command == "bound-check":
            _bound_check(args)
        elif args.command == "oit-bound":
            _oit_bound(args)
        else:
            _decompose(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except NumericalFailure as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
