"""Command-line entry point: ``pullguide run | compare | metrics | report``.

Exit codes: 0 success, 1 runtime failure (compare: any seed failed),
2 invalid or missing scenario / input file, 3 no path to the goal.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .guidance import EmptyPlan, NoPath
from .sim.config import BUILTIN
from .sim import EmptyTrace, ScenarioError, Trace, load_scenario, metrics, run, sign_test

log = logging.getLogger("pullguide")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NOPATH = 0, 1, 2, 3
COMPARISON_HEADER = ("seed", "mode", "mean_py", "max_py", "exceedance", "completion_s")


def parse_seeds(text: str) -> list[int]:
    """``"A..B"`` (inclusive), ``"A,B,C"`` or a single integer."""
    try:
        if ".." in text:
            a, b = (int(v) for v in text.split("..", 1))
            if b < a:
                raise ValueError
            return list(range(a, b + 1))
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad seed range {text!r}; use A..B") from None


def _scenario(args, seed=None, adaptive=None):
    sc = load_scenario(args.scenario)
    return sc.with_overrides(seed=seed, adaptive=adaptive,
                             footprint_half_width=args.footprint_half_width)


def _write_figures(trace: Trace, out: Path, half_width: float) -> None:
    from .plotting import plot_pulling, plot_trajectory
    plot_trajectory(trace, out / "trajectory.png", half_width)
    plot_pulling(trace, out / "pulling.png", half_width)


def cmd_run(args) -> int:
    try:
        sc = _scenario(args, seed=args.seed, adaptive=False if args.baseline else None)
    except ScenarioError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    try:
        trace, m = run(sc)
    except (NoPath, EmptyPlan) as exc:
        log.error("no path: %s", exc)
        return EXIT_NOPATH
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace.to_csv(out / "trace.csv")
    m.to_json(out / "metrics.json")
    if args.figures:
        _write_figures(trace, out, sc.sim.footprint_half_width)
    mode = "adaptive" if sc.sim.adaptive else "baseline"
    print(f"{sc.name} seed={sc.sim.seed} mode={mode} ticks={m.ticks} "
          f"mean_py={m.mean_py:.4f} max_py={m.max_py:.4f} exceedance={m.exceedance:.4f} "
          f"completion_s={m.completion_s}")
    return EXIT_OK


def _one(job):
    """Worker for one (seed, mode) run; returns a row dict or an error string."""
    scenario, half_width, seed, adaptive, out = job
    sc = load_scenario(scenario).with_overrides(seed=seed, adaptive=adaptive,
                                                footprint_half_width=half_width)
    mode = "adaptive" if adaptive else "baseline"
    try:
        trace, m = run(sc)
    except Exception as exc:  # reported per seed, the batch continues
        return seed, mode, f"{type(exc).__name__}: {exc}"
    d = out / f"seed_{seed:03d}" / mode
    d.mkdir(parents=True, exist_ok=True)
    m.to_json(d / "metrics.json")
    return seed, mode, {"seed": seed, "mode": mode, "mean_py": m.mean_py, "max_py": m.max_py,
                        "exceedance": m.exceedance, "completion_s": m.completion_s}


def _cell(v) -> str:
    return "" if v is None else repr(v) if isinstance(v, float) else str(v)


def cmd_compare(args) -> int:
    try:
        _scenario(args)
    except ScenarioError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(args.scenario, args.footprint_half_width, s, a, out)
            for s in args.seeds for a in (True, False)]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_one, jobs))
    else:
        results = [_one(j) for j in jobs]

    rows, failed = {}, []
    for seed, mode, res in results:
        if isinstance(res, str):
            log.error("seed %d %s failed: %s", seed, mode, res)
            failed.append((seed, mode))
        else:
            rows[(seed, mode)] = res
    with open(out / "comparison.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COMPARISON_HEADER)
        for key in sorted(rows, key=lambda k: (k[0], k[1] != "adaptive")):
            w.writerow([_cell(rows[key][c]) for c in COMPARISON_HEADER])

    paired = [s for s in args.seeds if (s, "adaptive") in rows and (s, "baseline") in rows]
    st = sign_test([rows[(s, "adaptive")]["mean_py"] for s in paired],
                   [rows[(s, "baseline")]["mean_py"] for s in paired])
    summary = {"pairs": len(paired), "wins": st.wins, "losses": st.losses, "ties": st.ties,
               "p_value": st.p_value, "underpowered": st.underpowered,
               "failed": [f"{s}:{m}" for s, m in failed]}
    (out / "sign_test.json").write_text(json.dumps(summary, indent=2) + "\n")
    note = " (underpowered)" if st.underpowered else ""
    print(f"pairs={len(paired)} wins={st.wins} losses={st.losses} ties={st.ties} "
          f"p={st.p_value:.6g}{note}")
    if args.figures and rows:
        from .plotting import plot_comparison
        plot_comparison(out / "comparison.csv", out / "comparison.png")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_metrics(args) -> int:
    try:
        trace = Trace.from_csv(args.trace)
        m = metrics(trace, args.footprint_half_width)
    except (OSError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    sys.stdout.write(m.to_json())
    return EXIT_OK


def cmd_report(args) -> int:
    from .plotting import plot_comparison, plot_pulling, plot_trajectory
    if not (args.trace or args.comparison):
        log.error("report needs --trace and/or --comparison")
        return EXIT_INVALID
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        if args.trace:
            trace = Trace.from_csv(args.trace)
            if len(trace) == 0:
                raise EmptyTrace("trace has no ticks")
            plot_trajectory(trace, out / "trajectory.png", args.footprint_half_width)
            plot_pulling(trace, out / "pulling.png", args.footprint_half_width)
        if args.comparison:
            plot_comparison(args.comparison, out / "comparison.png")
    except (OSError, ValueError, KeyError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pullguide", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--scenario", required=True,
                        help=f"scenario JSON file or builtin name ({', '.join(BUILTIN)})")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--footprint-half-width", type=float, default=None,
                        help="override the scenario's footprint half-width [m]")
        sp.add_argument("--figures", action="store_true", help="also render PNG figures")

    r = sub.add_parser("run", help="run one scenario and write trace.csv + metrics.json")
    common(r)
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--baseline", action="store_true", help="force lateral stiffness to zero")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("compare", help="adaptive vs baseline over a seed range")
    common(c)
    c.add_argument("--seeds", type=parse_seeds, default=list(range(1, 13)), help="A..B")
    c.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    c.set_defaults(func=cmd_compare)

    m = sub.add_parser("metrics", help="recompute metrics from a trace.csv")
    m.add_argument("--trace", required=True)
    m.add_argument("--footprint-half-width", type=float, default=0.35)
    m.set_defaults(func=cmd_metrics)

    rp = sub.add_parser("report", help="render figures from trace or comparison CSVs")
    rp.add_argument("--trace")
    rp.add_argument("--comparison")
    rp.add_argument("--out", required=True)
    rp.add_argument("--footprint-half-width", type=float, default=0.35)
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
