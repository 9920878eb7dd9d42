"""Command-line entry point.

    convoy-orbit simulate --scenario FILE|NAME [--out DIR] [--dt S] [--duration S] [--jsonl] [--plots]
    convoy-orbit compare-guidance --out DIR
    convoy-orbit plot --metrics FILE --out DIR
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from .config import ScenarioError, bundled_scenarios, load_bundled, load_scenario


def _load(spec: str):
    if Path(spec).exists() or spec not in bundled_scenarios():
        return load_scenario(spec)
    return load_bundled(spec)


def cmd_simulate(args) -> int:
    from .plotting import emit_plots
    from .runner import run

    cfg = _load(args.scenario).with_overrides(dt=args.dt, duration=args.duration)
    result = run(cfg, args.out, jsonl=args.jsonl)
    if args.plots:
        emit_plots(result.metrics_path, result.metrics_path.parent / "plots", cfg.D_Th)
    s = result.summary
    print(f"{cfg.name}: {s['ticks']} ticks, settling_time={s['settling_time']}, "
          f"max|D_s|={s['max_abs_D_s_after_settling']}, violations={s['constraint_violations']}")
    return 0


def cmd_compare(args) -> int:
    from .runner import write_guidance_comparison

    r = write_guidance_comparison(args.out)
    print(f"kappa_min={r.kappa_min:.6g}  steady high-curvature max|gamma-1|: "
          f"constant={r.constant.steady_hc_max:.4g} weighted={r.weighted.steady_hc_max:.4g}")
    return 0


def cmd_plot(args) -> int:
    from .plotting import emit_plots

    for p in emit_plots(args.metrics, args.out):
        print(p)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convoy-orbit", description=__doc__.splitlines()[0] if __doc__ else None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a scenario and write metrics")
    p.add_argument("--scenario", required=True,
                   help=f"scenario YAML file or bundled name ({', '.join(bundled_scenarios())})")
    p.add_argument("--out", help="output directory (default: the scenario's output_dir)")
    p.add_argument("--dt", type=float, help="override the control period [s]")
    p.add_argument("--duration", type=float, help="override the run length [s]")
    p.add_argument("--jsonl", action="store_true", help="also write metrics.jsonl")
    p.add_argument("--plots", action="store_true", help="also render panels into OUT/plots")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare-guidance", help="constant-gain vs curvature-weighted guidance")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("plot", help="render panels from a metrics CSV")
    p.add_argument("--metrics", required=True, help="metrics CSV written by simulate")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"convoy-orbit {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
