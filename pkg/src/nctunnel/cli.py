"""Command line interface.

Exit codes: 0 success, 1 configuration error, 2 runtime error.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import harness, report
from .errors import ConfigError
from .scenario import load_scenario


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nctunnel",
        description="Coded-tunnel codec benchmarks and satellite-link "
                    "TCP simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and write reports")
    p_run.add_argument("--scenario", required=True)
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.add_argument("--out", required=True, help="output directory")

    p_sweep = sub.add_parser("sweep-loss",
                             help="goodput vs. loss for both flow classes")
    p_sweep.add_argument("--scenario", required=True)
    p_sweep.add_argument("--losses", required=True,
                         help="comma-separated loss fractions, e.g. 0,0.01,0.02")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", required=True)

    p_bench = sub.add_parser("codec-bench",
                             help="in-memory encode/decode throughput")
    p_bench.add_argument("--n", type=int, required=True, dest="n")
    p_bench.add_argument("--omega", type=int, required=True)
    p_bench.add_argument("--generations", type=int, required=True)
    p_bench.add_argument("--seed", type=int, required=True)
    p_bench.add_argument("--symbol-size", type=int, default=1402)
    p_bench.add_argument("--deliver", choices=("all", "exact_n"),
                         default="all")

    p_burst = sub.add_parser("burst-test",
                             help="deterministic burst-loss boundary check")
    p_burst.add_argument("--scenario", required=True)
    p_burst.add_argument("--burst-len", type=int, required=True)
    p_burst.add_argument("--seed", type=int, required=True)

    return parser


def _load(args):
    scenario = load_scenario(args.scenario)
    if getattr(args, "seed", None) is not None:
        scenario = replace(scenario, seed=args.seed)
    return scenario


def cmd_run(args) -> int:
    scenario = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = harness.run(scenario)
    written = report.emit_plot_data(result.rows, out / "timeseries.csv")
    written.append(report.render_timeseries(result.rows,
                                            out / "timeseries.png"))
    written.append(report.write_summary(result.summary, out / "summary.json"))
    for p in written:
        print(p)
    s = result.summary
    print(f"plain TCP mean goodput:  {s['plain']['mean_goodput_mbps']:.3f} Mbps")
    print(f"tunneled mean goodput:   {s['tunneled']['mean_goodput_mbps']:.3f} Mbps")
    print(f"mean link utilization:   {s['mean_utilization']:.3f}")
    return 0


def cmd_sweep(args) -> int:
    scenario = _load(args)
    try:
        losses = [float(v) for v in args.losses.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --losses value: {exc}") from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = harness.sweep_loss(scenario, losses)
    written = report.emit_plot_data(rows, out / "sweep.csv")
    written.append(report.render_scatter(rows, out / "sweep.png"))
    for p in written:
        print(p)
    for r in rows:
        print(f"loss {r.loss * 100:5.2f}%  TCP {r.tcp_goodput_mbps:7.3f} Mbps"
              f"  TCP/NC {r.nc_goodput_mbps:7.3f} Mbps")
    return 0


def cmd_bench(args) -> int:
    rep = harness.codec_bench(args.n, args.omega, args.generations,
                              args.seed, symbol_size=args.symbol_size,
                              deliver=args.deliver)
    for key, value in rep.items():
        print(f"{key}: {value}")
    return 0


def cmd_burst(args) -> int:
    scenario = _load(args)
    rep = harness.burst_test(scenario, args.burst_len, args.seed)
    for key, value in rep.items():
        print(f"{key}: {value}")
    masked = rep["generations_lost"] == 0
    print(f"burst of {args.burst_len} "
          f"{'masked by the code' if masked else 'destroyed generation(s)'}")
    return 0


_COMMANDS = {
    "run": cmd_run,
    "sweep-loss": cmd_sweep,
    "codec-bench": cmd_bench,
    "burst-test": cmd_burst,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
