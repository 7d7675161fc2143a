"""Command line entry point: ``shapeservo`` or ``python -m shapeservo``."""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import config as cfgmod
from .config import ConfigError, ScenarioConfig, load_preset, parse_config
from .plant import EquilibriumError
from .saturation import SaturationLimits
from .simulation import format_report, run_scenario, saturation_demo, write_csv

SATURATION_PRESET = "fig1-saturation"
SUMMARY_KEYS = ("final_e1_norm", "convergence_time", "sup_eta1_hat", "sup_eta2_hat",
                "sup_J_hat_fro", "decrease_violation_fraction", "saturation_compliance")


def _load(args) -> ScenarioConfig:
    if args.config and args.preset:
        raise ConfigError("use either --config or --preset, not both")
    if args.config:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    elif args.preset:
        cfg = load_preset(args.preset)
    else:
        cfg = ScenarioConfig().validate()
    if args.seed is not None:
        cfg.sim.seed = args.seed
    return cfg


def _demo_csv(cfg: ScenarioConfig, out) -> None:
    limits = SaturationLimits(cfg.limits.u_min[:1], cfg.limits.u_max[:1])
    header, data = saturation_demo(limits, amplitude=10.0, frequency=2.0,
                                   duration=cfg.sim.duration, dt=cfg.sim.dt)
    write_csv(header, data, out)


def cmd_demo_saturation(args) -> int:
    cfg = load_preset(SATURATION_PRESET)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            _demo_csv(cfg, fh)
    else:
        _demo_csv(cfg, sys.stdout)
    return 0


def _run_one(cfg: ScenarioConfig, out_dir: Path, preset: str | None = None) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.txt").write_text(cfg.to_text(), encoding="utf-8")
    if preset == SATURATION_PRESET:
        with open(out_dir / "saturation.csv", "w", newline="", encoding="utf-8") as fh:
            _demo_csv(cfg, fh)
        return {"preset": preset}
    try:
        result = run_scenario(cfg)
    except EquilibriumError as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            with open(out_dir / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
                write_csv(partial.columns, partial.data, fh)
        (out_dir / "report.txt").write_text(f"error = {exc}\n", encoding="utf-8")
        raise
    with open(out_dir / "trajectory.csv", "w", newline="", encoding="utf-8") as fh:
        write_csv(result.columns, result.data, fh)
    (out_dir / "report.txt").write_text(format_report(result.report), encoding="utf-8")
    return result.report


def cmd_run(args) -> int:
    cfg = _load(args)
    report = _run_one(cfg, Path(args.out_dir), args.preset)
    sys.stdout.write(format_report(report))
    return 0


def _sweep_job(job):
    text, key, value, out_dir = job
    cfg = parse_config(text)
    cfg.set(key, value)
    cfg.validate()
    return value, _run_one(cfg, Path(out_dir))


def cmd_sweep(args) -> int:
    cfg = _load(args)
    base = cfg.to_text()
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    # validate every value up front so a typo fails before any work starts
    for value in values:
        trial = parse_config(base)
        trial.set(args.param, value)
        trial.validate()
    root = Path(args.out_dir)
    jobs = [(base, args.param, v, str(root / f"{args.param}={v}")) for v in values]
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(_sweep_job, jobs))
    print("\t".join((args.param,) + SUMMARY_KEYS))
    for value, report in results:
        print("\t".join([value] + [str(report.get(k, "")) for k in SUMMARY_KEYS]))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shapeservo",
        description="Sliding-mode shape servoing under asymmetric input saturation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo-saturation", help="hard vs smooth saturation of 10 sin(2t)")
    demo.add_argument("--out", help="CSV file (default: stdout)")
    demo.set_defaults(func=cmd_demo_saturation)

    def scenario_args(p):
        p.add_argument("--config", help="key = value scenario file")
        p.add_argument("--preset", choices=sorted(cfgmod.PRESETS), help="named scenario")
        p.add_argument("--seed", type=int, help="override sim.seed")
        p.add_argument("--out-dir", default="out", help="output directory (default: out)")

    run = sub.add_parser("run", help="simulate one scenario")
    scenario_args(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="run a scenario for several values of one key")
    scenario_args(sweep)
    sweep.add_argument("--param", required=True, help="dotted config key, e.g. gains.eps1")
    sweep.add_argument("--values", required=True, help="comma separated values")
    sweep.add_argument("--jobs", type=int, default=None, help="parallel workers")
    sweep.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, EquilibriumError, OSError) as exc:
        print(f"shapeservo: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
