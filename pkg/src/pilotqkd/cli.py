"""Command-line entry point: ``pilotqkd {tables,simulate,sweep,verify}``.

Exit codes: 0 success, 1 check failure, 2 usage or validation error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from . import link, pilot, reports
from .channel import LinkParams, Orbit, orbit_windows, parse_orbit

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("pilotqkd")


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in str(text).replace(" ", "").split(",") if x)


@dataclass
class RunConfig:
    seed: int = 42
    orbit: Orbit = Orbit.LEO
    f: float = 100e6
    T: float | None = None
    delta: float = 5e-5
    xi: int = 5
    n_data: int = 16
    trials: int = 1000
    output_dir: Path = Path("out")
    transmit_mode: str = "expected"
    threads: int = 1
    # sweep
    xi_list: tuple[int, ...] = (10, 20, 30)
    N: int = 2500
    p_min: float = 0.0
    p_max: float = 0.99
    steps: int = 34
    cascade_trials: int = 100
    plot: bool = False

    _CASTS = {
        "seed": int, "orbit": parse_orbit, "f": float, "T": float, "delta": float, "xi": int,
        "n_data": int, "trials": int, "output_dir": Path, "transmit_mode": str, "threads": int,
        "xi_list": _int_list, "N": int, "p_min": float, "p_max": float, "steps": int,
        "cascade_trials": int, "plot": lambda v: str(v).lower() in ("1", "true", "yes", "on"),
    }

    @property
    def window_s(self) -> float:
        return self.T if self.T is not None else orbit_windows()[self.orbit]

    def link_params(self) -> LinkParams:
        return LinkParams(self.f, self.window_s, self.delta, self.orbit)

    def update(self, values: dict) -> RunConfig:
        for key, raw in values.items():
            if raw is None:
                continue
            if key not in self._CASTS:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                setattr(self, key, self._CASTS[key](raw))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        return self

    def validate(self, command: str) -> RunConfig:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        need(self.f > 0, "f must be positive")
        need(self.window_s > 0, "T must be positive")
        need(0 < self.delta <= 1, "delta must lie in (0, 1]")
        need(self.xi >= 1, "xi must be >= 1")
        need(self.threads >= 1, "threads must be >= 1")
        need(self.transmit_mode in ("expected", "bernoulli"), "transmit_mode must be expected or bernoulli")
        if command == "tables":
            need(self.xi <= 20, "xi must be <= 20 for tables")
        if command == "simulate":
            need(self.trials >= 1, "trials must be >= 1")
            need(self.n_data >= 1, "n_data must be >= 1")
        if command == "sweep":
            need(0 <= self.p_min < self.p_max < 1, "need 0 <= p_min < p_max < 1")
            need(self.steps >= 2, "steps must be >= 2")
            need(self.N >= 1 and all(x >= 1 for x in self.xi_list), "N and xi_list entries must be >= 1")
            need(self.cascade_trials >= 0, "cascade_trials must be >= 0")
        return self


def load_config_file(path) -> dict[str, str]:
    """Flat ``key = value`` file; ``#`` starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        values[key] = value
    return values


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_tables(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    reports.write_table1(out / "table1.csv", pilot.budget_table(range(2, 7)))
    reports.write_table2(out / "table2.csv", link.meo_table(cfg.window_s, cfg.delta, cfg.xi))
    reports.write_fig4(out / "fig4.csv", link.success_curve(range(1, 11)))
    print(f"wrote table1.csv table2.csv fig4.csv to {out}")
    return EXIT_OK


def cmd_simulate(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    summary = link.end_to_end_experiment(
        cfg.link_params(), cfg.xi, cfg.n_data, cfg.trials, cfg.seed,
        transmit_mode=cfg.transmit_mode, threads=cfg.threads,
    )
    reports.write_experiment(out / "experiment.csv", summary)
    print("\n".join(summary.lines()))
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    grid = link.p_grid(cfg.p_min, cfg.p_max, cfg.steps)
    pilot_rows, cascade_rows = reports.sweep_rows(cfg.xi_list, cfg.N, grid, cfg.cascade_trials,
                                                  cfg.seed, threads=cfg.threads)
    path = reports.write_fig5(out / "fig5.csv", pilot_rows, cascade_rows)
    if cascade_rows:
        from .cascade import write_summary_csv

        write_summary_csv(out / "cascade_summary.csv", [c.stats for c in cascade_rows if c.stats])
    if cfg.plot:
        reports.plot_fig5(path, out / "fig5.svg")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, inject_fault: bool = False) -> int:
    from . import quantum, verify

    t0 = time.perf_counter()
    if inject_fault:
        with quantum.inject_fault("u_theta_sign"):
            results = verify.run_checks(cfg.seed)
    else:
        results = verify.run_checks(cfg.seed)
    for r in results:
        print(r.line())
    failed = sum(not r.ok for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed in {time.perf_counter() - t0:.1f}s")
    return EXIT_FAIL if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value configuration file")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", dest="output_dir")
    common.add_argument("--threads", type=int)
    common.add_argument("--orbit", choices=[o.value for o in Orbit])
    common.add_argument("--f", type=float, help="laser repetition rate [Hz]")
    common.add_argument("--T", type=float, help="stationarity window [s]")
    common.add_argument("--delta", type=float, help="attenuation")
    common.add_argument("--xi", type=int, help="pilot string length")

    parser = argparse.ArgumentParser(prog="pilotqkd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("tables", parents=[common], help="write table1.csv, table2.csv, fig4.csv")
    sim = sub.add_parser("simulate", parents=[common], help="run the end-to-end key pipeline")
    sim.add_argument("--n-data", dest="n_data", type=int)
    sim.add_argument("--trials", type=int)
    sim.add_argument("--transmit-mode", dest="transmit_mode", choices=["expected", "bernoulli"])
    sw = sub.add_parser("sweep", parents=[common], help="throughput-efficiency curves (fig5.csv)")
    sw.add_argument("--xi-list", dest="xi_list")
    sw.add_argument("--N", type=int)
    sw.add_argument("--p-min", dest="p_min", type=float)
    sw.add_argument("--p-max", dest="p_max", type=float)
    sw.add_argument("--steps", type=int)
    sw.add_argument("--cascade-trials", dest="cascade_trials", type=int)
    sw.add_argument("--plot", action="store_const", const="true")
    ver = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    ver.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    opts = vars(args)
    command = opts.pop("command")
    config_path = opts.pop("config")
    inject = opts.pop("inject_fault", False)
    try:
        cfg = RunConfig()
        if config_path is not None:
            cfg.update(load_config_file(config_path))
        cfg.update(opts).validate(command)
    except OSError as exc:
        print(f"error: cannot read config {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if command == "verify":
            return cmd_verify(cfg, inject)
        return {"tables": cmd_tables, "simulate": cmd_simulate, "sweep": cmd_sweep}[command](cfg)
    except link.InfeasibleBudget as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: I/O failure on {exc.filename}: {exc.strerror}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
