"""``fracburgers`` command line.

Subcommands::

    simulate     --config FILE [--out DIR]
    decay-check  RUN_DIR [--tmin T]
    constants    --rho R [--s S]
    ladder       RUN_DIR [--rho R] [--alpha A] [--center X,T] [--r0 R0] [--kmax K]
    sweep        --config FILE [--threads N]

Exit codes: 0 success (a blowup is recorded data, not a failure), 1 usage
error, 2 validation or artifact error, 3 a proven bound was violated or a
certified construction did not close.

Outputs go to ``--out`` or, by default, under ``$FRACBURGERS_OUT`` (falling
back to ``./fracburgers-out``).  Existing artifacts are never overwritten
without ``--force``.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from . import io as fio
from .config import ConfigError, load_run_config, load_sweep_config
from .constants import certify_constants, feasibility_map, max_alpha
from .diagnostics import empirical_t_star, holder_seminorm, linf_decay_check, oscillation_ladder
from .errors import ConstructionError, FracBurgersError, InfeasibleError, ParameterError
from .solver import run

log = logging.getLogger("fracburgers")

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_VIOLATION = 0, 1, 2, 3
OUT_ENV = "FRACBURGERS_OUT"
RUN_ARTIFACTS = ("manifest.json", "metadata.json", "series.csv")
SWEEP_COLUMNS = ("run", "s", "eps1", "seed", "status", "t_star", "decay_max_ratio", "decay_passed",
                 "alpha", "min_sep", "t", "holder")


class UsageError(Exception):
    pass


class OutputExists(FracBurgersError):
    pass


@dataclass
class RunManifest:
    command: str
    config: dict
    code_version: str
    seed: int | None
    started: float
    finished: float
    outputs: list = field(default_factory=list)
    status: str = "completed"  # completed | blowup | error
    error: str | None = None

    def write(self, path) -> None:
        missing = [p for p in self.outputs if not Path(p).exists()]
        if missing:
            raise FracBurgersError(f"manifest references missing files: {missing}")
        doc = asdict(self)
        doc["outputs"] = [str(p) for p in self.outputs]
        fio.write_json(path, doc)


def default_out_root() -> Path:
    return Path(os.environ.get(OUT_ENV) or "fracburgers-out")


def _prepare_out(out: Path, names, force: bool) -> None:
    clash = [n for n in names if (out / n).exists()]
    if clash and not force:
        raise OutputExists(f"{out} already holds {', '.join(clash)}; pass --force to overwrite")
    out.mkdir(parents=True, exist_ok=True)


def _clear_run_dir(run_dir: Path, force: bool) -> None:
    snaps = run_dir / "snapshots"
    existing = [n for n in RUN_ARTIFACTS if (run_dir / n).exists()]
    if snaps.is_dir() and any(snaps.glob("*.bin")):
        existing.append("snapshots/")
    if existing and not force:
        raise OutputExists(f"{run_dir} already holds {', '.join(existing)}; pass --force to overwrite")
    for n in RUN_ARTIFACTS:
        (run_dir / n).unlink(missing_ok=True)
    if snaps.is_dir():
        for p in snaps.glob("*.bin"):
            p.unlink()
    run_dir.mkdir(parents=True, exist_ok=True)


# ---------------------------------------------------------------------------
# simulate


def simulate_to(spec, run_dir: Path, force: bool, command: str = "simulate") -> RunManifest:
    _clear_run_dir(run_dir, force)
    started = time.time()
    manifest = RunManifest(command, {"solver": spec.config.to_dict(), "init": spec.init.to_dict()},
                           __version__, spec.config.seed, started, started)
    try:
        traj = run(spec.config, spec.init)
        outputs = fio.save_trajectory(traj, run_dir)
    except Exception as exc:
        manifest.status, manifest.error, manifest.finished = "error", f"{type(exc).__name__}: {exc}", time.time()
        manifest.write(run_dir / "manifest.json")
        raise
    manifest.status = traj.status
    manifest.outputs = outputs
    manifest.finished = time.time()
    manifest.write(run_dir / "manifest.json")
    return manifest


def cmd_simulate(args) -> int:
    if not args.config:
        raise UsageError("simulate needs --config")
    spec = load_run_config(args.config)
    out = Path(args.out) if args.out else default_out_root() / Path(args.config).stem
    manifest = simulate_to(spec, out, args.force)
    print(f"{manifest.status}: {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# decay check


def cmd_decay_check(args) -> int:
    run_dir = Path(args.run_dir)
    traj = fio.load_trajectory(run_dir)
    out = Path(args.out) if args.out else run_dir / "reports"
    _prepare_out(out, ("decay.csv", "decay.json"), args.force)
    report = linf_decay_check(traj, args.tmin)
    fio.write_decay_report(report, out, {"run_dir": str(run_dir)})
    if not report.applicable:
        print(f"not applicable: {report.reason}")
        return EXIT_OK
    print(f"max ratio {report.max_ratio:.6g} over {len(report.rows)} samples")
    return EXIT_OK if report.passed else EXIT_VIOLATION


# ---------------------------------------------------------------------------
# constants


def cmd_constants(args) -> int:
    if args.rho is None:
        raise UsageError("constants needs --rho")
    out = Path(args.out) if args.out else default_out_root() / f"constants-rho{args.rho:.6g}"
    _prepare_out(out, ("certificate.json", "feasibility.csv"), args.force)
    cert = certify_constants(args.rho, s=args.s, growth=args.growth, tol=args.tol)
    alphas = [10.0 ** (-12 + 11.5 * i / 199) for i in range(200)]
    rows = feasibility_map([args.rho], alphas, args.growth)
    inputs = {"rho": args.rho, "s": args.s, "growth": args.growth, "tol": args.tol}
    fio.write_certificate(cert, out, rows, inputs)
    print(f"alpha1 = {cert.alpha1:.6g}, lambda = {cert.lambda_:.6g}, beta1 = {cert.beta1:.6g}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ladder


def _pair(text: str) -> tuple:
    try:
        a, b = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,T got {text!r}") from None
    return a, b


def cmd_ladder(args) -> int:
    run_dir = Path(args.run_dir)
    traj = fio.load_trajectory(run_dir)
    out = Path(args.out) if args.out else run_dir / "reports"
    _prepare_out(out, ("ladder.csv", "ladder.json"), args.force)
    alpha = args.alpha if args.alpha is not None else max_alpha(1.0 / 800.0)
    center = args.center if args.center is not None else (0.0, float(traj.times[-1]))
    lad = oscillation_ladder(traj, center, args.rho, alpha, args.r0, args.kmax, t_min=args.tmin or 0.0)
    fio.write_ladder_report(lad, out, {"run_dir": str(run_dir)})
    print(f"{len(lad.levels)} levels, {len(lad.omitted)} omitted")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep


def _sweep_task(task: dict) -> list:
    """Run one grid point and return its summary rows (worker process entry)."""
    from .config import load_sweep_config as _load

    sweep = _load(task["config"])
    spec = sweep.run_spec(task["s"], task["eps1"], task["seed"])
    run_dir = Path(task["run_dir"])
    manifest = simulate_to(spec, run_dir, task["force"], command="sweep")
    traj = fio.load_trajectory(run_dir)
    t_star = empirical_t_star(traj)
    report = linf_decay_check(traj, sweep.tmin)
    alpha = task["alpha"]
    min_sep = sweep.min_sep_cells * spec.config.dx
    times = sweep.holder_times or [float(traj.times[-1])]
    rows = []
    for t in times:
        if t > traj.times[-1] + 1e-12:
            t_used, h = t, math.nan
        else:
            i = traj.snapshot_index(t)
            t_used = float(traj.times[i])
            h = holder_seminorm(traj.snapshots[i], alpha, min_sep)
        rows.append([task["run"], task["s"], task["eps1"], task["seed"], manifest.status,
                     math.nan if t_star is None else t_star,
                     report.max_ratio if report.applicable else math.nan, report.passed,
                     alpha, min_sep, t_used, h])
    return rows


def run_sweep(config_path, out: Path, force: bool, threads: int = 1) -> list:
    sweep = load_sweep_config(config_path)
    _prepare_out(out, ("summary.csv", "summary.json"), force)
    alpha = sweep.alpha if sweep.alpha is not None else max_alpha(sweep.rho)
    tasks = []
    for i, (s, e, sd) in enumerate(sweep.grid()):
        run = f"run{i:04d}"
        tasks.append({"config": str(config_path), "s": s, "eps1": e, "seed": sd, "run": run,
                      "run_dir": str(out / run), "force": force, "alpha": alpha})
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_sweep_task, tasks))
    else:
        results = [_sweep_task(t) for t in tasks]
    rows = [r for chunk in results for r in chunk]
    fio.write_csv(out / "summary.csv", SWEEP_COLUMNS, rows)
    fio.write_json(out / "summary.json", {
        "config": str(config_path), "code_version": __version__, "alpha": alpha, "rho": sweep.rho,
        "runs": len(tasks), "columns": list(SWEEP_COLUMNS),
    })
    return rows


def cmd_sweep(args) -> int:
    if not args.config:
        raise UsageError("sweep needs --config")
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    out = Path(args.out) if args.out else default_out_root() / Path(args.config).stem
    rows = run_sweep(args.config, out, args.force, args.threads)
    print(f"{len(rows)} summary rows: {out / 'summary.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fracburgers", description="Fractional Burgers numerical lab")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--force", action="store_true", help="overwrite existing artifacts")

    sp = sub.add_parser("simulate", help="run the solver from a config file")
    sp.add_argument("--config")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("decay-check", help="check the sup-norm decay bound on a run")
    sp.add_argument("run_dir")
    sp.add_argument("--tmin", type=float, default=0.1)
    common(sp)
    sp.set_defaults(func=cmd_decay_check)

    sp = sub.add_parser("constants", help="certify the oscillation constants")
    sp.add_argument("--rho", type=float)
    sp.add_argument("--s", type=float, default=0.45)
    sp.add_argument("--growth", type=float, default=500.0)
    sp.add_argument("--tol", type=float, default=1e-12)
    common(sp)
    sp.set_defaults(func=cmd_constants)

    sp = sub.add_parser("ladder", help="oscillation over nested cylinders")
    sp.add_argument("run_dir")
    sp.add_argument("--rho", type=float, default=0.25)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--center", type=_pair)
    sp.add_argument("--r0", type=float, default=4.0)
    sp.add_argument("--kmax", type=int, default=4)
    sp.add_argument("--tmin", type=float, default=0.0)
    common(sp)
    sp.set_defaults(func=cmd_ladder)

    sp = sub.add_parser("sweep", help="grid of runs over (s, eps1, seed)")
    sp.add_argument("--config")
    sp.add_argument("--threads", type=int, default=1)
    common(sp)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
    except UsageError as exc:
        print(f"fracburgers: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"fracburgers: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, ConstructionError) as exc:
        print(f"fracburgers: certification failed: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except (ConfigError, ParameterError, OutputExists, fio.ArtifactError, FracBurgersError) as exc:
        print(f"fracburgers: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
