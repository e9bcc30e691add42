"""Command-line experiment runner.

    gcm-ot trajectory --eps 0.3 --steps 2000 --out traj.csv
    gcm-ot sweep-eps --eps 0:0.5:51 --n-init 100 --out eps.csv
    gcm-ot sweep-grid --alpha 3.5:4:11 --eps 0:0.5:11 --out grid.csv

Settings come from built-in defaults, then ``--config`` (a JSON object whose
keys are the long flag names, dashes or underscores), then explicit flags.
Every output file opens with ``#`` comment lines recording the resolved
configuration, so a file can be regenerated from its own header.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterator, Sequence, TextIO

import numpy as np

from gcm_ot import __version__
from gcm_ot.analysis import classify_phase, run_ensemble
from gcm_ot.clustering import size_mass_batch
from gcm_ot.dynamics import GcmParams, iterate
from gcm_ot.transport import w1_counts


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    alpha: str = "3.8"
    eps: str = "0.3"
    n: int = 100
    delta: float = 1e-6
    steps: int = 11000
    transient: int = 1000
    window: int = 1000
    ruin_window: int | None = None
    n_init: int = 100
    init_seed: int = 0
    noise_seed: int = 0
    noise_amp: float = 1e-12
    workers: int = 1
    states: bool = False
    out: str = "-"

    @property
    def alphas(self) -> list[float]:
        return parse_range(self.alpha, "alpha", 0.0, 4.0)

    @property
    def epsilons(self) -> list[float]:
        return parse_range(self.eps, "eps", 0.0, 1.0)

    @property
    def resolved_ruin_window(self) -> int:
        return self.steps - self.transient if self.ruin_window is None else self.ruin_window

    def params(self, alpha: float, epsilon: float) -> GcmParams:
        return GcmParams(
            alpha=alpha,
            epsilon=epsilon,
            n_elements=self.n,
            delta=self.delta,
            noise_amplitude=self.noise_amp,
            noise_seed=self.noise_seed,
            init_seed=self.init_seed,
        )

    def validate(self) -> None:
        errors = []
        if self.steps < 1:
            errors.append(f"steps: must be at least 1, got {self.steps}")
        if self.transient < 0:
            errors.append(f"transient: must be nonnegative, got {self.transient}")
        if self.window < 1:
            errors.append(f"window: must be at least 1, got {self.window}")
        if self.transient + self.window > self.steps:
            errors.append(f"window: transient + window = {self.transient + self.window} exceeds steps = {self.steps}")
        rw = self.resolved_ruin_window
        if rw < 1 or self.transient + rw > self.steps:
            errors.append(f"ruin_window: {rw} does not fit after transient {self.transient} in {self.steps} steps")
        if self.n_init < 1:
            errors.append(f"n_init: must be at least 1, got {self.n_init}")
        if self.workers < 1:
            errors.append(f"workers: must be at least 1, got {self.workers}")
        for name in ("alphas", "epsilons"):
            try:
                getattr(self, name)
            except ConfigError as exc:
                errors.append(str(exc))
        if not errors:
            try:
                self.params(self.alphas[0], self.epsilons[0])
            except ValueError as exc:
                errors.append(f"params: {exc}")
            if self.init_seed + self.n_init - 1 >= 2**64:
                errors.append("init_seed: seed schedule overflows 64 bits")
        if errors:
            raise ConfigError("\n".join(errors))


def parse_range(text: str, name: str, lo: float, hi: float) -> list[float]:
    """``"0.3"``, ``"0,0.2,0.5"`` or ``"min:max:count"`` (inclusive linspace)."""
    text = str(text).strip()
    try:
        if ":" in text:
            a, b, c = text.split(":")
            count = int(c)
            if count < 1:
                raise ConfigError(f"{name}: count must be at least 1 in {text!r}")
            values = np.linspace(float(a), float(b), count).tolist()
        else:
            values = [float(v) for v in text.split(",")]
    except ConfigError:
        raise
    except ValueError:
        raise ConfigError(f"{name}: cannot parse {text!r}; use a value, a comma list or min:max:count") from None
    for v in values:
        if not (math.isfinite(v) and lo <= v <= hi):
            raise ConfigError(f"{name}: value {v} outside [{lo}, {hi}]")
    return values


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str, "bool": bool, "int | None": int}


def load_config_file(path: str | Path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    lines = text.splitlines()
    out = {}
    for raw_key, value in data.items():
        key = raw_key.replace("-", "_")
        lineno = next((i for i, ln in enumerate(lines, 1) if f'"{raw_key}"' in ln), 0)
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown setting {raw_key!r}")
        cast = _CASTS[_FIELD_TYPES[key]]
        if value is None and _FIELD_TYPES[key] == "int | None":
            out[key] = None
            continue
        if cast is str and isinstance(value, (int, float)):
            value = repr(float(value))
        if cast in (int, float) and (isinstance(value, bool) or not isinstance(value, (int, float))):
            raise ConfigError(f"{path}:{lineno}: {raw_key} must be a number, got {value!r}")
        if cast is int and int(value) != value:
            raise ConfigError(f"{path}:{lineno}: {raw_key} must be an integer, got {value!r}")
        if cast is bool and not isinstance(value, bool):
            raise ConfigError(f"{path}:{lineno}: {raw_key} must be true or false")
        out[key] = cast(value)
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcm-ot", description="Globally coupled logistic map experiments.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    # Defaults are None so that unset flags do not override the config file.
    common.add_argument("--config", help="JSON file with settings; explicit flags override it")
    common.add_argument("--alpha", help="value, comma list or min:max:count (default 3.8)")
    common.add_argument("--eps", help="value, comma list or min:max:count (default 0.3)")
    common.add_argument("--n", type=int, help="number of elements (default 100)")
    common.add_argument("--delta", type=float, help="clustering precision (default 1e-6)")
    common.add_argument("--steps", type=int, help="iterations per trajectory (default 11000)")
    common.add_argument("--transient", type=int, help="steps discarded before averaging (default 1000)")
    common.add_argument("--window", type=int, help="OT averaging window (default 1000)")
    common.add_argument("--ruin-window", type=int, help="entropy window (default steps - transient)")
    common.add_argument("--n-init", type=int, help="initial conditions per point (default 100)")
    common.add_argument("--init-seed", type=int, help="first initial-condition seed (default 0)")
    common.add_argument("--noise-seed", type=int, help="noise stream seed (default 0)")
    common.add_argument("--noise-amp", type=float, help="noise amplitude (default 1e-12)")
    common.add_argument("--workers", type=int, help="parallel processes (default 1)")
    common.add_argument("--out", help="output CSV path, '-' for stdout (default '-')")

    p = sub.add_parser("trajectory", parents=[common], help="per-step ED and OT distance for one run")
    p.add_argument("--states", action="store_true", default=None, help="also write x(1..N)")
    sub.add_parser("sweep-eps", parents=[common], help="per-seed OT average and ruin entropy over an eps grid")
    sub.add_parser("sweep-grid", parents=[common], help="ensemble means and phase label over an (alpha, eps) grid")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config:
        values.update(load_config_file(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**values)
    cfg.validate()
    return cfg


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _provenance(cfg: RunConfig, command: str) -> list[str]:
    lines = [f"gcm-ot {__version__} {command}"]
    settings = asdict(cfg)
    settings["ruin_window"] = cfg.resolved_ruin_window
    settings.pop("out")
    settings.pop("workers")
    lines += [f"{k} = {json.dumps(v)}" for k, v in settings.items()]
    if command != "trajectory":
        lines.append(
            f"seed schedule: init_seed(r) = {cfg.init_seed} + r for r < {cfg.n_init}; noise_seed = {cfg.noise_seed} shared"
        )
    return lines


def _write(cfg: RunConfig, command: str, header: Sequence[str], rows: Iterator[Sequence]) -> None:
    def emit(fh: TextIO) -> None:
        for line in _provenance(cfg, command):
            fh.write(f"# {line}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])

    if cfg.out == "-":
        emit(sys.stdout)
    else:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            emit(fh)


def _trajectory_rows(cfg: RunConfig) -> Iterator[list]:
    params = cfg.params(cfg.alphas[0], cfg.epsilons[0])
    prev_counts = None
    prev_row = None
    for n, x in enumerate(iterate(params, cfg.steps)):
        ed, counts = size_mass_batch(x, params.delta)
        if prev_row is not None:
            prev_row[-1] = float(w1_counts(prev_counts, counts)[0])
            yield prev_row
        row = [n]
        if cfg.states:
            row += x.tolist()
        row += [int(ed[0]), ""]
        prev_row, prev_counts = row, counts
    yield prev_row


def cmd_trajectory(cfg: RunConfig) -> None:
    if len(cfg.alphas) != 1 or len(cfg.epsilons) != 1:
        raise ConfigError("trajectory takes a single alpha and eps value")
    header = ["step"]
    if cfg.states:
        header += [f"x{i}" for i in range(1, cfg.n + 1)]
    header += ["effective_dimension", "ot_distance"]
    _write(cfg, "trajectory", header, _trajectory_rows(cfg))


def _run_point(cfg: RunConfig, alpha: float, epsilon: float):
    return run_ensemble(
        cfg.params(alpha, epsilon),
        cfg.n_init,
        cfg.steps,
        cfg.transient,
        cfg.window,
        cfg.resolved_ruin_window,
    )


def _run_points(cfg: RunConfig, points: list[tuple[float, float]]) -> Iterator:
    # map() preserves submission order, so rows come out sorted whatever the worker count.
    if cfg.workers == 1 or len(points) == 1:
        for a, e in points:
            yield _run_point(cfg, a, e)
        return
    with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
        yield from pool.map(_run_point, [cfg] * len(points), *zip(*points))


def cmd_sweep_eps(cfg: RunConfig) -> None:
    if len(cfg.alphas) != 1:
        raise ConfigError("sweep-eps takes a single alpha value; use sweep-grid for alpha ranges")
    alpha = cfg.alphas[0]
    points = [(alpha, e) for e in cfg.epsilons]

    def rows():
        for (a, e), run in zip(points, _run_points(cfg, points)):
            for r, seed in enumerate(run.init_seeds):
                yield [a, e, seed, float(run.ot_time_avg[r]), run.ruin[r].entropy,
                       run.ruin[r].zero_time_count, int(run.final_ed[r])]

    header = ["alpha", "epsilon", "init_seed", "ot_time_avg", "ruin_entropy", "zero_time_count", "final_ed"]
    _write(cfg, "sweep-eps", header, rows())


def cmd_sweep_grid(cfg: RunConfig) -> None:
    points = [(a, e) for a in cfg.alphas for e in cfg.epsilons]
    seeds = f"{cfg.init_seed}-{cfg.init_seed + cfg.n_init - 1}"

    def rows():
        for (a, e), run in zip(points, _run_points(cfg, points)):
            ot_mean = math.fsum(run.ot_time_avg.tolist()) / cfg.n_init
            h_mean = math.fsum(run.ruin_entropy.tolist()) / cfg.n_init
            modal = run.modal_final_ed
            yield [a, e, ot_mean, h_mean, modal, classify_phase(ot_mean, modal, cfg.n),
                   cfg.n_init, seeds, cfg.noise_seed]

    header = ["alpha", "epsilon", "ot_time_avg_mean", "ruin_entropy_mean", "modal_final_ed",
              "phase_label", "n_init", "init_seeds", "noise_seed"]
    _write(cfg, "sweep-grid", header, rows())


COMMANDS = {
    "trajectory": cmd_trajectory,
    "sweep-eps": cmd_sweep_eps,
    "sweep-grid": cmd_sweep_grid,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        COMMANDS[args.command](cfg)
    except ConfigError as exc:
        for line in str(exc).splitlines():
            print(f"gcm-ot: error: {line}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"gcm-ot: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
