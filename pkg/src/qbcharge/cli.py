"""
Command line: ``qbcharge run --config <path> [--out <dir>] [--seed <u64>]``
and ``qbcharge check``.

The config file is flat ``key = value`` text. Keys before any section
header apply to every experiment; a ``[<experiment>]`` section overrides
them for that experiment only. Parameters left unset take the
experiment's default (see :data:`AUTO`).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import logging
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .errors import DimensionError, IntegratorError, TruncationError
from .experiments import RUNNERS, Outcome, appendix_checks, invariant_checks

EXPERIMENTS = tuple(RUNNERS)
CHARGERS = ("fock", "npats", "dts", "gibbs")
PROTOCOLS = ("charge", "reset")
TOP = "run"

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_PHYSICS = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = "single-charge"
    Tbar: float = 0.1
    chi: float = 1.0
    delta_over_omega: float = 50.0
    gamma0: tuple = (0.0, 0.01, 0.05, 0.1)
    charger: str = "npats"
    photons: int = 1
    alpha: Optional[float] = None
    qubit_pg: Optional[float] = None
    M: int = 0
    N: int = -1
    K: int = 30
    cutoff_L: int = 25
    cutoff_R: int = 25
    horizon: float = 2 * math.pi
    points: int = 201
    eta_points: int = 101
    Tbar_list: tuple = (0.05, 0.1)
    ratios: tuple = (10.0, 30.0, 100.0)
    protocol: str = "charge"
    out: str = "out"
    seed: int = 0

    def params(self) -> dict:
        return dataclasses.asdict(self)


# Per-experiment defaults that differ from the dataclass defaults.
AUTO = {
    "single-charge": {},
    "reset": {},
    "eta-sweep": {},
    "dissipation": {"cutoff_L": 12, "cutoff_R": 12, "delta_over_omega": 10.0, "horizon": math.pi, "points": 41},
    "collisions": {"charger": "dts"},
    "validate-dispersive": {"cutoff_L": 6, "cutoff_R": 6, "horizon": math.pi, "points": 41},
    "appendix-checks": {},
}

_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_LOOKUP = {name.lower(): name for name in _FIELDS}
_FLOAT_LISTS = {"gamma0", "Tbar_list", "ratios"}
_INTS = {"photons", "M", "N", "K", "cutoff_L", "cutoff_R", "points", "eta_points", "seed"}
_OPTIONAL = {"alpha", "qubit_pg"}


def _parse_float(v: str) -> float:
    x = float(v)
    if not math.isfinite(x):
        raise ValueError(f"{v!r} is not finite")
    return x


def _convert(key: str, raw: str):
    raw = raw.strip()
    if key in _FLOAT_LISTS:
        items = [s for s in re.split(r"[,\s]+", raw) if s]
        if not items:
            raise ValueError("empty list")
        return tuple(_parse_float(s) for s in items)
    if key in _OPTIONAL:
        return None if raw.lower() in ("", "auto", "thermal", "none") else _parse_float(raw)
    if key in _INTS:
        return int(raw)
    if key in ("experiment", "charger", "protocol", "out"):
        return raw
    return _parse_float(raw)


def _validate(cfg: ExperimentConfig) -> list[tuple[str, str]]:
    """``(key, message)`` for every out-of-range parameter."""
    bad = []

    def need(cond, key, msg):
        if not cond:
            bad.append((key, msg))

    need(cfg.experiment in EXPERIMENTS, "experiment", f"must be one of {', '.join(EXPERIMENTS)}")
    need(cfg.charger in CHARGERS, "charger", f"must be one of {', '.join(CHARGERS)}")
    need(cfg.protocol in PROTOCOLS, "protocol", f"must be one of {', '.join(PROTOCOLS)}")
    need(cfg.chi > 0, "chi", "must be > 0 (it divides the doublet detuning)")
    need(cfg.Tbar >= 0, "Tbar", "must be >= 0")
    need(all(t >= 0 for t in cfg.Tbar_list), "Tbar_list", "temperatures must be >= 0")
    need(cfg.delta_over_omega > 0, "delta_over_omega", "must be > 0")
    need(all(r > 0 for r in cfg.ratios), "ratios", "must be > 0")
    need(all(g >= 0 for g in cfg.gamma0), "gamma0", "rates must be >= 0")
    need(cfg.photons >= 0, "photons", "must be >= 0")
    need(cfg.alpha is None or cfg.alpha >= 0, "alpha", "must be >= 0 or auto")
    need(cfg.qubit_pg is None or 0 <= cfg.qubit_pg <= 1, "qubit_pg", "must lie in [0, 1] or be thermal")
    need(cfg.K >= 1, "K", "must be >= 1")
    need(cfg.cutoff_L >= 2, "cutoff_L", "must be >= 2")
    need(cfg.cutoff_R >= 2, "cutoff_R", "must be >= 2")
    need(cfg.horizon > 0, "horizon", "must be > 0")
    need(cfg.points >= 2, "points", "must be >= 2")
    need(cfg.eta_points >= 2, "eta_points", "must be >= 2")
    need(0 <= cfg.seed < 2 ** 64, "seed", "must be an unsigned 64-bit integer")
    return bad


def _locate(text: str) -> dict:
    """Map ``(section, key)`` to the 1-based line where it is set."""
    where, section = {}, TOP
    for no, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        m = re.match(r"^\[(.+)\]$", s)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"^([^=:#;\s][^=:]*?)\s*[=:]", s)
        if m:
            where[(section, m.group(1).strip().lower())] = no
    return where


def parse_config_text(text: str, overrides: Optional[dict] = None) -> ExperimentConfig:
    """Validated config from ``key = value`` text; see the module docstring."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                       default_section="__none__")
    parser.optionxform = str
    try:
        parser.read_string(f"[{TOP}]\n" + text)
    except configparser.Error as exc:
        # shift reported line numbers back past the injected header
        msg = re.sub(r"line\s+(\d+)", lambda m: f"line {int(m.group(1)) - 1}", str(exc))
        raise ConfigError(f"config parse error: {msg}") from None
    where = _locate(text)

    def at(section, key):
        no = where.get((section, key.lower()))
        return f" (line {no})" if no else ""

    raw = {}
    for section in parser.sections():
        if section != TOP and section not in EXPERIMENTS:
            raise ConfigError(f"unknown section [{section}]{at(TOP, '')}; expected one of {', '.join(EXPERIMENTS)}")
        for key, value in parser.items(section):
            name = _LOOKUP.get(key.lower())
            if name is None:
                raise ConfigError(f"unknown key {key!r} in [{section}]{at(section, key)}")
            if section != TOP and name == "experiment":
                raise ConfigError(f"'experiment' must be set outside sections{at(section, key)}")
            try:
                raw[(section, name)] = _convert(name, value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {name!r}{at(section, key)}: {exc}") from None

    experiment = (overrides or {}).get("experiment") or raw.get((TOP, "experiment"), ExperimentConfig.experiment)
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment {experiment!r}{at(TOP, 'experiment')} must be one of {', '.join(EXPERIMENTS)}")
    values = dict(AUTO[experiment])
    origin = {}
    for section in (TOP, experiment):
        for (sec, name), v in raw.items():
            if sec == section:
                values[name] = v
                origin[name] = sec
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    values["experiment"] = experiment
    cfg = ExperimentConfig(**values)
    bad = _validate(cfg)
    if bad:
        lines = [f"{k}{at(origin.get(k, TOP), k)}: {msg}" for k, msg in bad]
        raise ConfigError("invalid config: " + "; ".join(lines))
    return cfg


def parse_config(path, overrides: Optional[dict] = None) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {str(path)!r} not found")
    return parse_config_text(path.read_text(), overrides)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (tuple, list)):
        return " ".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_outputs(cfg: ExperimentConfig, outcome: Outcome, out_dir: Path) -> list[Path]:
    """One CSV per series plus ``<experiment>__summary.txt``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    base = {k: v for k, v in cfg.params().items() if k not in ("experiment", "out")}
    files = []
    for s in outcome.series:
        params = dict(base, **s.params)
        cols = sorted(params)
        path = out_dir / f"{cfg.experiment}__{s.name}.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["experiment", "series", "x_name", "x", "y_name", "y"] + cols)
            tail = [_fmt(params[c]) for c in cols]
            for x, y in zip(s.x, s.y):
                w.writerow([cfg.experiment, s.name, s.x_name, _fmt(float(x)), s.y_name, _fmt(float(y))] + tail)
        files.append(path)
    path = out_dir / f"{cfg.experiment}__summary.txt"
    lines = [f"config.{k} = {_fmt(v)}" for k, v in cfg.params().items()]
    lines += [f"{k} = {_fmt(float(v) if hasattr(v, 'dtype') else v)}" for k, v in outcome.scalars.items()]
    lines += [f"check.{k} = {'PASS' if v else 'FAIL'}" for k, v in outcome.checks.items()]
    lines.append(f"status = {'ok' if outcome.ok else 'failed'}")
    path.write_text("\n".join(lines) + "\n")
    files.append(path)
    return files


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> tuple[int, list]:
    """Run one experiment and write its outputs; returns ``(exit status, files)``."""
    params = cfg.params()
    try:
        outcome = RUNNERS[cfg.experiment](params)
    except (TruncationError, DimensionError, IntegratorError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS, []
    files = write_outputs(cfg, outcome, Path(out_dir or cfg.out))
    for k, v in outcome.checks.items():
        print(f"{'PASS' if v else 'FAIL'} {cfg.experiment}.{k}")
    return (EXIT_OK if outcome.ok else EXIT_CHECK_FAILED), files


def run_checks(seed: int = 0) -> Outcome:
    """Partition-function and state identities and dynamical invariants on default parameters."""
    params = ExperimentConfig(experiment="appendix-checks", seed=seed).params()
    total = Outcome()
    for fn in (appendix_checks, invariant_checks):
        o = fn(params)
        total.scalars.update(o.scalars)
        total.checks.update(o.checks)
    return total


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="qbcharge", description="Cross-mode quantum battery simulations.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("--config", required=True, help="key = value config file")
    run.add_argument("--out", help="output directory (overrides the config)")
    run.add_argument("--seed", type=int, help="seed for randomized checks (overrides the config)")
    chk = sub.add_parser("check", help="run the appendix-identity and invariant suite")
    chk.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")

    if args.command == "check":
        outcome = run_checks(args.seed)
        for k, v in outcome.checks.items():
            print(f"{'PASS' if v else 'FAIL'} {k}")
        return EXIT_OK if outcome.ok else EXIT_CHECK_FAILED

    try:
        cfg = parse_config(args.config, {"out": args.out, "seed": args.seed})
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status, files = run_experiment(cfg)
    for f in files:
        print(f"wrote {f}")
    return status


if __name__ == "__main__":
    sys.exit(main())
