"""Command-line driver.

Every subcommand writes ``<stem>.csv`` and ``<stem>.json`` (or a single
JSON file) under ``--out`` and prints the JSON summary to stdout.  Values
come from flags, then from the ``--config`` JSON file, then from the
defaults below.  Exit codes: 0 success, 2 invalid input, 1 numerical
failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import DEFAULTS, Tolerances
from .errors import ConfigInvalid, DoiLabError, NumericalFailure, UnknownCommand, ValidationError

COMMANDS = ("verify-doi", "build-multipliers", "cubes-stats", "lipschitz", "holder", "schatten",
            "quasicommutator", "counterexample", "filters")
DEFAULT_SEED = 20240601


@dataclass
class RunConfig:
    command: str = ""
    n: int = 3
    dim: int = 8
    trials: int = 100
    seed: int = DEFAULT_SEED
    alpha: float = 0.5
    p: float = 2.0
    sigma: float = 1.0
    window: int = 64
    max_level: int = 6
    kind: str = ""
    ideal: str = "op"
    m: int = 3
    terms: int = 8
    sizes: list = field(default_factory=lambda: [4, 8, 16, 32])
    h: float = 0.25
    r_mode: str = "random"
    commutator: bool = False
    sweep: bool = False
    jobs: int = 1
    out: str = "results"
    tolerances: dict = field(default_factory=dict)

    _POSITIVE = ("n", "dim", "trials", "sigma", "window", "jobs", "terms", "h")

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise UnknownCommand(f"unknown command {self.command!r}; choose from {', '.join(COMMANDS)}")
        for key in self._POSITIVE:
            v = getattr(self, key)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not v > 0 or not math.isfinite(v):
                raise ConfigInvalid(f"{key} must be a positive number, got {v!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigInvalid(f"seed must be a non-negative integer, got {self.seed!r}")
        if self.max_level < 0 or self.m < 0:
            raise ConfigInvalid("max_level and m must be non-negative")
        if not isinstance(self.tolerances, dict):
            raise ConfigInvalid("tolerances must be a JSON object")
        self.tol()  # rejects unknown tolerance keys
        return self

    def tol(self) -> Tolerances:
        return DEFAULTS.replace(**self.tolerances) if self.tolerances else DEFAULTS


_CONFIG_KEYS = {f.name for f in fields(RunConfig)}


def _ideal(text: str):
    from .linalg import IdealSpec

    t = text.strip().lower()
    try:
        if t in ("op", "operator"):
            return IdealSpec.operator()
        if t.startswith("weak"):
            return IdealSpec.weak(float(t[4:]))
        if t.startswith("s"):
            return IdealSpec.schatten(float(t[1:]))
    except ValueError:
        pass
    raise ConfigInvalid(f"cannot parse ideal {text!r}; use op, S<p> or weak<p>")


def _tol_pair(text: str) -> tuple[str, float]:
    key, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key.strip(), float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"tolerance {key} needs a number") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with RunConfig keys (flags override it)")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, help="worker processes for trial loops")
    common.add_argument("--out", help="output directory (default: results)")
    common.add_argument("--tol", action="append", type=_tol_pair, metavar="KEY=VALUE", dest="tol",
                        help="tolerance override, repeatable")

    parser = argparse.ArgumentParser(prog="doilab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")

    def add(name, help_, *args):
        p = sub.add_parser(name, parents=[common], help=help_, argument_default=argparse.SUPPRESS)
        for flag, kw in args:
            p.add_argument(flag, **kw)
        return p

    n = ("--n", {"type": int})
    dim = ("--dim", {"type": int})
    trials = ("--trials", {"type": int})
    alpha = ("--alpha", {"type": float})
    add("verify-doi", "residuals of the exact difference and quasicommutator formulas", n, dim, trials,
        ("--sigma", {"type": float}))
    add("build-multipliers", "assemble the multiplier family for a random band-limited field", n,
        ("--sigma", {"type": float}), ("--max-level", {"type": int, "dest": "max_level"}),
        ("--terms", {"type": int}))
    add("cubes-stats", "maximal admissible cube counts and partner maxima", n, ("--window", {"type": int}),
        ("--max-level", {"type": int, "dest": "max_level"}))
    add("lipschitz", "band-limited Lipschitz campaign", n, dim, trials, ("--sigma", {"type": float}),
        ("--ideal", {"help": "op, S<p> or weak<p>"}), ("--terms", {"type": int}))
    add("holder", "Holder-class campaign", n, dim, trials, alpha,
        ("--kind", {"choices": ["power", "log"]}), ("--sweep", {"action": "store_true"}))
    add("schatten", "Schatten-class Holder campaign", n, dim, trials, alpha, ("--p", {"type": float}),
        ("--kind", {"choices": ["schatten", "partial_sums", "boyd_power", "weak", "besov"]}),
        ("--m", {"type": int}), ("--ideal", {"help": "ideal for the boyd_power kind"}))
    add("quasicommutator", "quasicommutator campaign", n, dim, trials, alpha,
        ("--r-mode", {"choices": ["random", "identity"], "dest": "r_mode"}),
        ("--commutator", {"action": "store_true"}))
    add("counterexample", "non-multiplier diagnostics for the three-variable field",
        ("--sizes", {"type": float, "nargs": "+"}), ("--h", {"type": float}))
    add("filters", "partition-of-unity and Bernstein checks", n, trials, ("--sigma", {"type": float}))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Merge defaults, the JSON config file and explicit flags (in increasing precedence)."""
    values: dict = {}
    given = vars(args).copy()
    path = given.pop("config", None)
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        values.update(data)
    tol = given.pop("tol", None)
    values.update(given)
    if tol:
        values["tolerances"] = {**values.get("tolerances", {}), **dict(tol)}
    return RunConfig(**values).validate()


def _write_json(path: Path, payload: dict) -> Path:
    from .experiments.report import _clean

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n")
    return path


def _write_ledger_csv(path: Path, rows: list[dict]) -> Path:
    """One line per scale: scale, cube count, sup bound and combined bound (max over j)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["scale", "cubes", "sup_bound", "combined"])
    for r in rows:
        sup = repr(float(max(r["sup_bound"]))) if r["sup_bound"] is not None else ""
        comb = repr(float(max(r["combined"]))) if r["combined"] is not None else ""
        w.writerow([r["scale"], r["cubes"], sup, comb])
    path.write_text(buf.getvalue())
    return path


def _emit(cfg: RunConfig, reports) -> dict:
    out = Path(cfg.out)
    summary = {}
    for rep in reports:
        rep.write(out)
        summary[rep.name] = rep.summary
    return summary


def _cmd_verify_doi(cfg: RunConfig) -> dict:
    from .experiments import identity_experiment

    rep = identity_experiment(cfg.n, cfg.dim, cfg.trials, cfg.sigma, cfg.seed, cfg.jobs)
    summary = _emit(cfg, [rep])
    worst = rep.summary["max_scaled_residual"]
    if worst > 1e-8:
        raise NumericalFailure(f"identity residual {worst:.3e} exceeds 1e-8 (scaled)")
    return summary


def _cmd_build_multipliers(cfg: RunConfig) -> dict:
    from .funcalc.fields import make_bandlimited
    from .multipliers import assemble, ledger_totals

    f = make_bandlimited(cfg.n, cfg.sigma, cfg.terms, seed=cfg.seed)
    fam = assemble(f, max_level=min(cfg.max_level, 5), tol=cfg.tol())
    totals = ledger_totals(fam)
    x, y = fam.sample_pairs(10_000, seed=cfg.seed)
    res = fam.representation_residual(x, y)
    payload = {"field": f.to_json(), "sigma": cfg.sigma, "max_level": fam.max_level,
               "representation_residual": res, "ledger": fam.ledger, "totals": totals}
    _write_json(Path(cfg.out) / "multipliers.json", payload)
    _write_ledger_csv(Path(cfg.out) / "multipliers_ledger.csv", fam.ledger["rows"])
    return {"representation_residual": res, "slope": totals["slope"], "C_n": totals["C_n"],
            "psi_bound": totals["psi_bound"]}


def _cmd_cubes_stats(cfg: RunConfig) -> dict:
    from .cubes import Window, cube_stats

    info = cube_stats(Window.cube(cfg.n, cfg.window), cfg.max_level)
    _write_json(Path(cfg.out) / "cubes_stats.json", info)
    return {k: info[k] for k in ("counts", "max_partners", "bound", "verified")}


def _cmd_lipschitz(cfg: RunConfig) -> dict:
    from .experiments import ideal_lipschitz_experiment

    return _emit(cfg, [ideal_lipschitz_experiment(_ideal(cfg.ideal), cfg.n, cfg.dim, cfg.trials, cfg.sigma,
                                                  cfg.seed, terms=cfg.terms, jobs=cfg.jobs)])


def _cmd_holder(cfg: RunConfig) -> dict:
    from .experiments import holder_experiment, holder_sweep

    kind = cfg.kind or "power"
    if cfg.sweep:
        rep = holder_sweep(n=cfg.n, dim=cfg.dim, trials=cfg.trials, seed=cfg.seed, jobs=cfg.jobs)
    else:
        rep = holder_experiment(cfg.alpha, cfg.n, cfg.dim, cfg.trials, cfg.seed, kind=kind, jobs=cfg.jobs)
    return _emit(cfg, [rep])


def _cmd_schatten(cfg: RunConfig) -> dict:
    from .experiments import schatten_holder_experiment

    kind = cfg.kind or "schatten"
    ideal = _ideal(cfg.ideal) if kind == "boyd_power" and cfg.ideal != "op" else None
    return _emit(cfg, [schatten_holder_experiment(cfg.p, cfg.alpha, kind, cfg.n, cfg.dim, cfg.trials, cfg.seed,
                                                  m=cfg.m, ideal=ideal, jobs=cfg.jobs)])


def _cmd_quasicommutator(cfg: RunConfig) -> dict:
    from .experiments import quasicommutator_experiment

    return _emit(cfg, [quasicommutator_experiment(cfg.alpha, cfg.n, cfg.dim, cfg.trials, cfg.seed, cfg.r_mode,
                                                  cfg.commutator, jobs=cfg.jobs)])


def _cmd_counterexample(cfg: RunConfig) -> dict:
    from .experiments import counterexample_d2f, positive_multiplier_check_3d

    return _emit(cfg, [counterexample_d2f(cfg.sizes, cfg.h), positive_multiplier_check_3d(cfg.sizes)])


def _cmd_filters(cfg: RunConfig) -> dict:
    from .funcalc.fields import make_bandlimited
    from .funcalc.filters import FilterBank
    from .funcalc.norms import bernstein_check

    t = np.geomspace(1e-3, 1e3, 200)
    partition = float(np.max(np.abs(FilterBank().partition_sum(t) - 1)))
    period = 2 * math.pi * 8 / cfg.sigma
    worst = 0.0
    for k in range(cfg.trials):
        f = make_bandlimited(cfg.n, cfg.sigma, 6, seed=cfg.seed + k, period=period)
        if f.sigma == 0:
            continue
        for j in range(cfg.n):
            alpha = [0] * cfg.n
            alpha[j] = 1 + k % 3
            worst = max(worst, bernstein_check(f, alpha, (0.0, period), tol=cfg.tol()))
    payload = {"partition_defect": partition, "bernstein_max_ratio": worst, "fields": cfg.trials,
               "n": cfg.n, "sigma": cfg.sigma, "seed": cfg.seed}
    _write_json(Path(cfg.out) / "filters.json", payload)
    return payload


_HANDLERS = {
    "verify-doi": _cmd_verify_doi,
    "build-multipliers": _cmd_build_multipliers,
    "cubes-stats": _cmd_cubes_stats,
    "lipschitz": _cmd_lipschitz,
    "holder": _cmd_holder,
    "schatten": _cmd_schatten,
    "quasicommutator": _cmd_quasicommutator,
    "counterexample": _cmd_counterexample,
    "filters": _cmd_filters,
}


def dispatch(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in COMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            parser.print_help()
            return 0
        err = UnknownCommand(f"expected one of {', '.join(COMMANDS)}, got {argv[:1]}")
        print(f"error: UnknownCommand: {err}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = resolve_config(args)
        summary = _HANDLERS[cfg.command](cfg)
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except (NumericalFailure, DoiLabError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    from .experiments.report import _clean

    print(json.dumps(_clean(summary), indent=2, sort_keys=True))
    return 0


def main() -> None:
    sys.exit(dispatch())


__all__ = ["COMMANDS", "RunConfig", "build_parser", "dispatch", "main", "resolve_config"]
