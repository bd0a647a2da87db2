"""Command-line front end.

Subcommands: ``evaluate``, ``simulate``, ``optimize``, ``sweep``, ``validate``.
Every option can also be set in a ``key = value`` config file passed with
``--config``; command-line flags win. Loads are printed in units of the
content size F.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from .analytic import load_breakdown
from .geometry import TwoCellTopology, distance_for_overlap_ratio
from .model import ContentLibrary, Placement, SchemeMode, validate_placement
from .optimizer import CapacityError, InfeasibleError, optimize
from .simulator import run_trials
from .validation import run_checks

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2

CSV_COLUMNS = [
    "sweep_var",
    "sweep_value",
    "scheme",
    "M_p",
    "N_p",
    "r_analytic",
    "r1_analytic",
    "r2_analytic",
    "r_sim_mean",
    "r_sim_ci_low",
    "r_sim_ci_high",
    "runs",
    "seed",
]

SWEEP_DEFAULTS = {
    "alpha": (0.7, 2.0, 0.1),
    "overlap_ratio": (0.0, 1.0, 0.1),
    "users": (4, 16, 2),
}
SWEEP_ALIASES = {"alpha": "alpha", "ratio": "overlap_ratio", "overlap_ratio": "overlap_ratio",
                 "overlap-ratio": "overlap_ratio", "users": "users", "z": "users"}

DEFAULT_OVERLAP_RATIO = 0.3375


class UsageError(Exception):
    """Bad flags, config or input files."""


@dataclass
class ExperimentConfig:
    contents: int = 10
    content_size: float = 1.0
    capacity: int = 3
    alpha: float = 1.2
    popularity_file: Optional[str] = None
    radius: tuple = (1.0, 1.0)
    distance: Optional[float] = None
    overlap_ratio: Optional[float] = None
    users: int = 10
    runs: int = 2000
    seed: int = 0
    schemes: tuple = (SchemeMode.MAHC, SchemeMode.MACC, SchemeMode.UNCODED)
    sweep: Optional[str] = None
    start: Optional[float] = None
    stop: Optional[float] = None
    step: Optional[float] = None
    out: Optional[str] = None
    heuristic_slack: Optional[int] = None
    exact: bool = False
    partial_coded: bool = False
    placement: Optional[str] = None
    explicit: set = field(default_factory=set)

    def library(self) -> ContentLibrary:
        if self.popularity_file:
            weights = _read_weights(self.popularity_file)
            if "contents" in self.explicit and len(weights) != self.contents:
                raise UsageError(
                    f"popularity file has {len(weights)} entries, --contents is {self.contents}"
                )
            return ContentLibrary.from_weights(weights, self.content_size)
        return ContentLibrary.zipf(self.contents, self.alpha, self.content_size)

    def topology(self) -> TwoCellTopology:
        r1, r2 = self.radius
        if self.distance is not None:
            d = self.distance
        else:
            ratio = DEFAULT_OVERLAP_RATIO if self.overlap_ratio is None else self.overlap_ratio
            d = distance_for_overlap_ratio(ratio, r1, r2)
        return TwoCellTopology(r1, r2, d, self.users)

    def slack(self) -> Optional[int]:
        return None if self.exact else self.heuristic_slack


# --------------------------------------------------------------------------- parsing

def _read_weights(path: str) -> list[float]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read popularity file: {exc}") from None
    values = []
    for token in text.replace(",", " ").split():
        try:
            values.append(float(token))
        except ValueError:
            raise UsageError(f"bad popularity value {token!r} in {path}") from None
    if not values:
        raise UsageError(f"popularity file {path} is empty")
    return values


def _parse_radius(text: str) -> tuple:
    parts = [float(x) for x in str(text).split(",") if x.strip()]
    if len(parts) == 1:
        return (parts[0], parts[0])
    if len(parts) == 2:
        return tuple(parts)
    raise ValueError("expected one radius or two comma-separated radii")


def _parse_schemes(text: str) -> tuple:
    return tuple(SchemeMode.parse(s) for s in str(text).split(",") if s.strip())


def _parse_bool(text: str) -> bool:
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (attribute, converter)
_KEYS = {
    "contents": ("contents", int),
    "content_size": ("content_size", float),
    "capacity": ("capacity", int),
    "alpha": ("alpha", float),
    "popularity_file": ("popularity_file", str),
    "radius": ("radius", _parse_radius),
    "distance": ("distance", float),
    "overlap_ratio": ("overlap_ratio", float),
    "users": ("users", int),
    "runs": ("runs", int),
    "seed": ("seed", int),
    "schemes": ("schemes", _parse_schemes),
    "sweep": ("sweep", str),
    "from": ("start", float),
    "to": ("stop", float),
    "step": ("step", float),
    "out": ("out", str),
    "heuristic_slack": ("heuristic_slack", int),
    "exact": ("exact", _parse_bool),
    "partial_coded": ("partial_coded", _parse_bool),
    "placement": ("placement", str),
}


def read_config_file(path: str) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    values = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(raw: dict[str, object]) -> ExperimentConfig:
    cfg = ExperimentConfig()
    for key, value in raw.items():
        if value is None:
            continue
        attr, conv = _KEYS[key]
        try:
            converted = conv(str(value))
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {exc}") from None
        setattr(cfg, attr, converted)
        cfg.explicit.add(key)
    _check_config(cfg)
    return cfg


def _check_config(cfg: ExperimentConfig) -> None:
    if cfg.popularity_file and "contents" not in cfg.explicit:
        cfg.contents = len(_read_weights(cfg.popularity_file))
    if cfg.contents < 1:
        raise UsageError("--contents must be positive")
    if not 0 <= cfg.capacity <= cfg.contents:
        raise UsageError(f"--capacity must lie in [0, {cfg.contents}]")
    if cfg.alpha < 0:
        raise UsageError("--alpha must be nonnegative")
    if cfg.users < 1:
        raise UsageError("--users must be positive")
    if cfg.runs < 0:
        raise UsageError("--runs must be nonnegative")
    if min(cfg.radius) <= 0:
        raise UsageError("--radius must be positive")
    if cfg.distance is not None and cfg.overlap_ratio is not None:
        raise UsageError("give either --distance or --overlap-ratio, not both")
    if cfg.distance is not None and cfg.distance < 0:
        raise UsageError("--distance must be nonnegative")
    if cfg.heuristic_slack is not None and cfg.heuristic_slack < 0:
        raise UsageError("--heuristic-slack must be nonnegative")
    if not cfg.schemes:
        raise UsageError("--schemes is empty")
    try:
        cfg.topology()
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def read_placement_file(path: str, capacity: int) -> Placement:
    """Parse ``coded:``, ``uncoded1:``, ``uncoded2:`` and ``coded_share:`` lines."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read placement file: {exc}") from None
    fields: dict[str, object] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key: value'")
        key, value = (s.strip() for s in line.split(":", 1))
        key = key.lower()
        if key in fields:
            raise UsageError(f"{path}:{lineno}: duplicate key {key!r}")
        try:
            if key == "coded_share":
                fields[key] = int(value)
            elif key in ("coded", "uncoded1", "uncoded2"):
                fields[key] = frozenset(int(t) for t in value.split(",") if t.strip())
            else:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad integer list {value!r}") from None
    return Placement(
        cache_capacity=capacity,
        coded_share=int(fields.get("coded_share", 0)),
        coded_set=fields.get("coded", frozenset()),
        uncoded_set_1=fields.get("uncoded1", frozenset()),
        uncoded_set_2=fields.get("uncoded2", frozenset()),
    )


def format_placement(placement: Placement) -> str:
    def ids(s):
        return ",".join(str(n) for n in sorted(s))

    lines = [
        f"coded_share: {placement.coded_share}",
        f"coded: {ids(placement.coded_set)}",
        f"uncoded1: {ids(placement.uncoded_set_1)}",
        f"uncoded2: {ids(placement.uncoded_set_2)}",
    ]
    return "".join(line.rstrip() + "\n" for line in lines)


# --------------------------------------------------------------------------- commands

def _num(x: float) -> str:
    return f"{x:.10g}"


def _optimize(cfg: ExperimentConfig, library, topology, mode):
    return optimize(
        library,
        topology,
        mode,
        cfg.capacity,
        heuristic_slack=cfg.slack(),
        allow_partial_coded=cfg.partial_coded,
    )


def _load_placement(cfg: ExperimentConfig, library) -> Placement:
    if not cfg.placement:
        raise UsageError("this command needs --placement FILE")
    placement = read_placement_file(cfg.placement, cfg.capacity)
    violation = validate_placement(placement, library, allow_partial_coded=cfg.partial_coded)
    if violation is not None:
        raise UsageError(f"invalid placement: {violation}")
    return placement


def cmd_evaluate(cfg: ExperimentConfig, out) -> int:
    library, topology = cfg.library(), cfg.topology()
    placement = _load_placement(cfg, library)
    F = library.content_size_bits
    loads = load_breakdown(library, topology, placement)
    print(f"r  = {_num(loads.total / F)}", file=out)
    print(f"r1 = {_num(loads.coded / F)}", file=out)
    print(f"r2 = {_num(loads.uncached / F)}", file=out)
    if "runs" in cfg.explicit and cfg.runs > 0:
        _print_stats(run_trials(library, topology, placement, cfg.runs, cfg.seed), F, out)
    return EXIT_OK


def _print_stats(stats, F, out) -> None:
    print(
        f"simulated mean = {_num(stats.mean_load / F)}  "
        f"95% CI = [{_num(stats.ci_low / F)}, {_num(stats.ci_high / F)}]  "
        f"runs = {stats.runs}",
        file=out,
    )


def cmd_simulate(cfg: ExperimentConfig, out) -> int:
    library, topology = cfg.library(), cfg.topology()
    F = library.content_size_bits
    if cfg.runs < 1:
        raise UsageError("--runs must be at least 1 to simulate")
    if cfg.placement:
        targets = [("placement", _load_placement(cfg, library))]
    else:
        targets = [(m.label, _optimize(cfg, library, topology, m).best_placement) for m in cfg.schemes]
    for label, placement in targets:
        stats = run_trials(library, topology, placement, cfg.runs, cfg.seed)
        analytic = load_breakdown(library, topology, placement).total
        print(f"{label}: analytic r = {_num(analytic / F)}", file=out)
        _print_stats(stats, F, out)
    return EXIT_OK


def cmd_optimize(cfg: ExperimentConfig, out) -> int:
    library, topology = cfg.library(), cfg.topology()
    F = library.content_size_bits
    results = [_optimize(cfg, library, topology, m) for m in cfg.schemes]
    if cfg.out:
        if len(results) != 1:
            raise UsageError("--out with optimize needs exactly one scheme")
        Path(cfg.out).write_text(format_placement(results[0].best_placement))
    for res in results:
        loads = load_breakdown(library, topology, res.best_placement)
        print(
            f"# {res.scheme.label}: r = {_num(res.best_load / F)} "
            f"(r1 = {_num(loads.coded / F)}, r2 = {_num(loads.uncached / F)}), "
            f"{res.evaluations} placements evaluated",
            file=out,
        )
        out.write(format_placement(res.best_placement))
    return EXIT_OK


def sweep_points(start: float, stop: float, step: float) -> list[float]:
    if step <= 0:
        raise UsageError("--step must be positive")
    if stop < start:
        raise UsageError("--to must not be below --from")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def sweep_rows(cfg: ExperimentConfig, warn=None) -> list[list[str]]:
    """One row per (sweep point, scheme): optimise analytically, then simulate."""
    var = SWEEP_ALIASES.get((cfg.sweep or "").lower())
    if var is None:
        raise UsageError(f"unknown sweep variable {cfg.sweep!r}; use alpha, ratio or users")
    lo, hi, st = SWEEP_DEFAULTS[var]
    points = sweep_points(
        lo if cfg.start is None else cfg.start,
        hi if cfg.stop is None else cfg.stop,
        st if cfg.step is None else cfg.step,
    )
    rows = []
    for value in points:
        if var == "alpha":
            point = replace(cfg, alpha=value)
        elif var == "overlap_ratio":
            point = replace(cfg, overlap_ratio=value, distance=None)
        else:
            if value != int(value) or value < 1:
                raise UsageError(f"user count must be a positive integer, got {value}")
            point = replace(cfg, users=int(value))
        try:
            library, topology = point.library(), point.topology()
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        F = library.content_size_bits
        for mode in cfg.schemes:
            res = _optimize(point, library, topology, mode)
            loads = load_breakdown(library, topology, res.best_placement)
            row = [
                var,
                _num(value),
                mode.label,
                str(res.best_placement.coded_share),
                str(res.best_placement.coded_count),
                _num(res.best_load / F),
                _num(loads.coded / F),
                _num(loads.uncached / F),
            ]
            if cfg.runs > 0:
                stats = run_trials(library, topology, res.best_placement, cfg.runs, cfg.seed)
                row += [_num(stats.mean_load / F), _num(stats.ci_low / F), _num(stats.ci_high / F)]
                gap = abs(stats.mean_load - res.best_load)
                if warn and gap > max(3 * stats.ci_halfwidth, 0.05 * res.best_load):
                    warn(
                        f"warning: {var}={_num(value)} {mode.label}: simulated "
                        f"{_num(stats.mean_load / F)} vs analytic {_num(res.best_load / F)}"
                    )
            else:
                row += ["", "", ""]
            row += [str(cfg.runs), str(cfg.seed)]
            rows.append(row)
    return rows


def cmd_sweep(cfg: ExperimentConfig, out) -> int:
    rows = sweep_rows(cfg, warn=lambda msg: print(msg, file=sys.stderr))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    writer.writerows(rows)
    if cfg.out:
        Path(cfg.out).write_text(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def cmd_validate(cfg: ExperimentConfig, out) -> int:
    results = run_checks(cfg.library(), cfg.topology(), cfg.capacity, cfg.runs or 2000, cfg.seed)
    for r in results:
        print(r.line(), file=out)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed", file=out)
    return EXIT_CHECK if failed else EXIT_OK


HELP = {
    "evaluate": "analytic load of a placement file",
    "simulate": "Monte-Carlo load of a placement file or of each scheme's optimum",
    "optimize": "best placement for each scheme",
    "sweep": "CSV of optimised and simulated loads along one parameter",
    "validate": "run the built-in consistency checks",
}

COMMANDS = {
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("model")
    g.add_argument("--config", help="key = value file; flags override it")
    g.add_argument("--contents", help="library size N (default 10)")
    g.add_argument("--content-size", help="content size F in bits (default 1)")
    g.add_argument("--capacity", help="cache capacity M in contents (default 3)")
    g.add_argument("--alpha", help="Zipf exponent (default 1.2)")
    g.add_argument("--popularity-file", help="request weights, one per content")
    g.add_argument("--radius", help="cell radius, or two comma-separated radii (default 1)")
    g.add_argument("--distance", help="distance between the cell centres")
    g.add_argument("--overlap-ratio", help="intersection/union area ratio (default 0.3375)")
    g.add_argument("--users", help="number of users Z (default 10)")
    g.add_argument("--partial-coded", action="store_const", const="true", default=None,
                   help="allow coded parts with N_p > 2·M_p")
    g = common.add_argument_group("run")
    g.add_argument("--runs", help="Monte-Carlo trials (default 2000)")
    g.add_argument("--seed", help="base seed (default 0)")
    g.add_argument("--schemes", help="comma list of MAHC, MACC, uncoded (default all)")
    g.add_argument("--sweep", help="alpha, ratio or users")
    g.add_argument("--from", dest="from_", help="first sweep value")
    g.add_argument("--to", help="last sweep value")
    g.add_argument("--step", help="sweep increment")
    g.add_argument("--out", help="output file")
    g.add_argument("--heuristic-slack", help="restrict the search to top contents")
    g.add_argument("--exact", action="store_const", const="true", default=None,
                   help="always use exact search, ignoring --heuristic-slack")
    g.add_argument("--placement", help="placement file (evaluate, simulate)")

    parser = argparse.ArgumentParser(
        prog="mahc", description="Hybrid coded/uncoded caching for two overlapping cells."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    raw: dict[str, object] = {}
    if args.config:
        raw.update(read_config_file(args.config))
    for key in _KEYS:
        attr = "from_" if key == "from" else key
        value = getattr(args, attr, None)
        if value is not None:
            raw[key] = value
            # distance and overlap ratio are two spellings of one setting
            if key == "distance":
                raw.pop("overlap_ratio", None)
            elif key == "overlap_ratio":
                raw.pop("distance", None)
    return build_config(raw)


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](cfg, out)
    except (UsageError, CapacityError, InfeasibleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
