"""Command line front end.

Every stage reads the files written by the previous one, and ``pipeline``
chains them in-process while writing the same files, so a staged run and a
one-shot run leave byte-identical artifacts in ``--out``.

Exit codes: 0 success, 1 bad input data, 2 bad configuration or arguments,
3 some property FALSE, 4 some property UNKNOWN (and none FALSE).
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .entropy import PET, derivative, read_pet, write_derivative, write_pet
from .filtration import ORDERS, read_graphs, write_graphs
from .ltl import LTLSyntaxError, parse_ltl
from .monitor import (
    GROUPS,
    IDIOTYPIC_PROPERTIES,
    MPEA,
    MpeaTrace,
    batch_statistics,
    check_properties,
    classify_trace,
    exit_code,
    format_trace,
    format_verdicts,
    label_execution,
    parse_trace,
    read_properties,
)
from .pea import (
    DEFAULT_MIN_LEN,
    PEA,
    augment,
    default_eps_deriv,
    default_level_tol,
    detect_steady_segments,
    idiotypic_pea,
    load_augmentation,
    mine_pea,
)
from .conditions import DEFAULT_EPS_EQ
from .pelts import execute
from .pipeline import graphs_to_pet, run_batch
from .sim import SimConfig, simulate

log = logging.getLogger("pemonitor")

SNAPSHOTS = "snapshots.csv"
PET_FILE = "pet.csv"
PLOT_DIR = "plot"
PEA_FILE = "pea.json"
SEGMENTS_FILE = "segments.csv"
EXECUTION_FILE = "execution.csv"
TRACE_FILE = "trace.txt"
CLASSES_FILE = "classes.csv"
GROUPS_FILE = "groups.csv"
VERDICTS_FILE = "verdicts.csv"


class ConfigError(Exception):
    """Bad configuration or arguments: exit status 2."""


class DataError(Exception):
    """Input data the stage cannot process: exit status 1."""


def data_path(name: str):
    return resources.files("pemonitor") / "data" / name


# -- stage implementations (shared by the subcommands and pipeline) ---------

def load_config(path, seed) -> SimConfig:
    try:
        if path is None:
            cfg = SimConfig()
        elif path in ("default", "batch"):
            with resources.as_file(data_path(f"{path}.cfg")) as p:
                cfg = SimConfig.read(p)
        else:
            cfg = SimConfig.read(path)
        if seed is not None:
            cfg = SimConfig.from_mapping({**_as_mapping(cfg), "seed": seed})
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"config: {exc}") from None
    return cfg


def _as_mapping(cfg: SimConfig) -> dict:
    return {k: v for k, v in (ln.split("=", 1) for ln in cfg.dumps().splitlines())}


def stage_simulate(cfg: SimConfig, out: Path):
    graphs = list(simulate(cfg).graphs())
    write_graphs(graphs, out / SNAPSHOTS)
    log.info("simulated %d ticks", len(graphs))
    return graphs


def stage_entropy(graphs, out: Path, args) -> PET:
    try:
        pet = graphs_to_pet(graphs, args.max_dim, args.order, args.dim, jobs=args.jobs)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    write_pet(pet, out / PET_FILE)
    if args.emit_plot_data:
        (out / PLOT_DIR).mkdir(exist_ok=True)
        write_pet(pet.with_baseline(), out / PLOT_DIR / "entropy.csv")
        if len(pet) > 1:
            write_derivative(derivative(pet), out / PLOT_DIR / "dentropy.csv")
    return pet


def load_augment(spec):
    if spec is None:
        return None
    try:
        if spec == "idiotypic":
            with resources.as_file(data_path("idiotypic_augment.json")) as p:
                return load_augmentation(p)
        return load_augmentation(spec)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"augmentation: {exc}") from None


def stage_mine(pet: PET, out: Path, args) -> PEA:
    eps_deriv = default_eps_deriv(pet) if args.eps_deriv is None else args.eps_deriv
    level_tol = default_level_tol(pet) if args.level_tol is None else args.level_tol
    segments = detect_steady_segments(pet, eps_deriv, args.min_len)
    with open(out / SEGMENTS_FILE, "w") as fh:
        fh.write("start,end,level\n")
        for s in segments:
            fh.write(f"{pet.times[s.start]},{pet.times[s.end]},{s.level!r}\n")
    try:
        pea = mine_pea(segments, level_tol, pet=pet, eps_deriv=eps_deriv, eps_eq=args.eps_eq)
        spec = load_augment(args.augment)
        if spec:
            pea = augment(pea, spec)
    except ConfigError:
        raise
    except (ValueError, KeyError) as exc:
        raise DataError(str(exc)) from None
    pea.to_json(out / PEA_FILE)
    log.info("mined %d states from %d steady segments", len(pea.states), len(segments))
    return pea


def stage_execute(pea: PEA, pet: PET, out: Path, args):
    try:
        e = execute(pea, pet, policy="first-declared")
    except (RuntimeError, ValueError) as exc:
        raise DataError(str(exc)) from None
    e.to_csv(out / EXECUTION_FILE)
    tr = label_execution(e, MPEA.by_state_name(pea))
    (out / TRACE_FILE).write_text(format_trace(tr))
    return tr


def stage_classify(named_traces, out: Path) -> dict:
    with open(out / CLASSES_FILE, "w") as fh:
        fh.write("trace_id,group\n")
        for name, tr in named_traces:
            fh.write(f"{name},{classify_trace(tr)}\n")
    stats = batch_statistics(tr for _, tr in named_traces)
    with open(out / GROUPS_FILE, "w") as fh:
        fh.write("group,count\n")
        for g in GROUPS:
            fh.write(f"{g},{stats[g]}\n")
    return stats


def load_properties(path) -> list:
    if path is None:
        formulas = list(IDIOTYPIC_PROPERTIES)
    else:
        try:
            formulas = read_properties(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"properties: {exc}") from None
    try:
        return [parse_ltl(f) for f in formulas]
    except LTLSyntaxError as exc:
        raise ConfigError(f"properties: {exc}") from None


def stage_check(named_traces, formulas, out: Path) -> int:
    rows = check_properties([tr for _, tr in named_traces], formulas)
    (out / VERDICTS_FILE).write_text(format_verdicts(rows, [n for n, _ in named_traces]))
    return exit_code(v for _, _, v in rows)


# -- file helpers -------------------------------------------------------------

def _read_pet(path) -> PET:
    try:
        return read_pet(path)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None


def _read_traces(paths) -> list:
    out = []
    for p in paths:
        try:
            out.append((Path(p).stem, parse_trace(Path(p).read_text())))
        except (OSError, ValueError, KeyError) as exc:
            raise DataError(f"{p}: {exc}") from None
    return out


def _read_pea(path) -> PEA:
    try:
        if path == "idiotypic":
            return idiotypic_pea()
        return PEA.from_json(path)
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"{path}: {exc}") from None


# -- subcommands --------------------------------------------------------------

def cmd_simulate(args, out):
    stage_simulate(load_config(args.config, args.seed), out)
    return 0


def cmd_entropy(args, out):
    try:
        graphs = read_graphs(args.snapshots)
    except (OSError, ValueError) as exc:
        raise DataError(f"{args.snapshots}: {exc}") from None
    stage_entropy(graphs, out, args)
    return 0


def cmd_mine(args, out):
    stage_mine(_read_pet(args.pet), out, args)
    return 0


def cmd_execute(args, out):
    stage_execute(_read_pea(args.pea), _read_pet(args.pet), out, args)
    return 0


def cmd_classify(args, out):
    stats = stage_classify(_read_traces(args.traces), out)
    print(" ".join(f"{g}={n}" for g, n in stats.items()))
    return 0


def cmd_check(args, out):
    formulas = load_properties(args.properties)
    return stage_check(_read_traces(args.traces), formulas, out)


def cmd_pipeline(args, out):
    cfg = load_config(args.config, args.seed)
    formulas = load_properties(args.properties)
    if args.runs:
        # Batch mode monitors every run with one fixed automaton.
        pea = _read_pea(args.pea or "idiotypic")
        seeds = range(cfg.seed, cfg.seed + args.runs)
        traces = run_batch(cfg, seeds, pea, jobs=args.jobs)
        named = [(f"seed{s}", MpeaTrace.from_symbols(t)) for s, t in zip(seeds, traces)]
        stats = stage_classify(named, out)
        print(" ".join(f"{g}={n}" for g, n in stats.items()))
        return stage_check(named, formulas, out)
    graphs = stage_simulate(cfg, out)
    pet = stage_entropy(graphs, out, args)
    pea = _read_pea(args.pea) if args.pea else stage_mine(pet, out, args)
    tr = stage_execute(pea, pet, out, args)
    named = [(Path(TRACE_FILE).stem, tr)]
    stage_classify(named, out)
    return stage_check(named, formulas, out)


# -- argument parsing ---------------------------------------------------------

def _global_flags(parser, suppress: bool):
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--out", type=Path, default=d(Path(".")), help="output directory")
    parser.add_argument("--seed", type=int, default=d(None), help="simulation seed override")
    parser.add_argument("--jobs", type=int, default=d(1), help="worker processes")
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def _entropy_flags(p):
    p.add_argument("--max-dim", type=int, choices=(1, 2), default=1)
    p.add_argument("--order", choices=ORDERS, default="descending-rank")
    p.add_argument("--dim", type=int, default=None, help="restrict entropy to one dimension")
    p.add_argument("--emit-plot-data", action="store_true", help="also write plot/entropy.csv")


def _mine_flags(p):
    p.add_argument("--eps-deriv", type=float, default=None)
    p.add_argument("--min-len", type=int, default=DEFAULT_MIN_LEN)
    p.add_argument("--level-tol", type=float, default=None)
    p.add_argument("--eps-eq", type=float, default=DEFAULT_EPS_EQ)
    p.add_argument("--augment", default=None, help="augmentation JSON, or 'idiotypic'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pemonitor", description=__doc__.split("\n")[0])
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help):
        p = sub.add_parser(name, help=help)
        _global_flags(p, suppress=True)
        p.set_defaults(fn=fn)
        return p

    p = add("simulate", cmd_simulate, "run the toy idiotypic simulator")
    p.add_argument("--config", help="key=value file, or 'default' / 'batch'")

    p = add("entropy", cmd_entropy, "persistent entropy of each snapshot")
    p.add_argument("snapshots")
    _entropy_flags(p)

    p = add("mine", cmd_mine, "mine a PEA from a PET")
    p.add_argument("pet")
    _mine_flags(p)

    p = add("execute", cmd_execute, "run a PEA over a PET")
    p.add_argument("pea", help="PEA JSON, or 'idiotypic'")
    p.add_argument("pet")

    p = add("classify", cmd_classify, "group monitor traces")
    p.add_argument("traces", nargs="+")

    p = add("check", cmd_check, "evaluate bounded LTL properties")
    p.add_argument("traces", nargs="+")
    p.add_argument("--properties", help="one formula per line (default: the idiotypic ones)")

    p = add("pipeline", cmd_pipeline, "simulate through check in one go")
    p.add_argument("--config")
    p.add_argument("--properties")
    p.add_argument("--pea", help="monitor with this PEA instead of mining one")
    p.add_argument("--runs", type=int, default=0, help="batch mode: classify this many seeds")
    _entropy_flags(p)
    _mine_flags(p)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    if args.jobs < 1:
        parser.error("--jobs must be positive")
    try:
        args.out.mkdir(parents=True, exist_ok=True)
        return args.fn(args, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
