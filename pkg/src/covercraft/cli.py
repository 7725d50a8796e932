"""Command-line driver: pairs -> cover -> search, plus oracle / analyze / verify.

Exit codes are a stable contract for CI: 0 success, 1 configuration or input
error, 2 resource or feasibility shortfall, 3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, analytics, cover, io, search
from .config import OFFSET_PRESETS, RunConfig
from .errors import (
    BudgetExceeded,
    ConfigError,
    CrtConflictError,
    DistinctnessError,
    DomainError,
    InsufficientPairsError,
    SchemaError,
    VerificationFailure,
)
from .search import SearchWindow

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RESOURCE = 2
EXIT_VERIFY = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems follow the config-error exit path
        raise ConfigError(message)


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _build_parser() -> _Parser:
    parser = _Parser(prog="covercraft", description=__doc__)
    parser.add_argument("--version", action="version", version=f"covercraft {__version__}")
    parser.add_argument("--config", type=Path, help="JSON run-config file")
    parser.add_argument("--K", type=int, dest="k_max")
    parser.add_argument("--M", type=int, dest="m_bound")
    parser.add_argument(
        "--L",
        dest="offsets_spec",
        help="offset set: 'remark1', 'factorial', or a comma list like '5,7'",
    )
    parser.add_argument("--seed", type=int)
    parser.add_argument("--threads", type=int)
    sub = parser.add_subparsers(dest="command", required=True)

    p_pairs = sub.add_parser("pairs", help="mine anchor/covering prime pairs")
    p_pairs.add_argument("--a", dest="bases", action="append", type=int,
                         help="base to mine (repeatable; default all of 2..K)")
    p_pairs.add_argument("--p-max", type=int, dest="p_max")
    p_pairs.add_argument("--budget-bits", type=int, dest="budget_bits")
    p_pairs.add_argument("--out", type=Path, default=Path("pairs.json"))
    p_pairs.set_defaults(func=cmd_pairs)

    p_cover = sub.add_parser("cover", help="partition pairs and build the CRT system")
    p_cover.add_argument("--pairs", type=Path, required=True)
    p_cover.add_argument("--band", nargs=2, metavar=("LOW", "HIGH"),
                         help="reciprocal-sum band as fractions, e.g. 1/32 1/24")
    p_cover.add_argument("--min-per-class", type=int, dest="min_per_class")
    p_cover.add_argument("--out", type=Path, default=Path("system.json"))
    p_cover.set_defaults(func=cmd_cover)

    p_search = sub.add_parser("search", help="run the window experiment")
    p_search.add_argument("--system", type=Path, required=True)
    p_search.add_argument("--N", type=int, dest="n_target")
    p_search.add_argument("--upper", type=int)
    p_search.add_argument("--i-max", type=int, dest="i_max")
    p_search.add_argument("--check-oracle", action="store_true")
    p_search.add_argument("--no-figures", action="store_true")
    p_search.add_argument("--out", type=Path, default=Path("report.jsonl"))
    p_search.set_defaults(func=cmd_search)

    p_oracle = sub.add_parser("oracle", help="brute-force ground truth for a window")
    p_oracle.add_argument("--N", type=int, dest="n_target")
    p_oracle.add_argument("--upper", type=int)
    p_oracle.add_argument("--i-max", type=int, dest="i_max")
    p_oracle.add_argument("--out", type=Path, default=Path("oracle.json"))
    p_oracle.set_defaults(func=cmd_oracle)

    p_an = sub.add_parser("analyze", help="sieve-sum diagnostics table and figures")
    p_an.add_argument("--grid", type=_int_list, help="comma list of x values")
    p_an.add_argument("--pair-m", type=_int_list, dest="pair_m_values")
    p_an.add_argument("--hit-a", type=int, dest="hit_a")
    p_an.add_argument("--hit-j", type=int, dest="hit_j")
    p_an.add_argument("--hit-l", type=int, dest="hit_l")
    p_an.add_argument("--hit-cutoff", type=int, dest="hit_cutoff")
    p_an.add_argument("--no-figures", action="store_true")
    p_an.add_argument("--out", type=Path, default=Path("diagnostics.json"))
    p_an.set_defaults(func=cmd_analyze)

    p_verify = sub.add_parser("verify", help="re-validate a covering-system file")
    p_verify.add_argument("--system", type=Path, required=True)
    p_verify.add_argument("--samples", type=int, default=1000)
    p_verify.set_defaults(func=cmd_verify)

    return parser


_OVERRIDE_FIELDS = (
    "k_max", "m_bound", "p_max", "budget_bits", "min_per_class",
    "n_target", "upper", "i_max", "seed", "threads",
    "pair_m_values", "hit_a", "hit_j", "hit_l", "hit_cutoff",
)


def _resolve_config(args) -> RunConfig:
    if getattr(args, "config", None):
        try:
            cfg = RunConfig.from_doc(io.read_json(args.config))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load config {args.config}: {exc}")
    else:
        cfg = RunConfig()
    for name in _OVERRIDE_FIELDS:
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    spec = getattr(args, "offsets_spec", None)
    if spec is not None:
        if spec in OFFSET_PRESETS:
            cfg.offsets, cfg.offsets_preset = None, spec
        else:
            cfg.offsets = _int_list(spec)
    if getattr(args, "band", None) is not None:
        cfg.band = list(args.band)
    if getattr(args, "grid", None) is not None:
        cfg.grid = args.grid
    if getattr(args, "no_figures", False):
        cfg.figures = False
    cfg.validate()
    return cfg


def cmd_pairs(cfg: RunConfig, args) -> int:
    target = cfg.target()
    bases = args.bases or list(target.a_values)
    for a in bases:
        if not 2 <= a <= cfg.k_max:
            raise ConfigError(f"base {a} outside [2, K={cfg.k_max}]")
    minings = [
        cover.find_prime_pairs(a, cfg.m_bound, cfg.p_max, cfg.k_max, cfg.budget_bits,
                               workers=cfg.resolved_threads())
        for a in sorted(set(bases))
    ]
    params = {
        "K": cfg.k_max, "M": cfg.m_bound, "p_max": cfg.p_max,
        "budget_bits": cfg.budget_bits, "bases": sorted(set(bases)),
    }
    io.write_json(args.out, io.mining_to_doc(minings, params))
    required = len(target.triples()) * cfg.min_per_class
    shortfall = False
    for mining in minings:
        a = mining.records[0].a if mining.records else "?"
        n_pairs = len(mining.pairs)
        print(f"a={a}: {n_pairs} pairs, {len(mining.skipped)} anchors skipped "
              f"(need {required} for {len(target.triples())} classes)")
        if n_pairs < required:
            shortfall = True
    print(f"wrote {args.out}")
    return EXIT_RESOURCE if shortfall else EXIT_OK


def cmd_cover(cfg: RunConfig, args) -> int:
    pairs = io.pairs_from_doc(io.read_json(args.pairs))
    kept, dropped = cover.dedupe_pairs(pairs)
    if dropped:
        print(f"dropped {len(dropped)} pairs with repeated covering primes")
    target = cfg.target()
    partition = cover.partition_pairs(
        kept, target.triples(), target.reciprocal_band(), target.min_per_class
    )
    system = cover.build_covering_system(partition, target)
    report = cover.verify_covering_system(system, samples=1000, seed=cfg.seed)
    if not report.ok:
        for name, detail in report.failures:
            print(f"FAIL {name}: {detail}")
        return EXIT_VERIFY
    io.write_json(args.out, io.system_to_doc(system))
    print(f"W has {system.modulus.bit_length()} bits across {len(system.entries)} entries")
    sums = partition.reciprocal_sums()
    in_band = partition.in_band()
    for (a, triple), value in sorted(sums.items()):
        qs = [pr.q for pr in partition.classes[(a, triple)]]
        density = cover.coverage_density([pr.p for pr in partition.classes[(a, triple)]])
        print(
            f"a={a} {triple.label()}: sum 1/p = {float(value):.6f} "
            f"({'in' if in_band[(a, triple)] else 'outside'} band), "
            f"covered exponent density {float(density):.6f}, q = {qs}"
        )
    print(f"wrote {args.out}")
    return EXIT_OK


def _window_from(cfg: RunConfig) -> SearchWindow:
    if cfg.n_target is None:
        raise ConfigError("this command needs --N")
    return SearchWindow.for_target(cfg.n_target, cfg.k_max, cfg.upper, cfg.i_max)


def cmd_search(cfg: RunConfig, args) -> int:
    system = io.system_from_doc(io.read_json(args.system))
    if cfg.n_target is None:
        raise ConfigError("search needs --N")
    target = system.config  # the system file pins K and the offset set
    window = SearchWindow.for_target(cfg.n_target, target.k_max, cfg.upper, cfg.i_max)
    report = search.run_experiment(
        target, window, system,
        system_digest=io.system_digest(system),
        workers=cfg.resolved_threads(),
    )
    io.write_report(args.out, report, cfg.to_doc())
    print(f"Q_N = {report.q_n}, Q = {report.q}; wrote {args.out}")
    if cfg.figures:
        from . import plotting

        figure = plotting.report_figure(report, Path(args.out).with_suffix(".png"))
        print(f"wrote {figure}")
    if args.check_oracle:
        survivors = set(report.survivors)
        oracle = set(search.brute_oracle(window, target, workers=cfg.resolved_threads()))
        if not survivors <= oracle:
            extra = sorted(survivors - oracle)
            print(f"ORACLE VIOLATION: pipeline survivors not in oracle: {extra}")
            return EXIT_VERIFY
        print(f"oracle containment holds ({len(survivors)} survivors, "
              f"{len(oracle)} oracle survivors)")
    return EXIT_OK


def cmd_oracle(cfg: RunConfig, args) -> int:
    window = _window_from(cfg)
    target = cfg.target()
    survivors = search.brute_oracle(window, target, workers=cfg.resolved_threads())
    io.write_json(args.out, io.oracle_to_doc(window, target, survivors))
    print(f"{len(survivors)} oracle survivors in [{window.n_low}, {window.n_high}]; "
          f"wrote {args.out}")
    return EXIT_OK


def cmd_analyze(cfg: RunConfig, args) -> int:
    hit_params = (cfg.k_max, cfg.hit_a, cfg.hit_j, cfg.hit_l, cfg.hit_cutoff)
    diag = analytics.build_diagnostics(cfg.grid, cfg.pair_m_values, hit_params,
                                       workers=cfg.resolved_threads())
    io.write_json(args.out, io.diagnostics_to_doc(diag))
    csv_path = Path(args.out).with_suffix(".csv")
    io.write_diagnostics_csv(csv_path, diag)
    print(f"wrote {args.out} and {csv_path}")
    for row in diag.rows:
        pi_note = "-" if row.pi_bounds is None else ("ok" if row.pi_bounds.ok else "FAIL")
        print(f"x={row.x}: mertens {'ok' if row.mertens.ok else 'FAIL'}, pi bounds {pi_note}")
    if cfg.figures:
        from . import plotting

        out = Path(args.out)
        for figure in plotting.diagnostics_figures(diag, out.parent, out.stem):
            print(f"wrote {figure}")
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    system = io.system_from_doc(io.read_json(args.system), revalidate=False)
    report = cover.verify_covering_system(system, samples=args.samples, seed=cfg.seed)
    for name, ok, detail in report.checks:
        if not ok:
            print(f"FAIL {name}: {detail}")
    n_fail = len(report.failures)
    print(f"{len(report.checks)} checks, {n_fail} failures, "
          f"{report.samples_run} sampled translates")
    return EXIT_OK if report.ok else EXIT_VERIFY


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        cfg = _resolve_config(args)
        return args.func(cfg, args)
    except ConfigError as exc:
        for line in str(exc).split("; "):
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except (SchemaError, CrtConflictError, DistinctnessError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BudgetExceeded, InsufficientPairsError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFY


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
