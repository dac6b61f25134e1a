"""Command-line entry point: ``eraser-sim {eval,sweep,sample,duality,verify-oracle}``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from . import oracle
from .config import FORMATS, ConfigError, OutputBlock, SampleBlock, parse_config
from .observables import DegenerateVisibilityError, duality_check
from .output import duality_record, emit, row_to_record, write_output
from .stochastic import (
    FitError,
    SweepError,
    SweepSpec,
    dephased_duality,
    evaluate_point,
    sweep,
)
from .unitary import DegenerateSplitterError

log = logging.getLogger("eraser_sim")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

UNITS_NOTE = "Units: all angles in radians, magnetic field in tesla, areas in m^2, bias in volts."


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eraser-sim",
        description="Electronic Mach-Zehnder quantum eraser simulator. " + UNITS_NOTE,
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("config", nargs=None if config_required else "?", help="JSON configuration file")
        p.add_argument("--delta-phi", type=float, help="override the interaction phase (radians)")
        p.add_argument("--shots", type=int, help="override the number of shots")
        p.add_argument("--seed", type=int, help="override the RNG seed")
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=FORMATS, help="output format")
        return p

    common(sub.add_parser("eval", help="analytic probabilities and correlations for one setup"))
    common(sub.add_parser("sweep", help="sweep one parameter over a grid"))
    common(sub.add_parser("sample", help="Monte Carlo coincidence counts for one setup"))
    common(sub.add_parser("duality", help="visibility / distinguishability for all lead pairs"))
    p = common(sub.add_parser("verify-oracle", help="random-setup oracle suite"), config_required=False)
    p.add_argument("--setups", type=int, default=1000, help="number of random setups")
    p.add_argument("--tol", type=float, default=1e-12)
    return parser


def _load(args, mode):
    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read {args.config}: {exc.strerror or exc}") from exc
    cfg = parse_config(text, mode=mode)
    if args.delta_phi is not None:
        cfg = replace(cfg, delta_phi=args.delta_phi, geometry=None)
    if args.shots is not None or args.seed is not None:
        if mode == "sweep":
            if args.shots is not None:
                cfg = replace(cfg, sweep=replace(cfg.sweep, shots=args.shots))
            if args.seed is not None:
                base = cfg.sample or SampleBlock(0)
                cfg = replace(cfg, sample=replace(base, seed=args.seed))
        else:
            base = cfg.sample or SampleBlock(0)
            cfg = replace(cfg, sample=SampleBlock(
                args.shots if args.shots is not None else base.shots,
                args.seed if args.seed is not None else base.seed,
            ))
    if args.shots is not None and args.shots < 0:
        raise ConfigError("must be >= 0", "--shots")
    if args.seed is not None and args.seed < 0:
        raise ConfigError("must be >= 0", "--seed")
    out = cfg.output
    cfg = replace(cfg, output=OutputBlock(args.out if args.out is not None else out.path,
                                          args.format or out.format))
    if mode == "sample" and cfg.sample is None:
        raise ConfigError("mode 'sample' needs a sample block or --shots", "sample")
    return cfg


def _run_eval(cfg):
    row = evaluate_point(cfg.build_setup(), cfg.bias)
    return [row_to_record(row)]


def _run_sample(cfg):
    row = evaluate_point(cfg.build_setup(), cfg.bias, shots=cfg.sample.shots, seed=cfg.sample.seed)
    return [row_to_record(row)]


def _run_sweep(cfg):
    sb = cfg.sweep
    delta_area = sb.delta_area
    if delta_area is None and cfg.geometry is not None:
        delta_area = cfg.geometry.delta_area
    spec = SweepSpec(
        parameter=sb.parameter,
        grid=sb.grid,
        base=cfg.build_setup(),
        shots=sb.shots,
        seed=cfg.sample.seed if cfg.sample else 0,
        bias=cfg.bias,
        delta_area=delta_area,
    )
    return [row_to_record(r, sb.parameter) for r in sweep(spec)]


def _run_duality(cfg):
    setup = cfg.build_setup()
    model = cfg.duality.dephasing
    records = []
    for pair in (("alpha", "gamma"), ("alpha", "delta"), ("beta", "gamma"), ("beta", "delta")):
        if model is None:
            try:
                rep = duality_check(setup, pair)
            except DegenerateVisibilityError as exc:
                log.warning("lead pair %s: %s", ",".join(pair), exc)
                continue
        else:
            rep, _ = dephased_duality(setup, model, pair)
        records.append(duality_record(rep))
    if not records:
        raise DegenerateVisibilityError("visibility undefined for every lead pair")
    return records


def _run_verify(args):
    seed = args.seed if args.seed is not None else 0
    results = oracle.run_suite(args.setups, seed, args.tol)
    records = [{"check": r.name, "cases": r.cases, "max_error": r.max_error, "tolerance": r.tol,
                "passed": r.passed} for r in results]
    return records, all(r.passed for r in results)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify-oracle":
            records, ok = _run_verify(args)
            write_output(emit(records, args.format or "csv"), args.out)
            return EXIT_OK if ok else EXIT_NUMERIC
        cfg = _load(args, args.command)
        runner = {"eval": _run_eval, "sweep": _run_sweep, "sample": _run_sample, "duality": _run_duality}
        records = runner[args.command](cfg)
        write_output(emit(records, cfg.output.format), cfg.output.path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DegenerateVisibilityError, DegenerateSplitterError, FitError, SweepError, FloatingPointError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        # invariant violations raised by domain constructors
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
