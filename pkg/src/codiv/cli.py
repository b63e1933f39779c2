"""Command-line interface: ``codiv {code,ser,rate,diversity,reproduce}``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .codes import (
    build_code,
    griesmer_report,
    rm1_generator,
    scrs_dmin_formula,
    scrs_generator,
    scrs_parameters,
    simplex_generator,
)
from .gf import FieldSpec
from .harness.config import DECODERS, FAMILIES, ConfigError, ExperimentConfig, cyclic_naive_generator, load_config
from .harness.diversity import estimate_diversity
from .harness.presets import PRESETS
from .harness.rate import achievable_rate
from .harness.sweep import SweepResult, read_csv, run_ser_sweep
from .sigmap import DegenerateChannelError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError([message])


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _add_experiment_flags(p):
    p.add_argument("--config", help="TOML experiment config")
    p.add_argument("--constellation")
    p.add_argument("--B", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--family", choices=FAMILIES)
    p.add_argument("--poly", type=lambda s: int(s, 0))
    p.add_argument("--channel", choices=("iid_rayleigh", "fixed_gain"))
    p.add_argument("--gains", type=_floats)
    p.add_argument("--snr", type=_floats, dest="snr_db", help="SNR grid in dB, e.g. '0 2 4'")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mc-samples", type=int, dest="mc_samples")
    p.add_argument("--workers", type=int)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--json", dest="json_out", help="also write a JSON mirror here")


def _experiment(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    over = {k: getattr(args, k) for k in ("constellation", "B", "N", "family", "poly", "channel",
                                          "gains", "snr_db", "trials", "seed", "mc_samples", "workers")}
    if getattr(args, "decoders", None):
        over["decoders"] = args.decoders.replace(",", " ").split()
    if getattr(args, "no_noise", False):
        over["noise"] = False
    return cfg.with_overrides(**over)


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_code(args) -> int:
    spec = FieldSpec(args.B, args.poly)
    if args.family == "simplex":
        G = simplex_generator(args.K, spec)
    elif args.family == "rm1":
        G = rm1_generator(args.K, spec)
    elif args.family == "scrs":
        if args.N is None:
            raise ConfigError(["--N is required for scrs"])
        G = scrs_generator(args.N, args.K, spec)
    else:
        if args.N is None:
            raise ConfigError(["--N is required for naive"])
        G = cyclic_naive_generator(args.N, args.K, spec)
    code = build_code(G)
    report = griesmer_report(G.K, spec, code.d_min, G.N) if code.d_min >= 1 else None
    out = {"family": args.family, "K": G.K, "N": G.N, "B": spec.B, "d_min": code.d_min,
           "generator": G.entries.tolist()}
    lines = ["# generator", G.to_text().rstrip(), f"d_min {code.d_min}"]
    if args.family == "scrs":
        n_out, n_in, n_short = scrs_parameters(G.N, G.K, spec)
        formula = scrs_dmin_formula(G.N, G.K, spec)
        out.update(N_out=n_out, N_in=n_in, shortened=n_short, formula_dmin=formula)
        lines.append(f"N_out {n_out}  N_in {n_in}  shortened {n_short}")
        if G.K == 2:
            alpha, r = divmod(G.N, spec.q + 1)
            literal = alpha * spec.q + r - 1
            out.update(alpha=alpha, r=r, closed_form_literal=literal)
            lines.append(f"alpha {alpha}  r {r}  closed form alpha*q+r-1 = {literal}  "
                         f"(adjusted {formula}, enumerated {code.d_min})")
        else:
            lines.append(f"floor lower bound {formula} (enumerated {code.d_min})")
    if report is not None:
        out["bounds"] = report.as_dict()
        lines.append("# bounds")
        lines.append(report.to_text().rstrip())
        lines.append(
            f"max d permitted by Griesmer at N={G.N}: {report.griesmer_max_d} "
            f"({'attained' if report.attains_griesmer_max_d else 'not attained'})"
        )
    if args.save:
        G.save(args.save)
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(out, indent=2))
    print("\n".join(lines))
    return EXIT_OK


def _cmd_ser(args) -> int:
    cfg = _experiment(args)
    result = run_ser_sweep(cfg)
    _emit(result.to_csv(), args.out)
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(result.to_json(), indent=2, default=str))
    return EXIT_OK


def _cmd_rate(args) -> int:
    cfg = _experiment(args)
    result = achievable_rate(cfg, draws=args.draws, mrc_samples=args.mrc_samples,
                             baseline_family=args.baseline)
    _emit(result.to_csv(), args.out)
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(result.to_json(), indent=2, default=str))
    return EXIT_OK


def _diversity_lines(result: SweepResult, decoders, window, min_errors):
    fits = {}
    for d in decoders or result.decoders:
        fit = estimate_diversity(result.curve(d), window=window, min_errors=min_errors)
        fits[d] = fit
    return fits


def _cmd_diversity(args) -> int:
    try:
        result = read_csv(Path(args.csv).read_text())
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError([f"cannot read {args.csv}: {exc}"]) from exc
    decoders = args.decoder.replace(",", " ").split() if args.decoder else None
    fits = _diversity_lines(result, decoders, tuple(args.window) if args.window else None, args.min_errors)
    for d, fit in fits.items():
        print(f"{d}: {fit}")
    if args.json_out:
        Path(args.json_out).write_text(json.dumps({d: f.as_dict() for d, f in fits.items()}, indent=2))
    return EXIT_OK


def _cmd_reproduce(args) -> int:
    kwargs = {}
    if args.trials is not None:
        kwargs["trials"] = args.trials
    if args.seed is not None:
        kwargs["seed"] = args.seed
    kind, runs = PRESETS[args.target](**kwargs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    if kind == "ser":
        merged = SweepResult([], {"preset": args.target})
        for name, cfg in runs:
            cfg = replace(cfg, workers=args.workers)
            merged = merged.merged(run_ser_sweep(cfg), name)
        text = merged.to_csv()
        for d, fit in _diversity_lines(merged, None, None, 100).items():
            print(f"{d}: {fit}")
    else:
        (name, cfg), = runs
        res = achievable_rate(cfg, draws=cfg.trials)
        text = res.to_csv()
        for p in res.points:
            print(f"{p.receiver} {p.snr_db:g} dB: {p.rate:.4f} +/- {p.stderr:.1e}")
    path = outdir / f"{args.target}.csv"
    path.write_text(text)
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="codiv", description="Coded distributed diversity simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("code", help="build a generator matrix and report its distance and bounds")
    p.add_argument("--family", choices=("simplex", "rm1", "scrs", "naive"), required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--B", type=int, default=1)
    p.add_argument("--N", type=int)
    p.add_argument("--poly", type=lambda s: int(s, 0))
    p.add_argument("--save", help="write the generator in 'K N B poly' text format")
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_code)

    p = sub.add_parser("ser", help="run a symbol-error-rate sweep")
    _add_experiment_flags(p)
    p.add_argument("--decoders", help=f"comma list from {','.join(DECODERS)}")
    p.add_argument("--no-noise", action="store_true", help="debug: disable receiver noise")
    p.set_defaults(func=_cmd_ser)

    p = sub.add_parser("rate", help="average achievable rate")
    _add_experiment_flags(p)
    p.add_argument("--draws", type=int, default=10_000)
    p.add_argument("--mrc-samples", type=int, default=64)
    p.add_argument("--baseline", default="naive", help="family of the comparison scheme")
    p.set_defaults(func=_cmd_rate)

    p = sub.add_parser("diversity", help="fit diversity slopes from a SER CSV")
    p.add_argument("csv")
    p.add_argument("--decoder")
    p.add_argument("--window", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--min-errors", type=int, default=100)
    p.add_argument("--json", dest="json_out")
    p.set_defaults(func=_cmd_diversity)

    p = sub.add_parser("reproduce", help="run a preset numerical study")
    p.add_argument("target", choices=sorted(PRESETS))
    p.add_argument("--out", default=".")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_reproduce)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (DegenerateChannelError, ArithmeticError) as exc:
        print(json.dumps({"error": "numerical", "problems": [str(exc)]}), file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        problems = exc.problems if isinstance(exc, ConfigError) else [str(exc)]
        print(json.dumps({"error": "config", "problems": problems}), file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
