"""Command-line entry point.

Every capability is a subcommand emitting JSON (or CSV for ``simulate``) on
stdout or to ``--out``; diagnostics go to stderr.  Exit codes: 0 success,
1 usage error, 2 data or convergence error.

Spec strings on flags:
  link:     cubic | identity | tanhsig | logitnorm, optionally ``:scale``
  pattern:  abs:<beta> | sq:<beta> | uniform | weights:w1,..,wK |
            min-unconstrained | min-monotone, optionally followed by ``,K=<k>``
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import data as data_mod
from . import harness, rates, snr
from .model import OrdinalModel, PatternDistribution, StrengthLink
from .ranking import PreferenceVector, count_scores, dataset_from_csv, kendall_tau

__all__ = ["main", "parse_and_dispatch", "parse_link_spec", "parse_pattern_spec"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1, not argparse's default 2
        raise UsageError(f"{message}\n{self.format_usage().rstrip()}")


_LINK_KINDS = {
    "cubic": {"kind": "cubic"},
    "identity": {"kind": "identity"},
    "tanhsig": {"kind": "tanh-sigmoid"},
    "logitnorm": {"kind": "logit-of-cdf", "base_cdf": "standard-normal"},
}


def parse_link_spec(spec: str) -> StrengthLink:
    name, _, scale = spec.partition(":")
    if name not in _LINK_KINDS:
        raise UsageError(f"unknown link {name!r}; choose from "
                         f"{'|'.join(_LINK_KINDS)}")
    kwargs = dict(_LINK_KINDS[name])
    if scale:
        try:
            kwargs["scale"] = float(scale)
        except ValueError:
            raise UsageError(f"bad link scale {scale!r}") from None
    return StrengthLink(**kwargs)


def parse_pattern_spec(spec: str, K: int | None = None) -> PatternDistribution:
    parts = [p.strip() for p in spec.split(",") if p.strip()]
    body_parts = []
    for part in parts:
        if part.upper().startswith("K="):
            try:
                K = int(part[2:])
            except ValueError:
                raise UsageError(f"bad K in pattern spec {spec!r}") from None
        else:
            body_parts.append(part)
    if not body_parts:
        raise UsageError(f"empty pattern spec {spec!r}")
    name, _, arg = body_parts[0].partition(":")
    if name == "weights":
        try:
            weights = [float(v) for v in [arg, *body_parts[1:]]]
        except ValueError:
            raise UsageError(f"bad weights in pattern spec {spec!r}") from None
        if K is not None and K != len(weights):
            raise UsageError(f"{len(weights)} weights given but K={K}")
        return PatternDistribution.from_weights(weights)
    if len(body_parts) > 1:
        raise UsageError(f"cannot parse pattern spec {spec!r}")
    if name in ("abs", "sq"):
        if K is None:
            raise UsageError("pattern family needs K (flag --K or ',K=<k>')")
        try:
            beta = float(arg)
        except ValueError:
            raise UsageError(f"bad beta in pattern spec {spec!r}") from None
        return PatternDistribution.from_family(name, beta, K)
    if name == "uniform":
        if K is None:
            raise UsageError("uniform pattern needs K")
        return PatternDistribution.uniform(K)
    if name == "min-unconstrained":
        if K is None:
            raise UsageError("min-unconstrained pattern needs K")
        return snr.minimal_snr_unconstrained(K)[1]
    if name == "min-monotone":
        if K is None:
            raise UsageError("min-monotone pattern needs K")
        return snr.minimal_snr_monotone(K)[1]
    raise UsageError(f"unknown pattern spec {spec!r}")


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
        if not payload.endswith("\n"):
            sys.stdout.write("\n")


def _json_out(obj, args) -> None:
    if getattr(args, "annotate", False):
        import time
        obj = {**obj, "annotations": {"unix_time": time.time()}}
    _emit(json.dumps(obj, indent=2), args.out)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ordrank", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command")
    parser.subparsers = {}

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text)
        parser.subparsers[name] = p
        p.add_argument("--out", help="write output to this path instead of stdout")
        p.add_argument("--seed", type=int, default=7)
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--annotate", action="store_true",
                       help="include wall-clock annotations in JSON output")
        return p

    p = add("snr", "signal-to-noise report for a magnitude pattern")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--psi", required=True, help="pattern spec, e.g. abs:0.1")

    p = add("snr-min", "minimal-SNR value and pattern for a given K")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--monotone", action="store_true",
                   help="restrict to non-increasing weights")

    p = add("rank", "counting scores and ranking errors for a dataset")
    p.add_argument("--input", required=True, help="CSV with header i,j,l,y")
    p.add_argument("--theta", required=True, help="JSON file with true preferences")

    p = add("rates", "misranking decay rates and crossover estimate")
    p.add_argument("--link", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--factor", type=float, default=10.0)

    p = add("simulate", "run a Monte-Carlo experiment from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--paper-scale", action="store_true",
                   help="restore the full-scale replication counts")

    p = add("ingest", "parse ratings and write pairwise comparisons")
    p.add_argument("--format", default="movielens-100k-tab",
                   choices=["movielens-100k-tab", "generic-csv"])
    p.add_argument("--path", required=True)
    p.add_argument("--min-item-ratings", type=int, default=200)

    p = add("evaluate", "split-protocol comparison of sum vs sign-sum")
    p.add_argument("--pairs", required=True)
    p.add_argument("--train-frac", type=float, default=0.7)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--min-pair-count", type=int, default=10)
    p.add_argument("--pairing", choices=["repetition", "pair"],
                   default="repetition")

    p = add("histogram", "magnitude histogram of pairwise comparisons")
    p.add_argument("--pairs", required=True)

    p = add("model-info", "model descriptor and per-gamma statistics")
    p.add_argument("--link", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--K", type=int)
    p.add_argument("--gamma", type=float)

    return parser


def _cmd_snr(args) -> int:
    pattern = parse_pattern_spec(args.psi, args.K)
    report = snr.snr_of_pattern(pattern)
    _json_out({"K": pattern.K, "psi": args.psi, **report.to_dict()}, args)
    return 0


def _cmd_snr_min(args) -> int:
    fn = snr.minimal_snr_monotone if args.monotone else snr.minimal_snr_unconstrained
    value, pattern = fn(args.K)
    _json_out({"K": args.K,
               "constraint": "non-increasing" if args.monotone else "none",
               "value": value, "pattern": pattern.to_dict()}, args)
    return 0


def _cmd_rank(args) -> int:
    dataset = dataset_from_csv(Path(args.input).read_text(encoding="utf-8"))
    spec = json.loads(Path(args.theta).read_text(encoding="utf-8"))
    if isinstance(spec, dict):
        theta = PreferenceVector(tuple(spec["theta"]),
                                 centered=bool(spec.get("centered", False)))
    else:
        theta = PreferenceVector(tuple(spec))
    scores = count_scores(dataset)
    _json_out({
        "scores": scores.to_dict(),
        "tau_ordinal": kendall_tau(scores.ordinal_scores, theta),
        "tau_binary": kendall_tau(scores.binary_scores, theta),
    }, args)
    return 0


def _cmd_rates(args) -> int:
    model = OrdinalModel(parse_link_spec(args.link),
                         parse_pattern_spec(args.pattern, args.K))
    binary = rates.rate_at_zero_binary(model, args.gamma)
    ordinal = rates.rate_at_zero_ordinal(model, args.gamma)
    if not (binary.converged and ordinal.converged):
        print("rate optimization did not converge", file=sys.stderr)
        return 2
    _json_out({
        "gamma": args.gamma,
        "binary": binary.to_dict(),
        "ordinal": ordinal.to_dict(),
        "crossover_factor": args.factor,
        "crossover_rounds": rates.crossover_rounds(binary, ordinal,
                                                   factor=args.factor),
    }, args)
    return 0


_PAPER_REPS = {"two_item": 10**6, "scenario1": 1000, "scenario2": 1000,
               "scenario3": 1000}


def _cmd_simulate(args) -> int:
    config = harness.ExperimentConfig.from_json(
        Path(args.config).read_text(encoding="utf-8"))
    if args.paper_scale:
        d = config.to_dict()
        d["replications"] = _PAPER_REPS[config.scenario]
        config = harness.ExperimentConfig.from_dict(d)
    result = harness.run_experiment(config, threads=args.threads)
    _emit(result.to_csv(), args.out)
    return 0


def _cmd_ingest(args) -> int:
    table = data_mod.load_ratings(args.path, format=args.format)
    pairs = data_mod.build_pair_comparisons(table, args.min_item_ratings)
    if args.out is None:
        raise UsageError("ingest needs --out for the pairs file")
    data_mod.save_pairs(pairs, args.out)
    print(f"wrote {pairs.n_pairs()} pairs "
          f"({pairs.total_comparisons()} comparisons)", file=sys.stderr)
    return 0


def _cmd_evaluate(args) -> int:
    pairs = data_mod.load_pairs(args.pairs)
    report = data_mod.evaluate_pair_protocol(
        pairs, train_frac=args.train_frac, repetitions=args.reps,
        min_pair_count=args.min_pair_count, seed=args.seed,
        pairing=args.pairing)
    _json_out(report.to_dict(), args)
    return 0


def _cmd_histogram(args) -> int:
    pairs = data_mod.load_pairs(args.pairs)
    hist = data_mod.ordinal_histogram(pairs)
    mags = sorted(hist)
    _json_out({"magnitudes": mags, "counts": [hist[m] for m in mags]}, args)
    return 0


def _cmd_model_info(args) -> int:
    model = OrdinalModel(parse_link_spec(args.link),
                         parse_pattern_spec(args.pattern, args.K))
    payload = model.to_dict()
    if args.gamma is not None:
        m = model.moments(args.gamma)
        payload["at_gamma"] = {
            "gamma": args.gamma,
            "prob_positive": model.prob_positive(args.gamma),
            "mean": m.mean,
            "variance": m.variance,
            "snr": None if m.snr == float("inf") else m.snr,
        }
    _json_out(payload, args)
    return 0


_COMMANDS = {
    "snr": _cmd_snr,
    "snr-min": _cmd_snr_min,
    "rank": _cmd_rank,
    "rates": _cmd_rates,
    "simulate": _cmd_simulate,
    "ingest": _cmd_ingest,
    "evaluate": _cmd_evaluate,
    "histogram": _cmd_histogram,
    "model-info": _cmd_model_info,
}


def parse_and_dispatch(argv) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return 1
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"ordrank: {exc}", file=sys.stderr)
        if argv and argv[0] in parser.subparsers:
            print(parser.subparsers[argv[0]].format_usage().rstrip(),
                  file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"ordrank: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(parse_and_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
