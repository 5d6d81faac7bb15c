"""Command-line entry points."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Sequence

from catbreak import __version__
from catbreak.analysis import (
    SensitivityRule,
    SensitivityTarget,
    compare_stationarity,
    feature_sensitivity,
    gradient_indicator_fidelity,
    stationarity_ratio,
)
from catbreak.attacks import METHODS, WHITE_BOX_METHODS, AttackConfig, ScoreRule, run_attack
from catbreak.bandit import ArmDistribution, ArmSpec, RewardVariant, simulate_bandit
from catbreak.bench import (
    INTERNAL_ERROR,
    BenchmarkSpec,
    aggregate,
    alpha_sweep,
    alpha_table,
    gen_dataset,
    render_table,
    run_benchmark,
    write_benchmark,
)
from catbreak.categorical.io import read_dataset, read_embedding, write_dataset, write_embedding
from catbreak.classifier import (
    ClassifierHandle,
    Objective,
    Sensitivity,
    load_model,
    make_affine_classifier,
    make_planted_classifier,
    make_random_classifier,
    save_model,
)
from catbreak.config import Settings, load_settings
from catbreak.errors import CatbreakError
from catbreak.logging_config import setup_logging

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ("method", "budget", "attempted", "sr", "no_query", "no_change", "runtime")
EXIT_ERROR = 1
EXIT_PARTIAL = 2


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _out_path(args: argparse.Namespace, name: str) -> Path:
    if args.out:
        path = Path(args.out)
    else:
        path = Path(args.out_dir) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def _write_json(path: Path, data: dict) -> None:
    path.write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def _attack_config(args: argparse.Namespace, settings: Settings) -> AttackConfig:
    return AttackConfig(
        budget=args.budget,
        time_limit=args.time_limit or settings.time_limit,
        top_l=args.top_l,
        tau=args.tau,
        alpha=args.alpha,
        lam=args.lam,
        reward_variant=RewardVariant(args.reward_variant),
        squared_alpha_bonus=args.squared_alpha_bonus,
        seed=args.seed,
        objective=Objective.parse(args.objective),
        score_rule=ScoreRule(args.score_rule),
        allow_delete=args.allow_delete,
        fsgs_subset_cap=settings.fsgs_subset_cap,
        combo_depth=args.combo_depth,
        exhaustive_limit=settings.exhaustive_limit,
    )


def cmd_gen_model(args: argparse.Namespace, settings: Settings) -> int:
    hidden = tuple(_int_list(args.hidden))
    if args.embedding and args.kind != "random":
        raise CatbreakError("INVALID_ARG", "--embedding only applies to --kind random")
    if args.embedding_out and args.kind == "affine":
        raise CatbreakError("INVALID_ARG", "an affine model has no embedding table")
    if args.kind == "affine":
        model = make_affine_classifier(args.n, args.m, args.k, seed=args.seed)
    elif args.kind == "random":
        table = read_embedding(args.embedding) if args.embedding else None
        model = make_random_classifier(
            args.n, args.m, args.k, args.d, args.seed, hidden, table=table
        )
    else:
        model = make_planted_classifier(
            args.n, args.m, args.k, args.d, Sensitivity.parse(args.sensitivity), args.seed,
            hidden,
        )
    path = _out_path(args, "model.bin")
    save_model(path, model)
    print(f"wrote {model.kind} model to {path}")
    if args.embedding_out:
        write_embedding(args.embedding_out, model.table)
        print(f"wrote embedding table to {args.embedding_out}")
    return 0


def cmd_gen_data(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    instances = gen_dataset(model, args.count, args.balance, args.seed, args.absent_rate)
    path = _out_path(args, "data.jsonl")
    write_dataset(path, instances)
    print(f"wrote {len(instances)} instances to {path}")
    return 0


def cmd_attack(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    dataset = read_dataset(args.data)
    cfg = _attack_config(args, settings)
    if args.black_box and args.method in WHITE_BOX_METHODS:
        raise CatbreakError("BLACK_BOX_MODEL", f"{args.method} needs a white-box model")
    records = []
    for index, inst in enumerate(dataset):
        handle = ClassifierHandle(model, white_box=not args.black_box)
        record = {"instance": index, "budget": cfg.budget, "method": args.method}
        try:
            record.update(run_attack(args.method, handle, inst, cfg).to_dict())
        except CatbreakError as err:
            logger.error("Instance %d failed: %s", index, err,
                         extra={"instance": index, "method": args.method})
            record.update({"error": err.code, "message": str(err)})
        except Exception as err:
            logger.exception("Instance %d crashed", index,
                             extra={"instance": index, "method": args.method})
            record.update({"error": INTERNAL_ERROR, "message": f"{type(err).__name__}: {err}"})
        records.append(record)
    row = aggregate(records, [args.method], [cfg.budget])[0]
    path = _out_path(args, f"attack-{args.method}.jsonl")
    with open(path, "w", encoding="utf-8") as stream:
        for record in records:
            stream.write(json.dumps(record) + "\n")
        stream.write(json.dumps({"aggregate": True, "config": cfg.to_dict(), **row.to_dict()}))
        stream.write("\n")
    print(render_table([row.to_dict()], METRIC_COLUMNS))
    return EXIT_PARTIAL if row.failures else 0


def _load_spec(args: argparse.Namespace) -> BenchmarkSpec:
    spec = BenchmarkSpec.load(args.spec)
    overrides = {}
    if args.threads_set:
        overrides["threads"] = args.threads
    if args.sr_denominator:
        overrides["sr_denominator"] = args.sr_denominator
    if args.seed_set:
        overrides["seed"] = args.seed
    return replace(spec, **overrides)


def cmd_bench(args: argparse.Namespace, settings: Settings) -> int:
    spec = _load_spec(args)
    outcome = run_benchmark(spec)
    write_benchmark(args.out_dir, spec, outcome)
    print(render_table([row.to_dict() for row in outcome.rows], METRIC_COLUMNS))
    return EXIT_PARTIAL if outcome.failures else 0


def cmd_alpha_sweep(args: argparse.Namespace, settings: Settings) -> int:
    spec = _load_spec(args)
    outcomes = alpha_sweep(spec, _float_list(args.alphas))
    for alpha, outcome in outcomes.items():
        write_benchmark(args.out_dir, spec, outcome, prefix=f"alpha{alpha:g}_")
    table = alpha_table(outcomes)
    _write_json(Path(args.out_dir) / "alpha_sweep.json", {"version": __version__, "rows": table})
    print(render_table(table, ("alpha", "method", "budget", "runtime", "no_query", "sr")))
    failed = any(outcome.failures for outcome in outcomes.values())
    return EXIT_PARTIAL if failed else 0


def cmd_sensitivity(args: argparse.Namespace, settings: Settings) -> int:
    handle = ClassifierHandle(load_model(args.model))
    report = feature_sensitivity(
        handle,
        read_dataset(args.data),
        SensitivityRule(args.rule),
        SensitivityTarget(args.target),
        args.allow_delete,
    )
    path = _out_path(args, "sensitivity.json")
    _write_json(path, {"version": __version__, **report.to_dict()})
    if args.csv:
        report.to_csv(args.csv)
    top = report.ranking()[:5]
    print("most sensitive features: " + ", ".join(
        f"{i} ({report.values[i]:.4f})" for i in top
    ))
    return 0


def cmd_fidelity(args: argparse.Namespace, settings: Settings) -> int:
    handle = ClassifierHandle(load_model(args.model))
    report = gradient_indicator_fidelity(
        handle,
        read_dataset(args.data),
        args.sample,
        Objective.parse(args.objective),
        ScoreRule(args.score_rule),
        args.seed,
    )
    path = _out_path(args, "fidelity.json")
    _write_json(path, {"version": __version__, **report.to_dict()})
    print("degenerate (constant ranks)" if report.degenerate
          else f"rank correlation {report.correlation:.4f} over {report.instances} instances")
    return 0


def cmd_regret_sim(args: argparse.Namespace, settings: Settings) -> int:
    arms = ArmSpec.parse_list(args.arms, ArmDistribution(args.distribution))
    seeds = list(range(args.seed, args.seed + args.seeds))
    report = simulate_bandit(arms, args.horizon, args.alpha, seeds, args.squared_alpha_bonus)
    path = _out_path(args, "regret.json")
    _write_json(path, {"version": __version__, **report.to_dict()})
    bound = "n/a (alpha <= 2)" if report.bound is None else f"{report.bound:.4f}"
    print(f"empirical regret {report.empirical_regret_mean:.4f} "
          f"(std {report.empirical_regret_std:.4f}), bound {bound}")
    return 0


def cmd_stationarity(args: argparse.Namespace, settings: Settings) -> int:
    model = load_model(args.model)
    dataset = read_dataset(args.data)
    if not 0 <= args.instance < len(dataset):
        raise CatbreakError("INVALID_ARG", f"instance {args.instance} outside the dataset")
    handle = ClassifierHandle(model)
    sensitivity = feature_sensitivity(handle.fork(), dataset)
    cfg = AttackConfig(top_l=args.top_l, alpha=args.alpha, lam=args.lam, seed=args.seed)
    inst = dataset[args.instance]
    if args.compare:
        reports = compare_stationarity(
            handle, inst, sensitivity, args.top_k, args.window, cfg, args.variance,
            not args.attack_reward,
        )
    else:
        features = sensitivity.ranking()[: args.top_k]
        reports = {
            "sensitive": stationarity_ratio(
                handle, inst, features, args.window, cfg, args.variance, not args.attack_reward
            )
        }
    path = _out_path(args, "stationarity.json")
    _write_json(
        path, {"version": __version__, **{k: r.to_dict() for k, r in reports.items()}}
    )
    for name, report in reports.items():
        print(f"{name}: {report.measure} <= 1e-2 for {report.fraction_below(1e-2):.0%} "
              f"of {len(report.features)} features")
    return 0


def _add_attack_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--budget", type=int, default=3)
    sub.add_argument("--time-limit", type=float, default=None)
    sub.add_argument("--top-l", type=int, default=10)
    sub.add_argument("--tau", type=int, default=None)
    sub.add_argument("--alpha", type=float, default=4.0)
    sub.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sub.add_argument("--reward-variant", choices=[v.value for v in RewardVariant],
                     default=RewardVariant.PERTURBED_BASE.value)
    sub.add_argument("--squared-alpha-bonus", action="store_true")
    sub.add_argument("--objective", default="margin", help="margin or class:<k>")
    sub.add_argument("--score-rule", choices=[r.value for r in ScoreRule],
                     default=ScoreRule.MAX_ABS.value)
    sub.add_argument("--allow-delete", action="store_true")
    sub.add_argument("--combo-depth", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catbreak",
        description="Query-efficient adversarial attacks on categorical-input classifiers.",
    )
    parser.add_argument("--version", action="version", version=f"catbreak {__version__}")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--out-dir", default=None)
    parser.add_argument("--log-level", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("gen-model", help="generate a synthetic target model")
    sub.add_argument("--kind", choices=["planted", "random", "affine"], default="planted")
    sub.add_argument("--n", type=int, default=20)
    sub.add_argument("--m", type=int, default=5)
    sub.add_argument("--k", type=int, default=2)
    sub.add_argument("--d", type=int, default=8)
    sub.add_argument("--hidden", default="32", help="comma-separated hidden widths")
    sub.add_argument("--sensitivity", default="skewed:1", help="skewed:<top> or uniform")
    sub.add_argument("--embedding", default=None, help="embedding file for --kind random")
    sub.add_argument("--embedding-out", default=None, help="also write the embedding table")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_gen_model)

    sub = commands.add_parser("gen-data", help="sample a dataset labelled by a model")
    sub.add_argument("--model", required=True)
    sub.add_argument("--count", type=int, default=200)
    sub.add_argument("--balance", action="store_true")
    sub.add_argument("--absent-rate", type=float, default=0.0)
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_gen_data)

    sub = commands.add_parser("attack", help="attack every instance of a dataset")
    sub.add_argument("--method", choices=sorted(METHODS), default="feat")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--black-box", action="store_true")
    sub.add_argument("--out", default=None)
    _add_attack_flags(sub)
    sub.set_defaults(func=cmd_attack)

    for name, func, help_text in (
        ("bench", cmd_bench, "run a benchmark spec"),
        ("alpha-sweep", cmd_alpha_sweep, "rerun the UCB methods per alpha"),
    ):
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--spec", required=True)
        sub.add_argument("--sr-denominator", choices=["correct", "all"], default=None)
        if name == "alpha-sweep":
            sub.add_argument("--alphas", default="0,2,4,8")
        sub.set_defaults(func=func)

    sub = commands.add_parser("sensitivity", help="per-feature sensitivity report")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--rule", choices=[r.value for r in SensitivityRule],
                     default=SensitivityRule.MAX_VALUE.value)
    sub.add_argument("--target", choices=[t.value for t in SensitivityTarget],
                     default=SensitivityTarget.BEST_WRONG.value)
    sub.add_argument("--allow-delete", action="store_true")
    sub.add_argument("--csv", default=None)
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_sensitivity)

    sub = commands.add_parser("fidelity", help="gradient-vs-edit rank correlation")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--sample", type=int, default=100)
    sub.add_argument("--objective", default="margin")
    sub.add_argument("--score-rule", choices=[r.value for r in ScoreRule],
                     default=ScoreRule.EDIT_DELTA.value)
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_fidelity)

    sub = commands.add_parser("regret-sim", help="simulate the UCB policy on stationary arms")
    sub.add_argument("--arms", required=True, help="mu:var,mu:var,...")
    sub.add_argument("--horizon", type=int, default=10_000)
    sub.add_argument("--alpha", type=float, default=4.0)
    sub.add_argument("--seeds", type=int, default=100, help="number of seeds")
    sub.add_argument("--distribution", choices=[d.value for d in ArmDistribution],
                     default=ArmDistribution.BERNOULLI.value)
    sub.add_argument("--squared-alpha-bonus", action="store_true")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_regret_sim)

    sub = commands.add_parser("stationarity", help="reward drift within one UCB window")
    sub.add_argument("--model", required=True)
    sub.add_argument("--data", required=True)
    sub.add_argument("--instance", type=int, default=0)
    sub.add_argument("--top-k", type=int, default=10)
    sub.add_argument("--window", type=int, default=6)
    sub.add_argument("--top-l", type=int, default=10)
    sub.add_argument("--alpha", type=float, default=4.0)
    sub.add_argument("--lambda", dest="lam", type=float, default=1.0)
    sub.add_argument("--variance", action="store_true", help="var/mean instead of std/mean")
    sub.add_argument("--compare", action="store_true", help="also the least sensitive")
    sub.add_argument("--attack-reward", action="store_true",
                     help="read the attack reward instead of the gain over the current instance")
    sub.add_argument("--out", default=None)
    sub.set_defaults(func=cmd_stationarity)
    return parser


def parse_args(argv: Sequence[str] | None, settings: Settings) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    args.seed_set = args.seed is not None
    args.threads_set = args.threads is not None
    args.seed = settings.seed if args.seed is None else args.seed
    args.threads = settings.threads if args.threads is None else max(1, args.threads)
    args.out_dir = args.out_dir or settings.out_dir
    return args


def main(argv: Sequence[str] | None = None) -> int:
    settings = load_settings()
    args = parse_args(argv, settings)
    setup_logging(args.log_level or settings.log_level, settings.env)
    try:
        return args.func(args, settings)
    except CatbreakError as err:
        logger.debug("Command failed", exc_info=True)
        print(f"catbreak: {err}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
