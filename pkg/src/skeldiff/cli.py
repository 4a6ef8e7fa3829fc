"""Command-line entry points.

Subcommands: ``train`` (full pipeline: fit, generate, select, evaluate),
``generate`` (sample schemas from a saved checkpoint), ``evaluate`` (score
a saved schema against a dataset split), ``baseline-fbs`` (frequency
baseline), and ``synth-data`` (write a synthetic corpus).

Exit codes: 0 success, 1 usage or configuration errors, 2 data errors,
3 numeric failures. All artifacts are written under ``--out`` (default:
``$SKELDIFF_OUT/<command>`` or ``runs/<command>``), and contain no
timestamps, so reruns with one seed are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .config import (
    ExperimentConfig,
    load_config_file,
    resolve_config,
    save_config_snapshot,
)
from .data import (
    SyntheticSpec,
    corpus_stats,
    generate_synthetic_corpus,
    load_dataset,
    save_dataset,
    split_graphs,
)
from .estimator import FrequencyBasedSampler, SchemaDiffusionModel
from .exceptions import ConfigError, DataError, NumericError
from .generation import GenerationConfig, candidate_scores, generate_candidates
from .diffusion import build_schedule
from .metrics import (
    evaluate,
    write_comparison_csv,
    write_metrics_csv,
    write_metrics_json,
)
from .network import load_checkpoint, parameter_fingerprint, save_checkpoint
from .schema import load_schema, save_schema
from .utils import enable_determinism

_MODEL_KEYS = ("dim", "n_layers", "max_nodes", "n_steps", "residual", "dtype")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _add_common(sub):
    sub.add_argument("--config", help="YAML or JSON config file")
    sub.add_argument("--out", help="output directory")
    sub.add_argument("--seed", type=int, help="master seed")
    sub.add_argument(
        "--deterministic",
        action=argparse.BooleanOptionalAction,
        help="single-threaded deterministic kernels",
    )
    sub.add_argument("--verbose", action="store_true", help="progress to stderr")


def _add_model_flags(sub):
    sub.add_argument("--dataset", help="dataset JSON file")
    sub.add_argument("--dim", type=int, help="embedding width")
    sub.add_argument("--n-layers", type=int, help="attention layers per encoder")
    sub.add_argument("--max-nodes", type=int, help="padded sequence length")
    sub.add_argument("--n-steps", type=int, help="refinement steps")
    sub.add_argument("--residual", action=argparse.BooleanOptionalAction)
    sub.add_argument("--dtype", choices=("float32", "float64"))


def build_parser() -> _Parser:
    parser = _Parser(prog="skeldiff", description=__doc__.split("\n\n")[0])
    commands = parser.add_subparsers(dest="command")

    p_train = commands.add_parser("train", help="train, then generate and score a schema")
    _add_common(p_train)
    _add_model_flags(p_train)
    p_train.add_argument("--lr", type=float)
    p_train.add_argument("--epochs", type=int)
    p_train.add_argument("--batch-size", type=int)
    p_train.add_argument("--lambda-struct", type=float)
    p_train.add_argument("--objective", choices=("simplified", "e2e"))
    p_train.add_argument("--augment", type=int, help="sorted variants per graph")
    p_train.add_argument("--mask-pad", action=argparse.BooleanOptionalAction)
    p_train.add_argument("--full-t-sum", action=argparse.BooleanOptionalAction)
    p_train.add_argument("--val-candidates", type=int)
    p_train.add_argument("--val-every", type=int)
    p_train.add_argument("--oversize", choices=("truncate", "error"))
    p_train.add_argument("--n-candidates", type=int)
    p_train.add_argument("--edge-threshold", type=float)
    p_train.add_argument(
        "--refine-source",
        choices=("type_representation", "structure_representation"),
    )
    p_train.add_argument("--dataset-name", help="label for the comparison table")
    p_train.set_defaults(func=cmd_train)

    p_gen = commands.add_parser("generate", help="sample schemas from a checkpoint")
    _add_common(p_gen)
    _add_model_flags(p_gen)
    p_gen.add_argument("--checkpoint", required=True)
    p_gen.add_argument("--n-candidates", type=int)
    p_gen.add_argument("--edge-threshold", type=float)
    p_gen.add_argument(
        "--refine-source",
        choices=("type_representation", "structure_representation"),
    )
    p_gen.add_argument(
        "--save-candidates", action="store_true", help="write every candidate"
    )
    p_gen.set_defaults(func=cmd_generate)

    p_eval = commands.add_parser("evaluate", help="score a saved schema")
    _add_common(p_eval)
    p_eval.add_argument("--schema", required=True, help="schema JSON file")
    p_eval.add_argument("--dataset", help="dataset JSON file")
    p_eval.add_argument("--split", choices=("train", "val", "test"), default="test")
    p_eval.add_argument(
        "--transitive",
        action="store_true",
        help="chain sequence tuples through reachability instead of edges",
    )
    p_eval.add_argument("--dataset-name", help="label for the comparison table")
    p_eval.add_argument("--method-name", default="this-run")
    p_eval.set_defaults(func=cmd_evaluate)

    p_fbs = commands.add_parser("baseline-fbs", help="frequency-based sampling baseline")
    _add_common(p_fbs)
    p_fbs.add_argument("--dataset", help="dataset JSON file")
    p_fbs.add_argument("--split", choices=("train", "val", "test"), default="test")
    p_fbs.add_argument("--max-draw-factor", type=int, default=10)
    p_fbs.add_argument("--prune-isolated", action="store_true")
    p_fbs.add_argument("--dataset-name", help="label for the comparison table")
    p_fbs.set_defaults(func=cmd_baseline_fbs)

    p_synth = commands.add_parser("synth-data", help="write a synthetic corpus")
    _add_common(p_synth)
    p_synth.add_argument("--num-types", type=int, default=67)
    p_synth.add_argument("--num-graphs", type=int, default=100)
    p_synth.add_argument("--min-nodes", type=int, default=4)
    p_synth.add_argument("--max-nodes", type=int, default=8)
    p_synth.add_argument("--density", type=float, default=0.3)
    p_synth.add_argument("--split-fractions", default="0.8,0.1,0.1")
    p_synth.add_argument("--prefix", default="EV")
    p_synth.set_defaults(func=cmd_synth_data)

    return parser


def _overrides_from(args, keys) -> dict:
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


_TRAIN_KEYS = (
    "dataset", "dataset_name", "out", "seed", "deterministic",
    "dim", "n_layers", "max_nodes", "n_steps", "residual", "dtype",
    "lr", "epochs", "batch_size", "lambda_struct", "objective", "augment",
    "mask_pad", "full_t_sum", "val_candidates", "val_every", "oversize",
    "n_candidates", "edge_threshold", "refine_source",
)

_GEN_KEYS = (
    "dataset", "out", "seed", "deterministic",
    "dim", "n_layers", "max_nodes", "n_steps", "residual", "dtype",
    "n_candidates", "edge_threshold", "refine_source",
)


def _resolve(args, keys):
    """Returns the resolved config and the set of explicitly-set keys."""
    file_values = load_config_file(args.config) if args.config else {}
    overrides = _overrides_from(args, keys)
    config = resolve_config(file_values, overrides)
    return config, set(file_values) | set(overrides)


def _ensure_out(config: ExperimentConfig, command: str) -> Path:
    root = os.environ.get("SKELDIFF_OUT", "runs")
    out = Path(config.out) if config.out else Path(root) / command
    out.mkdir(parents=True, exist_ok=True)
    config.out = str(out)
    return out


def _split_or_fallback(graphs, preferred: str):
    parts = split_graphs(graphs)
    for split in (preferred, "val", "train"):
        if parts[split]:
            return parts[split], split
    raise DataError("dataset has no graphs to evaluate against")


def cmd_train(args) -> int:
    config, _ = _resolve(args, _TRAIN_KEYS)
    if not config.dataset:
        raise ConfigError("a dataset file is required (--dataset or config)")
    if config.deterministic:
        enable_determinism()
    out = _ensure_out(config, "train")
    ontology, graphs = load_dataset(config.dataset)

    estimator = SchemaDiffusionModel(
        dim=config.dim,
        n_layers=config.n_layers,
        max_nodes=config.max_nodes,
        n_steps=config.n_steps,
        lambda_struct=config.lambda_struct,
        edge_threshold=config.edge_threshold,
        lr=config.lr,
        epochs=config.epochs,
        batch_size=config.batch_size,
        n_candidates=config.n_candidates,
        objective=config.objective,
        refine_source=config.refine_source,
        augment=config.augment,
        residual=config.residual,
        mask_pad=config.mask_pad,
        full_t_sum=config.full_t_sum,
        val_candidates=config.val_candidates,
        val_every=config.val_every,
        oversize=config.oversize,
        dtype=config.dtype,
        random_state=config.seed,
        verbose=args.verbose,
    )
    save_config_snapshot(config, out / "config.json")
    with open(out / "train_log.jsonl", "w") as log:
        estimator.fit(
            graphs,
            ontology,
            on_epoch=lambda record: log.write(json.dumps(record) + "\n"),
        )
    save_checkpoint(estimator.model_, out / "checkpoints" / "best.pt")

    schema = estimator.generate_schema()
    save_schema(
        out / "schema.json",
        schema,
        ontology,
        provenance={
            "method": "diffusion",
            "checkpoint": parameter_fingerprint(estimator.model_),
            "seed": config.seed,
            "edge_threshold": config.edge_threshold,
            "n_candidates": config.n_candidates,
            "refine_source": config.refine_source,
        },
    )

    eval_graphs, used_split = _split_or_fallback(graphs, "test")
    report = evaluate(schema, eval_graphs)
    write_metrics_json(report, out / "metrics.json")
    write_metrics_csv(report, out / "metrics.csv")
    if config.dataset_name:
        write_comparison_csv(report, config.dataset_name, "this-run", out / "comparison.csv")
    print(
        f"trained; schema scored on the {used_split} split: "
        f"event_type_f1 {report.event_type_f1:.3f} "
        f"seq_f1_l2 {report.seq_f1_l2:.3f} seq_f1_l3 {report.seq_f1_l3:.3f}"
    )
    print(f"artifacts in {out}")
    return 0


def cmd_generate(args) -> int:
    config, explicit = _resolve(args, _GEN_KEYS)
    if not config.dataset:
        raise ConfigError("a dataset file is required (--dataset or config)")
    if config.deterministic:
        enable_determinism()
    out = _ensure_out(config, "generate")

    model = load_checkpoint(args.checkpoint)
    for key in _MODEL_KEYS:
        if key in explicit and getattr(config, key) != getattr(model.config, key):
            raise DataError(
                f"checkpoint was built with {key}={getattr(model.config, key)}, "
                f"the configuration asks for {getattr(config, key)}"
            )
    ontology, graphs = load_dataset(config.dataset)
    if ontology.size != model.config.n_types:
        raise DataError(
            f"checkpoint vocabulary ({model.config.n_types}) does not match "
            f"the dataset ({ontology.size})"
        )

    schedule = build_schedule(model.config.n_steps)
    gen_config = GenerationConfig(
        num_candidates=config.n_candidates,
        tau=config.edge_threshold,
        seed=config.seed,
        refine_source=config.refine_source,
    )
    candidates = generate_candidates(model, schedule, gen_config, ontology.pad_index)
    reference, used_split = _split_or_fallback(graphs, "val")
    scores = candidate_scores(candidates, reference)
    best = max(range(len(scores)), key=lambda k: (scores[k], -k))

    provenance = {
        "method": "diffusion",
        "checkpoint": parameter_fingerprint(model),
        "seed": config.seed,
        "edge_threshold": config.edge_threshold,
        "refine_source": config.refine_source,
    }
    if args.save_candidates:
        cand_dir = out / "candidates"
        cand_dir.mkdir(exist_ok=True)
        for k, candidate in enumerate(candidates):
            save_schema(
                cand_dir / f"candidate_{k:04d}.json",
                candidate,
                ontology,
                provenance={**provenance, "candidate": k},
            )
    save_config_snapshot(config, out / "config.json")
    save_schema(out / "schema.json", candidates[best], ontology, provenance)
    (out / "selection.json").write_text(
        json.dumps(
            {"selected": best, "selection_split": used_split, "scores": scores},
            indent=2,
        )
        + "\n"
    )
    print(
        f"selected candidate {best} of {len(candidates)} "
        f"(mean event_type_f1 {scores[best]:.3f} on the {used_split} split)"
    )
    print(f"artifacts in {out}")
    return 0


def cmd_evaluate(args) -> int:
    config, _ = _resolve(args, ("dataset", "dataset_name", "out", "seed", "deterministic"))
    if not config.dataset:
        raise ConfigError("a dataset file is required (--dataset or config)")
    out = _ensure_out(config, "evaluate")
    ontology, graphs = load_dataset(config.dataset)
    schema, _provenance = load_schema(args.schema, ontology)
    part = split_graphs(graphs)[args.split]
    if not part:
        raise DataError(f"dataset has no graphs in the {args.split!r} split")
    report = evaluate(schema, part, transitive=args.transitive)
    write_metrics_json(report, out / "metrics.json")
    write_metrics_csv(report, out / "metrics.csv")
    if config.dataset_name:
        write_comparison_csv(report, config.dataset_name, args.method_name, out / "comparison.csv")
    print(
        f"{args.split}: event_type_f1 {report.event_type_f1:.3f} "
        f"seq_f1_l2 {report.seq_f1_l2:.3f} seq_f1_l3 {report.seq_f1_l3:.3f}"
    )
    print(f"artifacts in {out}")
    return 0


def cmd_baseline_fbs(args) -> int:
    config, _ = _resolve(args, ("dataset", "dataset_name", "out", "seed", "deterministic"))
    if not config.dataset:
        raise ConfigError("a dataset file is required (--dataset or config)")
    out = _ensure_out(config, "baseline-fbs")
    ontology, graphs = load_dataset(config.dataset)
    sampler = FrequencyBasedSampler(
        max_draw_factor=args.max_draw_factor,
        prune_isolated=args.prune_isolated,
        random_state=config.seed,
    )
    sampler.fit(graphs, ontology)
    schema = sampler.sample(1)[0]
    save_schema(
        out / "schema.json",
        schema,
        ontology,
        provenance={"method": "frequency-based-sampling", "seed": config.seed},
    )
    part = split_graphs(graphs)[args.split]
    if not part:
        raise DataError(f"dataset has no graphs in the {args.split!r} split")
    report = evaluate(schema, part)
    write_metrics_json(report, out / "metrics.json")
    write_metrics_csv(report, out / "metrics.csv")
    if config.dataset_name:
        write_comparison_csv(
            report, config.dataset_name, "frequency-based-sampling", out / "comparison.csv"
        )
    print(
        f"{args.split}: event_type_f1 {report.event_type_f1:.3f} "
        f"seq_f1_l2 {report.seq_f1_l2:.3f} seq_f1_l3 {report.seq_f1_l3:.3f}"
    )
    print(f"artifacts in {out}")
    return 0


def cmd_synth_data(args) -> int:
    config, _ = _resolve(args, ("out", "seed", "deterministic"))
    out = _ensure_out(config, "synth-data")
    try:
        fractions = tuple(float(x) for x in args.split_fractions.split(","))
    except ValueError:
        raise ConfigError(f"cannot parse split fractions {args.split_fractions!r}") from None
    spec = SyntheticSpec(
        n_event_types=args.num_types,
        n_graphs=args.num_graphs,
        min_nodes=args.min_nodes,
        max_nodes=args.max_nodes,
        edge_density=args.density,
        split_fractions=fractions,
        type_prefix=args.prefix,
    )
    ontology, graphs = generate_synthetic_corpus(spec, config.seed)
    path = out / "dataset.json"
    save_dataset(path, ontology, graphs)
    print(json.dumps(corpus_stats(graphs), indent=2))
    print(f"wrote {path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "command", None) is None:
        parser.print_help()
        return 1
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"skeldiff: configuration error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"skeldiff: data error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"skeldiff: numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
