"""Command-line interface: generate / train / eval / simulate."""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from ._kernels import KernelError


def _add_common(sub):
    sub.add_argument("--config", type=Path, default=None,
                     help="JSON run configuration file")
    sub.add_argument("--seed", type=int, default=None,
                     help="override the subcommand's seed")
    sub.add_argument("--out", type=Path, default=None,
                     help="override the output path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sfrcnet",
        description="Mean-field composite simulation and stress surrogate.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--help-json", action="store_true",
                        help="print the CLI schema as JSON and exit")
    subs = parser.add_subparsers(dest="command")

    gen = subs.add_parser("generate", help="generate and simulate a dataset")
    _add_common(gen)
    gen.add_argument("--count", type=int, default=None,
                     help="number of records (default: config sample_count)")
    gen.add_argument("--jobs", type=int, default=1,
                     help="parallel simulation workers")

    tr = subs.add_parser("train", help="train the surrogate on a dataset")
    _add_common(tr)
    tr.add_argument("--epochs", type=int, default=None,
                    help="override the number of training epochs")
    tr.add_argument("--dataset", type=Path, default=None,
                    help="dataset path (default: config [paths] dataset)")

    ev = subs.add_parser("eval", help="evaluate a trained checkpoint")
    _add_common(ev)
    ev.add_argument("--checkpoint", type=Path, default=None,
                    help="checkpoint path (default: config [paths] checkpoint)")
    ev.add_argument("--dataset", type=Path, default=None,
                    help="dataset for the held-out test metrics")
    ev.add_argument("--quick", action="store_true",
                    help="reduced campaign grids (smoke testing)")

    sim = subs.add_parser("simulate", help="run one mean-field load program")
    _add_common(sim)
    return parser


def _schema(parser):
    schema = {"prog": parser.prog, "subcommands": {}}
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for name, sub in action.choices.items():
                schema["subcommands"][name] = {
                    "help": sub.description,
                    "options": [
                        {"flags": a.option_strings, "help": a.help}
                        for a in sub._actions if a.option_strings
                    ],
                }
    return schema


def _load(args):
    if args.config is not None:
        return load_config(args.config)
    return RunConfig()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "help_json", False):
        print(json.dumps(_schema(parser), indent=2))
        return 0
    if args.command is None:
        parser.print_usage()
        return 2
    try:
        return _dispatch(args)
    except (KernelError, ValueError, OSError, RuntimeError) as exc:
        print(f"sfrcnet {args.command}: error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args):
    from . import pipeline

    config = _load(args)
    if args.command == "generate":
        if args.seed is not None:
            config = replace(config, generation=replace(
                config.generation, master_seed=args.seed))
        out = args.out or config.path("dataset", "dataset.sfrd")
        dataset = pipeline.generate_dataset(config, out, count=args.count,
                                            jobs=args.jobs, progress=True)
        failed = dataset.manifest.get("failed_count", 0)
        print(f"wrote {len(dataset)} records to {out} ({failed} failed)")
        return 0

    if args.command == "train":
        if args.seed is not None:
            config = replace(config, training=replace(
                config.training, seed=args.seed))
        dataset = args.dataset or config.path("dataset", "dataset.sfrd")
        out = args.out or config.path("checkpoint", "model.sfnn")
        history = config.path("history", Path(out).with_suffix(".history.csv"))
        model, hist = pipeline.train_pipeline(
            config, dataset, out, history_path=history, epochs=args.epochs)
        print(f"trained {len(hist)} epochs; best val cost "
              f"{min(h['val_cost'] for h in hist):.4f}; checkpoint {out}")
        return 0

    if args.command == "eval":
        checkpoint = args.checkpoint or config.path("checkpoint", "model.sfnn")
        out = args.out or config.path("out_dir", "eval_out")
        dataset = args.dataset
        if dataset is None:
            candidate = config.path("dataset", "dataset.sfrd")
            dataset = candidate if candidate.exists() else None
        reports, summary = pipeline.eval_pipeline(
            config, checkpoint, out, dataset_path=dataset, quick=args.quick)
        print(f"wrote {len(reports)} reports under {out}")
        return 0

    if args.command == "simulate":
        out = args.out or config.path("series_csv", "series.csv")
        container = config.paths.get("series_container")
        pipeline.simulate_pipeline(config, out, container_path=container)
        print(f"wrote series to {out}")
        return 0

    raise ValueError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
