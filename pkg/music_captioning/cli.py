"""
Command-line entry point: train, caption, eval, synth and inspect.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure, 1 anything else.
Logs go to stderr; stdout carries only command output.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from .config import RunConfig, get_settings, load_run_config
from .config.run_config import MAX_SEED
from .data import DEFAULT_VOCAB, load_manifest, split, synthesize
from .embeddings import EmbeddingTable, load_embeddings, most_similar, vocab_hash
from .errors import CaptioningError, ConfigError, DataError, VocabularyMismatchError
from .evaluation import evaluate
from .seq2seq import MAGIC, read_checkpoint_header
from .training import RestoredObjective, build_examples, build_objective, fit, load_objective, save_objective

logger = logging.getLogger(__name__)


def _seed(value: str) -> int:
    try:
        seed = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got '{value}'")
    if not 0 <= seed <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"seed must lie in [0, 2^64 - 1], got {seed}")
    return seed


def _patience(value: str) -> Optional[int]:
    if value.lower() in ("none", "inf"):
        return None
    try:
        patience = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"patience must be an integer or 'none', got '{value}'")
    if patience < 0:
        raise argparse.ArgumentTypeError("patience must be non-negative")
    return patience


def _overrides(args: argparse.Namespace) -> Dict[str, Any]:
    """Nested RunConfig overrides from command-line flags"""
    overrides: Dict[str, Any] = {}

    def put(section: str, key: str, value: Any):
        overrides.setdefault(section, {})[key] = value

    if getattr(args, "seed", None) is not None:
        put("training", "seed", args.seed)
    if getattr(args, "epochs", None) is not None:
        put("training", "epochs", args.epochs)
    if hasattr(args, "patience"):
        put("training", "patience", args.patience)
    if getattr(args, "lr", None) is not None:
        put("optimizer", "lr", args.lr)
    if getattr(args, "mode", None) is not None:
        overrides["mode"] = args.mode
    if getattr(args, "out", None) is not None:
        put("paths", "checkpoint_out", str(args.out))
    return overrides


def _run_config(args: argparse.Namespace) -> RunConfig:
    return load_run_config(getattr(args, "config", None), _overrides(args))


def _require_path(value: Optional[str], name: str) -> Path:
    if value is None:
        raise ConfigError(f"paths.{name} is not set", field=f"paths.{name}")
    return Path(value)


def _load_table(config: RunConfig) -> EmbeddingTable:
    table = load_embeddings(_require_path(config.paths.embeddings, "embeddings"))
    if table.dim != config.dims.word_dim:
        raise ConfigError(f"dims.word_dim is {config.dims.word_dim} but the embeddings have dimension {table.dim}",
                          field="dims.word_dim")
    return table


def cmd_train(args: argparse.Namespace) -> int:
    config = _run_config(args)
    checkpoint_out = _require_path(config.paths.checkpoint_out, "checkpoint_out")
    table = _load_table(config)
    loaded = load_manifest(_require_path(config.paths.manifest, "manifest"), require=config.mode)

    train_manifest, validation_manifest = split(loaded.manifest, config.training.validation_fraction,
                                                config.training.seed)
    train = build_examples(loaded.subset(train_manifest), table, config)
    validation = build_examples(loaded.subset(validation_manifest), table, config)

    objective = build_objective(config)
    report = fit(objective, train, validation, config)
    save_objective(checkpoint_out, objective, config, table)

    report_path = Path(args.report) if args.report else Path(str(checkpoint_out) + get_settings().report_suffix)
    try:
        report_path.write_text(report.to_json() + "\n", encoding="utf-8")
    except OSError as e:
        raise DataError(f"Cannot write report to {report_path}: {e}", path=str(report_path)) from e
    logger.info(f"Training finished ({report.stop_reason}); best epoch {report.best_epoch} "
                f"with {report.monitored} loss {report.best_validation_loss:.6f}; report at {report_path}")
    return 0


def _restore(args: argparse.Namespace):
    restored = load_objective(args.checkpoint)
    config = restored.config
    embeddings = args.embeddings or config.paths.embeddings
    table = load_embeddings(_require_path(embeddings, "embeddings"))
    if vocab_hash(table) != restored.vocab_hash:
        raise VocabularyMismatchError(f"embeddings {embeddings} do not match the vocabulary the checkpoint "
                                      f"was trained with", path=str(embeddings))
    loaded = load_manifest(args.manifest, require=config.mode)
    return restored, table, loaded


def _max_len(args: argparse.Namespace, restored: RestoredObjective) -> int:
    max_len = args.max_len if args.max_len is not None else restored.config.training.max_caption_len
    if max_len < 1:
        raise ConfigError(f"--max-len must be at least 1, got {max_len}", field="max_len")
    return max_len


def cmd_caption(args: argparse.Namespace) -> int:
    restored, table, loaded = _restore(args)
    max_len = _max_len(args, restored)
    if args.playlist is not None:
        loaded = loaded.subset(loaded.manifest.subset([args.playlist]))

    examples = build_examples(loaded, table, restored.config, with_targets=False)
    for example in examples:
        tokens = restored.objective.caption(example, table, max_len)
        print(f"{example.playlist_id}\t{' '.join(tokens)}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    restored, table, loaded = _restore(args)
    examples = build_examples(loaded, table, restored.config)
    metrics = evaluate(restored.objective, examples, table, _max_len(args, restored))
    print(metrics.model_dump_json(indent=2))
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    vocab = args.vocab.split(",") if args.vocab else DEFAULT_VOCAB
    dataset = synthesize(
        seed=args.seed if args.seed is not None else 0,
        num_playlists=args.playlists,
        tracks_per_playlist=args.tracks,
        out_dir=args.out_dir,
        vocab=vocab,
        audio_dim=args.audio_dim,
        word_dim=args.word_dim,
        bands=args.bands,
        frames=args.frames,
        num_labels=args.labels,
        caption_len=args.caption_len,
    )
    print(dataset.config_path)
    return 0


def _inspect_checkpoint(path: Path) -> List[str]:
    header = read_checkpoint_header(path)
    lines = [f"checkpoint {path}", f"version {header.version}", f"mode {header.config.get('mode', 'unknown')}",
             f"tensors {len(header.shapes)}"]
    for name, shape in header.shapes:
        lines.append(f"  {name} {'x'.join(str(d) for d in shape) or 'scalar'}")
    lines.append("config")
    lines.append(json.dumps(header.config, indent=2, sort_keys=True))
    return lines


def _inspect_embeddings(path: Path, neighbours: int) -> List[str]:
    table = load_embeddings(path, add_eos=False)
    lines = [f"embeddings {path}", f"vocab_size {table.vocab_size}", f"dim {table.dim}"]
    for row, word in enumerate(table.words[:5]):
        similar = [(w, s) for w, s in most_similar(table, table.matrix[row], neighbours + 1) if w != word]
        listed = ", ".join(f"{w} ({s:.4f})" for w, s in similar[:neighbours])
        lines.append(f"  {word}: {listed}")
    return lines


def cmd_inspect(args: argparse.Namespace) -> int:
    path = Path(args.path)
    try:
        with open(path, "rb") as f:
            head = f.read(len(MAGIC))
    except OSError as e:
        raise DataError(f"Cannot read {path}: {e}", path=str(path)) from e

    if head and MAGIC.startswith(head):
        lines = _inspect_checkpoint(path)
    else:
        lines = _inspect_embeddings(path, args.neighbours)
    print("\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="run configuration JSON file")
    common.add_argument("--seed", type=_seed, help="random seed (unsigned 64-bit)")
    common.add_argument("--print-defaults", action="store_true",
                        help="print the effective configuration and exit")

    parser = argparse.ArgumentParser(prog="music_captioning",
                                     description="Generate natural-language captions for playlists")
    parser.add_argument("--print-defaults", dest="print_defaults_global", action="store_true",
                        help="print the default configuration and exit")
    commands = parser.add_subparsers(dest="command")

    train = commands.add_parser("train", parents=[common], help="train a captioning model")
    train.add_argument("--mode", choices=["pretrain-features", "fully-train"])
    train.add_argument("--epochs", type=int)
    train.add_argument("--patience", type=_patience, default=argparse.SUPPRESS, help="integer or 'none'")
    train.add_argument("--lr", type=float)
    train.add_argument("--out", help="checkpoint output path")
    train.add_argument("--report", help="training report path (default: checkpoint path + report suffix)")
    train.set_defaults(handler=cmd_train)

    for name, handler, help_text in (("caption", cmd_caption, "caption playlists with a trained model"),
                                     ("eval", cmd_eval, "evaluate a trained model on a manifest")):
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.add_argument("checkpoint")
        sub.add_argument("manifest")
        sub.add_argument("--embeddings", help="override the embeddings path recorded in the checkpoint")
        sub.add_argument("--max-len", type=int)
        if name == "caption":
            sub.add_argument("--playlist", help="caption a single playlist id")
        sub.set_defaults(handler=handler)

    synth = commands.add_parser("synth", parents=[common], help="generate a synthetic dataset")
    synth.add_argument("out_dir")
    synth.add_argument("--playlists", type=int, default=4)
    synth.add_argument("--tracks", type=int, default=3)
    synth.add_argument("--caption-len", type=int, default=3)
    synth.add_argument("--audio-dim", type=int, default=8)
    synth.add_argument("--word-dim", type=int, default=16)
    synth.add_argument("--bands", type=int, default=8)
    synth.add_argument("--frames", type=int, default=8)
    synth.add_argument("--labels", type=int, default=4)
    synth.add_argument("--vocab", help="comma-separated vocabulary")
    synth.set_defaults(handler=cmd_synth)

    inspect = commands.add_parser("inspect", parents=[common], help="summarize an embeddings file or checkpoint")
    inspect.add_argument("path")
    inspect.add_argument("--neighbours", type=int, default=3)
    inspect.set_defaults(handler=cmd_inspect)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    get_settings().configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else ConfigError.exit_code

    try:
        if args.print_defaults_global or getattr(args, "print_defaults", False):
            print(_run_config(args).to_json())
            return 0
        if args.command is None:
            parser.print_usage(sys.stderr)
            return ConfigError.exit_code
        return args.handler(args)
    except CaptioningError as e:
        logger.error(f"{type(e).__name__}: {e.message}")
        return e.exit_code
    except Exception:
        logger.exception("Unexpected failure")
        return 1
