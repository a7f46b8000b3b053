"""
smilesqa - Main Entry Point
Batch command-line front end for SMILES corpus quality assurance

Each subcommand reads its inputs from files, writes its artifact atomically and
leaves a `<output>.manifest.json` run manifest next to it.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

# Add the current directory to Python path for imports
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pandas as pd

from smilesqa import __version__
from smilesqa.config import DEFAULT_FRACTIONS, DEFAULT_MAX_LEN, DEFAULT_SEED, default_workers
from smilesqa.evalharness import (
    HarnessHeader,
    compare_matrix,
    compare_pairs,
    fold_means,
    plan_cv,
    run_samples,
    summarize_runs,
)
from smilesqa.genmetrics import ReferenceIndex, build_reference, evaluate_corpus, report_table
from smilesqa.scaffold import (
    random_split,
    scaffold_counts,
    scaffold_jaccard_matrix,
    scaffold_keys,
    scaffold_sets,
    scaffold_split,
    zipf_fit,
)
from smilesqa.smiles_graph import standardize_corpus
from smilesqa.taxonomy import DomainError, SmilesQAError
from smilesqa.tokenizers import (
    Scheme,
    Tokenizer,
    Vocabulary,
    build_vocab,
    encode,
    load_merges,
    load_vocab,
    token_stats,
    train_bpe,
    used_tokens,
    vocab_jaccard,
)
from smilesqa.validator import ErrorProfile, ValidationMode, error_profile, merge_profiles, validate_many
from utils.data_generator import SmilesCorpusGenerator
from utils.reporter import RunReporter

logger = logging.getLogger("smilesqa")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    """Bad flag combination detected after parsing"""


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    subcommand: str
    inputs: List[str] = field(default_factory=list)
    output: Optional[str] = None
    scheme: Optional[str] = None
    vocab: Optional[str] = None
    merges: Optional[str] = None
    target_vocab: Optional[int] = None
    max_len: int = DEFAULT_MAX_LEN
    fractions: Tuple[float, float, float] = DEFAULT_FRACTIONS
    seed: int = DEFAULT_SEED
    workers: int = 1
    mode: Optional[str] = None
    quiet: bool = False
    verbose: bool = False
    options: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        values = dict(vars(args))
        workers = values.pop("workers", None)
        inputs = values.pop("inputs", None) or []
        if isinstance(inputs, str):
            inputs = [inputs]
        known = {}
        for name in ("subcommand", "output", "scheme", "vocab", "merges", "target_vocab", "max_len",
                     "fractions", "seed", "mode", "quiet", "verbose"):
            if name in values:
                known[name] = values.pop(name)
        if "fractions" in known:
            known["fractions"] = tuple(known["fractions"])
        return cls(
            inputs=list(inputs),
            workers=workers if workers is not None else default_workers(),
            options=values,
            **known,
        )

    def to_dict(self) -> Dict[str, Any]:
        """Echo written into the manifest; the worker count is left out since it never changes outputs"""
        data = asdict(self)
        data.pop("workers")
        data.pop("quiet")
        data.pop("verbose")
        data["fractions"] = list(self.fractions)
        return data


def read_corpus(path: str) -> List[str]:
    """Non-blank lines of a corpus file, '#' comment lines skipped"""
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle]
    return [line for line in lines if line and not line.startswith("#")]


def _parse_fractions(raw: str) -> Tuple[float, float, float]:
    try:
        values = tuple(float(part) for part in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {raw!r}")
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got {raw!r}")
    return values


def _require(config: RunConfig, *names: str) -> None:
    for name in names:
        value = getattr(config, name, None) if hasattr(config, name) else config.options.get(name)
        if value in (None, "", []):
            raise UsageError(f"{config.subcommand} needs --{name.replace('_', '-')}")


class SmilesQARunner:
    """
    Runs one subcommand from a RunConfig
    """

    def __init__(self, config: RunConfig, reporter: Optional[RunReporter] = None):
        """
        Initialize the runner

        Args:
            config: Parsed run configuration
            reporter: Console and artifact reporter
        """
        self.config = config
        self.reporter = reporter or RunReporter(quiet=config.quiet)
        self.inputs: List[str] = []

    def _read(self, path: str) -> List[str]:
        lines = read_corpus(path)
        self.inputs.append(path)
        self.reporter.log_stage("read", "INFO", f"{path}: {len(lines)} lines")
        return lines

    def _read_nonempty(self, path: str) -> List[str]:
        lines = self._read(path)
        if not lines:
            raise DomainError(f"{path}: corpus is empty")
        return lines

    def _load_vocab(self) -> Vocabulary:
        _require(self.config, "vocab")
        self.inputs.append(self.config.vocab)
        return load_vocab(self.config.vocab)

    def _load_merges(self, path: Optional[str]):
        if not path:
            return None
        self.inputs.append(path)
        return load_merges(path)

    def run(self) -> str:
        """
        Dispatch to the subcommand handler and write the manifest

        Returns:
            Path of the primary artifact
        """
        handler: Callable[[], str] = getattr(self, "_cmd_" + self.config.subcommand.replace("-", "_"))
        output = handler()
        self.reporter.write_manifest(output, self.config.subcommand, self.config.to_dict(), self.inputs, __version__)
        self.reporter.print_summary()
        return output

    # -- smiles-graph -------------------------------------------------------

    def _cmd_standardize(self) -> str:
        lines = self._read(self.config.inputs[0])
        kept, report = standardize_corpus(lines, self.config.workers)
        out = self.reporter.write_lines(self.config.output, kept)
        self.reporter.log_stage("standardize", "PASS", json.dumps(report.to_dict()))
        if self.config.options.get("report"):
            self.reporter.write_json(self.config.options["report"], report.to_dict())
        return out

    # -- validator -----------------------------------------------------------

    def _cmd_validate(self) -> str:
        lines = self._read(self.config.inputs[0])
        mode = ValidationMode(self.config.mode or "full")
        outcomes = validate_many(lines, mode, self.config.workers)
        profile = ErrorProfile()
        for outcome in outcomes:
            profile.add(outcome)
        out = self.reporter.write_json(self.config.output, {"mode": mode.value, **profile.to_dict()})
        if self.config.options.get("details"):
            frame = pd.DataFrame([{"smiles": s, **o.to_dict()} for s, o in zip(lines, outcomes)])
            self.reporter.write_csv(self.config.options["details"], frame)
        result = "PASS" if profile.rejected == 0 else "FAIL"
        self.reporter.log_stage("validate", result, f"{profile.valid}/{profile.total} valid")
        return out

    def _cmd_errors(self) -> str:
        mode = ValidationMode(self.config.mode or "full")
        profiles = [error_profile(self._read(path), mode, self.config.workers) for path in self.config.inputs]
        profile = merge_profiles(profiles)
        frame = profile.long_range_frame() if self.config.options.get("long_range") else profile.to_frame()
        out = self.reporter.write_table(self.config.output, frame, sheet="Errors")
        self.reporter.log_stage("errors", "PASS", f"{profile.rejected} rejected, {profile.long_range_pct:.2f}% long-range")
        return out

    # -- tokenizers ----------------------------------------------------------

    def _cmd_train_bpe(self) -> str:
        _require(self.config, "target_vocab", "merges")
        lines = self._read_nonempty(self.config.inputs[0])
        vocab, merges = train_bpe(lines, self.config.target_vocab)
        out = self.reporter.write_json(self.config.output, vocab.to_dict())
        self.reporter.write_text(self.config.merges, "".join(f"{a} {b}\n" for a, b in merges.pairs))
        self.reporter.log_stage("train-bpe", "PASS", f"{len(merges)} merges, vocabulary {len(vocab)}")
        return out

    def _cmd_build_vocab(self) -> str:
        _require(self.config, "scheme")
        scheme = Scheme(self.config.scheme)
        if scheme is Scheme.BPE:
            raise UsageError("build-vocab covers the char and ais schemes; use train-bpe for bpe")
        lines = self._read_nonempty(self.config.inputs[0])
        vocab = build_vocab(lines, scheme)
        out = self.reporter.write_json(self.config.output, vocab.to_dict())
        self.reporter.log_stage("build-vocab", "PASS", f"{scheme.value} vocabulary of {len(vocab)} tokens")
        return out

    def _cmd_encode(self) -> str:
        _require(self.config, "scheme")
        scheme = Scheme(self.config.scheme)
        vocab = self._load_vocab()
        merges = self._load_merges(self.config.merges)
        lines = self._read(self.config.inputs[0])
        pad = not self.config.options.get("no_pad")
        rows = [" ".join(map(str, encode(vocab, merges, line, scheme, self.config.max_len, pad).ids)) for line in lines]
        out = self.reporter.write_lines(self.config.output, rows)
        self.reporter.log_stage("encode", "PASS", f"{len(rows)} sequences")
        return out

    def _cmd_token_stats(self) -> str:
        _require(self.config, "scheme")
        scheme = Scheme(self.config.scheme)
        vocab = self._load_vocab() if self.config.vocab else None
        merges = self._load_merges(self.config.merges)
        lines = self._read_nonempty(self.config.inputs[0])
        stats = token_stats(vocab, merges, lines, scheme)
        payload: Dict[str, Any] = {"scheme": scheme.value, **stats.to_dict()}
        try:
            payload["zipf"] = stats.zipf().to_dict()
        except DomainError as exc:
            payload["zipf"] = None
            self.reporter.log_stage("zipf", "INFO", str(exc))
        out = self.reporter.write_json(self.config.output, payload)
        if self.config.options.get("table"):
            frame = pd.DataFrame(stats.rank_frequency, columns=["token", "frequency"])
            frame.insert(0, "rank", range(1, len(frame) + 1))
            self.reporter.write_csv(self.config.options["table"], frame)
        self.reporter.log_stage("token-stats", "PASS", f"mean length {stats.mean_length:.2f}")
        return out

    def _cmd_vocab_jaccard(self) -> str:
        paths = self.config.inputs
        if len(paths) != 2:
            raise UsageError("vocab-jaccard needs exactly two vocabulary files")
        vocabs = [load_vocab(p) for p in paths]
        self.inputs.extend(paths)
        payload: Dict[str, Any] = {"a": paths[0], "b": paths[1], "jaccard": vocab_jaccard(*vocabs)}
        corpus_path = self.config.options.get("corpus")
        if corpus_path:
            schemes = self.config.options.get("schemes") or []
            if len(schemes) != 2:
                raise UsageError("--corpus needs --schemes for both vocabularies")
            merges = self.config.options.get("merge_files") or [None, None]
            lines = self._read(corpus_path)
            used = [
                used_tokens(vocab, self._load_merges(merge), lines, scheme)
                for vocab, merge, scheme in zip(vocabs, merges, schemes)
            ]
            payload["used_jaccard"] = vocab_jaccard(*used)
        out = self.reporter.write_json(self.config.output, payload)
        self.reporter.log_stage("vocab-jaccard", "PASS", f"{payload['jaccard']:.4f}")
        return out

    # -- scaffold ------------------------------------------------------------

    def _cmd_scaffold(self) -> str:
        lines = self._read(self.config.inputs[0])
        keys = scaffold_keys(lines, self.config.workers)
        frame = pd.DataFrame({"smiles": lines, "scaffold_key": [k if not k.startswith("?") else "" for k in keys]})
        frame["parsed"] = [not k.startswith("?") for k in keys]
        out = self.reporter.write_csv(self.config.output, frame)
        self.reporter.log_stage("scaffold", "PASS", f"{len(set(keys))} distinct scaffolds")
        return out

    def _cmd_split(self) -> str:
        lines = self._read(self.config.inputs[0])
        mode = self.config.mode or "scaffold"
        if mode == "scaffold":
            plan = scaffold_split(lines, self.config.fractions, self.config.seed, self.config.workers)
        elif mode == "random":
            plan = random_split(lines, self.config.fractions, self.config.seed)
        else:
            raise UsageError(f"Unknown split mode: {mode}")
        out = self.reporter.write_text(self.config.output, plan.to_csv_text(lines))
        realized = ", ".join(f"{k} {v:.3f}" for k, v in plan.realized_fractions().items())
        self.reporter.log_stage("split", "PASS", realized)
        return out

    def _cmd_zipf(self) -> str:
        lines = self._read_nonempty(self.config.inputs[0])
        of = self.config.options.get("of") or "scaffolds"
        if of == "scaffolds":
            counts = scaffold_counts(lines, workers=self.config.workers)
        elif of == "tokens":
            _require(self.config, "scheme")
            merges = self._load_merges(self.config.merges)
            counts = dict(token_stats(None, merges, lines, Scheme(self.config.scheme)).rank_frequency)
        else:
            counts = lines
        fit = zipf_fit(counts)
        out = self.reporter.write_json(self.config.output, {"of": of, **fit.to_dict()})
        if self.config.options.get("table"):
            self.reporter.write_csv(self.config.options["table"], fit.to_frame())
        self.reporter.log_stage("zipf", "PASS", f"slope {fit.slope:.4f}, r2 {fit.r_squared:.4f}")
        return out

    def _cmd_scaffold_jaccard(self) -> str:
        corpora = {Path(path).stem: self._read(path) for path in self.config.inputs}
        if len(corpora) != len(self.config.inputs):
            raise UsageError("scaffold-jaccard inputs need distinct file names")
        matrix = scaffold_jaccard_matrix(scaffold_sets(corpora, self.config.workers))
        out = self.reporter.write_csv(self.config.output, matrix, index=True)
        self.reporter.log_stage("scaffold-jaccard", "PASS", f"{len(corpora)} corpora")
        return out

    # -- genmetrics ----------------------------------------------------------

    def _cmd_index(self) -> str:
        _require(self.config, "scaffolds_out")
        lines = self._read_nonempty(self.config.inputs[0])
        index = build_reference(lines, self.config.workers)
        out = self.reporter.write_lines(self.config.output, sorted(index.keys))
        self.reporter.write_lines(self.config.options["scaffolds_out"], sorted(index.scaffolds))
        self.reporter.log_stage("index", "PASS", f"{len(index.keys)} keys, {len(index.scaffolds)} scaffolds, {index.skipped} skipped")
        return out

    def _cmd_eval_gen(self) -> str:
        _require(self.config, "ref_keys")
        keys_path = self.config.options["ref_keys"]
        scaffolds_path = self.config.options.get("ref_scaffolds")
        reference = ReferenceIndex.load(keys_path, scaffolds_path)
        self.inputs.extend(p for p in (keys_path, scaffolds_path) if p)
        labels = self.config.options.get("labels") or [Path(p).stem for p in self.config.inputs]
        if len(labels) != len(self.config.inputs):
            raise UsageError("--labels must name every input")
        tokenizers = None
        if self.config.options.get("token_lengths"):
            empty = Vocabulary([])
            tokenizers = {"char": Tokenizer(Scheme.CHAR, empty), "ais": Tokenizer(Scheme.AIS, empty)}
        reports = []
        for label, path in zip(labels, self.config.inputs):
            report = evaluate_corpus(
                self._read(path), reference.keys, reference.scaffolds, self.config.workers, tokenizers
            )
            reports.append((label, report))
            self.reporter.log_stage(
                "eval-gen", "PASS", f"{label}: valid {100 * report.valid_pct:.2f}%, novel {100 * report.novel_pct:.2f}%"
            )
        out = self.reporter.write_json(self.config.output, {label: r.to_dict() for label, r in reports})
        if self.config.options.get("table"):
            self.reporter.write_table(self.config.options["table"], report_table(reports), sheet="Generation")
        return out

    # -- evalharness ---------------------------------------------------------

    def _cmd_cv_plan(self) -> str:
        lines = self._read(self.config.inputs[0])
        plan = plan_cv(lines, self.config.mode or "random", self.config.seed, workers=self.config.workers)
        out = self.reporter.write_json(self.config.output, {**plan.to_dict(), **HarnessHeader().to_dict()})
        self.reporter.log_stage("cv-plan", "PASS", f"{len(plan.runs())} runs, fold sizes {[len(f) for f in plan.folds]}")
        return out

    def _read_metrics(self) -> pd.DataFrame:
        path = self.config.inputs[0]
        try:
            frame = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
            raise DomainError(f"Malformed metrics table {path}: {exc}") from exc
        self.inputs.append(path)
        return frame

    def _cmd_metrics(self) -> str:
        frame = self._read_metrics()
        summary = summarize_runs(frame)
        out = self.reporter.write_table(self.config.output, summary, sheet="Summary")
        if self.config.options.get("fold_means"):
            self.reporter.write_table(self.config.options["fold_means"], fold_means(frame), sheet="Fold means")
        self.reporter.log_stage("metrics", "PASS", f"{len(summary)} summaries")
        return out

    def _cmd_compare(self) -> str:
        _require(self.config, "metric")
        frame = self._read_metrics()
        samples = run_samples(frame, self.config.options["metric"])
        out = self.reporter.write_csv(self.config.output, compare_matrix(samples), index=True)
        if self.config.options.get("pairs"):
            self.reporter.write_table(self.config.options["pairs"], compare_pairs(samples), sheet="Pairs")
        self.reporter.log_stage("compare", "PASS", f"{len(samples)} runs compared")
        return out

    # -- synthetic data ------------------------------------------------------

    def _cmd_synth(self) -> str:
        size = int(self.config.options.get("size") or 1000)
        generator = SmilesCorpusGenerator(self.config.seed)
        invalid_rate = float(self.config.options.get("invalid_rate") or 0.0)
        salt_rate = float(self.config.options.get("salt_rate") or 0.0)
        if invalid_rate > 0:
            lines = generator.generate_mixed_corpus(size, invalid_rate)
        else:
            lines = generator.generate_corpus(size, salt_rate)
        out = self.reporter.write_lines(self.config.output, lines)
        self.reporter.log_stage("synth", "PASS", f"{len(lines)} molecules")
        return out


SUBCOMMANDS: Dict[str, str] = {
    "standardize": "Canonicalize and deduplicate a corpus",
    "validate": "Validate a corpus and write its error profile",
    "errors": "Error-category table over one or more corpora",
    "train-bpe": "Learn BPE merges and vocabulary",
    "build-vocab": "Fixed vocabulary for the char or ais scheme",
    "encode": "Encode a corpus to padded id sequences",
    "token-stats": "Token length statistics and rank-frequency fit",
    "vocab-jaccard": "Jaccard similarity of two vocabularies",
    "scaffold": "Scaffold key per molecule",
    "split": "Scaffold or random train/valid/test split",
    "zipf": "Zipf fit of scaffold, token or item frequencies",
    "scaffold-jaccard": "Pairwise Jaccard matrix of scaffold sets",
    "index": "Reference key and scaffold sets of a training corpus",
    "eval-gen": "Validity, uniqueness and novelty of generated corpora",
    "cv-plan": "Repeated k-fold cross-validation plan",
    "metrics": "Summaries of per-run metric values",
    "compare": "Welch comparison matrix between runs",
    "synth": "Seeded synthetic SMILES corpus",
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--workers", type=int, default=None, help="worker threads (default $SMILESQA_WORKERS or 1)")
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--verbose", action="store_true")

    parser = _Parser(prog="smilesqa", description="SMILES corpus quality assurance")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True
    commands = {name: sub.add_parser(name, help=help_text, parents=[common]) for name, help_text in SUBCOMMANDS.items()}

    def single_in(p):
        p.add_argument("--in", dest="inputs", required=True)

    def multi_in(p):
        p.add_argument("--in", dest="inputs", nargs="+", required=True)

    for name in ("standardize", "validate", "train-bpe", "build-vocab", "encode", "token-stats", "scaffold",
                 "split", "zipf", "index", "cv-plan", "metrics", "compare"):
        single_in(commands[name])
    for name in ("errors", "vocab-jaccard", "scaffold-jaccard", "eval-gen"):
        multi_in(commands[name])
    for name, p in commands.items():
        p.add_argument("--out", dest="output", required=True)

    commands["standardize"].add_argument("--report")
    for name in ("validate", "errors"):
        commands[name].add_argument("--mode", choices=[m.value for m in ValidationMode], default="full")
    commands["validate"].add_argument("--details", help="per-line outcome CSV")
    commands["errors"].add_argument("--long-range", action="store_true")

    commands["train-bpe"].add_argument("--target", dest="target_vocab", type=int, required=True)
    commands["train-bpe"].add_argument("--merges-out", dest="merges", required=True)
    commands["build-vocab"].add_argument("--scheme", choices=[s.value for s in Scheme], required=True)
    for name in ("encode", "token-stats"):
        commands[name].add_argument("--scheme", choices=[s.value for s in Scheme], required=True)
        commands[name].add_argument("--vocab", required=(name == "encode"))
        commands[name].add_argument("--merges")
    commands["encode"].add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    commands["encode"].add_argument("--no-pad", action="store_true")
    commands["token-stats"].add_argument("--table", help="rank-frequency CSV")
    commands["vocab-jaccard"].add_argument("--corpus", help="compare only tokens used on this corpus")
    commands["vocab-jaccard"].add_argument("--schemes", nargs=2, choices=[s.value for s in Scheme])
    commands["vocab-jaccard"].add_argument("--merge-files", nargs=2)

    commands["split"].add_argument("--mode", choices=["scaffold", "random"], default="scaffold")
    commands["split"].add_argument("--fractions", type=_parse_fractions, default=DEFAULT_FRACTIONS)
    commands["zipf"].add_argument("--of", choices=["scaffolds", "tokens", "items"], default="scaffolds")
    commands["zipf"].add_argument("--scheme", choices=[s.value for s in Scheme])
    commands["zipf"].add_argument("--merges")
    commands["zipf"].add_argument("--table", help="rank-frequency CSV")

    commands["index"].add_argument("--scaffolds-out", required=True)
    commands["eval-gen"].add_argument("--ref-keys", required=True)
    commands["eval-gen"].add_argument("--ref-scaffolds")
    commands["eval-gen"].add_argument("--labels", nargs="+")
    commands["eval-gen"].add_argument("--table", help="report table (.csv, .json or .xlsx)")
    commands["eval-gen"].add_argument("--token-lengths", action="store_true")

    commands["cv-plan"].add_argument("--mode", choices=["random", "scaffold"], default="random")
    commands["metrics"].add_argument("--fold-means")
    commands["compare"].add_argument("--metric", required=True)
    commands["compare"].add_argument("--pairs", help="long-form comparison table")

    commands["synth"].add_argument("--size", type=int, default=1000)
    commands["synth"].add_argument("--invalid-rate", type=float, default=0.0)
    commands["synth"].add_argument("--salt-rate", type=float, default=0.0)
    return parser


def _configure_logging(config: RunConfig) -> None:
    level = logging.DEBUG if config.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def run(config: RunConfig, reporter: Optional[RunReporter] = None) -> int:
    """
    Execute one subcommand

    Returns:
        Exit status: 0 success, 1 usage, 2 input/output, 3 domain error
    """
    try:
        SmilesQARunner(config, reporter).run()
        return EXIT_OK
    except UsageError as exc:
        print(f"❌ usage: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"❌ io: {exc}", file=sys.stderr)
        return EXIT_IO
    except SmilesQAError as exc:
        print(f"❌ {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        print(f"❌ usage: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Main function - entry point for the smilesqa CLI
    """
    args = build_parser().parse_args(argv)
    config = RunConfig.from_args(args)
    _configure_logging(config)
    return run(config)


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n⏹️  Stopped by user", file=sys.stderr)
        sys.exit(130)
