"""
Generation metrics
Validity, uniqueness, novelty and scaffold novelty of generated SMILES corpora,
measured against a reference training corpus.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import pandas as pd

from .config import RARE_SCAFFOLD_THRESHOLD
from .scaffold import load_key_set, murcko_scaffold, rare_novel_scaffolds
from .smiles_graph import canonical_key, kekulize, parse_smiles
from .taxonomy import SmilesParseError
from .tokenizers import Tokenizer
from .validator import VALID, ErrorProfile, ValidationOutcome

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ["label", "valid_pct", "unique_pct", "novel_pct", "unique_scaffolds", "novel_scaffolds"]


@dataclass
class ReferenceIndex:
    """Canonical keys and non-empty scaffold keys of a reference corpus"""

    keys: Set[str] = field(default_factory=set)
    scaffolds: Set[str] = field(default_factory=set)
    skipped: int = 0

    def save(self, keys_path: Union[str, Path], scaffolds_path: Union[str, Path]) -> None:
        Path(keys_path).write_text("".join(f"{k}\n" for k in sorted(self.keys)), encoding="utf-8")
        Path(scaffolds_path).write_text("".join(f"{k}\n" for k in sorted(self.scaffolds)), encoding="utf-8")

    @classmethod
    def load(cls, keys_path: Union[str, Path], scaffolds_path: Optional[Union[str, Path]] = None) -> "ReferenceIndex":
        keys = load_key_set(Path(keys_path).read_text(encoding="utf-8").splitlines())
        scaffolds: Set[str] = set()
        if scaffolds_path:
            scaffolds = load_key_set(Path(scaffolds_path).read_text(encoding="utf-8").splitlines())
        return cls(keys, scaffolds)


def _index_line(line: str) -> Optional[Tuple[str, str]]:
    try:
        graph = kekulize(parse_smiles(line))
        return canonical_key(graph), murcko_scaffold(graph).key
    except SmilesParseError:
        return None


def build_reference(corpus: Iterable[str], workers: int = 1) -> ReferenceIndex:
    """
    Index a reference corpus by canonical key and scaffold key.

    Lines that do not parse are counted in `skipped`; blank and '#' lines are ignored.
    """
    lines = [line.strip() for line in corpus]
    lines = [line for line in lines if line and not line.startswith("#")]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_index_line, lines))
    else:
        results = [_index_line(line) for line in lines]
    index = ReferenceIndex()
    for result in results:
        if result is None:
            index.skipped += 1
            continue
        key, scaffold = result
        index.keys.add(key)
        if scaffold:
            index.scaffolds.add(scaffold)
    logger.info("Indexed %d reference molecules, %d scaffolds", len(index.keys), len(index.scaffolds))
    return index


@dataclass
class EvaluationReport:
    total: int = 0
    valid: int = 0
    unique: int = 0
    novel: int = 0
    unique_scaffolds: int = 0
    novel_scaffolds: int = 0
    rare_novel_scaffolds: int = 0
    error_profile: ErrorProfile = field(default_factory=ErrorProfile)
    mean_token_len: Dict[str, float] = field(default_factory=dict)

    def _fraction(self, count: int) -> float:
        return count / self.total if self.total else 0.0

    @property
    def valid_pct(self) -> float:
        return self._fraction(self.valid)

    @property
    def unique_pct(self) -> float:
        return self._fraction(self.unique)

    @property
    def novel_pct(self) -> float:
        return self._fraction(self.novel)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "valid": self.valid,
            "unique": self.unique,
            "novel": self.novel,
            "valid_pct": self.valid_pct,
            "unique_pct": self.unique_pct,
            "novel_pct": self.novel_pct,
            "unique_scaffolds": self.unique_scaffolds,
            "novel_scaffolds": self.novel_scaffolds,
            "rare_novel_scaffolds": self.rare_novel_scaffolds,
            "mean_token_len": dict(self.mean_token_len),
            "error_profile": self.error_profile.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "EvaluationReport":
        return cls(
            total=int(data["total"]),
            valid=int(data["valid"]),
            unique=int(data["unique"]),
            novel=int(data["novel"]),
            unique_scaffolds=int(data.get("unique_scaffolds", 0)),
            novel_scaffolds=int(data.get("novel_scaffolds", 0)),
            rare_novel_scaffolds=int(data.get("rare_novel_scaffolds", 0)),
            error_profile=ErrorProfile.from_dict(data["error_profile"]) if "error_profile" in data else ErrorProfile(),
            mean_token_len=dict(data.get("mean_token_len", {})),
        )


def _judge(line: str) -> Tuple[ValidationOutcome, Optional[str]]:
    try:
        key = canonical_key(parse_smiles(line))
    except SmilesParseError as exc:
        return ValidationOutcome(False, exc.category, exc.position, exc.detail, exc.message), None
    return VALID, key


def _scaffold_key(key: str) -> str:
    return murcko_scaffold(parse_smiles(key)).key


def evaluate_corpus(
    generated: Iterable[str],
    reference_keys: Iterable[str] = (),
    reference_scaffolds: Iterable[str] = (),
    workers: int = 1,
    tokenizers: Optional[Mapping[str, Tokenizer]] = None,
    rare_threshold: int = RARE_SCAFFOLD_THRESHOLD,
) -> EvaluationReport:
    """
    Score a generated corpus against reference sets.

    Every molecule-level share is taken over the total number of generated strings.
    A string is unique when it is the first valid one with its canonical key, and
    novel when that key is absent from the reference. Scaffolds are counted over the
    unique molecules.

    Args:
        generated: Generated SMILES, one per item
        reference_keys: Canonical keys of the training corpus
        reference_scaffolds: Scaffold keys of the training corpus
        workers: Threads for per-line parsing; results do not depend on it
        tokenizers: Optional named tokenizers whose mean length over the valid
            strings is reported

    Returns:
        The evaluation report
    """
    lines = [line.strip() for line in generated]
    known = set(reference_keys)
    known_scaffolds = set(reference_scaffolds)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            judged = list(pool.map(_judge, lines))
    else:
        judged = [_judge(line) for line in lines]

    report = EvaluationReport(total=len(lines))
    first_seen: List[str] = []
    seen: Set[str] = set()
    valid_lines: List[str] = []
    for line, (outcome, key) in zip(lines, judged):
        report.error_profile.add(outcome)
        if key is None:
            continue
        report.valid += 1
        valid_lines.append(line)
        if key in seen:
            continue
        seen.add(key)
        first_seen.append(key)
        if key not in known:
            report.novel += 1
    report.unique = len(first_seen)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scaffold_list = list(pool.map(_scaffold_key, first_seen))
    else:
        scaffold_list = [_scaffold_key(key) for key in first_seen]
    scaffolds = Counter(s for s in scaffold_list if s)
    novel = {s: c for s, c in scaffolds.items() if s not in known_scaffolds}
    report.unique_scaffolds = len(scaffolds)
    report.novel_scaffolds = len(novel)
    report.rare_novel_scaffolds = len(rare_novel_scaffolds(novel, known_scaffolds, rare_threshold))

    for name, tokenizer in (tokenizers or {}).items():
        report.mean_token_len[name] = tokenizer.mean_length(valid_lines)
    logger.info(
        "Evaluated %d strings: %d valid, %d unique, %d novel", report.total, report.valid, report.unique, report.novel
    )
    return report


def report_table(reports: Sequence[Tuple[str, EvaluationReport]]) -> pd.DataFrame:
    """
    One row per label in the given order: molecule shares as percentages and
    scaffold counts. An empty list yields the header only.
    """
    rows = [
        {
            "label": label,
            "valid_pct": round(100.0 * report.valid_pct, 2),
            "unique_pct": round(100.0 * report.unique_pct, 2),
            "novel_pct": round(100.0 * report.novel_pct, 2),
            "unique_scaffolds": report.unique_scaffolds,
            "novel_scaffolds": report.novel_scaffolds,
        }
        for label, report in reports
    ]
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)
