"""
SMILES validation
Full and prefix validation with one error category per rejected string, plus the
error profiles aggregated over a corpus.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Union

import pandas as pd

from .smiles_graph import kekulize, read_smiles
from .taxonomy import (
    CATEGORIES,
    CATEGORIES_BY_CODE,
    ErrorCategory,
    ErrorKind,
    SmilesParseError,
)

logger = logging.getLogger(__name__)


class ValidationMode(str, Enum):
    FULL = "full"
    PARTIAL = "partial"


@dataclass(frozen=True)
class ValidationOutcome:
    valid: bool
    category: Optional[ErrorCategory] = None
    position: Optional[int] = None
    detail: str = ""
    message: str = ""

    @property
    def kind(self) -> Optional[ErrorKind]:
        return self.category.kind if self.category else None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "valid": self.valid,
            "kind": self.kind.value if self.kind else None,
            "category": self.category.code if self.category else None,
            "message": self.message or None,
            "position": self.position,
            "detail": self.detail or None,
        }


VALID = ValidationOutcome(True)


def classify_long_range(category: Union[ErrorCategory, str]) -> bool:
    """
    True for the six syntax categories whose cause can sit far from where the
    error becomes visible (unclosed rings, branches and brackets).

    Args:
        category: An ErrorCategory, its code, or its message template

    Raises:
        ValueError: The category is not part of the taxonomy
    """
    if isinstance(category, ErrorCategory):
        if category not in CATEGORIES:
            raise ValueError(f"Unknown error category: {category!r}")
        return category.long_range
    found = CATEGORIES_BY_CODE.get(category) or _BY_MESSAGE.get(category)
    if found is None:
        raise ValueError(f"Unknown error category: {category!r}")
    return found.long_range


_BY_MESSAGE = {c.message_template: c for c in CATEGORIES}


def validate(text: str, mode: ValidationMode = ValidationMode.FULL) -> ValidationOutcome:
    """
    Validate one SMILES string.

    Args:
        text: SMILES text; surrounding whitespace is ignored
        mode: FULL requires a complete molecule including a Kekulé assignment,
            PARTIAL accepts every string some continuation could make valid

    Returns:
        Outcome with exactly one category when rejected
    """
    mode = ValidationMode(mode)
    text = text.strip()
    try:
        graph = read_smiles(text, partial=mode is ValidationMode.PARTIAL)
        if graph is not None:
            kekulize(graph)
    except SmilesParseError as exc:
        return ValidationOutcome(False, exc.category, exc.position, exc.detail, exc.message)
    return VALID


def validate_many(
    corpus: Iterable[str], mode: ValidationMode = ValidationMode.FULL, workers: int = 1
) -> List[ValidationOutcome]:
    """Validate every string; output order follows input order for any worker count"""
    lines = list(corpus)
    if workers <= 1:
        return [validate(line, mode) for line in lines]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda line: validate(line, mode), lines))


@dataclass
class ErrorProfile:
    total: int = 0
    valid: int = 0
    counts: Counter = field(default_factory=Counter)

    @property
    def rejected(self) -> int:
        return self.total - self.valid

    def add(self, outcome: ValidationOutcome) -> None:
        self.total += 1
        if outcome.valid:
            self.valid += 1
        else:
            self.counts[outcome.category.code] += 1

    def share(self, category: ErrorCategory) -> float:
        """Percentage of rejected strings in this category"""
        if not self.rejected:
            return 0.0
        return 100.0 * self.counts.get(category.code, 0) / self.rejected

    @property
    def long_range_pct(self) -> float:
        return sum(self.share(c) for c in CATEGORIES if c.long_range)

    def kind_pct(self) -> Dict[str, float]:
        totals = {kind.value: 0.0 for kind in ErrorKind}
        for category in CATEGORIES:
            totals[category.kind.value] += self.share(category)
        return totals

    def merge(self, other: "ErrorProfile") -> "ErrorProfile":
        return ErrorProfile(self.total + other.total, self.valid + other.valid, self.counts + other.counts)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "valid": self.valid,
            "rejected": self.rejected,
            "categories": [
                {
                    "kind": c.kind.value,
                    "message": c.message_template,
                    "count": self.counts.get(c.code, 0),
                    "pct": self.share(c),
                    "long_range": c.long_range,
                }
                for c in CATEGORIES
            ],
            "long_range_pct": self.long_range_pct,
            "kind_pct": self.kind_pct(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ErrorProfile":
        counts = Counter()
        for row in data.get("categories", []):
            category = _BY_MESSAGE.get(row["message"]) or CATEGORIES_BY_CODE.get(row.get("code", ""))
            if category and row.get("count"):
                counts[category.code] = int(row["count"])
        return cls(int(data["total"]), int(data["valid"]), counts)

    def to_frame(self) -> pd.DataFrame:
        """Rows in table order, labelled "Kind: message"; long-range rows are flagged"""
        rows = [
            {
                "error": c.label,
                "count": self.counts.get(c.code, 0),
                "pct": round(self.share(c), 4),
                "long_range": c.long_range,
            }
            for c in CATEGORIES
        ]
        return pd.DataFrame(rows, columns=["error", "count", "pct", "long_range"])

    def long_range_frame(self) -> pd.DataFrame:
        frame = self.to_frame()
        return frame[frame["long_range"]].drop(columns=["long_range"]).reset_index(drop=True)


def error_profile(
    corpus: Iterable[str], mode: ValidationMode = ValidationMode.FULL, workers: int = 1
) -> ErrorProfile:
    """Validate a corpus and tally rejections by category; blank lines are skipped"""
    lines = [line.strip() for line in corpus]
    lines = [line for line in lines if line]
    profile = ErrorProfile()
    for outcome in validate_many(lines, mode, workers):
        profile.add(outcome)
    logger.info("Validated %d strings, %d rejected", profile.total, profile.rejected)
    return profile


def merge_profiles(profiles: Iterable[ErrorProfile]) -> ErrorProfile:
    merged = ErrorProfile()
    for profile in profiles:
        merged = merged.merge(profile)
    return merged
