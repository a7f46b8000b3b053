"""
Configuration defaults for smilesqa
Shared constants, environment lookups and seed derivation
"""

import os
from typing import Tuple

import numpy as np

DEFAULT_MAX_LEN = 512
DEFAULT_FRACTIONS: Tuple[float, float, float] = (0.8, 0.1, 0.1)
DEFAULT_SEED = 0
DEFAULT_REPORT_DIR = "reports"
DEFAULT_FOLDS = 5
DEFAULT_REPEATS = 5
RARE_SCAFFOLD_THRESHOLD = 10

WORKERS_ENV = "SMILESQA_WORKERS"

# Stage ids keep randomized stages independent under one user seed
STAGE_SPLIT = 1
STAGE_CV = 2
STAGE_SYNTH = 3


def default_workers() -> int:
    """
    Worker threads for per-record work, from SMILESQA_WORKERS (default 1)

    Returns:
        A positive thread count
    """
    raw = os.environ.get(WORKERS_ENV, "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def derive_seed(seed: int, stage: int, counter: int = 0) -> int:
    """Counter-based 64-bit seed for one randomized stage"""
    sequence = np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, stage, counter])
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed: int, stage: int, counter: int = 0) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(derive_seed(seed, stage, counter)))
