"""
Scaffolds
Bemis-Murcko scaffold keys, scaffold-grouped and random dataset splits, scaffold
set similarity and Zipf rank-frequency fits.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .config import DEFAULT_FRACTIONS, DEFAULT_SEED, RARE_SCAFFOLD_THRESHOLD, STAGE_SPLIT, rng_for
from .smiles_graph import BondOrder, MolecularGraph, canonical_key, induced_subgraph, kekulize, parse_smiles
from .taxonomy import DomainError, SmilesParseError

logger = logging.getLogger(__name__)

PARTITIONS: Tuple[str, str, str] = ("train", "valid", "test")
OVERFLOW_RULE = "furthest-below-target"


@dataclass(frozen=True, order=True)
class ScaffoldKey:
    key: str = ""

    @property
    def is_empty(self) -> bool:
        return self.key == ""

    def __str__(self) -> str:
        return self.key


EMPTY_SCAFFOLD = ScaffoldKey("")


def scaffold_graph(graph: MolecularGraph) -> MolecularGraph:
    """
    Ring systems plus the linkers between them.

    Non-ring atoms with at most one neighbor are removed until none remain; atoms
    double-bonded to a kept atom are then restored, so ring carbonyls survive while
    side chains, including acyl groups, do not. Chirality is dropped.
    """
    graph = kekulize(graph)
    alive = set(range(len(graph.atoms)))
    degree = [graph.degree(i) for i in range(len(graph.atoms))]
    queue = [i for i in alive if degree[i] <= 1 and not graph.atoms[i].in_ring]
    while queue:
        atom = queue.pop()
        if atom not in alive:
            continue
        alive.discard(atom)
        for other, _ in graph.neighbors[atom]:
            if other in alive:
                degree[other] -= 1
                if degree[other] <= 1 and not graph.atoms[other].in_ring:
                    queue.append(other)
    if not alive:
        return MolecularGraph((), ())
    extras = set()
    for bond in graph.bonds:
        if bond.aromatic or bond.order is not BondOrder.DOUBLE:
            continue
        if bond.a in alive and bond.b not in alive:
            extras.add(bond.b)
        elif bond.b in alive and bond.a not in alive:
            extras.add(bond.a)
    return induced_subgraph(graph, alive | extras, strip_chirality=True)


def murcko_scaffold(graph: MolecularGraph) -> ScaffoldKey:
    """Scaffold key of a molecule; acyclic molecules give the empty key"""
    core = scaffold_graph(graph)
    if not core.atoms:
        return EMPTY_SCAFFOLD
    return ScaffoldKey(canonical_key(core))


def scaffold_of(smiles: str) -> ScaffoldKey:
    return murcko_scaffold(parse_smiles(smiles))


def _group_key(index_and_smiles: Tuple[int, str]) -> str:
    _, smiles = index_and_smiles
    try:
        return scaffold_of(smiles).key
    except SmilesParseError:
        # Unparsable records group only with identical text
        return f"?{smiles.strip()}"


def scaffold_keys(mols: Sequence[str], workers: int = 1) -> List[str]:
    """Scaffold key text per molecule, in input order"""
    items = list(enumerate(mols))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_group_key, items))
    return [_group_key(item) for item in items]


def scaffold_counts(mols: Iterable[str], include_empty: bool = False, workers: int = 1) -> Counter:
    """Occurrences of each scaffold key over parsable molecules"""
    counts: Counter = Counter()
    for key in scaffold_keys(list(mols), workers):
        if key.startswith("?") or (key == "" and not include_empty):
            continue
        counts[key] += 1
    return counts


@dataclass
class SplitPlan:
    assignment: List[str]
    keys: List[str]
    fractions: Tuple[float, float, float] = DEFAULT_FRACTIONS
    seed: int = DEFAULT_SEED
    mode: str = "scaffold"
    overflow_rule: str = OVERFLOW_RULE

    def __len__(self) -> int:
        return len(self.assignment)

    def indices(self, partition: str) -> List[int]:
        return [i for i, name in enumerate(self.assignment) if name == partition]

    def realized_fractions(self) -> Dict[str, float]:
        total = len(self.assignment)
        counts = Counter(self.assignment)
        return {name: (counts[name] / total if total else 0.0) for name in PARTITIONS}

    def header(self) -> str:
        fractions = ",".join(f"{f:g}" for f in self.fractions)
        return f"# mode={self.mode} fractions={fractions} seed={self.seed} overflow={self.overflow_rule}"

    def to_frame(self, mols: Sequence[str]) -> pd.DataFrame:
        return pd.DataFrame(
            {"smiles": list(mols), "scaffold_key": self.keys, "partition": self.assignment},
            columns=["smiles", "scaffold_key", "partition"],
        )

    def to_csv_text(self, mols: Sequence[str]) -> str:
        """Plan file body: a '#' header line followed by the CSV table"""
        return self.header() + "\n" + self.to_frame(mols).to_csv(index=False, lineterminator="\n")


def _check_fractions(fractions: Sequence[float]) -> Tuple[float, float, float]:
    values = tuple(float(f) for f in fractions)
    if len(values) != 3 or any(f <= 0 for f in values) or abs(sum(values) - 1.0) > 1e-6:
        raise ValueError(f"Fractions must be three positive numbers summing to 1, got {list(fractions)}")
    return values


def scaffold_split(
    mols: Sequence[str],
    fractions: Sequence[float] = DEFAULT_FRACTIONS,
    seed: int = DEFAULT_SEED,
    workers: int = 1,
) -> SplitPlan:
    """
    Assign whole scaffold groups to train, valid and test.

    Groups go in descending size (ties by key) to the first partition that still
    has room for them; a group that fits nowhere goes to the partition furthest
    below its target, earlier partitions winning ties.

    Args:
        mols: SMILES strings
        fractions: Target (train, valid, test) shares
        seed: Recorded in the plan; the assignment itself is a deterministic pass
        workers: Threads for scaffold extraction

    Returns:
        The split plan, empty for empty input
    """
    fractions = _check_fractions(fractions)
    mols = list(mols)
    keys = scaffold_keys(mols, workers)
    groups: Dict[str, List[int]] = {}
    for i, key in enumerate(keys):
        groups.setdefault(key, []).append(i)
    targets = [f * len(mols) for f in fractions]
    filled = [0, 0, 0]
    assignment = [""] * len(mols)
    for key, members in sorted(groups.items(), key=lambda item: (-len(item[1]), item[0])):
        size = len(members)
        slot = next((p for p in range(3) if filled[p] + size <= targets[p] + 1e-9), None)
        if slot is None:
            slot = max(range(3), key=lambda p: (targets[p] - filled[p], -p))
        filled[slot] += size
        for i in members:
            assignment[i] = PARTITIONS[slot]
    logger.info("Scaffold split of %d molecules into %d groups: %s", len(mols), len(groups), filled)
    return SplitPlan(assignment, keys, fractions, seed, "scaffold")


def random_split(
    mols: Sequence[str], fractions: Sequence[float] = DEFAULT_FRACTIONS, seed: int = DEFAULT_SEED
) -> SplitPlan:
    """Seeded random permutation cut at the target fractions"""
    fractions = _check_fractions(fractions)
    n = len(mols)
    order = rng_for(seed, STAGE_SPLIT).permutation(n)
    n_train = int(round(fractions[0] * n))
    n_valid = min(n - n_train, int(round(fractions[1] * n)))
    assignment = [""] * n
    for rank, i in enumerate(order):
        if rank < n_train:
            assignment[int(i)] = "train"
        elif rank < n_train + n_valid:
            assignment[int(i)] = "valid"
        else:
            assignment[int(i)] = "test"
    return SplitPlan(assignment, [""] * n, fractions, seed, "random")


def _key_set(items: Iterable[Union[ScaffoldKey, str]]) -> Set[str]:
    return {str(item) for item in items}


def scaffold_set_jaccard(a: Iterable[Union[ScaffoldKey, str]], b: Iterable[Union[ScaffoldKey, str]]) -> float:
    """|A∩B| / |A∪B|; two empty sets give 1.0"""
    left, right = _key_set(a), _key_set(b)
    union = left | right
    if not union:
        return 1.0
    return len(left & right) / len(union)


def scaffold_jaccard_matrix(sets: Mapping[str, Iterable[Union[ScaffoldKey, str]]]) -> pd.DataFrame:
    """Pairwise Jaccard similarity between named scaffold sets; the diagonal is NaN"""
    names = list(sets)
    normalized = {name: _key_set(sets[name]) for name in names}
    rows = [
        [np.nan if r == c else scaffold_set_jaccard(normalized[r], normalized[c]) for c in names]
        for r in names
    ]
    return pd.DataFrame(rows, index=names, columns=names)


def rare_novel_scaffolds(
    counts: Mapping[str, int], reference: Iterable[Union[ScaffoldKey, str]], threshold: int = RARE_SCAFFOLD_THRESHOLD
) -> List[str]:
    """Scaffolds absent from the reference that occur fewer than `threshold` times"""
    known = _key_set(reference)
    return sorted(key for key, count in counts.items() if key and key not in known and count < threshold)


@dataclass
class ZipfFit:
    slope: float
    intercept: float
    r_squared: float
    table: List[Tuple[int, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, float]:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r_squared}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.table, columns=["rank", "frequency"])


def zipf_fit(counts: Union[Mapping[object, float], Iterable[object]]) -> ZipfFit:
    """
    Least-squares line through (log rank, log frequency).

    Args:
        counts: Item -> frequency mapping, or an iterable of items to count

    Raises:
        DomainError: Fewer than two distinct items
    """
    if isinstance(counts, Mapping):
        frequencies = [float(v) for v in counts.values() if v > 0]
    else:
        frequencies = [float(v) for v in Counter(counts).values()]
    if len(frequencies) < 2:
        raise DomainError("A Zipf fit needs at least two distinct items")
    frequencies.sort(reverse=True)
    ranks = np.arange(1, len(frequencies) + 1, dtype=float)
    x = np.log(ranks)
    y = np.log(np.asarray(frequencies))
    table = [(int(r), f) for r, f in zip(ranks, frequencies)]
    if np.allclose(y, y[0], rtol=0.0, atol=1e-15):
        return ZipfFit(0.0, float(y[0]), 1.0, table)
    fit = stats.linregress(x, y)
    return ZipfFit(float(fit.slope), float(fit.intercept), float(fit.rvalue ** 2), table)


def zipf_table(counts: Union[Mapping[object, float], Iterable[object]]) -> pd.DataFrame:
    return zipf_fit(counts).to_frame()


def scaffold_sets(corpora: Mapping[str, Sequence[str]], workers: int = 1) -> Dict[str, Set[str]]:
    """Non-empty scaffold key sets per named corpus"""
    return {name: set(scaffold_counts(mols, workers=workers)) for name, mols in corpora.items()}


def load_key_set(lines: Iterable[str]) -> Set[str]:
    return {line.strip() for line in lines if line.strip() and not line.startswith("#")}


def realized_gap(plan: SplitPlan) -> Optional[float]:
    """Largest absolute gap between realized and target fractions"""
    if not plan.assignment:
        return None
    realized = plan.realized_fractions()
    return max(abs(realized[name] - target) for name, target in zip(PARTITIONS, plan.fractions))
