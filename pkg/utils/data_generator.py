"""
Data Generator utility for smilesqa
Uses Faker to generate reproducible synthetic SMILES corpora for testing
"""

from typing import Callable, Dict, List, Optional, Tuple

from faker import Faker

from smilesqa.config import STAGE_SYNTH, derive_seed
from smilesqa.taxonomy import KEKULIZATION, UNCLOSED_RINGS, UNMATCHED_CLOSE_PAREN, VALENCE, ErrorCategory

# Chain pieces: each is appended to the atom written before it
CHAIN_UNITS: Tuple[str, ...] = (
    "C", "CC", "O", "N", "S", "C=C", "C(=O)", "C(C)", "C(F)", "C(Cl)", "C(O)",
    "[C@@H](C)", "[C@H](O)", "[NH+](C)", "C(=O)N", "OC",
)

# Ring pieces; {0} and {1} are replaced by fresh ring labels
RING_UNITS: Tuple[str, ...] = (
    "c{0}ccccc{0}",
    "C{0}CCCCC{0}",
    "C{0}CCOC{0}",
    "c{0}ccncc{0}",
    "c{0}ccc{1}ccccc{1}c{0}",
    "C{0}CC{0}",
    "c{0}ccoc{0}",
    "c{0}cc[nH]c{0}",
    "C{0}CCC(=O)CC{0}",
)

TERMINAL_UNITS: Tuple[str, ...] = ("C", "O", "N", "F", "Cl", "C(=O)O", "C#N", "c{0}ccccc{0}")

SALTS: Tuple[str, ...] = (".[Na+]", ".[Cl-]")

BENZENE = "c{0}ccccc{0}"


class SmilesCorpusGenerator:
    """
    Generates synthetic SMILES for testing
    - Valid molecules built from chain and ring pieces
    - Corrupted molecules whose expected error category is known
    - Scaffold-heavy corpora for split and Zipf checks
    """

    def __init__(self, seed: int = 42, locale: str = "en_US"):
        """
        Initialize the generator

        Args:
            seed: Seed; the Faker instance is seeded from it per synthesis stage
            locale: Locale for Faker (only its random source is used)
        """
        self.seed = seed
        self.fake = Faker(locale)
        self.fake.seed_instance(derive_seed(seed, STAGE_SYNTH))

    def _pick(self, options: Tuple[str, ...]) -> str:
        return options[self.fake.random_int(0, len(options) - 1)]

    def molecule_units(self, max_units: int = 6) -> List[str]:
        """
        Pieces of one valid molecule, in writing order

        Ring labels are unique within the molecule and stay at or below 9.
        """
        units = ["C"]
        label = 1
        for _ in range(self.fake.random_int(1, max_units)):
            if self.fake.random_int(0, 2) == 0 and label <= 8:
                template = self._pick(RING_UNITS)
                units.append(template.format(label, label + 1))
                label += 2 if "{1}" in template else 1
            else:
                units.append(self._pick(CHAIN_UNITS))
        terminal = self._pick(TERMINAL_UNITS)
        if "{0}" in terminal and label > 9:
            terminal = "C"
        units.append(terminal.format(label))
        return units

    def generate_molecule(self, salt_rate: float = 0.0) -> str:
        """
        Generate one valid SMILES string

        Args:
            salt_rate: Chance of appending a counter-ion fragment
        """
        text = "".join(self.molecule_units())
        if text.endswith(")"):
            text += "C"
        if salt_rate > 0 and self.fake.random.random() < salt_rate:
            text += self._pick(SALTS)
        return text

    def generate_corpus(self, size: int, salt_rate: float = 0.0) -> List[str]:
        return [self.generate_molecule(salt_rate) for _ in range(size)]

    @staticmethod
    def scaffold_cores() -> List[str]:
        """Every single ring piece, then every unordered pair of ring pieces joined directly"""
        combos = [(a,) for a in range(len(RING_UNITS))]
        combos += [(a, b) for a in range(len(RING_UNITS)) for b in range(a, len(RING_UNITS))]
        cores = []
        for combo in combos:
            label = 1
            parts = []
            for index in combo:
                template = RING_UNITS[index]
                parts.append(template.format(label, label + 1))
                label += 2 if "{1}" in template else 1
            cores.append("".join(parts))
        return cores

    def generate_scaffold_corpus(self, size: int, n_scaffolds: int, zipf_exponent: float = 1.0) -> List[str]:
        """
        Molecules whose scaffold frequencies follow a Zipf law

        Scaffold k (1-based) is the k-th entry of `scaffold_cores()`; each molecule
        decorates its scaffold with a random side chain. Counts are rounded, so the
        corpus holds about `size` molecules.

        Args:
            size: Target number of molecules
            n_scaffolds: Number of distinct scaffolds
            zipf_exponent: Frequency of scaffold k is proportional to k ** -exponent
        """
        cores = self.scaffold_cores()
        if not 1 <= n_scaffolds <= len(cores):
            raise ValueError(f"n_scaffolds must be between 1 and {len(cores)}")
        weights = [k ** -zipf_exponent for k in range(1, n_scaffolds + 1)]
        total = sum(weights)
        molecules: List[str] = []
        for core, weight in zip(cores, weights):
            for _ in range(int(round(size * weight / total))):
                side = self._pick(("C", "CC", "O", "N", "CO", "CCN", "F"))
                molecules.append(side + core)
        return molecules

    def generate_invalid(self, mutation: Optional[str] = None) -> Tuple[str, str, ErrorCategory]:
        """
        Generate a corrupted molecule with a known error category

        Args:
            mutation: Mutation class name; random when omitted

        Returns:
            (corrupted SMILES, mutation name, expected category)
        """
        names = sorted(MUTATIONS)
        name = mutation or names[self.fake.random_int(0, len(names) - 1)]
        apply, category = MUTATIONS[name]
        for _ in range(1000):
            mutated = apply(self, self.molecule_units())
            if mutated is not None:
                return mutated, name, category
        raise RuntimeError(f"Could not apply mutation {name}")

    def generate_mixed_corpus(self, size: int, invalid_rate: float) -> List[str]:
        """Valid molecules with a share of corrupted ones mixed in"""
        corpus = []
        for _ in range(size):
            if self.fake.random.random() < invalid_rate:
                corpus.append(self.generate_invalid()[0])
            else:
                corpus.append(self.generate_molecule())
        return corpus


def _delete_ring_digit(gen: SmilesCorpusGenerator, units: List[str]) -> Optional[str]:
    text = "".join(units)
    if text.endswith(")"):
        text += "C"
    digits = [i for i, ch in enumerate(text) if ch.isdigit()]
    if not digits:
        return None
    label = text[digits[gen.fake.random_int(0, len(digits) - 1)]]
    closing = [i for i in digits if text[i] == label][-1]
    return text[:closing] + text[closing + 1:]


def _drop_paren(gen: SmilesCorpusGenerator, units: List[str]) -> Optional[str]:
    text = "".join(units)
    if text.endswith(")"):
        text += "C"
    opens = [i for i, ch in enumerate(text) if ch == "("]
    if not opens:
        return None
    i = opens[gen.fake.random_int(0, len(opens) - 1)]
    return text[:i] + text[i + 1:]


def _extra_bond(gen: SmilesCorpusGenerator, units: List[str]) -> Optional[str]:
    text = "".join(units)
    if text.endswith(")"):
        text += "C"
    # The first atom is always an aliphatic carbon without ring labels
    return text[:1] + "(C)(C)(C)(C)" + text[1:]


def _shrink_aromatic(gen: SmilesCorpusGenerator, units: List[str]) -> Optional[str]:
    for k, unit in enumerate(units):
        for label in range(1, 10):
            if unit == BENZENE.format(label):
                shrunk = list(units)
                shrunk[k] = f"c{label}cc{label}"
                text = "".join(shrunk)
                return text + "C" if text.endswith(")") else text
    return None


MUTATIONS: Dict[str, Tuple[Callable[[SmilesCorpusGenerator, List[str]], Optional[str]], ErrorCategory]] = {
    "delete_ring_digit": (_delete_ring_digit, UNCLOSED_RINGS),
    "drop_paren": (_drop_paren, UNMATCHED_CLOSE_PAREN),
    "extra_bond": (_extra_bond, VALENCE),
    "shrink_aromatic": (_shrink_aromatic, KEKULIZATION),
}
