"""
Synthetic corpus tests
Seeded generation, validity of generated molecules and the Zipf-shaped scaffold corpus
"""

import pytest

from smilesqa.scaffold import scaffold_counts, scaffold_of
from smilesqa.validator import validate
from utils.data_generator import RING_UNITS, SmilesCorpusGenerator


def test_same_seed_same_corpus():
    first = SmilesCorpusGenerator(seed=1).generate_mixed_corpus(50, invalid_rate=0.3)
    assert SmilesCorpusGenerator(seed=1).generate_mixed_corpus(50, invalid_rate=0.3) == first
    assert SmilesCorpusGenerator(seed=2).generate_mixed_corpus(50, invalid_rate=0.3) != first


def test_generated_molecules_are_valid():
    for smiles in SmilesCorpusGenerator(seed=3).generate_corpus(200, salt_rate=0.3):
        assert validate(smiles).valid, smiles


def test_salts_are_separate_fragments():
    corpus = SmilesCorpusGenerator(seed=4).generate_corpus(100, salt_rate=1.0)
    assert all(smiles.endswith((".[Na+]", ".[Cl-]")) for smiles in corpus)


def test_scaffold_cores_are_distinct():
    cores = SmilesCorpusGenerator.scaffold_cores()
    n = len(RING_UNITS)
    assert len(cores) == n + n * (n + 1) // 2
    assert len({scaffold_of(core).key for core in cores}) == len(cores)


def test_scaffold_corpus_frequencies_fall_with_rank():
    corpus = SmilesCorpusGenerator(seed=5).generate_scaffold_corpus(500, n_scaffolds=5, zipf_exponent=1.0)
    counts = scaffold_counts(corpus)
    ranked = [scaffold_of(core).key for core in SmilesCorpusGenerator.scaffold_cores()[:5]]
    # 500 / (1 + 1/2 + 1/3 + 1/4 + 1/5) rounds to 219
    assert [counts[key] for key in ranked] == [219, 109, 73, 55, 44]


def test_scaffold_corpus_rejects_bad_scaffold_count():
    with pytest.raises(ValueError):
        SmilesCorpusGenerator().generate_scaffold_corpus(10, n_scaffolds=0)


def test_unknown_mutation():
    with pytest.raises(KeyError):
        SmilesCorpusGenerator().generate_invalid("swap_atoms")
