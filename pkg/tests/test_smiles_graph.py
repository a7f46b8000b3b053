"""
Molecular graph tests
Covers reading, hydrogen bookkeeping, kekulization, canonical keys and corpus
standardization
"""

import time

import pytest

from smilesqa.smiles_graph import (
    BondOrder,
    Chirality,
    canonical_key,
    canonical_smiles,
    implicit_hydrogens,
    induced_subgraph,
    kekulize,
    largest_fragment,
    parse_smiles,
    standardize_corpus,
    to_smiles,
)
from smilesqa.taxonomy import KekulizationFailure, SmilesSyntaxError, UNCLOSED_RINGS
from smilesqa.tokenizers import tokenize_char
from smilesqa.validator import error_profile
from utils.data_generator import SmilesCorpusGenerator


def _has_perfect_matching(graph):
    """Brute-force search for a double-bond assignment over aromatic bonds"""
    needy = {i for i, d in enumerate(graph.pi_demand) if d}
    edges = [
        (b.a, b.b) for b in graph.bonds if b.aromatic and b.a in needy and b.b in needy
    ]

    def search(free):
        if not free:
            return True
        first = min(free)
        for a, b in edges:
            if first in (a, b):
                other = b if a == first else a
                if other in free and search(free - {first, other}):
                    return True
        return False

    return search(frozenset(needy))


def test_parse_ethanol():
    graph = parse_smiles("CCO")
    assert [a.element for a in graph.atoms] == ["C", "C", "O"]
    assert len(graph.bonds) == 2
    assert implicit_hydrogens(graph) == [3, 2, 1]


def test_parse_bracket_atom_fields():
    graph = parse_smiles("[13CH3:7][NH3+]")
    carbon, nitrogen = graph.atoms
    assert carbon.isotope == 13
    assert carbon.atom_class == 7
    assert nitrogen.formal_charge == 1
    assert implicit_hydrogens(graph) == [3, 3]


def test_parse_chirality_and_rings():
    graph = parse_smiles("C[C@@H]1CCO1")
    assert graph.atoms[1].chirality is Chirality.CLOCKWISE
    assert all(graph.atoms[i].in_ring for i in range(1, 5))
    assert not graph.atoms[0].in_ring


def test_aromatic_hydrogens():
    assert implicit_hydrogens(parse_smiles("c1ccccc1C")) == [1, 1, 1, 1, 1, 0, 3]
    assert implicit_hydrogens(parse_smiles("c1cc[nH]c1")) == [1, 1, 1, 1, 1]


def test_parse_error_carries_category():
    with pytest.raises(SmilesSyntaxError) as info:
        parse_smiles("C1CC")
    assert info.value.category is UNCLOSED_RINGS
    assert "1 ring openings have not been closed" in str(info.value)


@pytest.mark.parametrize(
    "smiles,doubles",
    [
        ("c1ccccc1", 3),
        ("c1ccc2ccccc2c1", 5),
        ("c1ccncc1", 3),
        ("c1cc[nH]c1", 2),
        ("c1ccoc1", 2),
        ("c1ccsc1", 2),
        ("c1cc2cccc2c1", 4),
        ("c1ccccccc1", 4),
    ],
)
def test_kekulize_double_bond_count(smiles, doubles):
    graph = kekulize(parse_smiles(smiles))
    assert graph.kekulized
    assert sum(1 for b in graph.bonds if b.order is BondOrder.DOUBLE) == doubles
    # every atom that needed a double bond got exactly one
    for i, demand in enumerate(parse_smiles(smiles).pi_demand):
        touching = [b for b in graph.bonds if i in (b.a, b.b) and b.order is BondOrder.DOUBLE]
        assert len(touching) == demand


@pytest.mark.parametrize("smiles", ["c1cc1", "c1cccc1", "c1ccccc1c"])
def test_kekulize_failure(smiles):
    with pytest.raises(KekulizationFailure):
        kekulize(parse_smiles(smiles))


def test_kekulize_agrees_with_brute_force():
    generator = SmilesCorpusGenerator(seed=7)
    samples = generator.generate_corpus(150)
    samples += [generator.generate_invalid("shrink_aromatic")[0] for _ in range(20)]
    for smiles in samples:
        graph = parse_smiles(smiles)
        expected = _has_perfect_matching(graph)
        try:
            kekulize(graph)
            found = True
        except KekulizationFailure:
            found = False
        assert found == expected, smiles


@pytest.mark.parametrize(
    "a,b",
    [
        ("CCO", "OCC"),
        ("Cc1ccccc1", "c1ccccc1C"),
        ("OC1CCCCC1", "C1CCC(O)CC1"),
        ("CC(=O)O", "OC(C)=O"),
        ("[Na+].[Cl-]", "[Cl-].[Na+]"),
        ("C[C@H](O)N", "C[C@@H](N)O"),
        ("C[C@H](O)N", "N[C@@H](O)C"),
        ("C[C@H](O)N", "[C@@H](C)(O)N"),
    ],
)
def test_canonical_key_same_molecule(a, b):
    assert canonical_smiles(a) == canonical_smiles(b)


@pytest.mark.parametrize(
    "a,b",
    [
        ("CCO", "CCN"),
        ("C[C@H](O)N", "C[C@@H](O)N"),
        ("CC(C)O", "CCCO"),
        ("[13CH4]", "C"),
    ],
)
def test_canonical_key_different_molecules(a, b):
    assert canonical_smiles(a) != canonical_smiles(b)


def test_canonical_key_is_a_fixed_point():
    for smiles in SmilesCorpusGenerator(seed=3).generate_corpus(60, salt_rate=0.3):
        key = canonical_smiles(smiles)
        assert canonical_smiles(key) == key


def test_rewriting_from_any_root_keeps_key():
    for smiles in SmilesCorpusGenerator(seed=11).generate_corpus(40):
        graph = parse_smiles(smiles)
        key = canonical_key(graph)
        for root in range(0, len(graph.atoms), 3):
            assert canonical_smiles(to_smiles(graph, root=root)) == key, (smiles, root)


def test_to_smiles_flips_tag_when_neighbors_are_reordered():
    graph = parse_smiles("C[C@H](O)N")
    # ranks that visit N before O from the stereo centre
    text = to_smiles(graph, order=[0, 1, 3, 2])
    assert text == "C[C@@H](N)O"


def test_induced_subgraph_restores_hydrogens():
    graph = parse_smiles("c1ccccc1CO")
    ring = induced_subgraph(graph, range(6))
    assert canonical_key(ring) == canonical_smiles("c1ccccc1")
    pyrrole = parse_smiles("Cn1cccc1")
    core = induced_subgraph(pyrrole, range(1, 6))
    assert canonical_key(core) == canonical_smiles("c1cc[nH]c1")


def test_largest_fragment():
    fragment = largest_fragment(parse_smiles("[Na+].CCC(=O)[O-]"))
    assert canonical_key(fragment) == canonical_smiles("CCC(=O)[O-]")


def test_standardize_corpus_report():
    lines = ["CCO", "OCC", "C1CC", "c1cc1", "", "# comment", "CCN.[Cl-]"]
    kept, report = standardize_corpus(lines)
    assert kept == [canonical_smiles("CCO"), canonical_smiles("CCN")]
    assert report.to_dict() == {
        "input_count": 5,
        "kept": 2,
        "dropped_parse": 1,
        "dropped_kekulize": 1,
        "dropped_duplicate": 1,
    }


def test_standardize_corpus_ignores_worker_count():
    corpus = SmilesCorpusGenerator(seed=5).generate_mixed_corpus(80, invalid_rate=0.2)
    single = standardize_corpus(corpus, workers=1)
    threaded = standardize_corpus(corpus, workers=4)
    assert single[0] == threaded[0]
    assert single[1] == threaded[1]


def test_largest_fragment_tie_goes_to_smallest_key():
    fragment = largest_fragment(parse_smiles("OO.CC"))
    assert canonical_key(fragment) == canonical_smiles("CC")


@pytest.mark.parametrize(
    "smiles,same_as",
    [("C1.C1", "CC"), ("C1CC.C1", "CCCC"), ("C1C2.C1C2", "C1CCC1"), ("OC1.C1N", "OCCN")],
)
def test_ring_label_across_dot_joins_fragments(smiles, same_as):
    graph = parse_smiles(smiles)
    assert len(graph.components) == 1
    assert canonical_key(graph) == canonical_smiles(same_as)


def test_ring_flags_for_labels_across_dot():
    chain = parse_smiles("C1CC.C1")
    assert not any(bond.ring_bond for bond in chain.bonds)
    assert not any(atom.in_ring for atom in chain.atoms)
    ring = parse_smiles("C1C2.C1C2")
    assert all(bond.ring_bond for bond in ring.bonds)
    assert all(atom.in_ring for atom in ring.atoms)


def test_standardize_joins_fragments_linked_by_ring_label():
    kept, report = standardize_corpus(["C1.C1", "CC", "C1CC.C1"])
    assert kept == [canonical_smiles("CC"), canonical_smiles("CCCC")]
    assert report.dropped_duplicate == 1


@pytest.mark.parametrize("smiles", ["c1ccccc1", "c1ccccc1-c1ccccc1", "C1CCCCC1", "c1ccc2ccccc2c1", "C12C3C4C1C5C2C3C45"])
def test_symmetric_molecules_key_from_any_root(smiles):
    graph = parse_smiles(smiles)
    key = canonical_key(graph)
    for root in range(len(graph.atoms)):
        assert canonical_smiles(to_smiles(graph, root=root)) == key


@pytest.mark.slow
def test_hundred_thousand_lines_within_a_minute():
    corpus = SmilesCorpusGenerator(seed=23).generate_mixed_corpus(100_000, invalid_rate=0.1)
    started = time.perf_counter()
    kept, report = standardize_corpus(corpus)
    profile = error_profile(corpus)
    tokens = sum(len(tokenize_char(line).texts) for line in corpus)
    elapsed = time.perf_counter() - started
    assert report.input_count == profile.total == len(corpus)
    assert tokens == sum(len(line) for line in corpus)
    assert elapsed < 60.0
