"""
Tokenizer tests
Golden tokenizations, BPE training against a brute-force trainer, framing,
vocabulary files and token statistics
"""

from collections import Counter

import numpy as np
import pytest

from smilesqa.smiles_graph import canonical_smiles
from smilesqa.taxonomy import DomainError, SmilesParseError, VocabularyError
from smilesqa.tokenizers import (
    SPECIAL_TOKENS,
    MergeList,
    Scheme,
    Tokenizer,
    Vocabulary,
    build_vocab,
    decode,
    encode,
    load_merges,
    load_vocab,
    save_merges,
    token_stats,
    tokenize,
    tokenize_ais,
    tokenize_bpe,
    tokenize_char,
    train_bpe,
    used_tokens,
    vocab_jaccard,
)
from utils.data_generator import SmilesCorpusGenerator

EXAMPLE = "CC1=C2[C@@H]3[C@H](C(=O)C1)[C@@]2(C)CCCC3(C)C"

EXAMPLE_AIS = (
    "[CH3;!R;C], [C;R;CCC], 1, =, [C;R;CCC], 2, [[C@H];R;CCC], 3, [[C@H];R;CCC], (, "
    "[C;R;CCO], (, =, [O;!R;C], ), [CH2;R;CC], 1, ), [[C@@];R;CCCC], 2, (, [CH3;!R;C], ), "
    "[CH2;R;CC], [CH2;R;CC], [CH2;R;CC], [C;R;CCCC], 3, (, [CH3;!R;C], ), [CH3;!R;C]"
).split(", ")


def _naive_bpe(corpus, target_vocab, n_specials=4):
    """Recount every pair after every merge"""
    words = Counter(line for line in corpus if line)
    sequences = {word: list(word) for word in words}
    known = {ch for word in words for ch in word}
    merges = []
    while len(known) + n_specials < target_vocab:
        counts = Counter()
        for word, seq in sequences.items():
            for pair in zip(seq, seq[1:]):
                counts[pair] += words[word]
        if not counts:
            break
        best = min(counts, key=lambda pair: (-counts[pair], pair))
        if counts[best] < 2:
            break
        merges.append(best)
        known.add(best[0] + best[1])
        for word, seq in sequences.items():
            out, i = [], 0
            while i < len(seq):
                if i + 1 < len(seq) and (seq[i], seq[i + 1]) == best:
                    out.append(seq[i] + seq[i + 1])
                    i += 2
                else:
                    out.append(seq[i])
                    i += 1
            sequences[word] = out
    return merges


def test_char_tokenization_of_example():
    tokens = tokenize_char(EXAMPLE).texts
    assert len(tokens) == 45
    assert tokens[:13] == ["C", "C", "1", "=", "C", "2", "[", "C", "@", "@", "H", "]", "3"]
    assert "".join(tokens) == EXAMPLE
    assert tokenize_char("").texts == []


def test_char_unknown_maps_to_unk():
    vocab = Vocabulary(["C", "O"])
    seq = tokenize_char("CNO", vocab)
    assert seq.texts == ["C", "[UNK]", "O"]
    assert seq.ids[1] == vocab.specials.unk


def test_ais_tokenization_of_example():
    assert tokenize_ais(EXAMPLE).texts == EXAMPLE_AIS


@pytest.mark.parametrize(
    "smiles,expected",
    [
        ("CCO", ["[CH3;!R;C]", "[CH2;!R;CO]", "[OH;!R;C]"]),
        ("C", ["[CH4;!R;]"]),
        ("c1ccccc1", ["[cH;R;cc]", "1", "[cH;R;cc]", "[cH;R;cc]", "[cH;R;cc]", "[cH;R;cc]", "[cH;R;cc]", "1"]),
    ],
)
def test_ais_small_molecules(smiles, expected):
    assert tokenize_ais(smiles).texts == expected


def test_ais_neighbor_field_ignores_branch_order():
    first = tokenize_ais("CC(O)N").texts
    second = tokenize_ais("CC(N)O").texts
    assert first[1] == second[1] == "[CH;!R;CNO]"


def test_ais_rejects_unparsable_text():
    with pytest.raises(SmilesParseError):
        tokenize_ais("C1CC")


def test_bpe_first_merge_breaks_ties_lexicographically():
    vocab, merges = train_bpe(["CCO", "CCO", "CN"], target_vocab=100)
    assert merges.pairs[0] == ("C", "C")
    assert "CC" in vocab


def test_bpe_single_pair():
    vocab, merges = train_bpe(["AB"] * 3, target_vocab=2 + len(SPECIAL_TOKENS) + 1)
    assert merges.pairs == (("A", "B"),)
    assert vocab.texts == {"A", "B", "AB"}


def _random_corpus(seed):
    """Even seeds draw molecules, odd seeds short strings over a few SMILES characters"""
    rng = np.random.default_rng(seed)
    size = int(rng.integers(10, 60))
    if seed % 2 == 0:
        return SmilesCorpusGenerator(seed=seed).generate_corpus(size, salt_rate=0.2)
    alphabet = list("CNOc1(=)")
    return ["".join(rng.choice(alphabet, size=int(rng.integers(1, 14)))) for _ in range(size)]


@pytest.mark.parametrize("seed", range(50))
def test_bpe_matches_brute_force_trainer(seed):
    corpus = _random_corpus(seed)
    floor = len(set("".join(corpus))) + len(SPECIAL_TOKENS)
    for target in (floor + 5, floor + 30):
        _, merges = train_bpe(corpus, target_vocab=target)
        assert list(merges.pairs) == _naive_bpe(corpus, target)


def test_bpe_is_deterministic():
    corpus = SmilesCorpusGenerator(seed=8).generate_corpus(100)
    assert train_bpe(corpus, 60) == train_bpe(list(reversed(corpus)), 60)


def test_bpe_larger_vocab_compresses_more():
    corpus = SmilesCorpusGenerator(seed=9).generate_corpus(150)
    floor = len(set("".join(corpus))) + len(SPECIAL_TOKENS)
    lengths = []
    for target in (floor + 5, floor + 20, floor + 60):
        vocab, merges = train_bpe(corpus, target)
        lengths.append(token_stats(vocab, merges, corpus, Scheme.BPE).mean_length)
    assert lengths[0] >= lengths[1] >= lengths[2]


def test_bpe_training_errors():
    with pytest.raises(DomainError):
        train_bpe(["", "  "], 50)
    with pytest.raises(ValueError):
        train_bpe(["CCO"], 5)


def test_bpe_segmentation_applies_merges_in_order():
    merges = MergeList((("C", "C"), ("CC", "O")))
    assert tokenize_bpe("CCC", MergeList((("C", "C"),))).texts == ["CC", "C"]
    assert tokenize_bpe("CCO", merges).texts == ["CCO"]
    with pytest.raises(VocabularyError):
        tokenize("CCO", Scheme.BPE)


def test_encode_framing_and_padding():
    vocab = build_vocab(["CCO"], Scheme.CHAR)
    seq = encode(vocab, None, "CCO", Scheme.CHAR, max_len=6)
    assert seq.texts == ["[BOS]", "C", "C", "O", "[EOS]", "[PAD]"]
    assert seq.ids[-1] == 0
    truncated = encode(vocab, None, "CCOCCO", Scheme.CHAR, max_len=4)
    assert truncated.texts == ["[BOS]", "C", "C", "[EOS]"]
    unpadded = encode(vocab, None, "CNO", Scheme.CHAR, max_len=4, pad=False)
    assert unpadded.texts == ["[BOS]", "C", "[UNK]", "O", "[EOS]"]
    with pytest.raises(ValueError):
        encode(vocab, None, "CCO", Scheme.CHAR, max_len=1)


def test_decode_drops_special_tokens():
    vocab = build_vocab(["CCO"], Scheme.CHAR)
    assert decode(vocab, encode(vocab, None, "CCO", Scheme.CHAR, max_len=10)) == "CCO"
    assert decode(vocab, [vocab.specials.pad] * 5) == ""
    with pytest.raises(VocabularyError):
        decode(vocab, [999])


def test_round_trip_every_scheme():
    corpus = SmilesCorpusGenerator(seed=17).generate_corpus(10_000, salt_rate=0.2)
    bpe_vocab, merges = train_bpe(corpus, 80)
    tokenizers = [
        Tokenizer(Scheme.CHAR, build_vocab(corpus, Scheme.CHAR)),
        Tokenizer(Scheme.AIS, build_vocab(corpus, Scheme.AIS)),
        Tokenizer(Scheme.BPE, bpe_vocab, merges),
    ]
    for smiles in corpus:
        for tokenizer in tokenizers:
            decoded = tokenizer.decode(tokenizer.encode(smiles, pad=False))
            if tokenizer.scheme is Scheme.AIS:
                assert canonical_smiles(decoded) == canonical_smiles(smiles), smiles
            else:
                assert decoded == smiles, (tokenizer.scheme, smiles)


def test_ais_round_trip_of_example():
    vocab = build_vocab([EXAMPLE], Scheme.AIS)
    decoded = decode(vocab, encode(vocab, None, EXAMPLE, Scheme.AIS))
    assert decoded == EXAMPLE
    assert canonical_smiles(decoded) == canonical_smiles(EXAMPLE)


def test_vocab_jaccard():
    assert vocab_jaccard(["C", "O"], ["O", "N"]) == pytest.approx(1 / 3)
    assert vocab_jaccard(["C"], ["N"]) == 0.0
    assert vocab_jaccard([], []) == 1.0
    vocab = Vocabulary(["C", "O"])
    assert vocab_jaccard(vocab, vocab) == 1.0
    assert vocab_jaccard(vocab, ["C", "O", "[PAD]"]) == 1.0


def test_vocabulary_file_round_trip(tmp_path):
    vocab, merges = train_bpe(SmilesCorpusGenerator(seed=1).generate_corpus(50), 60)
    vocab.save(tmp_path / "vocab.json")
    save_merges(merges, tmp_path / "merges.txt")
    loaded = load_vocab(tmp_path / "vocab.json")
    assert loaded == vocab
    assert sorted(loaded.tokens.values()) == list(range(len(vocab)))
    assert load_merges(tmp_path / "merges.txt") == merges


def test_vocabulary_file_errors(tmp_path):
    (tmp_path / "bad.json").write_text("not json", encoding="utf-8")
    with pytest.raises(VocabularyError):
        Vocabulary.load(tmp_path / "bad.json")
    (tmp_path / "gap.json").write_text('{"C": 0, "O": 2}', encoding="utf-8")
    with pytest.raises(VocabularyError):
        Vocabulary.load(tmp_path / "gap.json")
    (tmp_path / "merges.txt").write_text("C C\nCCO\n", encoding="utf-8")
    with pytest.raises(VocabularyError):
        MergeList.load(tmp_path / "merges.txt")


def test_mapping_vocabulary_appends_missing_specials():
    vocab = Vocabulary.from_mapping({"C": 0, "O": 1})
    assert vocab.id_of("C") == 0
    assert vocab.specials.pad == 2
    assert vocab.id_of("N") == vocab.specials.unk


def test_token_stats():
    stats = token_stats(None, None, ["CCO"], Scheme.CHAR)
    assert stats.mean_length == 3
    assert stats.rank_frequency == [("C", 2), ("O", 1)]
    bpe = token_stats(None, MergeList((("C", "C"),)), ["CCCC"], Scheme.BPE)
    assert bpe.mean_length == 2
    assert token_stats(None, None, [], Scheme.CHAR).sequences == 0


def test_used_tokens_of_fixed_vocabulary():
    vocab = Vocabulary(["C", "O", "N", "S"])
    assert used_tokens(vocab, None, ["CCO", "CO"], Scheme.CHAR) == {"C", "O"}
