"""
SMILES tokenizers
Character-level, atom-in-SMILES (AIS) and byte-pair-encoding (BPE) tokenization,
vocabularies with special tokens, framing to a fixed length and token statistics.
"""

import heapq
import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from types import MappingProxyType
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import numpy as np

from .config import DEFAULT_MAX_LEN
from .scaffold import ZipfFit, zipf_fit
from .smiles_graph import Chirality, MolecularGraph, parse_smiles
from .taxonomy import DomainError, VocabularyError

logger = logging.getLogger(__name__)

PAD, UNK, BOS, EOS = "[PAD]", "[UNK]", "[BOS]", "[EOS]"
SPECIAL_TOKENS: Tuple[str, ...] = (PAD, UNK, BOS, EOS)

# One match per SMILES token; bracket atoms and two-letter organic symbols stay whole
SMILES_TOKEN_PATTERN = re.compile(r"\[[^\]]*\]|Br|Cl|%\d{2}|[BCNOPSFI]|[bcnops]|[=#\-:/\\.()]|\d|.")

_AIS_PLAIN_CENTRAL = re.compile(r"^(Cl|Br|[BCNOPSFI]|[bcnops])(H\d*)?$")


class Scheme(str, Enum):
    CHAR = "char"
    AIS = "ais"
    BPE = "bpe"


@dataclass(frozen=True)
class SpecialIds:
    pad: int
    unk: int
    bos: int
    eos: int

    def as_set(self) -> Set[int]:
        return {self.pad, self.unk, self.bos, self.eos}


class Vocabulary:
    """
    Immutable token inventory with dense ids.

    The four special tokens always come first, in the order [PAD], [UNK], [BOS], [EOS],
    unless a loaded file fixes other ids for them.
    """

    def __init__(self, tokens: Iterable[str], specials: Sequence[str] = SPECIAL_TOKENS):
        if len(specials) != 4 or len(set(specials)) != 4:
            raise VocabularyError(f"Expected four distinct special tokens, got {list(specials)}")
        ordered: List[str] = []
        seen: Set[str] = set()
        for text in list(specials) + list(tokens):
            if text not in seen:
                seen.add(text)
                ordered.append(text)
        self._init(ordered, specials)

    def _init(self, ordered: List[str], specials: Sequence[str]) -> None:
        self._texts = tuple(ordered)
        self._ids = {text: i for i, text in enumerate(ordered)}
        self.special_texts = tuple(specials)
        self.specials = SpecialIds(*(self._ids[s] for s in specials))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, int], specials: Sequence[str] = SPECIAL_TOKENS) -> "Vocabulary":
        """
        Build from a token->id map. Ids must be dense; missing special tokens are
        appended after the last id.
        """
        ordered = [text for text, _ in sorted(mapping.items(), key=lambda item: item[1])]
        ids = sorted(mapping.values())
        if ids != list(range(len(ids))):
            raise VocabularyError("Vocabulary ids must be dense and start at 0")
        for special in specials:
            if special not in mapping:
                ordered.append(special)
        vocab = cls.__new__(cls)
        vocab._init(ordered, specials)
        return vocab

    @property
    def tokens(self) -> Mapping[str, int]:
        return MappingProxyType(self._ids)

    @property
    def texts(self) -> Set[str]:
        """Token texts without the special tokens"""
        return set(self._texts) - set(self.special_texts)

    def __len__(self) -> int:
        return len(self._texts)

    def __contains__(self, text: object) -> bool:
        return text in self._ids

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._texts == other._texts and self.specials == other.specials

    def __repr__(self) -> str:
        return f"Vocabulary(size={len(self)})"

    def id_of(self, text: str) -> int:
        return self._ids.get(text, self.specials.unk)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._texts):
            raise VocabularyError(f"Unknown token id {token_id}")
        return self._texts[token_id]

    def to_dict(self) -> Dict[str, object]:
        return {"tokens": dict(self._ids), "specials": list(self.special_texts)}

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")

    @classmethod
    def from_dict(cls, data: Mapping[str, object]) -> "Vocabulary":
        specials = tuple(data.get("specials") or SPECIAL_TOKENS)
        if "tokens" in data and isinstance(data["tokens"], Mapping):
            mapping = data["tokens"]
        else:
            mapping = {k: v for k, v in data.items() if k != "specials"}
        if not all(isinstance(v, int) for v in mapping.values()):
            raise VocabularyError("Vocabulary ids must be integers")
        return cls.from_mapping(mapping, specials)

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocabulary":
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise VocabularyError(f"{path}: not a JSON vocabulary ({exc})") from exc
        if not isinstance(data, dict):
            raise VocabularyError(f"{path}: expected a JSON object")
        return cls.from_dict(data)


@dataclass(frozen=True)
class MergeList:
    pairs: Tuple[Tuple[str, str], ...] = ()
    _segments: Dict[str, Tuple[str, ...]] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((left, right) for left, right in self.pairs))
        ranks: Dict[Tuple[str, str], int] = {}
        for rank, pair in enumerate(self.pairs):
            ranks.setdefault(tuple(pair), rank)
        object.__setattr__(self, "ranks", ranks)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def segment(self, text: str) -> List[str]:
        """Split text into BPE tokens, merging the lowest-ranked adjacent pair first"""
        cached = self._segments.get(text)
        if cached is not None:
            return list(cached)
        ranks = self.ranks
        parts = list(text)
        while len(parts) > 1:
            best = None
            best_rank = None
            for pair in zip(parts, parts[1:]):
                rank = ranks.get(pair)
                if rank is not None and (best_rank is None or rank < best_rank):
                    best, best_rank = pair, rank
            if best is None:
                break
            parts = _merge_pair(parts, best, best[0] + best[1])
        if len(self._segments) < 200_000:
            self._segments[text] = tuple(parts)
        return parts

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text("".join(f"{left} {right}\n" for left, right in self.pairs), encoding="utf-8")

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MergeList":
        pairs = []
        for number, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip() or line.startswith("#version"):
                continue
            parts = line.split(" ")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise VocabularyError(f"{path}:{number}: expected 'left right', got {line!r}")
            pairs.append((parts[0], parts[1]))
        return cls(tuple(pairs))


@dataclass
class TokenSequence:
    ids: List[int] = field(default_factory=list)
    texts: List[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.texts)


def _merge_pair(parts: List[str], pair: Tuple[str, str], merged: str) -> List[str]:
    out: List[str] = []
    i = 0
    n = len(parts)
    while i < n:
        if i + 1 < n and parts[i] == pair[0] and parts[i + 1] == pair[1]:
            out.append(merged)
            i += 2
        else:
            out.append(parts[i])
            i += 1
    return out


def _with_ids(texts: List[str], vocab: Optional[Vocabulary]) -> TokenSequence:
    if vocab is None:
        return TokenSequence([], texts)
    ids = [vocab.id_of(text) for text in texts]
    return TokenSequence(ids, [vocab.token_of(i) for i in ids])


# ---------------------------------------------------------------------------
# Character level
# ---------------------------------------------------------------------------


def tokenize_char(text: str, vocab: Optional[Vocabulary] = None) -> TokenSequence:
    """One token per character; with a vocabulary, unknown characters become [UNK]"""
    return _with_ids(list(text), vocab)


# ---------------------------------------------------------------------------
# Atom-in-SMILES
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AisToken:
    central: str
    ring_flag: str
    neighbors: str

    def render(self) -> str:
        return f"[{self.central};{self.ring_flag};{self.neighbors}]"

    @classmethod
    def parse(cls, text: str) -> "AisToken":
        if not is_ais_token(text):
            raise VocabularyError(f"Not an atom-in-SMILES token: {text!r}")
        central, ring_flag, neighbors = text[1:-1].split(";")
        return cls(central, ring_flag, neighbors)

    @property
    def smiles_atom(self) -> str:
        """SMILES text of the central atom; plain atoms drop their hydrogen count"""
        if self.central.startswith("["):
            return self.central
        match = _AIS_PLAIN_CENTRAL.match(self.central)
        if match is None:
            raise VocabularyError(f"Unrecognized central atom {self.central!r}")
        return match.group(1)


def is_ais_token(text: str) -> bool:
    return text.startswith("[") and text.endswith("]") and text.count(";") == 2


def _is_atom_piece(piece: str) -> bool:
    return piece[0] == "[" or piece[0].isalpha()


def _odd_creation_parity(graph: MolecularGraph, i: int) -> bool:
    """
    Whether the written neighbor order of atom i is an odd permutation of the order
    in which its bonds were created (ring-opening digits count when the ring closes).
    """
    created = {atom: k for k, atom in enumerate(graph.creation_order[i])}
    perm = [created[atom] for atom in graph.written_order[i]]
    inversions = sum(1 for x in range(len(perm)) for y in range(x + 1, len(perm)) if perm[x] > perm[y])
    return inversions % 2 == 1


def _ais_central(graph: MolecularGraph, i: int) -> str:
    atom = graph.atoms[i]
    hydrogens = graph.hydrogens[i]
    h_text = "" if hydrogens == 0 else ("H" if hydrogens == 1 else f"H{hydrogens}")
    if not atom.bracketed:
        return f"{atom.symbol}{h_text}"
    chirality = atom.chirality
    if chirality is not Chirality.NONE and _odd_creation_parity(graph, i):
        chirality = chirality.inverted()
    charge = ""
    if atom.formal_charge:
        sign = "+" if atom.formal_charge > 0 else "-"
        charge = sign if abs(atom.formal_charge) == 1 else f"{sign}{abs(atom.formal_charge)}"
    isotope = "" if atom.isotope is None else str(atom.isotope)
    atom_class = "" if atom.atom_class is None else f":{atom.atom_class}"
    return f"[{isotope}{atom.symbol}{chirality.value}{h_text}{charge}{atom_class}]"


def ais_token(graph: MolecularGraph, i: int) -> AisToken:
    neighbors = "".join(sorted(graph.atoms[j].symbol for j, _ in graph.neighbors[i]))
    return AisToken(_ais_central(graph, i), "R" if graph.atoms[i].in_ring else "!R", neighbors)


def lex_smiles(text: str) -> List[str]:
    """Split SMILES text into atom and structural tokens"""
    return SMILES_TOKEN_PATTERN.findall(text)


def tokenize_ais(text: str, vocab: Optional[Vocabulary] = None) -> TokenSequence:
    """
    Replace each atom by its environment token [central;R|!R;neighbors].

    Ring digits, parentheses, bond symbols and dots stay standalone tokens.
    Raises the categorized parse error when text does not parse.
    """
    text = text.strip()
    if not text:
        return TokenSequence()
    graph = parse_smiles(text)
    texts: List[str] = []
    atom = 0
    for piece in lex_smiles(text):
        if _is_atom_piece(piece):
            texts.append(ais_token(graph, atom).render())
            atom += 1
        else:
            texts.append(piece)
    return _with_ids(texts, vocab)


def decode_ais(texts: Sequence[str]) -> str:
    """Rebuild SMILES from AIS token texts, restoring the written chirality tags"""
    pieces = [AisToken.parse(t).smiles_atom if is_ais_token(t) else t for t in texts]
    smiles = "".join(pieces)
    if "@" not in smiles:
        return smiles
    graph = parse_smiles(smiles)
    atom = 0
    for k, piece in enumerate(pieces):
        if not _is_atom_piece(piece):
            continue
        tag = graph.atoms[atom].chirality
        if tag is not Chirality.NONE and _odd_creation_parity(graph, atom):
            pieces[k] = piece.replace(tag.value, tag.inverted().value, 1)
        atom += 1
    return "".join(pieces)


# ---------------------------------------------------------------------------
# Byte-pair encoding
# ---------------------------------------------------------------------------


def train_bpe(
    corpus: Iterable[str], target_vocab: int, specials: Sequence[str] = SPECIAL_TOKENS
) -> Tuple[Vocabulary, MergeList]:
    """
    Learn BPE merges over raw characters.

    The most frequent adjacent pair is merged until the vocabulary reaches
    target_vocab or no pair occurs at least twice. Count ties go to the
    lexicographically smallest (left, right) pair.

    Args:
        corpus: SMILES strings; identical lines are counted with multiplicity
        target_vocab: Vocabulary size including the special tokens
        specials: Special token texts

    Returns:
        The vocabulary and the merges in learned order
    """
    words = Counter(line.strip() for line in corpus)
    words.pop("", None)
    if not words:
        raise DomainError("Cannot train BPE on an empty corpus")
    alphabet = sorted({ch for word in words for ch in word})
    floor = len(alphabet) + len(specials)
    if target_vocab < floor:
        raise ValueError(f"target_vocab {target_vocab} is below alphabet plus specials ({floor})")

    entries = sorted(words.items())
    sequences = [list(word) for word, _ in entries]
    weights = [count for _, count in entries]
    counts: Dict[Tuple[str, str], int] = defaultdict(int)
    holders: Dict[Tuple[str, str], Set[int]] = defaultdict(set)
    for idx, seq in enumerate(sequences):
        for pair in zip(seq, seq[1:]):
            counts[pair] += weights[idx]
            holders[pair].add(idx)
    heap = [(-count, pair) for pair, count in counts.items()]
    heapq.heapify(heap)

    known = set(alphabet)
    learned: List[str] = []
    merges: List[Tuple[str, str]] = []
    while len(known) + len(specials) < target_vocab:
        best = None
        while heap:
            negative, pair = heapq.heappop(heap)
            if counts.get(pair) == -negative:
                best = pair
                break
        if best is None or counts[best] < 2:
            break
        merged = best[0] + best[1]
        merges.append(best)
        if len(merges) % 1000 == 0:
            logger.debug("BPE merge %d: %s + %s (count %d)", len(merges), best[0], best[1], counts[best])
        if merged not in known:
            known.add(merged)
            learned.append(merged)
        touched: Set[Tuple[str, str]] = set()
        for idx in sorted(holders.pop(best, ())):
            seq = sequences[idx]
            weight = weights[idx]
            for pair in zip(seq, seq[1:]):
                counts[pair] -= weight
                touched.add(pair)
            seq = _merge_pair(seq, best, merged)
            sequences[idx] = seq
            for pair in zip(seq, seq[1:]):
                counts[pair] += weight
                holders[pair].add(idx)
                touched.add(pair)
        for pair in touched:
            if counts[pair] > 0:
                heapq.heappush(heap, (-counts[pair], pair))
            else:
                del counts[pair]
    logger.info("Learned %d merges, vocabulary size %d", len(merges), len(known) + len(specials))
    return Vocabulary(alphabet + learned, specials), MergeList(tuple(merges))


def tokenize_bpe(text: str, merges: MergeList, vocab: Optional[Vocabulary] = None) -> TokenSequence:
    return _with_ids(merges.segment(text), vocab)


# ---------------------------------------------------------------------------
# Scheme-generic operations
# ---------------------------------------------------------------------------


def tokenize(text: str, scheme: Union[Scheme, str], merges: Optional[MergeList] = None) -> List[str]:
    scheme = Scheme(scheme)
    if scheme is Scheme.CHAR:
        return list(text)
    if scheme is Scheme.AIS:
        return tokenize_ais(text).texts
    if merges is None:
        raise VocabularyError("The bpe scheme needs a merge list")
    return merges.segment(text)


def encode(
    vocab: Vocabulary,
    merges: Optional[MergeList],
    text: str,
    scheme: Union[Scheme, str] = Scheme.CHAR,
    max_len: int = DEFAULT_MAX_LEN,
    pad: bool = True,
) -> TokenSequence:
    """
    Tokenize and frame a SMILES string as [BOS] tokens [EOS].

    With pad=True the result has exactly max_len ids: content is truncated so that
    [BOS] and [EOS] survive, and [PAD] fills the remainder.
    """
    ids = [vocab.id_of(t) for t in tokenize(text.strip(), scheme, merges)]
    if pad:
        if max_len < 2:
            raise ValueError("max_len must leave room for [BOS] and [EOS]")
        ids = ids[: max_len - 2]
    framed = [vocab.specials.bos] + ids + [vocab.specials.eos]
    if pad:
        framed += [vocab.specials.pad] * (max_len - len(framed))
    return TokenSequence(framed, [vocab.token_of(i) for i in framed])


def decode(vocab: Vocabulary, seq: Union[TokenSequence, Sequence[int]], scheme: Optional[Union[Scheme, str]] = None) -> str:
    """
    Concatenate token texts without special tokens.

    AIS sequences (given explicitly or recognized by their tokens) are rebuilt atom
    by atom from the central fields.
    """
    ids = seq.ids if isinstance(seq, TokenSequence) else list(seq)
    special = vocab.specials.as_set()
    texts = [vocab.token_of(i) for i in ids]
    texts = [t for i, t in zip(ids, texts) if i not in special]
    if scheme is not None:
        scheme = Scheme(scheme)
    if scheme is Scheme.AIS or (scheme is None and any(is_ais_token(t) for t in texts)):
        return decode_ais(texts)
    return "".join(texts)


def build_vocab(
    corpus: Iterable[str],
    scheme: Union[Scheme, str],
    merges: Optional[MergeList] = None,
    specials: Sequence[str] = SPECIAL_TOKENS,
) -> Vocabulary:
    """Vocabulary of every token the scheme produces on the corpus, sorted by text"""
    seen: Set[str] = set()
    for line in corpus:
        line = line.strip()
        if line:
            seen.update(tokenize(line, scheme, merges))
    return Vocabulary(sorted(seen), specials)


def used_tokens(
    vocab: Vocabulary, merges: Optional[MergeList], corpus: Iterable[str], scheme: Union[Scheme, str]
) -> Set[str]:
    """Vocabulary tokens that actually occur when tokenizing the corpus"""
    found: Set[str] = set()
    for line in corpus:
        line = line.strip()
        if line:
            found.update(t for t in tokenize(line, scheme, merges) if t in vocab)
    return found - set(vocab.special_texts)


def vocab_jaccard(a: Union[Vocabulary, Iterable[str]], b: Union[Vocabulary, Iterable[str]]) -> float:
    """|A∩B| / |A∪B| over token texts, special tokens excluded; two empty sets give 1.0"""
    left = a.texts if isinstance(a, Vocabulary) else set(a) - set(SPECIAL_TOKENS)
    right = b.texts if isinstance(b, Vocabulary) else set(b) - set(SPECIAL_TOKENS)
    union = left | right
    if not union:
        return 1.0
    return len(left & right) / len(union)


@dataclass
class TokenStats:
    sequences: int
    mean_length: float
    median_length: float
    rank_frequency: List[Tuple[str, int]]

    def zipf(self) -> ZipfFit:
        return zipf_fit(dict(self.rank_frequency))

    def to_dict(self) -> Dict[str, object]:
        return {
            "sequences": self.sequences,
            "mean_length": self.mean_length,
            "median_length": self.median_length,
            "distinct_tokens": len(self.rank_frequency),
        }


def token_stats(
    vocab: Optional[Vocabulary],
    merges: Optional[MergeList],
    corpus: Iterable[str],
    scheme: Union[Scheme, str],
) -> TokenStats:
    """
    Tokenized length statistics and the rank-frequency table of tokens.

    Lengths exclude [BOS]/[EOS]/[PAD]. With a vocabulary, unknown tokens are
    counted as [UNK].
    """
    lengths: List[int] = []
    frequency: Counter = Counter()
    for line in corpus:
        line = line.strip()
        if not line:
            continue
        texts = tokenize(line, scheme, merges)
        if vocab is not None:
            texts = [t if t in vocab else vocab.special_texts[1] for t in texts]
        lengths.append(len(texts))
        frequency.update(texts)
    ranked = sorted(frequency.items(), key=lambda item: (-item[1], item[0]))
    if not lengths:
        return TokenStats(0, 0.0, 0.0, ranked)
    return TokenStats(len(lengths), float(np.mean(lengths)), float(np.median(lengths)), ranked)


class Tokenizer:
    """A scheme bound to its vocabulary (and merges for BPE)"""

    def __init__(
        self,
        scheme: Union[Scheme, str],
        vocab: Vocabulary,
        merges: Optional[MergeList] = None,
        max_len: int = DEFAULT_MAX_LEN,
    ):
        self.scheme = Scheme(scheme)
        if self.scheme is Scheme.BPE and merges is None:
            raise VocabularyError("The bpe scheme needs a merge list")
        self.vocab = vocab
        self.merges = merges
        self.max_len = max_len

    @classmethod
    def from_files(
        cls, scheme: Union[Scheme, str], vocab_path: Union[str, Path], merges_path: Optional[Union[str, Path]] = None
    ) -> "Tokenizer":
        merges = MergeList.load(merges_path) if merges_path else None
        return cls(scheme, Vocabulary.load(vocab_path), merges)

    def tokenize(self, text: str) -> List[str]:
        return tokenize(text, self.scheme, self.merges)

    def encode(self, text: str, pad: bool = True) -> TokenSequence:
        return encode(self.vocab, self.merges, text, self.scheme, self.max_len, pad)

    def decode(self, seq: Union[TokenSequence, Sequence[int]]) -> str:
        return decode(self.vocab, seq, self.scheme)

    def mean_length(self, corpus: Iterable[str]) -> float:
        return token_stats(self.vocab, self.merges, corpus, self.scheme).mean_length


def load_vocab(path: Union[str, Path], specials: Optional[Sequence[str]] = None) -> Vocabulary:
    """Read a vocabulary file; `specials` overrides the special tokens it names"""
    vocab = Vocabulary.load(path)
    if specials is None or tuple(specials) == vocab.special_texts:
        return vocab
    return Vocabulary.from_mapping(dict(vocab.tokens), specials)


def save_merges(merges: MergeList, path: Union[str, Path]) -> None:
    merges.save(path)


def load_merges(path: Union[str, Path]) -> MergeList:
    return MergeList.load(path)
