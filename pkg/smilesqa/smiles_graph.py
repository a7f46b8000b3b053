"""
SMILES molecular graphs
Reads SMILES text into an immutable graph, assigns Kekulé bond orders to aromatic
systems, writes graphs back to SMILES and derives canonical keys.
"""

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx

from .taxonomy import (
    AROMATIC_ELIGIBLE,
    ATOM_AFTER_BOND,
    ATOM_BEFORE_BOND,
    ATOM_BEFORE_OPEN_PAREN,
    ATOM_BEFORE_RING_BOND,
    ATOMIC_NUMBER,
    BOND_BEFORE_OPEN_PAREN,
    DUPLICATE_BOND,
    ELEMENT_REQUIRED,
    ELEMENTS,
    EMPTY_BRANCH,
    FINAL_BRANCH_PARENTHESIZED,
    ILLEGAL_CHARACTER,
    MISSING_CLOSE_BRACKET,
    MULTIPLE_BOND_SYMBOLS,
    ORGANIC_SUBSET,
    RING_CLOSURE_AFTER_ATOM,
    RING_CLOSURE_IN_PARENS,
    RING_OPEN_CLOSE_SAME_ATOM,
    UNCLOSED_BRANCHES,
    UNCLOSED_RINGS,
    UNCLOSED_SQUARE_BRACKET,
    UNMATCHED_CLOSE_PAREN,
    VALENCE_TABLE,
    KekulizationFailure,
    SmilesParseError,
    SmilesSyntaxError,
    ValenceError,
    ValenceTable,
)

logger = logging.getLogger(__name__)

# Tie-breaking leaves explored per component before only the first candidate is followed
CANONICAL_LEAF_BUDGET = 2000


class BondOrder(str, Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"

    @property
    def valence(self) -> int:
        return _BOND_VALENCE[self]


_BOND_VALENCE = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 1,
}

BOND_SYMBOLS: Dict[str, BondOrder] = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}


class Chirality(str, Enum):
    NONE = ""
    COUNTERCLOCKWISE = "@"
    CLOCKWISE = "@@"

    def inverted(self) -> "Chirality":
        if self is Chirality.COUNTERCLOCKWISE:
            return Chirality.CLOCKWISE
        if self is Chirality.CLOCKWISE:
            return Chirality.COUNTERCLOCKWISE
        return self


@dataclass(frozen=True)
class Atom:
    element: str
    aromatic: bool = False
    formal_charge: int = 0
    # None for atoms written without brackets; their hydrogens are implicit
    explicit_h_count: Optional[int] = None
    chirality: Chirality = Chirality.NONE
    isotope: Optional[int] = None
    atom_class: Optional[int] = None
    in_ring: bool = False
    position: int = field(default=-1, compare=False)

    @property
    def bracketed(self) -> bool:
        return self.explicit_h_count is not None

    @property
    def symbol(self) -> str:
        return self.element.lower() if self.aromatic else self.element

    @property
    def atomic_number(self) -> int:
        return ATOMIC_NUMBER[self.element]

    def ring_member(self) -> "Atom":
        return Atom(
            self.element,
            self.aromatic,
            self.formal_charge,
            self.explicit_h_count,
            self.chirality,
            self.isotope,
            self.atom_class,
            True,
            self.position,
        )


@dataclass(frozen=True)
class Bond:
    a: int
    b: int
    order: BondOrder
    # written or read as aromatic; kept after kekulization assigns single/double
    aromatic: bool = False
    ring_bond: bool = False

    def other(self, atom: int) -> int:
        return self.b if atom == self.a else self.a

    def ring_member(self) -> "Bond":
        return Bond(self.a, self.b, self.order, self.aromatic, True)

    def with_order(self, order: BondOrder) -> "Bond":
        return Bond(self.a, self.b, order, self.aromatic, self.ring_bond)


@dataclass(frozen=True)
class MolecularGraph:
    atoms: Tuple[Atom, ...]
    bonds: Tuple[Bond, ...]
    source: str = ""
    kekulized: bool = False
    # Neighbor order as written and in bond-creation order; only set by the reader
    written_order: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False)
    creation_order: Tuple[Tuple[int, ...], ...] = field(default=(), compare=False)

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def neighbors(self) -> List[List[Tuple[int, int]]]:
        """(neighbor atom, bond index) pairs per atom"""
        table: List[List[Tuple[int, int]]] = [[] for _ in self.atoms]
        for k, bond in enumerate(self.bonds):
            table[bond.a].append((bond.b, k))
            table[bond.b].append((bond.a, k))
        return table

    @cached_property
    def bond_lookup(self) -> Dict[Tuple[int, int], int]:
        lookup = {}
        for k, bond in enumerate(self.bonds):
            lookup[(bond.a, bond.b)] = k
            lookup[(bond.b, bond.a)] = k
        return lookup

    @cached_property
    def bond_valence(self) -> List[int]:
        """Sum of bond orders per atom, aromatic bonds counted once"""
        totals = [0] * len(self.atoms)
        for bond in self.bonds:
            share = 1 if bond.aromatic else bond.order.valence
            totals[bond.a] += share
            totals[bond.b] += share
        return totals

    @cached_property
    def base_valence(self) -> List[int]:
        return [used + (atom.explicit_h_count or 0) for atom, used in zip(self.atoms, self.bond_valence)]

    @cached_property
    def _has_double(self) -> List[bool]:
        flags = [False] * len(self.atoms)
        for bond in self.bonds:
            if not bond.aromatic and bond.order is BondOrder.DOUBLE:
                flags[bond.a] = flags[bond.b] = True
        return flags

    @cached_property
    def pi_demand(self) -> List[int]:
        """1 for every aromatic atom that must receive a double bond inside its ring system"""
        return [
            needs_double_bond(atom, base, double)
            for atom, base, double in zip(self.atoms, self.base_valence, self._has_double)
        ]

    @cached_property
    def plain_hydrogens(self) -> List[int]:
        """Hydrogens each atom would carry if written without brackets"""
        counts = []
        for atom, used, double in zip(self.atoms, self.bond_valence, self._has_double):
            used += needs_double_bond(atom, used, double)
            counts.append(VALENCE_TABLE.implicit_hydrogens(atom.element, atom.formal_charge, used))
        return counts

    @cached_property
    def hydrogens(self) -> List[int]:
        return [
            atom.explicit_h_count if atom.bracketed else plain
            for atom, plain in zip(self.atoms, self.plain_hydrogens)
        ]

    @cached_property
    def components(self) -> List[List[int]]:
        """Atom indices per connected component, ordered by their smallest atom"""
        label = [-1] * len(self.atoms)
        parts: List[List[int]] = []
        for start in range(len(self.atoms)):
            if label[start] >= 0:
                continue
            label[start] = len(parts)
            part = [start]
            stack = [start]
            while stack:
                for other, _ in self.neighbors[stack.pop()]:
                    if label[other] < 0:
                        label[other] = len(parts)
                        part.append(other)
                        stack.append(other)
            parts.append(sorted(part))
        return parts

    def degree(self, atom: int) -> int:
        return len(self.neighbors[atom])

    def heavy_atom_count(self, atoms: Optional[Iterable[int]] = None) -> int:
        indices = range(len(self.atoms)) if atoms is None else atoms
        return sum(1 for i in indices if self.atoms[i].element != "H")


def needs_double_bond(atom: Atom, base: int, has_double: bool) -> int:
    """
    Decide whether an aromatic atom still needs one ring double bond.

    An atom already carrying a non-aromatic double bond never does. Otherwise it does
    when one more bond still fits its lowest allowed valence: carbon with two or three
    connections, pyridine-type nitrogen, but not pyrrole-type [nH] or furan oxygen.
    """
    if not atom.aromatic or has_double:
        return 0
    allowed = VALENCE_TABLE.allowed(atom.element, atom.formal_charge)
    if not allowed:
        return 0
    return 1 if base + 1 <= allowed[0] else 0


def _bond_code(bond: Bond) -> int:
    return 4 if bond.aromatic else bond.order.valence


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------

_ORGANIC_ALIPHATIC = frozenset("BCNOPSFI")
_ORGANIC_AROMATIC = frozenset("bcnops")
_BRACKET_AROMATIC = ("se", "as", "b", "c", "n", "o", "p", "s")


class _Reader:
    """Single left-to-right pass over a SMILES string; raises the first error found"""

    def __init__(self, text: str, partial: bool, valences: ValenceTable = VALENCE_TABLE):
        self.text = text
        self.partial = partial
        self.valences = valences
        self.atoms: List[Atom] = []
        self.bonds: List[Bond] = []
        self.lookup: Dict[Tuple[int, int], int] = {}
        self.used: List[int] = []
        self.parent: List[int] = []
        self.parent_bond: List[int] = []
        self.depth: List[int] = []
        self.closures: List[int] = []
        self.written: List[List[int]] = []
        self.created: List[List[int]] = []
        self.prev: Optional[int] = None
        self.pending: Optional[Tuple[str, int]] = None
        self.before_bond = "start"
        self.last = "start"
        self.branches: List[List[int]] = []
        self.rings: Dict[int, Tuple[int, Optional[str], int, int]] = {}
        self.unclosed_bracket: Optional[int] = None

    # -- driver -------------------------------------------------------------

    def read(self) -> Optional[MolecularGraph]:
        text = self.text
        n = len(text)
        i = 0
        while i < n:
            ch = text[i]
            if ch == "[":
                i = self._bracket(i)
            elif ch in _ORGANIC_ALIPHATIC:
                if text.startswith("Cl", i) or text.startswith("Br", i):
                    self._add_atom(i, text[i:i + 2])
                    i += 2
                else:
                    self._add_atom(i, ch)
                    i += 1
            elif ch in _ORGANIC_AROMATIC:
                self._add_atom(i, ch.upper(), aromatic=True)
                i += 1
            elif ch in BOND_SYMBOLS:
                self._bond(ch, i)
                i += 1
            elif ch == ".":
                self._dot(i)
                i += 1
            elif ch.isdigit():
                self._ring(int(ch), i)
                i += 1
            elif ch == "%":
                digits = text[i + 1:i + 3]
                if len(digits) == 2 and digits.isdigit():
                    self._ring(int(digits), i)
                    i += 3
                elif self.partial and i + 1 + len(digits) == n and (digits == "" or digits.isdigit()):
                    i = n
                else:
                    raise SmilesSyntaxError(ILLEGAL_CHARACTER, i, "'%' must be followed by two digits")
            elif ch == "(":
                self._open(i)
                i += 1
            elif ch == ")":
                self._close(i)
                i += 1
            else:
                raise SmilesSyntaxError(ILLEGAL_CHARACTER, i, repr(ch))
        if self.partial:
            return None
        return self._finish()

    # -- tokens -------------------------------------------------------------

    def _add_atom(
        self,
        pos: int,
        element: str,
        aromatic: bool = False,
        charge: int = 0,
        hcount: Optional[int] = None,
        chirality: Chirality = Chirality.NONE,
        isotope: Optional[int] = None,
        atom_class: Optional[int] = None,
    ) -> None:
        idx = len(self.atoms)
        self.atoms.append(
            Atom(element, aromatic, charge, hcount, chirality, isotope, atom_class, position=pos)
        )
        self.used.append(hcount or 0)
        self.written.append([])
        self.created.append([])
        prev = self.prev
        if prev is None:
            self.parent.append(-1)
            self.parent_bond.append(-1)
            self.depth.append(0)
        else:
            order = self._order(self.pending[0] if self.pending else None, prev, idx)
            k = self._connect(prev, idx, order)
            self.parent.append(prev)
            self.parent_bond.append(k)
            self.depth.append(self.depth[prev] + 1)
            self.written[prev].append(idx)
            self.written[idx].append(prev)
            self.created[prev].append(idx)
            self.created[idx].append(prev)
            self._check_valence(prev)
        self._check_valence(idx)
        if self.branches:
            self.branches[-1][2] = 1
        self.prev = idx
        self.pending = None
        self.last = "atom"

    def _bond(self, ch: str, pos: int) -> None:
        if self.pending is not None:
            raise SmilesSyntaxError(MULTIPLE_BOND_SYMBOLS, pos, f"{self.pending[0]}{ch}")
        if self.prev is None:
            raise SmilesSyntaxError(ATOM_BEFORE_BOND, pos, repr(ch))
        self.before_bond = self.last
        self.pending = (ch, pos)
        self.last = "bond"

    def _dot(self, pos: int) -> None:
        if self.pending is not None:
            raise SmilesSyntaxError(ATOM_AFTER_BOND, self.pending[1], "followed by '.'")
        if self.prev is None:
            raise SmilesSyntaxError(ATOM_BEFORE_BOND, pos, "'.'")
        self.prev = None
        self.last = "dot"

    def _open(self, pos: int) -> None:
        if self.last == "bond":
            raise SmilesSyntaxError(BOND_BEFORE_OPEN_PAREN, self.pending[1], self.pending[0])
        if self.prev is None or self.last == "open":
            raise SmilesSyntaxError(ATOM_BEFORE_OPEN_PAREN, pos)
        self.branches.append([self.prev, pos, 0])
        self.last = "open"

    def _close(self, pos: int) -> None:
        if not self.branches:
            raise SmilesSyntaxError(UNMATCHED_CLOSE_PAREN, pos)
        if self.last in ("bond", "dot"):
            raise SmilesSyntaxError(ATOM_AFTER_BOND, self.pending[1] if self.pending else pos - 1)
        if self.last == "open":
            raise SmilesSyntaxError(EMPTY_BRANCH, self.branches[-1][1])
        point = self.branches.pop()
        self.prev = point[0]
        self.last = "close"

    def _ring(self, label: int, pos: int) -> None:
        if self.prev is None:
            raise SmilesSyntaxError(ATOM_BEFORE_RING_BOND, pos, f"ring label {label}")
        anchor = self.before_bond if self.last == "bond" else self.last
        if anchor == "open":
            raise SmilesSyntaxError(RING_CLOSURE_IN_PARENS, pos, f"ring label {label}")
        if anchor == "close":
            raise SmilesSyntaxError(RING_CLOSURE_AFTER_ATOM, pos, f"ring label {label}")
        cur = self.prev
        symbol = self.pending[0] if self.pending else None
        if label in self.rings:
            start, open_symbol, _, slot = self.rings[label]
            if start == cur:
                raise SmilesSyntaxError(RING_OPEN_CLOSE_SAME_ATOM, pos, f"ring label {label}")
            if symbol and open_symbol and BOND_SYMBOLS[symbol] is not BOND_SYMBOLS[open_symbol]:
                raise SmilesSyntaxError(MULTIPLE_BOND_SYMBOLS, pos, f"ring label {label}: {open_symbol} vs {symbol}")
            if (start, cur) in self.lookup:
                raise SmilesSyntaxError(DUPLICATE_BOND, pos, f"ring label {label}")
            del self.rings[label]
            order = self._order(symbol or open_symbol, start, cur)
            reserved = BOND_SYMBOLS[open_symbol].valence if open_symbol else 1
            self.used[start] -= reserved
            k = self._connect(start, cur, order)
            self.closures.append(k)
            self.written[start][slot] = cur
            self.written[cur].append(start)
            self.created[start].append(cur)
            self.created[cur].append(start)
            self._check_valence(start)
        else:
            self.rings[label] = (cur, symbol, pos, len(self.written[cur]))
            self.written[cur].append(-1)
            self.used[cur] += BOND_SYMBOLS[symbol].valence if symbol else 1
        self._check_valence(cur)
        self.pending = None
        self.last = "ring"

    def _bracket(self, pos: int) -> int:
        text = self.text
        end = text.find("]", pos + 1)
        complete = end != -1
        content = text[pos + 1:end] if complete else text[pos + 1:]
        fields = self._bracket_fields(content, pos + 1, complete)
        if not complete:
            if not self.partial:
                self.unclosed_bracket = pos
            return len(text)
        element, aromatic, isotope, chirality, hcount, charge, atom_class = fields
        self._add_atom(pos, element, aromatic, charge, hcount, chirality, isotope, atom_class)
        return end + 1

    def _bracket_fields(self, content: str, offset: int, complete: bool):
        m = len(content)
        j = 0
        while j < m and content[j].isdigit():
            j += 1
        isotope = int(content[:j]) if j else None
        element, aromatic, width = _match_element(content, j)
        if element is None:
            if not complete and _element_prefix(content[j:]):
                return None
            raise SmilesSyntaxError(ELEMENT_REQUIRED, offset + j, repr(content[j:j + 2]) if j < m else "")
        j += width
        chirality = Chirality.NONE
        if j < m and content[j] == "@":
            if j + 1 < m and content[j + 1] == "@":
                chirality = Chirality.CLOCKWISE
                j += 2
            else:
                chirality = Chirality.COUNTERCLOCKWISE
                j += 1
        hcount = 0
        if j < m and content[j] == "H":
            j += 1
            k = j
            while k < m and content[k].isdigit():
                k += 1
            hcount = int(content[j:k]) if k > j else 1
            j = k
        charge = 0
        if j < m and content[j] in "+-":
            sign = 1 if content[j] == "+" else -1
            k = j + 1
            while k < m and content[k].isdigit():
                k += 1
            if k > j + 1:
                charge = sign * int(content[j + 1:k])
            else:
                while k < m and content[k] == content[j]:
                    k += 1
                charge = sign * (k - j)
            j = k
        atom_class = None
        if j < m and content[j] == ":":
            k = j + 1
            while k < m and content[k].isdigit():
                k += 1
            if k > j + 1:
                atom_class = int(content[j + 1:k])
            elif complete:
                raise SmilesSyntaxError(MISSING_CLOSE_BRACKET, offset + j, "atom class needs digits")
            j = k
        if j < m:
            raise SmilesSyntaxError(MISSING_CLOSE_BRACKET, offset + j, repr(content[j]))
        return element, aromatic, isotope, chirality, hcount, charge, atom_class

    # -- helpers ------------------------------------------------------------

    def _order(self, symbol: Optional[str], a: int, b: int) -> BondOrder:
        if symbol is not None:
            return BOND_SYMBOLS[symbol]
        if self.atoms[a].aromatic and self.atoms[b].aromatic:
            return BondOrder.AROMATIC
        return BondOrder.SINGLE

    def _connect(self, a: int, b: int, order: BondOrder) -> int:
        k = len(self.bonds)
        self.bonds.append(Bond(a, b, order, aromatic=order is BondOrder.AROMATIC))
        self.lookup[(a, b)] = k
        self.lookup[(b, a)] = k
        self.used[a] += order.valence
        self.used[b] += order.valence
        return k

    def _check_valence(self, idx: int) -> None:
        atom = self.atoms[idx]
        if self.valences.exceeds(atom.element, atom.formal_charge, self.used[idx]):
            allowed = self.valences.allowed(atom.element, atom.formal_charge)
            raise ValenceError(
                atom.position,
                f"{atom.symbol} has {self.used[idx]} bonds, allowed {list(allowed)}",
            )

    def _ring_bonds(self) -> List[bool]:
        root: List[int] = []
        for i, parent in enumerate(self.parent):
            root.append(i if parent == -1 else root[parent])
        if any(root[self.bonds[k].a] != root[self.bonds[k].b] for k in self.closures):
            # A closure across '.' merges two trees; ring bonds are then the non-bridges
            graph = nx.Graph()
            graph.add_nodes_from(range(len(self.atoms)))
            graph.add_edges_from((bond.a, bond.b) for bond in self.bonds)
            bridges = {frozenset(edge) for edge in nx.bridges(graph)}
            return [frozenset((bond.a, bond.b)) not in bridges for bond in self.bonds]
        ring = [False] * len(self.bonds)
        for k in self.closures:
            ring[k] = True
            a, b = self.bonds[k].a, self.bonds[k].b
            while a != b:
                if self.depth[a] < self.depth[b]:
                    a, b = b, a
                ring[self.parent_bond[a]] = True
                a = self.parent[a]
        return ring

    def _finish(self) -> MolecularGraph:
        n = len(self.text)
        if self.rings:
            first = min(opened[2] for opened in self.rings.values())
            raise SmilesSyntaxError(
                UNCLOSED_RINGS, first, f"labels {sorted(self.rings)}", count=len(self.rings)
            )
        if self.branches:
            raise SmilesSyntaxError(UNCLOSED_BRANCHES, self.branches[0][1], count=len(self.branches))
        if self.unclosed_bracket is not None:
            raise SmilesSyntaxError(UNCLOSED_SQUARE_BRACKET, self.unclosed_bracket)
        if self.last in ("bond", "dot"):
            raise SmilesSyntaxError(ATOM_AFTER_BOND, self.pending[1] if self.pending else n - 1, "at end of string")
        if not self.atoms:
            raise SmilesSyntaxError(ELEMENT_REQUIRED, 0, "empty string")
        if self.text.endswith(")"):
            raise SmilesSyntaxError(FINAL_BRANCH_PARENTHESIZED, n - 1)

        ring = self._ring_bonds()
        bonds = tuple(bond.ring_member() if ring[k] else bond for k, bond in enumerate(self.bonds))
        in_ring = [False] * len(self.atoms)
        for bond in bonds:
            if bond.ring_bond:
                in_ring[bond.a] = in_ring[bond.b] = True
        atoms = tuple(atom.ring_member() if in_ring[i] else atom for i, atom in enumerate(self.atoms))

        graph = MolecularGraph(
            atoms,
            bonds,
            source=self.text,
            written_order=tuple(tuple(order) for order in self.written),
            creation_order=tuple(tuple(order) for order in self.created),
        )
        for i, atom in enumerate(atoms):
            if not atom.bracketed:
                continue
            used = graph.base_valence[i] + graph.pi_demand[i]
            if not self.valences.permits(atom.element, atom.formal_charge, used):
                allowed = self.valences.allowed(atom.element, atom.formal_charge)
                raise ValenceError(atom.position, f"[{atom.symbol}] has valence {used}, allowed {list(allowed)}")
        return graph


def _match_element(content: str, j: int) -> Tuple[Optional[str], bool, int]:
    two = content[j:j + 2]
    if len(two) == 2 and two in ATOMIC_NUMBER:
        return two, False, 2
    one = content[j:j + 1]
    if one and one in ATOMIC_NUMBER:
        return one, False, 1
    for symbol in _BRACKET_AROMATIC:
        if content.startswith(symbol, j):
            return symbol.capitalize(), True, len(symbol)
    return None, False, 0


def _element_prefix(rest: str) -> bool:
    if rest == "":
        return True
    if len(rest) > 1:
        return False
    return any(symbol.startswith(rest) for symbol in ELEMENTS) or rest in ("s", "a")


def read_smiles(text: str, partial: bool = False) -> Optional[MolecularGraph]:
    """
    Scan a SMILES string, raising the first error found.

    Args:
        text: SMILES text, without surrounding whitespace
        partial: Accept any string that some continuation could complete

    Returns:
        The graph in full mode, None in partial mode
    """
    return _Reader(text, partial).read()


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a complete SMILES string; raises a categorized SmilesParseError"""
    return _Reader(text.strip(), partial=False).read()


# ---------------------------------------------------------------------------
# Kekulization
# ---------------------------------------------------------------------------


def kekulize(graph: MolecularGraph) -> MolecularGraph:
    """
    Assign single/double orders to every aromatic bond.

    Atoms that need a ring double bond are paired over aromatic bonds; the assignment
    exists exactly when those atoms admit a perfect matching.
    """
    if graph.kekulized:
        return graph
    demand = graph.pi_demand
    needy = [i for i, d in enumerate(demand) if d]
    edges = [
        (bond.a, bond.b)
        for bond in graph.bonds
        if bond.aromatic and demand[bond.a] and demand[bond.b]
    ]
    pairs = _perfect_matching(needy, edges)
    matched = {atom for pair in pairs for atom in pair}
    if len(matched) != len(needy):
        stranded = [i for i in needy if i not in matched]
        atom = graph.atoms[stranded[0]]
        raise KekulizationFailure(atom.position, f"{len(stranded)} aromatic atoms left without a double bond")
    doubles = {(a, b) for a, b in pairs} | {(b, a) for a, b in pairs}
    bonds = tuple(
        bond.with_order(BondOrder.DOUBLE if (bond.a, bond.b) in doubles else BondOrder.SINGLE)
        if bond.aromatic
        else bond
        for bond in graph.bonds
    )
    return replace(graph, bonds=bonds, kekulized=True)


def _perfect_matching(nodes: Sequence[int], edges: Sequence[Tuple[int, int]]) -> List[Tuple[int, int]]:
    if not nodes:
        return []
    free: Dict[int, set] = {node: set() for node in nodes}
    for a, b in edges:
        free[a].add(b)
        free[b].add(a)
    pairs = []
    # Greedy pass: most constrained atom first, to its most constrained partner
    while free:
        node = min(free, key=lambda n: (len(free[n]), n))
        if not free[node]:
            break
        mate = min(free[node], key=lambda n: (len(free[n]), n))
        pairs.append((node, mate))
        for taken in (node, mate):
            for other in free.pop(taken):
                if other in free:
                    free[other].discard(taken)
    if not free:
        return pairs
    graph = nx.Graph()
    graph.add_nodes_from(nodes)
    graph.add_edges_from(edges)
    return [tuple(pair) for pair in nx.max_weight_matching(graph, maxcardinality=True)]


# ---------------------------------------------------------------------------
# Writer
# ---------------------------------------------------------------------------


def _charge_text(charge: int) -> str:
    if charge == 0:
        return ""
    sign = "+" if charge > 0 else "-"
    return sign if abs(charge) == 1 else f"{sign}{abs(charge)}"


def _hydrogen_text(count: int) -> str:
    if count == 0:
        return ""
    return "H" if count == 1 else f"H{count}"


def atom_text(graph: MolecularGraph, i: int, chirality: Optional[Chirality] = None) -> str:
    """SMILES text for one atom; brackets only when the plain form would lose information"""
    atom = graph.atoms[i]
    tag = atom.chirality if chirality is None else chirality
    hydrogens = graph.hydrogens[i]
    plain = (
        atom.element in ORGANIC_SUBSET
        and (not atom.aromatic or atom.element in AROMATIC_ELIGIBLE)
        and atom.formal_charge == 0
        and atom.isotope is None
        and atom.atom_class is None
        and tag is Chirality.NONE
        and hydrogens == graph.plain_hydrogens[i]
    )
    if plain:
        return atom.symbol
    isotope = "" if atom.isotope is None else str(atom.isotope)
    atom_class = "" if atom.atom_class is None else f":{atom.atom_class}"
    return (
        f"[{isotope}{atom.symbol}{tag.value}{_hydrogen_text(hydrogens)}"
        f"{_charge_text(atom.formal_charge)}{atom_class}]"
    )


def bond_text(graph: MolecularGraph, bond: Bond) -> str:
    both_aromatic = graph.atoms[bond.a].aromatic and graph.atoms[bond.b].aromatic
    if bond.aromatic:
        return "" if both_aromatic else ":"
    if bond.order is BondOrder.SINGLE:
        return "-" if both_aromatic else ""
    if bond.order is BondOrder.DOUBLE:
        return "="
    if bond.order is BondOrder.TRIPLE:
        return "#"
    return ":"


def _with_hydrogen(order: List[int], has_parent: bool, hydrogen: bool) -> List[int]:
    # An implicit H on a chiral atom sits right after the preceding atom, or first
    if not hydrogen:
        return order
    slot = 1 if has_parent else 0
    return order[:slot] + [-1] + order[slot:]


def _output_chirality(graph: MolecularGraph, atom: int, emitted: List[int], has_parent: bool) -> Optional[Chirality]:
    """
    Tag for an atom written with neighbors in `emitted` order; flipped when that
    order is an odd permutation of the order it was read in.
    """
    tag = graph.atoms[atom].chirality
    if tag is Chirality.NONE or not graph.written_order:
        return None
    source = list(graph.written_order[atom])
    if sorted(source) != sorted(emitted):
        return None
    hydrogen = graph.hydrogens[atom] == 1
    source = _with_hydrogen(source, bool(source) and source[0] < atom, hydrogen)
    target = _with_hydrogen(list(emitted), has_parent, hydrogen)
    position = {neighbor: i for i, neighbor in enumerate(source)}
    perm = [position[neighbor] for neighbor in target]
    inversions = sum(1 for x in range(len(perm)) for y in range(x + 1, len(perm)) if perm[x] > perm[y])
    return tag.inverted() if inversions % 2 else tag


def _write_component(
    graph: MolecularGraph, root: int, ranks: Sequence[int], written: Optional[List[int]] = None
) -> str:
    # `written`, when given, collects atoms in the order they appear in the text
    neighbors = graph.neighbors

    # First pass: depth-first tree, visiting neighbors by rank
    children: Dict[int, List[Tuple[int, int]]] = {root: []}
    closures: Dict[int, List[Tuple[int, int]]] = {root: []}
    visited = {root}
    stack = [(root, -1, iter(sorted(neighbors[root], key=lambda nb: ranks[nb[0]])))]
    while stack:
        atom, via, pending = stack[-1]
        step = next(pending, None)
        if step is None:
            stack.pop()
            continue
        other, k = step
        if k == via:
            continue
        if other in visited:
            if other in closures and all(bk != k for _, bk in closures[other]):
                closures[other].append((atom, k))
                closures[atom].append((other, k))
            continue
        visited.add(other)
        children[atom].append((other, k))
        children[other] = []
        closures[other] = []
        stack.append((other, k, iter(sorted(neighbors[other], key=lambda nb: ranks[nb[0]]))))

    # Second pass: emit text in the same order, allocating ring labels as rings open
    out: List[str] = []
    labels: Dict[int, int] = {}
    in_use: set = set()
    seen: set = set()
    work: List[Tuple[str, int, int]] = [("atom", root, -1)]
    while work:
        kind, atom, k = work.pop()
        if kind == "text":
            out.append("(" if atom == 0 else ")")
            continue
        if k >= 0:
            out.append(bond_text(graph, graph.bonds[k]))
        closing = sorted(
            ((labels[bk], other, bk) for other, bk in closures[atom] if other in seen and bk in labels),
        )
        opening = sorted(
            ((ranks[other], other, bk) for other, bk in closures[atom] if other not in seen),
        )
        emitted = [graph.bonds[k].other(atom)] if k >= 0 else []
        emitted += [other for _, other, _ in closing] + [other for _, other, _ in opening]
        emitted += [other for other, _ in children[atom]]
        out.append(atom_text(graph, atom, _output_chirality(graph, atom, emitted, k >= 0)))
        seen.add(atom)
        if written is not None:
            written.append(atom)
        for label, other, bk in closing:
            out.append(bond_text(graph, graph.bonds[bk]) + _label_text(label))
        fresh = []
        for _, other, bk in opening:
            label = 1
            while label in in_use:
                label += 1
            in_use.add(label)
            labels[bk] = label
            fresh.append(_label_text(label))
        out.extend(fresh)
        for label, _, bk in closing:
            in_use.discard(label)
            del labels[bk]
        kids = children[atom]
        items: List[Tuple[str, int, int]] = []
        for other, bk in kids[:-1]:
            items.extend([("text", 0, -1), ("atom", other, bk), ("text", 1, -1)])
        if kids:
            items.append(("atom", kids[-1][0], kids[-1][1]))
        work.extend(reversed(items))
    return "".join(out)


def _label_text(label: int) -> str:
    return str(label) if label < 10 else f"%{label}"


def to_smiles(graph: MolecularGraph, root: Optional[int] = None, order: Optional[Sequence[int]] = None) -> str:
    """
    Write a graph as SMILES.

    Args:
        graph: Graph to write
        root: Atom to start from; its component is written first
        order: Rank per atom used to order neighbors; defaults to atom index

    Returns:
        SMILES text that parses back to an isomorphic graph
    """
    ranks = list(order) if order is not None else list(range(len(graph.atoms)))
    parts = graph.components
    if root is not None:
        parts = sorted(parts, key=lambda part: root not in part)
    pieces = []
    for part in parts:
        start = root if root is not None and root in part else min(part, key=lambda i: ranks[i])
        pieces.append(_write_component(graph, start, ranks))
    return ".".join(pieces)


# ---------------------------------------------------------------------------
# Canonical keys
# ---------------------------------------------------------------------------


def _invariant(graph: MolecularGraph, i: int) -> Tuple:
    atom = graph.atoms[i]
    return (
        atom.atomic_number,
        atom.isotope or 0,
        atom.formal_charge,
        graph.degree(i),
        graph.hydrogens[i],
        atom.aromatic,
        atom.chirality is not Chirality.NONE,
        atom.in_ring,
        atom.atom_class or 0,
    )


def _refine(members: Sequence[int], links: Dict[int, List[Tuple[int, int]]], ranks: Dict[int, int]) -> Dict[int, int]:
    classes = len(set(ranks.values()))
    while True:
        sizes = Counter(ranks.values())
        # a singleton cell keeps its place without a neighborhood signature
        signature = {
            i: (ranks[i], tuple(sorted((ranks[j], code) for j, code in links[i])) if sizes[ranks[i]] > 1 else ())
            for i in members
        }
        ordered = sorted(set(signature.values()))
        position = {sig: k for k, sig in enumerate(ordered)}
        refined = {i: position[signature[i]] for i in members}
        if len(ordered) == classes:
            return refined
        ranks, classes = refined, len(ordered)


def _interchangeable(graph: MolecularGraph, cell: Sequence[int]) -> bool:
    # Terminal atoms sharing one achiral neighbor can be swapped without changing the text
    anchors = set()
    for i in cell:
        if graph.degree(i) != 1:
            return False
        anchors.add(graph.neighbors[i][0][0])
    return len(anchors) == 1 and graph.atoms[anchors.pop()].chirality is Chirality.NONE


# Cap on automorphisms recorded per component
_AUTOMORPHISM_LIMIT = 64


class _LabelSearch:
    """
    Individualize-and-refine search for the smallest SMILES text of one component.

    Two leaves that write the same text define an automorphism. A candidate is skipped
    when an automorphism fixing every atom individualized so far maps an already
    explored candidate onto it, since its subtree writes the same texts.
    """

    def __init__(self, graph: MolecularGraph, members: List[int]):
        self.graph = graph
        self.members = members
        self.links = {i: [(j, _bond_code(graph.bonds[k])) for j, k in graph.neighbors[i]] for i in members}
        self.leaves = 0
        self.texts: Dict[str, List[int]] = {}
        self.automorphisms: List[Dict[int, int]] = []

    def run(self) -> str:
        invariants = {i: _invariant(self.graph, i) for i in self.members}
        position = {inv: k for k, inv in enumerate(sorted(set(invariants.values())))}
        self._visit({i: position[invariants[i]] for i in self.members}, ())
        return min(self.texts) if self.texts else ""

    def _visit(self, ranks: Dict[int, int], fixed: Tuple[int, ...]) -> None:
        ranks = _refine(self.members, self.links, ranks)
        cells: Dict[int, List[int]] = {}
        for i in self.members:
            cells.setdefault(ranks[i], []).append(i)
        tied = [cell for _, cell in sorted(cells.items()) if len(cell) > 1]
        if not tied:
            self._leaf(ranks)
            return
        cell = sorted(tied[0])
        candidates = cell
        if self.leaves >= CANONICAL_LEAF_BUDGET or _interchangeable(self.graph, cell):
            candidates = cell[:1]
            if self.leaves == CANONICAL_LEAF_BUDGET:
                logger.debug("Canonical search budget reached for %s", self.graph.source)
        explored: List[int] = []
        for chosen in candidates:
            if explored and self._equivalent(chosen, explored, fixed):
                continue
            explored.append(chosen)
            split = {i: 2 * r for i, r in ranks.items()}
            for i in cell:
                if i != chosen:
                    split[i] += 1
            self._visit(split, fixed + (chosen,))

    def _leaf(self, ranks: Dict[int, int]) -> None:
        self.leaves += 1
        order = [0] * len(self.graph.atoms)
        for i in self.members:
            order[i] = ranks[i]
        root = min(self.members, key=lambda i: ranks[i])
        written: List[int] = []
        text = _write_component(self.graph, root, order, written)
        first = self.texts.setdefault(text, written)
        if first is not written and len(self.automorphisms) < _AUTOMORPHISM_LIMIT:
            # Atoms at the same place in two equal texts correspond
            self.automorphisms.append(dict(zip(written, first)))

    def _equivalent(self, chosen: int, explored: List[int], fixed: Tuple[int, ...]) -> bool:
        usable = [m for m in self.automorphisms if all(m[x] == x for x in fixed)]
        if not usable:
            return False
        parent = {i: i for i in self.members}

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for mapping in usable:
            for i, j in mapping.items():
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
        target = find(chosen)
        return any(find(e) == target for e in explored)


def _canonical_component(graph: MolecularGraph, members: List[int]) -> str:
    return _LabelSearch(graph, members).run()


def canonical_key(graph: MolecularGraph) -> str:
    """
    Canonical SMILES text for a graph.

    Components are keyed separately and joined in sorted order. The graph must be
    kekulizable; KekulizationFailure propagates otherwise.
    """
    graph = kekulize(graph)
    if not graph.atoms:
        return ""
    return ".".join(sorted(_canonical_component(graph, part) for part in graph.components))


def canonical_smiles(text: str) -> str:
    return canonical_key(parse_smiles(text))


def implicit_hydrogens(graph: MolecularGraph) -> List[int]:
    """Total hydrogen count per atom, explicit or implied"""
    return list(graph.hydrogens)


def induced_subgraph(graph: MolecularGraph, keep: Iterable[int], strip_chirality: bool = False) -> MolecularGraph:
    """
    Graph restricted to `keep`, renumbered in ascending original order.

    Aromatic atoms that lose bonds take the lost share as explicit hydrogens, so
    pyrrole-type nitrogens stay [nH]. Neutral aliphatic organic atoms that lose bonds
    or chirality fall back to implied hydrogens.
    """
    chosen = sorted(set(keep))
    remap = {old: new for new, old in enumerate(chosen)}
    bonds = tuple(
        replace(bond, a=remap[bond.a], b=remap[bond.b])
        for bond in graph.bonds
        if bond.a in remap and bond.b in remap
    )
    sub = MolecularGraph(tuple(graph.atoms[old] for old in chosen), bonds, kekulized=graph.kekulized)
    atoms = []
    for new, old in enumerate(chosen):
        atom = sub.atoms[new]
        lost = graph.bond_valence[old] - sub.bond_valence[new]
        if strip_chirality:
            atom = replace(atom, chirality=Chirality.NONE)
        if lost and atom.aromatic:
            atom = replace(atom, explicit_h_count=graph.hydrogens[old] + lost)
        elif (lost or strip_chirality) and atom.bracketed and _implicit_eligible(atom):
            atom = replace(atom, explicit_h_count=None)
        elif lost and atom.bracketed:
            atom = replace(atom, explicit_h_count=atom.explicit_h_count + lost)
        atoms.append(atom)
    written: Tuple[Tuple[int, ...], ...] = ()
    created: Tuple[Tuple[int, ...], ...] = ()
    if graph.written_order and not strip_chirality:
        written = tuple(tuple(remap[j] for j in graph.written_order[old] if j in remap) for old in chosen)
        created = tuple(tuple(remap[j] for j in graph.creation_order[old] if j in remap) for old in chosen)
    sub = MolecularGraph(tuple(atoms), bonds, kekulized=graph.kekulized, written_order=written, creation_order=created)
    return replace(sub, source=to_smiles(sub) if sub.atoms else "")


def _implicit_eligible(atom: Atom) -> bool:
    return (
        atom.element in ORGANIC_SUBSET
        and not atom.aromatic
        and atom.formal_charge == 0
        and atom.isotope is None
        and atom.atom_class is None
        and atom.chirality is Chirality.NONE
    )


def largest_fragment(graph: MolecularGraph) -> MolecularGraph:
    """
    Component with the most heavy atoms.

    Ties go to the component whose canonical key sorts first.
    """
    parts = graph.components
    if len(parts) <= 1:
        return graph

    sizes = [graph.heavy_atom_count(part) for part in parts]
    top = max(sizes)
    largest = [part for part, size in zip(parts, sizes) if size == top]
    if len(largest) == 1:
        return induced_subgraph(graph, largest[0])

    def rank(sub: MolecularGraph) -> str:
        try:
            return canonical_key(sub)
        except KekulizationFailure:
            return sub.source

    return min((induced_subgraph(graph, part) for part in largest), key=rank)


# ---------------------------------------------------------------------------
# Corpus standardization
# ---------------------------------------------------------------------------


@dataclass
class StandardizeReport:
    input_count: int = 0
    kept: int = 0
    dropped_parse: int = 0
    dropped_kekulize: int = 0
    dropped_duplicate: int = 0

    def to_dict(self) -> Dict[str, int]:
        return {
            "input_count": self.input_count,
            "kept": self.kept,
            "dropped_parse": self.dropped_parse,
            "dropped_kekulize": self.dropped_kekulize,
            "dropped_duplicate": self.dropped_duplicate,
        }


def _standardize_line(line: str) -> Tuple[str, str]:
    try:
        graph = largest_fragment(parse_smiles(line))
    except KekulizationFailure:
        return "kekulize", ""
    except SmilesParseError:
        return "parse", ""
    try:
        return "ok", canonical_key(graph)
    except KekulizationFailure:
        return "kekulize", ""


def standardize_corpus(lines: Iterable[str], workers: int = 1) -> Tuple[List[str], StandardizeReport]:
    """
    Reduce a corpus to one canonical SMILES per distinct molecule.

    Each line goes through largest fragment, kekulization and canonical key; lines
    that fail are counted by reason and duplicates after the first are dropped.
    Blank lines and lines starting with '#' are skipped.

    Args:
        lines: SMILES strings, one per item
        workers: Threads used for per-line work; output does not depend on it

    Returns:
        Kept canonical SMILES in input order, and the drop report
    """
    records = [line.strip() for line in lines]
    records = [line for line in records if line and not line.startswith("#")]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_standardize_line, records))
    else:
        results = [_standardize_line(line) for line in records]

    report = StandardizeReport(input_count=len(records))
    kept: List[str] = []
    seen: set = set()
    for line, (status, key) in zip(records, results):
        if status != "ok":
            logger.debug("Dropping %r: %s failure", line, status)
        if status == "parse":
            report.dropped_parse += 1
        elif status == "kekulize":
            report.dropped_kekulize += 1
        elif key in seen:
            report.dropped_duplicate += 1
        else:
            seen.add(key)
            kept.append(key)
    report.kept = len(kept)
    logger.info(
        "Standardized %d lines: kept %d, dropped %d parse, %d kekulize, %d duplicate",
        report.input_count,
        report.kept,
        report.dropped_parse,
        report.dropped_kekulize,
        report.dropped_duplicate,
    )
    return kept, report
