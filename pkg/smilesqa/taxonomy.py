"""
Error taxonomy and valence model
Shared by the SMILES reader and the validator: the 21 error categories used for
error profiles, the exception hierarchy, and the allowed-valence table.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple


class ErrorKind(str, Enum):
    SYNTAX = "syntax"
    VALENCE = "valence"
    KEKULIZATION = "kekulization"


@dataclass(frozen=True)
class ErrorCategory:
    """
    One row of the error taxonomy.

    The message template is the exact wording reported for the category. Templates
    starting with "N " are parameterized by a count; the count never changes the
    identity of the category.
    """

    code: str
    kind: ErrorKind
    message_template: str
    long_range: bool = False

    @property
    def label(self) -> str:
        """Row label in the "Kind: message" layout of error tables"""
        return f"{self.kind.value.capitalize()}: {self.message_template}"

    def render(self, count: Optional[int] = None) -> str:
        if count is not None and self.message_template.startswith("N "):
            return f"{count} {self.message_template[2:]}"
        return self.message_template


def _syntax(code: str, message: str, long_range: bool = False) -> ErrorCategory:
    return ErrorCategory(code, ErrorKind.SYNTAX, message, long_range)


# Row order of the "averages for all error types" table
UNCLOSED_RINGS = _syntax("unclosed_rings", "N ring openings have not been closed", True)
UNMATCHED_CLOSE_PAREN = _syntax("unmatched_close_paren", "Unmatched close parenthesis", True)
KEKULIZATION = ErrorCategory("kekulization", ErrorKind.KEKULIZATION, "Aromatic system cannot be kekulized")
UNCLOSED_BRANCHES = _syntax("unclosed_branches", "N branches have not been closed", True)
VALENCE = ErrorCategory("valence", ErrorKind.VALENCE, "Uncommon valence or charge state")
DUPLICATE_BOND = _syntax("duplicate_bond", "Cannot have a second bond between the same atoms")
ILLEGAL_CHARACTER = _syntax("illegal_character", "Illegal character")
RING_CLOSURE_AFTER_ATOM = _syntax("ring_closure_after_atom", "Ring closure symbols must immediately follow an atom")
MISSING_CLOSE_BRACKET = _syntax("missing_close_bracket", "Missing the close bracket", True)
FINAL_BRANCH_PARENTHESIZED = _syntax(
    "final_branch_parenthesized", "The final branch should not be within parentheses", True
)
ATOM_BEFORE_OPEN_PAREN = _syntax("atom_before_open_paren", "An atom must precede an open parenthesis")
RING_OPEN_CLOSE_SAME_ATOM = _syntax(
    "ring_open_close_same_atom", "Cannot have a bond opening and closing on the same atom"
)
MULTIPLE_BOND_SYMBOLS = _syntax("multiple_bond_symbols", "Only a single bond symbol should be used")
RING_CLOSURE_IN_PARENS = _syntax("ring_closure_in_parens", "Ring closure symbols should not be in parentheses")
ATOM_BEFORE_BOND = _syntax("atom_before_bond", "An atom must precede a bond symbol")
EMPTY_BRANCH = _syntax("empty_branch", "Empty branches are not allowed")
BOND_BEFORE_OPEN_PAREN = _syntax("bond_before_open_paren", "A bond symbol should not precede an open parenthesis")
ATOM_AFTER_BOND = _syntax("atom_after_bond", "An atom must follow a bond symbol")
ELEMENT_REQUIRED = _syntax("element_required", "An element symbol is required")
ATOM_BEFORE_RING_BOND = _syntax("atom_before_ring_bond", "An atom must precede a bond closure symbol")
UNCLOSED_SQUARE_BRACKET = _syntax(
    "unclosed_square_bracket",
    "An open square brackets is present without the corresponding close square brackets",
    True,
)

CATEGORIES: Tuple[ErrorCategory, ...] = (
    UNCLOSED_RINGS,
    UNMATCHED_CLOSE_PAREN,
    KEKULIZATION,
    UNCLOSED_BRANCHES,
    VALENCE,
    DUPLICATE_BOND,
    ILLEGAL_CHARACTER,
    RING_CLOSURE_AFTER_ATOM,
    MISSING_CLOSE_BRACKET,
    FINAL_BRANCH_PARENTHESIZED,
    ATOM_BEFORE_OPEN_PAREN,
    RING_OPEN_CLOSE_SAME_ATOM,
    MULTIPLE_BOND_SYMBOLS,
    RING_CLOSURE_IN_PARENS,
    ATOM_BEFORE_BOND,
    EMPTY_BRANCH,
    BOND_BEFORE_OPEN_PAREN,
    ATOM_AFTER_BOND,
    ELEMENT_REQUIRED,
    ATOM_BEFORE_RING_BOND,
    UNCLOSED_SQUARE_BRACKET,
)

CATEGORIES_BY_CODE: Dict[str, ErrorCategory] = {c.code: c for c in CATEGORIES}


class SmilesQAError(Exception):
    """Base class for every domain error raised by smilesqa"""


class SmilesParseError(SmilesQAError):
    """A SMILES string was rejected; carries exactly one category"""

    def __init__(self, category: ErrorCategory, position: int, detail: str = "", count: Optional[int] = None):
        self.category = category
        self.position = position
        self.detail = detail
        self.message = category.render(count)
        text = f"{self.message} (position {position})"
        if detail:
            text = f"{text}: {detail}"
        super().__init__(text)


class SmilesSyntaxError(SmilesParseError):
    pass


class ValenceError(SmilesParseError):
    def __init__(self, position: int, detail: str = ""):
        super().__init__(VALENCE, position, detail)


class KekulizationFailure(SmilesParseError):
    def __init__(self, position: int, detail: str = ""):
        super().__init__(KEKULIZATION, position, detail)


class VocabularyError(SmilesQAError):
    pass


class DomainError(SmilesQAError):
    """Input is well formed but cannot be processed (empty corpus, too few groups, ...)"""


# Periodic table; index + 1 is the atomic number
ELEMENTS: Tuple[str, ...] = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)
ATOMIC_NUMBER: Dict[str, int] = {symbol: i + 1 for i, symbol in enumerate(ELEMENTS)}

AROMATIC_ELIGIBLE = frozenset({"B", "C", "N", "O", "P", "S", "Se", "As"})
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})

# Neutral allowed valences. Elements missing here (metals) are not checked.
NEUTRAL_VALENCES: Dict[str, Tuple[int, ...]] = {
    "H": (1,),
    "He": (0,), "Ne": (0,), "Ar": (0,), "Kr": (0,), "Xe": (0,), "Rn": (0,),
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "F": (1,),
    "Si": (4,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "Cl": (1,),
    "As": (3, 5),
    "Se": (2, 4, 6),
    "Br": (1,),
    "Te": (2, 4, 6),
    "I": (1,),
}


class ValenceTable:
    """
    Allowed valences per element and charge state.

    A charged atom is checked against the neutral list of its isoelectronic element
    (atomic number minus charge), so N+ behaves like C, O- like F and S+ like P.
    """

    def __init__(self, neutral: Optional[Dict[str, Tuple[int, ...]]] = None):
        self._neutral = dict(neutral or NEUTRAL_VALENCES)

    def allowed(self, element: str, charge: int = 0) -> Optional[Tuple[int, ...]]:
        """
        Args:
            element: Element symbol, capitalized
            charge: Formal charge

        Returns:
            Sorted allowed valences, or None when the element is not checked
        """
        if charge == 0:
            return self._neutral.get(element)
        number = ATOMIC_NUMBER.get(element)
        if number is None or element not in self._neutral:
            return None
        shifted = number - charge
        if shifted < 1 or shifted > len(ELEMENTS):
            return None
        return self._neutral.get(ELEMENTS[shifted - 1])

    def implicit_hydrogens(self, element: str, charge: int, used: int) -> int:
        """Hydrogens needed to lift `used` to the next allowed valence (0 when none fits)"""
        allowed = self.allowed(element, charge)
        if not allowed:
            return 0
        for valence in allowed:
            if valence >= used:
                return valence - used
        return 0

    def exceeds(self, element: str, charge: int, used: int) -> bool:
        allowed = self.allowed(element, charge)
        return bool(allowed) and used > allowed[-1]

    def permits(self, element: str, charge: int, used: int) -> bool:
        allowed = self.allowed(element, charge)
        return allowed is None or used in allowed

    def as_rows(self) -> List[Dict[str, object]]:
        return [{"element": k, "valences": list(v)} for k, v in self._neutral.items()]


VALENCE_TABLE = ValenceTable()
