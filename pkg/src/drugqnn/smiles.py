"""SMILES subset parser producing molecular graphs for the GCN branch.

Supported notation: organic-subset atoms (B, C, N, O, P, S, F, Cl, Br, I),
aromatic lowercase forms (b, c, n, o, p, s), bracket atoms with isotope /
chirality / explicit hydrogen count / charge fields, bond symbols ``- = # :``,
branches ``( )``, and ring closures (single digits and ``%nn``).  Hydrogens
stay implicit: the graph has one node per heavy atom and one edge per bond.
Stereo markers, isotopes, and charges are accepted but dropped with a
warning, since the feature schema does not use them.

Everything outside the subset is rejected with a position-bearing
:class:`~drugqnn.exceptions.SmilesParseError`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SmilesParseError

# Versioned atom-symbol table (v1): index order of the symbol one-hot.
# The final slot catches anything not listed.
ATOM_SYMBOLS_V1 = (
    "C", "N", "O", "S", "F", "Si", "P", "Cl", "Br", "Mg", "Na", "Ca", "Fe",
    "As", "Al", "I", "B", "V", "K", "Tl", "Yb", "Sb", "Sn", "Ag", "Pd", "Co",
    "Se", "Ti", "Zn", "H", "Li", "Ge", "Cu", "Au", "Ni", "Cd", "In", "Mn",
    "Zr", "Cr", "Pt", "Hg", "Pb", "Unknown",
)

# 44 symbols + degree 0-10 + total hydrogens 0-10 + implicit valence 0-10 + aromatic
N_SYMBOLS = len(ATOM_SYMBOLS_V1)
ONE_HOT_RANGE = 11
FEATURE_WIDTH = N_SYMBOLS + 3 * ONE_HOT_RANGE + 1

ORGANIC_TWO_LETTER = ("Cl", "Br")
ORGANIC_ONE_LETTER = frozenset("BCNOPSFI")
AROMATIC_LETTERS = frozenset("bcnops")

# Fixed default valences for implicit-hydrogen computation.
DEFAULT_VALENCE = {
    "B": 3, "C": 4, "N": 3, "O": 2, "P": 3, "S": 2,
    "F": 1, "Cl": 1, "Br": 1, "I": 1,
}

_BOND_ORDERS = {"-": 1, "=": 2, "#": 3, ":": 1}


class DiscardedFeatureWarning(UserWarning):
    """Raised once per parse when stereo/isotope/charge markers are dropped."""


@dataclass
class Atom:
    symbol: str
    is_aromatic: bool = False
    bracket: bool = False
    explicit_h: int | None = None
    degree: int = 0
    hydrogens: int = 0
    implicit_valence: int = 0


@dataclass
class MolGraph:
    """Heavy-atom graph: node list, edge list, adjacency, and feature matrix."""

    atoms: list[Atom]
    edges: list[tuple[int, int]]
    adjacency: np.ndarray = field(repr=False)
    features: np.ndarray = field(repr=False)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def n_bonds(self) -> int:
        return len(self.edges)

    def to_debug_dict(self) -> dict:
        return {
            "n_atoms": self.n_atoms,
            "n_bonds": self.n_bonds,
            "atoms": [
                {
                    "symbol": a.symbol,
                    "aromatic": a.is_aromatic,
                    "degree": a.degree,
                    "hydrogens": a.hydrogens,
                }
                for a in self.atoms
            ],
            "edges": [list(e) for e in self.edges],
            "features": self.features.tolist(),
        }


def _one_hot(index: int, width: int) -> np.ndarray:
    row = np.zeros(width)
    row[min(index, width - 1)] = 1.0
    return row


def featurize(graph: MolGraph) -> np.ndarray:
    """Per-atom binary feature rows, one per heavy atom.

    Concatenation of: symbol one-hot over :data:`ATOM_SYMBOLS_V1` (unknown
    symbols map to the final slot), degree one-hot 0-10, total-hydrogen
    one-hot 0-10, implicit-valence one-hot 0-10, and the aromatic bit.
    """
    rows = np.zeros((graph.n_atoms, FEATURE_WIDTH))
    for i, atom in enumerate(graph.atoms):
        try:
            sym_idx = ATOM_SYMBOLS_V1.index(atom.symbol)
        except ValueError:
            sym_idx = N_SYMBOLS - 1
        offset = 0
        rows[i, sym_idx] = 1.0
        offset += N_SYMBOLS
        rows[i, offset:offset + ONE_HOT_RANGE] = _one_hot(atom.degree, ONE_HOT_RANGE)
        offset += ONE_HOT_RANGE
        rows[i, offset:offset + ONE_HOT_RANGE] = _one_hot(atom.hydrogens, ONE_HOT_RANGE)
        offset += ONE_HOT_RANGE
        rows[i, offset:offset + ONE_HOT_RANGE] = _one_hot(atom.implicit_valence, ONE_HOT_RANGE)
        offset += ONE_HOT_RANGE
        if atom.is_aromatic:
            rows[i, offset] = 1.0
    return rows


class _Parser:
    def __init__(self, smiles: str):
        self.smiles = smiles
        self.pos = 0
        self.atoms: list[Atom] = []
        self.bonds: list[tuple[int, int, int]] = []  # (i, j, order)
        self.edge_set: set[tuple[int, int]] = set()
        self.prev: int | None = None
        self.pending_bond: str | None = None
        self.branch_stack: list[int] = []
        self.ring_open: dict[int, tuple[int, str | None, int]] = {}
        self.discarded: set[str] = set()

    def error(self, message: str, position: int | None = None):
        raise SmilesParseError(message, self.pos if position is None else position)

    def add_atom(self, atom: Atom):
        idx = len(self.atoms)
        self.atoms.append(atom)
        if self.prev is not None:
            self.add_bond(self.prev, idx, self.pending_bond)
        elif self.pending_bond is not None:
            self.error("bond symbol before any atom")
        self.pending_bond = None
        self.prev = idx

    def add_bond(self, i: int, j: int, bond: str | None):
        if i == j:
            self.error("ring closure bonds an atom to itself")
        key = (min(i, j), max(i, j))
        if key in self.edge_set:
            self.error(f"duplicate bond between atoms {key[0]} and {key[1]}")
        if bond is None:
            order = 1
        else:
            order = _BOND_ORDERS[bond]
        self.edge_set.add(key)
        self.bonds.append((key[0], key[1], order))

    def close_or_open_ring(self, number: int, position: int):
        if self.prev is None:
            self.error("ring closure before any atom", position)
        if number in self.ring_open:
            other, other_bond, _ = self.ring_open.pop(number)
            bond = self.pending_bond
            if bond is not None and other_bond is not None and bond != other_bond:
                self.error(f"conflicting bond symbols on ring closure {number}", position)
            self.add_bond(other, self.prev, bond if bond is not None else other_bond)
        else:
            self.ring_open[number] = (self.prev, self.pending_bond, position)
        self.pending_bond = None

    def parse_bracket(self) -> Atom:
        s = self.smiles
        start = self.pos
        j = start + 1
        if j < len(s) and s[j].isdigit():
            while j < len(s) and s[j].isdigit():
                j += 1
            self.discarded.add("isotope labels")
        if j >= len(s):
            self.error("unterminated bracket atom", start)
        if s[j].isupper():
            symbol = s[j]
            j += 1
            if j < len(s) and s[j].islower() and s[j].isalpha():
                symbol += s[j]
                j += 1
            aromatic = False
        elif s[j] in AROMATIC_LETTERS:
            symbol = s[j].upper()
            aromatic = True
            j += 1
        else:
            self.error("expected element symbol in bracket", j)
        while j < len(s) and s[j] == "@":
            self.discarded.add("chirality markers")
            j += 1
        hydrogens = 0
        if j < len(s) and s[j] == "H":
            j += 1
            digits = ""
            while j < len(s) and s[j].isdigit():
                digits += s[j]
                j += 1
            hydrogens = int(digits) if digits else 1
        if j < len(s) and s[j] in "+-":
            sign = s[j]
            j += 1
            while j < len(s) and (s[j] == sign or s[j].isdigit()):
                j += 1
            self.discarded.add("formal charges")
        if j >= len(s) or s[j] != "]":
            self.error("expected ']' to close bracket atom", j if j < len(s) else len(s) - 1)
        self.pos = j + 1
        return Atom(symbol=symbol, is_aromatic=aromatic, bracket=True, explicit_h=hydrogens)

    def run(self) -> MolGraph:
        s = self.smiles
        if not s:
            self.error("empty SMILES string", 0)
        while self.pos < len(s):
            ch = s[self.pos]
            if ch == "(":
                if self.prev is None:
                    self.error("branch opens before any atom")
                if self.pending_bond is not None:
                    self.error("dangling bond symbol before '('")
                self.branch_stack.append(self.prev)
                self.pos += 1
            elif ch == ")":
                if not self.branch_stack:
                    self.error("unbalanced ')'")
                if self.pending_bond is not None:
                    self.error("dangling bond symbol before ')'")
                self.prev = self.branch_stack.pop()
                self.pos += 1
            elif ch in _BOND_ORDERS:
                if self.prev is None:
                    self.error("bond symbol before any atom")
                if self.pending_bond is not None:
                    self.error("two bond symbols in a row")
                self.pending_bond = ch
                self.pos += 1
            elif ch in "/\\":
                if self.pending_bond is not None:
                    self.error("two bond symbols in a row")
                self.discarded.add("stereo bond markers")
                self.pending_bond = "-"
                self.pos += 1
            elif ch.isdigit():
                self.close_or_open_ring(int(ch), self.pos)
                self.pos += 1
            elif ch == "%":
                digits = s[self.pos + 1:self.pos + 3]
                if len(digits) < 2 or not digits.isdigit():
                    self.error("'%' ring closure needs two digits")
                self.close_or_open_ring(int(digits), self.pos)
                self.pos += 3
            elif ch == "[":
                self.add_atom(self.parse_bracket())
            elif ch.isupper():
                two = s[self.pos:self.pos + 2]
                if two in ORGANIC_TWO_LETTER:
                    self.add_atom(Atom(symbol=two))
                    self.pos += 2
                elif ch in ORGANIC_ONE_LETTER:
                    self.add_atom(Atom(symbol=ch))
                    self.pos += 1
                else:
                    self.error(f"unknown atom symbol {ch!r}")
            elif ch in AROMATIC_LETTERS:
                self.add_atom(Atom(symbol=ch.upper(), is_aromatic=True))
                self.pos += 1
            else:
                self.error(f"unsupported character {ch!r}")
        if self.branch_stack:
            self.error("unclosed '('", len(s) - 1)
        if self.pending_bond is not None:
            self.error("dangling bond symbol at end of string", len(s) - 1)
        if self.ring_open:
            number, (_, _, position) = next(iter(self.ring_open.items()))
            self.error(f"unmatched ring closure {number}", position)
        if self.discarded:
            warnings.warn(
                f"ignored SMILES features: {', '.join(sorted(self.discarded))}",
                DiscardedFeatureWarning,
                stacklevel=3,
            )
        return self.finish()

    def finish(self) -> MolGraph:
        n = len(self.atoms)
        order_sum = [0] * n
        degree = [0] * n
        adjacency = np.zeros((n, n))
        edges = []
        for i, j, order in self.bonds:
            order_sum[i] += order
            order_sum[j] += order
            degree[i] += 1
            degree[j] += 1
            adjacency[i, j] = 1.0
            adjacency[j, i] = 1.0
            edges.append((i, j))
        for idx, atom in enumerate(self.atoms):
            atom.degree = degree[idx]
            if atom.bracket:
                # bracket atoms state their hydrogens; nothing is implicit
                atom.hydrogens = atom.explicit_h
                atom.implicit_valence = 0
            else:
                valence = DEFAULT_VALENCE[atom.symbol]
                # an aromatic atom donates one bonding slot to the ring system
                free = valence - order_sum[idx] - (1 if atom.is_aromatic else 0)
                atom.hydrogens = max(0, free)
                atom.implicit_valence = atom.hydrogens
        graph = MolGraph(atoms=self.atoms, edges=edges, adjacency=adjacency,
                         features=np.zeros((n, FEATURE_WIDTH)))
        graph.features = featurize(graph)
        return graph


def parse_smiles(smiles: str) -> MolGraph:
    """Parse a SMILES string from the supported subset into a molecular graph.

    Raises :class:`SmilesParseError` (with the byte offset of the offending
    character) for anything outside the subset.
    """
    return _Parser(smiles).run()
