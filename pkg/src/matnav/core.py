"""Domain types and composition/formula arithmetic shared by all modules.

Everything here is an immutable value object: safe to share across worker
processes and to use as dictionary keys where hashing is defined.
"""

from __future__ import annotations

import math
import re
from collections.abc import Iterable, Mapping
from fractions import Fraction

import numpy as np

from . import elements
from .constants import AVOGADRO
from .errors import MalformedFormula, MissingMass, UnknownElement

__all__ = [
    "Lattice",
    "Site",
    "Structure",
    "Composition",
    "parse_formula",
    "format_formula",
    "reduce_composition",
    "atom_fractions",
    "density",
]

_MIN_BASIS_LENGTH = 0.1  # Å; shorter vectors are degenerate for our purposes


class Lattice:
    """A 3x3 row-vector basis in Å; right-handed and non-degenerate."""

    __slots__ = ("_basis",)

    def __init__(self, basis) -> None:
        arr = np.asarray(basis, dtype=float)
        if arr.shape != (3, 3) or not np.all(np.isfinite(arr)):
            raise ValueError("lattice basis must be a finite 3x3 matrix")
        det = float(np.linalg.det(arr))
        if det <= 0.0:
            raise ValueError(f"lattice basis must be right-handed (det={det:g})")
        lengths = np.linalg.norm(arr, axis=1)
        if np.any(lengths <= _MIN_BASIS_LENGTH):
            raise ValueError("lattice basis vector shorter than 0.1 Å")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "_basis", arr)

    def __setattr__(self, name, value):  # immutable value object
        raise AttributeError("Lattice is immutable")

    @property
    def basis(self) -> np.ndarray:
        return self._basis

    @property
    def volume(self) -> float:
        """Cell volume in ų."""
        return float(np.linalg.det(self._basis))

    @property
    def lengths(self) -> tuple[float, float, float]:
        a, b, c = np.linalg.norm(self._basis, axis=1)
        return float(a), float(b), float(c)

    @property
    def angles(self) -> tuple[float, float, float]:
        """Cell angles (alpha, beta, gamma) in degrees."""
        a, b, c = self._basis

        def angle(u, v):
            cosv = float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v)))
            return math.degrees(math.acos(max(-1.0, min(1.0, cosv))))

        return angle(b, c), angle(a, c), angle(a, b)

    @classmethod
    def from_parameters(cls, a, b, c, alpha, beta, gamma) -> "Lattice":
        """Standard crystallographic convention: a along x, b in the xy-plane."""
        al, be, ga = (math.radians(x) for x in (alpha, beta, gamma))
        cos_al, cos_be, cos_ga = math.cos(al), math.cos(be), math.cos(ga)
        sin_ga = math.sin(ga)
        if abs(sin_ga) < 1e-12:
            raise ValueError("gamma angle degenerate")
        cx = c * cos_be
        cy = c * (cos_al - cos_be * cos_ga) / sin_ga
        cz_sq = c * c - cx * cx - cy * cy
        if cz_sq <= 0.0:
            raise ValueError("cell angles do not define a positive-volume cell")
        basis = [
            [a, 0.0, 0.0],
            [b * cos_ga, b * sin_ga, 0.0],
            [cx, cy, math.sqrt(cz_sq)],
        ]
        return cls(basis)

    def cartesian(self, frac) -> np.ndarray:
        """Fractional -> Cartesian coordinates (rows)."""
        return np.asarray(frac, dtype=float) @ self._basis

    def __eq__(self, other):
        if not isinstance(other, Lattice):
            return NotImplemented
        return np.array_equal(self._basis, other._basis)

    def __hash__(self):
        return hash(self._basis.tobytes())

    def __repr__(self):
        a, b, c = self.lengths
        al, be, ga = self.angles
        return f"Lattice(a={a:.4f}, b={b:.4f}, c={c:.4f}, angles=({al:.2f}, {be:.2f}, {ga:.2f}))"


def _normalize_frac(x: float) -> float:
    y = x - math.floor(x)
    # floor subtraction can round to exactly 1.0 for tiny negatives
    return 0.0 if y >= 1.0 else y


class Site:
    """One atom: element symbol plus fractional coordinates in [0, 1)."""

    __slots__ = ("_element", "_frac")

    def __init__(self, element: str, frac) -> None:
        if not elements.is_element(element):
            raise UnknownElement(f"unknown element symbol {element!r}")
        arr = np.asarray(frac, dtype=float)
        if arr.shape != (3,) or not np.all(np.isfinite(arr)):
            raise ValueError("fractional coordinates must be a finite 3-vector")
        arr = np.array([_normalize_frac(v) for v in arr])
        arr.flags.writeable = False
        object.__setattr__(self, "_element", element)
        object.__setattr__(self, "_frac", arr)

    def __setattr__(self, name, value):
        raise AttributeError("Site is immutable")

    @property
    def element(self) -> str:
        return self._element

    @property
    def frac(self) -> np.ndarray:
        return self._frac

    def __eq__(self, other):
        if not isinstance(other, Site):
            return NotImplemented
        return self._element == other._element and np.array_equal(self._frac, other._frac)

    def __hash__(self):
        return hash((self._element, self._frac.tobytes()))

    def __repr__(self):
        x, y, z = self._frac
        return f"Site({self._element!r}, ({x:.6f}, {y:.6f}, {z:.6f}))"


class Structure:
    """A periodic crystal: lattice, ordered sites, opaque id."""

    __slots__ = ("_lattice", "_sites", "_id")

    def __init__(self, lattice: Lattice, sites: Iterable[Site], id: str = "") -> None:
        if not isinstance(lattice, Lattice):
            lattice = Lattice(lattice)
        site_tuple = tuple(sites)
        if not site_tuple:
            raise ValueError("structure must contain at least one site")
        for s in site_tuple:
            if not isinstance(s, Site):
                raise TypeError("sites must be Site instances")
        object.__setattr__(self, "_lattice", lattice)
        object.__setattr__(self, "_sites", site_tuple)
        object.__setattr__(self, "_id", str(id))

    def __setattr__(self, name, value):
        raise AttributeError("Structure is immutable")

    @property
    def lattice(self) -> Lattice:
        return self._lattice

    @property
    def sites(self) -> tuple[Site, ...]:
        return self._sites

    @property
    def id(self) -> str:
        return self._id

    @property
    def n_sites(self) -> int:
        return len(self._sites)

    @property
    def volume(self) -> float:
        return self._lattice.volume

    def frac_coords(self) -> np.ndarray:
        return np.array([s.frac for s in self._sites])

    def cart_coords(self) -> np.ndarray:
        return self._lattice.cartesian(self.frac_coords())

    def symbols(self) -> tuple[str, ...]:
        return tuple(s.element for s in self._sites)

    def composition(self) -> "Composition":
        counts: dict[str, Fraction] = {}
        for s in self._sites:
            counts[s.element] = counts.get(s.element, Fraction(0)) + 1
        return Composition(counts)

    def with_id(self, new_id: str) -> "Structure":
        return Structure(self._lattice, self._sites, new_id)

    def __eq__(self, other):
        if not isinstance(other, Structure):
            return NotImplemented
        return (
            self._lattice == other._lattice
            and self._sites == other._sites
            and self._id == other._id
        )

    def __repr__(self):
        return f"Structure(id={self._id!r}, n_sites={self.n_sites}, V={self.volume:.3f})"


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**9)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"cannot interpret count {value!r}")


class Composition(Mapping):
    """Element -> non-negative rational count; zero counts are dropped."""

    __slots__ = ("_counts",)

    def __init__(self, counts: Mapping[str, object]) -> None:
        clean: dict[str, Fraction] = {}
        for symbol, raw in counts.items():
            if not elements.is_element(symbol):
                raise UnknownElement(f"unknown element symbol {symbol!r}")
            count = _as_fraction(raw)
            if count < 0:
                raise ValueError(f"negative count for {symbol}")
            if count > 0:
                clean[symbol] = count
        if not clean:
            raise ValueError("composition must contain at least one element")
        object.__setattr__(self, "_counts", dict(sorted(clean.items())))

    def __setattr__(self, name, value):
        raise AttributeError("Composition is immutable")

    def __getitem__(self, symbol: str) -> Fraction:
        return self._counts[symbol]

    def __iter__(self):
        return iter(self._counts)

    def __len__(self):
        return len(self._counts)

    @property
    def counts(self) -> dict[str, Fraction]:
        return dict(self._counts)

    @property
    def total_atoms(self) -> Fraction:
        return sum(self._counts.values(), Fraction(0))

    @property
    def elements(self) -> tuple[str, ...]:
        return tuple(self._counts)

    def reduced(self) -> "Composition":
        return reduce_composition(self)

    def fractions(self) -> dict[str, float]:
        return atom_fractions(self)

    def formula(self) -> str:
        return format_formula(self)

    def __eq__(self, other):
        if not isinstance(other, Composition):
            return NotImplemented
        return self._counts == other._counts

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __repr__(self):
        inner = ", ".join(f"{el}: {ct}" for el, ct in self._counts.items())
        return f"Composition({{{inner}}})"


_TOKEN = re.compile(r"([A-Z][a-z]?)|(\d+(?:\.\d+)?)|([()])|(.)")


def parse_formula(text: str) -> Composition:
    """Parse a chemical formula with nested parenthesized groups.

    Subscripts may be integers or decimals; a missing subscript means 1.
    Hydration dots and charge annotations are out of scope here (the
    literature normalizer strips those before calling in).
    """
    if not isinstance(text, str) or not text.strip():
        raise MalformedFormula("empty formula")
    text = text.strip()
    if not text.isascii():
        raise MalformedFormula(f"non-ASCII formula {text!r}")

    # stack of partial count maps; parentheses push/pop
    stack: list[dict[str, Fraction]] = [{}]
    pos = 0
    prev: str | None = None  # "element" | "group" | None; what a subscript may follow

    for match in _TOKEN.finditer(text):
        symbol, number, paren, junk = match.groups()
        if junk is not None:
            raise MalformedFormula(f"unexpected character {junk!r} at position {match.start()}")
        if symbol is not None:
            if not elements.is_element(symbol):
                raise UnknownElement(f"unknown element symbol {symbol!r} in {text!r}")
            level = stack[-1]
            level[symbol] = level.get(symbol, Fraction(0)) + 1
            prev = "element"
            pos = match.start()
        elif number is not None:
            if prev is None:
                raise MalformedFormula(f"dangling subscript {number!r} in {text!r}")
            mult = _as_fraction(number) if "." in number else Fraction(int(number))
            if mult == 0:
                raise MalformedFormula(f"zero subscript in {text!r}")
            level = stack[-1]
            if prev == "element":
                # the element was just incremented by 1; replace that 1
                last = _last_symbol(text, pos)
                level[last] += mult - 1
            else:
                for el in level:
                    level[el] *= mult
                merged = stack[-2]
                for el, ct in level.items():
                    merged[el] = merged.get(el, Fraction(0)) + ct
                stack.pop()
            prev = None
        elif paren == "(":
            # a pending closed group without subscript merges with multiplier 1
            if prev == "group":
                _merge_top(stack)
            stack.append({})
            prev = None
        else:  # ")"
            if prev == "group":
                _merge_top(stack)
            if len(stack) < 2:
                raise MalformedFormula(f"unbalanced ')' in {text!r}")
            if not stack[-1]:
                raise MalformedFormula(f"empty group in {text!r}")
            prev = "group"

    if prev == "group":
        _merge_top(stack)
    if len(stack) != 1:
        raise MalformedFormula(f"unbalanced '(' in {text!r}")
    if not stack[0]:
        raise MalformedFormula(f"formula {text!r} contains no elements")
    return Composition(stack[0])


def _last_symbol(text: str, pos: int) -> str:
    m = re.match(r"[A-Z][a-z]?", text[pos:])
    assert m is not None
    return m.group(0)


def _merge_top(stack: list[dict[str, Fraction]]) -> None:
    top = stack.pop()
    dest = stack[-1]
    for el, ct in top.items():
        dest[el] = dest.get(el, Fraction(0)) + ct


def reduce_composition(c: Composition) -> Composition:
    """Integer counts with gcd 1; relative proportions preserved."""
    denominators = [ct.denominator for ct in c.values()]
    scale = Fraction(math.lcm(*denominators))
    integer_counts = {el: int(ct * scale) for el, ct in c.items()}
    g = math.gcd(*integer_counts.values())
    return Composition({el: Fraction(ct // g) for el, ct in integer_counts.items()})


def atom_fractions(c: Composition) -> dict[str, float]:
    """Element -> atomic fraction; exact rational arithmetic, floats out."""
    total = c.total_atoms
    return {el: float(ct / total) for el, ct in c.items()}


def _presentation_key(symbol: str) -> tuple[float, str]:
    # conventional cation-first ordering: ascending electronegativity
    row = elements.ELEMENTS[symbol]
    chi = row[3] if row[3] is not None else 10.0
    return (chi, symbol)


def format_formula(c: Composition) -> str:
    """Reduced formula, elements in ascending-electronegativity order.

    Inverse of parse_formula on reduced compositions.
    """
    reduced = reduce_composition(c)
    parts = []
    for el in sorted(reduced.elements, key=_presentation_key):
        ct = int(reduced[el])
        parts.append(el if ct == 1 else f"{el}{ct}")
    return "".join(parts)


def density(s: Structure) -> float:
    """Mass density in g/cm³: (sum of atomic masses) / (N_A * V)."""
    try:
        total_mass = sum(elements.atomic_mass(site.element) for site in s.sites)
    except MissingMass:
        raise
    volume_cm3 = s.volume * 1e-24
    return total_mass / (AVOGADRO * volume_cm3)
