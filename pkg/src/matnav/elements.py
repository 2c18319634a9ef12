"""Embedded element data shared by every module that touches chemistry.

One static table so results are reproducible offline. Sources:

* atomic masses: IUPAC 2021 abridged standard atomic weights; for elements
  without a standard weight, the mass number of the most stable isotope.
* covalent radii: Cordero et al., Dalton Trans. 2008 (low-spin values where
  the reference lists two); Pyykko single-bond radii for Z > 96.
* electronegativities: Pauling scale; ``None`` where undefined.
* oxidation states: common states only, intentionally conservative — these
  feed the charge-neutrality filter, which enumerates their products.

Each row: symbol -> (Z, mass [u], covalent radius [A], Pauling chi or None,
group 1-18 (lanthanides/actinides as group 3), period, oxidation states).
"""

from __future__ import annotations

from .errors import (
    MissingElementData,
    MissingMass,
    MissingOxidationStates,
    MissingRadius,
    UnknownElement,
)

# fmt: off
ELEMENTS: dict[str, tuple[int, float, float, float | None, int, int, tuple[int, ...]]] = {
    "H":  (1,   1.008,      0.31, 2.20, 1,  1, (-1, 1)),
    "He": (2,   4.002602,   0.28, None, 18, 1, ()),
    "Li": (3,   6.94,       1.28, 0.98, 1,  2, (1,)),
    "Be": (4,   9.0121831,  0.96, 1.57, 2,  2, (2,)),
    "B":  (5,   10.81,      0.84, 2.04, 13, 2, (3,)),
    "C":  (6,   12.011,     0.76, 2.55, 14, 2, (-4, 4)),
    "N":  (7,   14.007,     0.71, 3.04, 15, 2, (-3, 3, 5)),
    "O":  (8,   15.999,     0.66, 3.44, 16, 2, (-2,)),
    "F":  (9,   18.998403,  0.57, 3.98, 17, 2, (-1,)),
    "Ne": (10,  20.1797,    0.58, None, 18, 2, ()),
    "Na": (11,  22.989769,  1.66, 0.93, 1,  3, (1,)),
    "Mg": (12,  24.305,     1.41, 1.31, 2,  3, (2,)),
    "Al": (13,  26.981538,  1.21, 1.61, 13, 3, (3,)),
    "Si": (14,  28.085,     1.11, 1.90, 14, 3, (-4, 4)),
    "P":  (15,  30.973762,  1.07, 2.19, 15, 3, (-3, 3, 5)),
    "S":  (16,  32.06,      1.05, 2.58, 16, 3, (-2, 4, 6)),
    "Cl": (17,  35.45,      1.02, 3.16, 17, 3, (-1, 1, 3, 5, 7)),
    "Ar": (18,  39.948,     1.06, None, 18, 3, ()),
    "K":  (19,  39.0983,    2.03, 0.82, 1,  4, (1,)),
    "Ca": (20,  40.078,     1.76, 1.00, 2,  4, (2,)),
    "Sc": (21,  44.955908,  1.70, 1.36, 3,  4, (3,)),
    "Ti": (22,  47.867,     1.60, 1.54, 4,  4, (2, 3, 4)),
    "V":  (23,  50.9415,    1.53, 1.63, 5,  4, (2, 3, 4, 5)),
    "Cr": (24,  51.9961,    1.39, 1.66, 6,  4, (2, 3, 6)),
    "Mn": (25,  54.938044,  1.39, 1.55, 7,  4, (2, 3, 4, 7)),
    "Fe": (26,  55.845,     1.32, 1.83, 8,  4, (2, 3)),
    "Co": (27,  58.933194,  1.26, 1.88, 9,  4, (2, 3)),
    "Ni": (28,  58.6934,    1.24, 1.91, 10, 4, (2,)),
    "Cu": (29,  63.546,     1.32, 1.90, 11, 4, (1, 2)),
    "Zn": (30,  65.38,      1.22, 1.65, 12, 4, (2,)),
    "Ga": (31,  69.723,     1.22, 1.81, 13, 4, (3,)),
    "Ge": (32,  72.630,     1.20, 2.01, 14, 4, (-4, 2, 4)),
    "As": (33,  74.921595,  1.19, 2.18, 15, 4, (-3, 3, 5)),
    "Se": (34,  78.971,     1.20, 2.55, 16, 4, (-2, 4, 6)),
    "Br": (35,  79.904,     1.20, 2.96, 17, 4, (-1, 1, 5)),
    "Kr": (36,  83.798,     1.16, 3.00, 18, 4, ()),
    "Rb": (37,  85.4678,    2.20, 0.82, 1,  5, (1,)),
    "Sr": (38,  87.62,      1.95, 0.95, 2,  5, (2,)),
    "Y":  (39,  88.90584,   1.90, 1.22, 3,  5, (3,)),
    "Zr": (40,  91.224,     1.75, 1.33, 4,  5, (4,)),
    "Nb": (41,  92.90637,   1.64, 1.60, 5,  5, (3, 5)),
    "Mo": (42,  95.95,      1.54, 2.16, 6,  5, (4, 6)),
    "Tc": (43,  97.0,       1.47, 1.90, 7,  5, (4, 7)),
    "Ru": (44,  101.07,     1.46, 2.20, 8,  5, (3, 4)),
    "Rh": (45,  102.90550,  1.42, 2.28, 9,  5, (3,)),
    "Pd": (46,  106.42,     1.39, 2.20, 10, 5, (2, 4)),
    "Ag": (47,  107.8682,   1.45, 1.93, 11, 5, (1,)),
    "Cd": (48,  112.414,    1.44, 1.69, 12, 5, (2,)),
    "In": (49,  114.818,    1.42, 1.78, 13, 5, (1, 3)),
    "Sn": (50,  118.710,    1.39, 1.96, 14, 5, (-4, 2, 4)),
    "Sb": (51,  121.760,    1.39, 2.05, 15, 5, (-3, 3, 5)),
    "Te": (52,  127.60,     1.38, 2.10, 16, 5, (-2, 4, 6)),
    "I":  (53,  126.90447,  1.39, 2.66, 17, 5, (-1, 1, 5, 7)),
    "Xe": (54,  131.293,    1.40, 2.60, 18, 5, (2, 4, 6)),
    "Cs": (55,  132.905452, 2.44, 0.79, 1,  6, (1,)),
    "Ba": (56,  137.327,    2.15, 0.89, 2,  6, (2,)),
    "La": (57,  138.90547,  2.07, 1.10, 3,  6, (3,)),
    "Ce": (58,  140.116,    2.04, 1.12, 3,  6, (3, 4)),
    "Pr": (59,  140.90766,  2.03, 1.13, 3,  6, (3,)),
    "Nd": (60,  144.242,    2.01, 1.14, 3,  6, (3,)),
    "Pm": (61,  145.0,      1.99, 1.13, 3,  6, (3,)),
    "Sm": (62,  150.36,     1.98, 1.17, 3,  6, (2, 3)),
    "Eu": (63,  151.964,    1.98, 1.20, 3,  6, (2, 3)),
    "Gd": (64,  157.25,     1.96, 1.20, 3,  6, (3,)),
    "Tb": (65,  158.92535,  1.94, 1.10, 3,  6, (3, 4)),
    "Dy": (66,  162.500,    1.92, 1.22, 3,  6, (3,)),
    "Ho": (67,  164.93033,  1.92, 1.23, 3,  6, (3,)),
    "Er": (68,  167.259,    1.89, 1.24, 3,  6, (3,)),
    "Tm": (69,  168.93422,  1.90, 1.25, 3,  6, (3,)),
    "Yb": (70,  173.045,    1.87, 1.10, 3,  6, (2, 3)),
    "Lu": (71,  174.9668,   1.87, 1.27, 3,  6, (3,)),
    "Hf": (72,  178.49,     1.75, 1.30, 4,  6, (4,)),
    "Ta": (73,  180.94788,  1.70, 1.50, 5,  6, (5,)),
    "W":  (74,  183.84,     1.62, 2.36, 6,  6, (4, 6)),
    "Re": (75,  186.207,    1.51, 1.90, 7,  6, (4, 7)),
    "Os": (76,  190.23,     1.44, 2.20, 8,  6, (3, 4)),
    "Ir": (77,  192.217,    1.41, 2.20, 9,  6, (3, 4)),
    "Pt": (78,  195.084,    1.36, 2.28, 10, 6, (2, 4)),
    "Au": (79,  196.966569, 1.36, 2.54, 11, 6, (1, 3)),
    "Hg": (80,  200.592,    1.32, 2.00, 12, 6, (1, 2)),
    "Tl": (81,  204.38,     1.45, 1.62, 13, 6, (1, 3)),
    "Pb": (82,  207.2,      1.46, 2.33, 14, 6, (-4, 2, 4)),
    "Bi": (83,  208.98040,  1.48, 2.02, 15, 6, (-3, 3, 5)),
    "Po": (84,  209.0,      1.40, 2.00, 16, 6, (-2, 2, 4)),
    "At": (85,  210.0,      1.50, 2.20, 17, 6, (-1, 1)),
    "Rn": (86,  222.0,      1.50, None, 18, 6, ()),
    "Fr": (87,  223.0,      2.60, 0.70, 1,  7, (1,)),
    "Ra": (88,  226.0,      2.21, 0.90, 2,  7, (2,)),
    "Ac": (89,  227.0,      2.15, 1.10, 3,  7, (3,)),
    "Th": (90,  232.0377,   2.06, 1.30, 3,  7, (4,)),
    "Pa": (91,  231.03588,  2.00, 1.50, 3,  7, (4, 5)),
    "U":  (92,  238.02891,  1.96, 1.38, 3,  7, (4, 6)),
    "Np": (93,  237.0,      1.90, 1.36, 3,  7, (5,)),
    "Pu": (94,  244.0,      1.87, 1.28, 3,  7, (4,)),
    "Am": (95,  243.0,      1.80, 1.13, 3,  7, (3,)),
    "Cm": (96,  247.0,      1.69, 1.28, 3,  7, (3,)),
    "Bk": (97,  247.0,      1.68, 1.30, 3,  7, (3,)),
    "Cf": (98,  251.0,      1.68, 1.30, 3,  7, (3,)),
    "Es": (99,  252.0,      1.65, 1.30, 3,  7, (3,)),
    "Fm": (100, 257.0,      1.67, 1.30, 3,  7, (3,)),
    "Md": (101, 258.0,      1.73, 1.30, 3,  7, (3,)),
    "No": (102, 259.0,      1.76, 1.30, 3,  7, (2, 3)),
    "Lr": (103, 262.0,      1.61, None, 3,  7, (3,)),
    "Rf": (104, 267.0,      1.57, None, 4,  7, (4,)),
    "Db": (105, 268.0,      1.49, None, 5,  7, (5,)),
    "Sg": (106, 271.0,      1.43, None, 6,  7, (6,)),
    "Bh": (107, 272.0,      1.41, None, 7,  7, (7,)),
    "Hs": (108, 270.0,      1.34, None, 8,  7, (8,)),
    "Mt": (109, 276.0,      1.29, None, 9,  7, ()),
    "Ds": (110, 281.0,      1.28, None, 10, 7, ()),
    "Rg": (111, 280.0,      1.21, None, 11, 7, ()),
    "Cn": (112, 285.0,      1.22, None, 12, 7, ()),
    "Nh": (113, 286.0,      1.36, None, 13, 7, ()),
    "Fl": (114, 289.0,      1.43, None, 14, 7, ()),
    "Mc": (115, 290.0,      1.62, None, 15, 7, ()),
    "Lv": (116, 293.0,      1.75, None, 16, 7, ()),
    "Ts": (117, 294.0,      1.65, None, 17, 7, ()),
    "Og": (118, 294.0,      1.57, None, 18, 7, ()),
}
# fmt: on

SYMBOLS = frozenset(ELEMENTS)


def is_element(symbol: str) -> bool:
    return symbol in ELEMENTS


def _row(symbol: str):
    try:
        return ELEMENTS[symbol]
    except KeyError:
        raise UnknownElement(f"unknown element symbol {symbol!r}") from None


def atomic_number(symbol: str) -> int:
    return _row(symbol)[0]


def atomic_mass(symbol: str) -> float:
    mass = _row(symbol)[1]
    if mass is None or mass <= 0:
        raise MissingMass(f"no atomic mass tabulated for {symbol!r}")
    return mass


def covalent_radius(symbol: str) -> float:
    radius = _row(symbol)[2]
    if radius is None or radius <= 0:
        raise MissingRadius(f"no covalent radius tabulated for {symbol!r}")
    return radius


def electronegativity(symbol: str) -> float:
    chi = _row(symbol)[3]
    if chi is None:
        raise MissingElementData(f"no electronegativity tabulated for {symbol!r}")
    return chi


def group_number(symbol: str) -> int:
    return _row(symbol)[4]


def period(symbol: str) -> int:
    return _row(symbol)[5]


def oxidation_states(symbol: str) -> tuple[int, ...]:
    states = _row(symbol)[6]
    if not states:
        raise MissingOxidationStates(f"no common oxidation states tabulated for {symbol!r}")
    return states
