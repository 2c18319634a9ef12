"""CIF 1.1 subset reader/writer for P1 structures.

Covers the slice of the grammar the pipeline produces and consumes: cell
tags, an atom-site loop with fractional coordinates, comments, quoted
strings, semicolon text blocks, and uncertainty suffixes like ``3.0(2)``.
Symmetry operators beyond the identity are rejected rather than silently
dropped, since dropping them corrupts site counts.

The parser is total: any input, however mangled, yields either a Structure
or a structured error (CifError family / UnknownElement), never a raw
exception from the guts.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import Lattice, Site, Structure
from .errors import (
    CifError,
    MatnavError,
    MissingAtomLoop,
    MissingCellTag,
    NumericParse,
    SymmetryUnsupported,
    UnknownElement,
)

__all__ = ["CifDocument", "parse_cif", "parse_cif_blocks", "write_cif"]

_CELL_TAGS = (
    "_cell_length_a",
    "_cell_length_b",
    "_cell_length_c",
    "_cell_angle_alpha",
    "_cell_angle_beta",
    "_cell_angle_gamma",
)

_SYMOP_TAGS = ("_symmetry_equiv_pos_as_xyz", "_space_group_symop_operation_xyz")

_FRACT_TAGS = ("_atom_site_fract_x", "_atom_site_fract_y", "_atom_site_fract_z")


@dataclass
class CifDocument:
    """One data block: scalar tags plus loop tables."""

    data_block_name: str
    tags: dict[str, str] = field(default_factory=dict)
    loops: list[tuple[tuple[str, ...], list[tuple[str, ...]]]] = field(default_factory=list)


_QUOTED = re.compile(r"'[^']*'|\"[^\"]*\"|\S+")
_UNCERTAINTY = re.compile(r"^([+-]?[\d.eE+-]+)\((\d+)\)$")


def _strip_comment(line: str) -> str:
    quote = None
    for i, ch in enumerate(line):
        if quote:
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            return line[:i]
    return line


def _tokenize(text: str) -> list[str]:
    """Flatten CIF source into value tokens; semicolon blocks become one token."""
    tokens: list[str] = []
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        line = lines[i]
        if line.startswith(";"):
            block = [line[1:]]
            i += 1
            while i < len(lines) and not lines[i].startswith(";"):
                block.append(lines[i])
                i += 1
            i += 1  # swallow the closing ';' line (EOF tolerated)
            tokens.append("\n".join(block).strip())
            continue
        for raw in _QUOTED.findall(_strip_comment(line)):
            if len(raw) >= 2 and raw[0] in "'\"" and raw[-1] == raw[0]:
                raw = raw[1:-1]
            tokens.append(raw)
        i += 1
    return tokens


def _is_keyword(token: str) -> bool:
    low = token.lower()
    return low.startswith("data_") or low == "loop_" or low.startswith("_")


def parse_cif_blocks(text: str) -> list[CifDocument]:
    """Parse CIF source into one document per data block.

    Tags appearing before any ``data_`` header are collected into an
    implicit unnamed block, so fragment files still parse.
    """
    if not isinstance(text, str):
        raise CifError("CIF source must be text")
    tokens = _tokenize(text)
    docs: list[CifDocument] = []
    current: CifDocument | None = None
    i = 0
    while i < len(tokens):
        token = tokens[i]
        low = token.lower()
        if low.startswith("data_"):
            current = CifDocument(data_block_name=token[5:])
            docs.append(current)
            i += 1
        elif low == "loop_":
            if current is None:
                current = CifDocument(data_block_name="")
                docs.append(current)
            i += 1
            columns: list[str] = []
            while i < len(tokens) and tokens[i].startswith("_"):
                columns.append(tokens[i].lower())
                i += 1
            if not columns:
                raise CifError("loop_ without column tags")
            values: list[str] = []
            while i < len(tokens) and not _is_keyword(tokens[i]):
                values.append(tokens[i])
                i += 1
            if len(values) % len(columns) != 0:
                raise CifError(
                    f"loop with {len(columns)} columns has {len(values)} values (ragged rows)"
                )
            rows = [
                tuple(values[j : j + len(columns)])
                for j in range(0, len(values), len(columns))
            ]
            current.loops.append((tuple(columns), rows))
        elif low.startswith("_"):
            if current is None:
                current = CifDocument(data_block_name="")
                docs.append(current)
            if i + 1 >= len(tokens) or _is_keyword(tokens[i + 1]):
                raise CifError(f"tag {token} has no value")
            current.tags[low] = tokens[i + 1]
            i += 2
        else:
            raise CifError(f"unexpected token {token!r} outside any tag or loop")
    return docs


def _numeric(tag: str, raw: str) -> float:
    text = raw.strip()
    m = _UNCERTAINTY.match(text)
    if m:
        text = m.group(1)
    try:
        value = float(text)
    except ValueError:
        raise NumericParse(f"{tag}: cannot parse numeric value {raw!r}") from None
    if value != value or value in (float("inf"), float("-inf")):
        raise NumericParse(f"{tag}: non-finite value {raw!r}")
    return value


_IDENTITY_OP = re.compile(r"^[+]?x\s*,\s*[+]?y\s*,\s*[+]?z$")


def _check_symmetry(doc: CifDocument) -> None:
    hm = doc.tags.get("_symmetry_space_group_name_h-m")
    if hm is not None and hm.replace(" ", "").upper() not in ("P1", "?", "."):
        raise SymmetryUnsupported(f"space group {hm!r}: only P1 structures are supported")
    for columns, rows in doc.loops:
        for symtag in _SYMOP_TAGS:
            if symtag in columns:
                idx = columns.index(symtag)
                for row in rows:
                    op = row[idx].lower().strip()
                    if not _IDENTITY_OP.match(op):
                        raise SymmetryUnsupported(
                            f"symmetry operator {row[idx]!r}: only the identity is supported"
                        )
    for symtag in _SYMOP_TAGS:
        if symtag in doc.tags:
            op = doc.tags[symtag].lower().strip()
            if not _IDENTITY_OP.match(op):
                raise SymmetryUnsupported(
                    f"symmetry operator {doc.tags[symtag]!r}: only the identity is supported"
                )


def _element_from_row(columns: tuple[str, ...], row: tuple[str, ...]) -> str:
    if "_atom_site_type_symbol" in columns:
        raw = row[columns.index("_atom_site_type_symbol")]
    else:
        raw = row[columns.index("_atom_site_label")]
    symbol = re.sub(r"[\d+\-]+$", "", raw.strip())
    if not re.fullmatch(r"[A-Z][a-z]?", symbol):
        raise UnknownElement(f"cannot read an element symbol from {raw!r}")
    return symbol


def structure_from_document(doc: CifDocument) -> Structure:
    for tag in _CELL_TAGS:
        if tag not in doc.tags:
            raise MissingCellTag(f"required cell tag {tag} is missing")
    a, b, c, alpha, beta, gamma = (_numeric(tag, doc.tags[tag]) for tag in _CELL_TAGS)
    _check_symmetry(doc)

    atom_loop = None
    for columns, rows in doc.loops:
        has_fract = all(t in columns for t in _FRACT_TAGS)
        has_symbol = "_atom_site_type_symbol" in columns or "_atom_site_label" in columns
        if has_fract and has_symbol:
            atom_loop = (columns, rows)
            break
    if atom_loop is None:
        raise MissingAtomLoop(
            "no loop with _atom_site_fract_x/y/z and a type symbol or label"
        )
    columns, rows = atom_loop
    if not rows:
        raise MissingAtomLoop("atom-site loop has no rows")

    try:
        lattice = Lattice.from_parameters(a, b, c, alpha, beta, gamma)
    except ValueError as exc:
        raise CifError(f"cell parameters do not define a valid lattice: {exc}") from None

    sites = []
    for row in rows:
        element = _element_from_row(columns, row)
        frac = [_numeric(t, row[columns.index(t)]) for t in _FRACT_TAGS]
        try:
            sites.append(Site(element, frac))
        except ValueError as exc:
            raise CifError(f"invalid atom site: {exc}") from None
    return Structure(lattice, sites, id=doc.data_block_name)


def parse_cif(text: str) -> Structure:
    """Parse the first data block of a CIF file into a Structure."""
    try:
        docs = parse_cif_blocks(text)
        if not docs:
            raise MissingCellTag("document contains no data")
        return structure_from_document(docs[0])
    except MatnavError:
        raise
    except Exception as exc:  # parser must stay total on arbitrary input
        raise CifError(f"malformed CIF input: {exc}") from None


def _label_counts(structure: Structure) -> list[str]:
    seen: dict[str, int] = {}
    labels = []
    for site in structure.sites:
        seen[site.element] = seen.get(site.element, 0) + 1
        labels.append(f"{site.element}{seen[site.element]}")
    return labels


def write_cif(structure: Structure) -> str:
    """Emit deterministic CIF text; parses back within 1e-6 of the input."""
    block = re.sub(r"\s+", "_", structure.id.strip()) or "structure"
    a, b, c = structure.lattice.lengths
    alpha, beta, gamma = structure.lattice.angles
    lines = [
        f"data_{block}",
        f"_cell_length_a {a:.6f}",
        f"_cell_length_b {b:.6f}",
        f"_cell_length_c {c:.6f}",
        f"_cell_angle_alpha {alpha:.6f}",
        f"_cell_angle_beta {beta:.6f}",
        f"_cell_angle_gamma {gamma:.6f}",
        "_symmetry_space_group_name_H-M 'P 1'",
        "loop_",
        "_atom_site_label",
        "_atom_site_type_symbol",
        "_atom_site_fract_x",
        "_atom_site_fract_y",
        "_atom_site_fract_z",
    ]
    for label, site in zip(_label_counts(structure), structure.sites):
        x, y, z = site.frac
        lines.append(f"{label} {site.element} {x:.6f} {y:.6f} {z:.6f}")
    return "\n".join(lines) + "\n"
