"""CIF writer/parser round trips and parser robustness."""

import random
import string

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import cubic_structure, random_structure, rocksalt
from matnav.cif import parse_cif, parse_cif_blocks, write_cif
from matnav.errors import CifError
from matnav.structgen import make_supercell


def assert_structures_close(a, b, tol=1e-6):
    assert np.allclose(a.lattice.basis, b.lattice.basis, atol=tol)
    assert len(a.sites) == len(b.sites)
    for sa, sb in zip(a.sites, b.sites):
        assert sa.element == sb.element
        da = np.asarray(sa.frac) - np.asarray(sb.frac)
        da -= np.round(da)  # periodic wrap
        assert np.abs(da).max() < tol


def test_round_trip_rocksalt():
    s = rocksalt(4.212, "Mg", "O")
    assert_structures_close(s, parse_cif(write_cif(s)))


def test_round_trip_triclinic():
    s = random_structure(np.random.default_rng(7))
    assert_structures_close(s, parse_cif(write_cif(s)))


def test_atom_loop_row_count_matches_sites():
    base = cubic_structure(3.0, [("C", (0.0, 0.0, 0.0))])
    sup = make_supercell(base, (2, 2, 2))
    text = write_cif(sup)
    doc = parse_cif_blocks(text)[0]
    atom_loops = [rows for headers, rows in doc.loops if any("atom_site" in h for h in headers)]
    assert len(atom_loops) == 1
    assert len(atom_loops[0]) == 8


def test_multi_block_document():
    a = cubic_structure(3.0, [("C", (0, 0, 0))])
    b = rocksalt(5.64, "Na", "Cl")
    blocks = parse_cif_blocks(write_cif(a) + "\n" + write_cif(b))
    assert len(blocks) == 2


@pytest.mark.parametrize(
    "text",
    [
        "",
        "data_x\n_cell_length_a 3.0\n",  # missing cell tags and atoms
        "data_x\nloop_\n_atom_site_label\nC1\n",  # no cell at all
        "data_x\n_cell_length_a banana\n",  # unparseable number
        "loop_\n_atom_site_fract_x\n0.0\n",  # headerless fragment
    ],
)
def test_parser_raises_structured_errors(text):
    with pytest.raises(CifError):
        parse_cif(text)


@settings(max_examples=300)
@given(st.text(max_size=400))
def test_parser_never_crashes_on_text(text):
    try:
        parse_cif(text)
    except CifError:
        pass


@settings(max_examples=200)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=0, max_value=60))
def test_parser_survives_mutated_documents(seed, n_mutations):
    """Valid CIF with random byte-level mutations parses or raises CifError."""
    rng = random.Random(seed)
    text = list(write_cif(rocksalt(4.2, "Mg", "O")))
    for _ in range(n_mutations):
        idx = rng.randrange(len(text))
        op = rng.random()
        if op < 0.4:
            text[idx] = rng.choice(string.printable)
        elif op < 0.7:
            del text[idx]
        else:
            text.insert(idx, rng.choice(string.printable))
    try:
        parse_cif("".join(text))
    except CifError:
        pass


@settings(max_examples=60)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_round_trip_random_structures(seed):
    s = random_structure(np.random.default_rng(seed))
    assert_structures_close(s, parse_cif(write_cif(s)))
