"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import pytest

from matnav.core import Lattice, Site, Structure
from matnav.pipeline.cli import default_config_path
from matnav.pipeline.config import load_config

ELEMENT_POOL = (
    "Be", "Mg", "Ca", "Sr", "Ba", "C", "Si", "Ge", "Sn", "Pb",
    "O", "S", "Al", "B", "N", "Na", "Cl", "Fe", "Cu", "W",
)


def cubic_structure(a: float, sites: list[tuple[str, tuple[float, float, float]]]) -> Structure:
    lat = Lattice.from_parameters(a, a, a, 90.0, 90.0, 90.0)
    return Structure(lat, [Site(el, frac) for el, frac in sites])


def rocksalt(a: float, cation: str, anion: str) -> Structure:
    fcc = [(0.0, 0.0, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)]
    shifted = [(fa + 0.5, fb + 0.5, fc + 0.5) for fa, fb, fc in fcc]
    return cubic_structure(a, [(cation, f) for f in fcc] + [(anion, f) for f in shifted])


def diamond_lattice(a: float, el: str) -> Structure:
    fcc = [(0.0, 0.0, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)]
    shifted = [(fa + 0.25, fb + 0.25, fc + 0.25) for fa, fb, fc in fcc]
    return cubic_structure(a, [(el, f) for f in fcc] + [(el, f) for f in shifted])


def antifluorite_primitive(a: float, cation: str, anion: str) -> Structure:
    b = a / math.sqrt(2.0)
    lat = Lattice.from_parameters(b, b, b, 60.0, 60.0, 60.0)
    return Structure(
        lat,
        [
            Site(anion, (0.0, 0.0, 0.0)),
            Site(cation, (0.25, 0.25, 0.25)),
            Site(cation, (0.75, 0.75, 0.75)),
        ],
    )


def random_structure(rng: np.random.Generator, n_sites: int | None = None) -> Structure:
    """A random but geometrically sane periodic structure."""
    n = n_sites or int(rng.integers(1, 9))
    abc = rng.uniform(3.0, 9.0, size=3)
    angles = rng.uniform(70.0, 110.0, size=3)
    lat = Lattice.from_parameters(*abc, *angles)
    sites = [
        Site(str(rng.choice(ELEMENT_POOL)), tuple(rng.uniform(0.0, 1.0, size=3)))
        for _ in range(n)
    ]
    return Structure(lat, sites)


def random_spd_tensor(rng: np.random.Generator) -> np.ndarray:
    """Symmetric positive-definite 6x6 in a physically plausible range."""
    a = rng.normal(0.0, 60.0, size=(6, 6))
    c = a @ a.T / 6.0 + np.eye(6) * rng.uniform(20.0, 120.0)
    return (c + c.T) / 2.0


@pytest.fixture(scope="session")
def fixture_cfg():
    """The bundled run config and its resolution base directory."""
    return load_config(default_config_path())


@pytest.fixture(scope="session")
def fixture_base(fixture_cfg) -> Path:
    return fixture_cfg[1]


@pytest.fixture(scope="session")
def bundled_run(tmp_path_factory, fixture_cfg) -> Path:
    """One shared end-to-end run of the bundled configuration."""
    from matnav.pipeline.stages import run_stage1, run_stage2, run_stage3

    cfg, base = fixture_cfg
    run_dir = tmp_path_factory.mktemp("bundled") / "run"
    run_stage1(cfg, run_dir, base)
    run_stage2(cfg, run_dir, base)
    run_stage3(cfg, run_dir, base)
    return run_dir
