"""Generate the bundled fixture set under src/matnav/fixtures/.

Everything the end-to-end run needs is produced here deterministically:
a literature corpus whose P90 rounds to 800 K, a stub materials database
(structures + elastic tensors), a model-consistent reference-phase table
for the hull, and the default run config. Rerunning the script rewrites
identical bytes, so fixtures stay auditable in review.
"""

from __future__ import annotations

import json
import math
import sys
from pathlib import Path

from matnav.cif import write_cif
from matnav.core import Lattice, Site, Structure, parse_formula
from matnav.elasticity import ElasticTensor, debye_from_tensor
from matnav.evidence import percentile_bands
from matnav.pipeline.config import (
    DataPaths,
    EvidenceParams,
    PredictorParams,
    RunConfig,
    ServiceParams,
    StabilityParams,
)
from matnav.stability import CompositionEnergyModel
from matnav.structgen import GenConfig

FIXTURES = Path(__file__).resolve().parent.parent / "src" / "matnav" / "fixtures"

# ------------------------------------------------------------------ corpus

CORPUS = {
    "survey_soft_lattices.txt": """\
Debye temperatures of soft and intermediate lattices
====================================================

Heat-capacity and elastic measurements fix the acoustic energy scale of a
solid, and the Debye model compresses that scale into a single
temperature. The entries below are room-temperature literature values for
the soft end of the reference set used throughout this survey.

Pb exhibits a Debye temperature of 105 K, the softest lattice considered here.
Au shows a Debye temperature of 165 K, quoted for the annealed state.
The Debye temperature of InSe is about 190 K, from low-temperature heat-capacity fits.
SnSe has a Debye temperature of 210 K, consistent with its strongly anharmonic lattice.
NaCl shows a Debye temperature of 321 K, derived from single-crystal elastic constants.
Cu exhibits a Debye temperature of 343 K, the textbook value.
The Debye temperature of GaAs was measured at 360 K, using inelastic neutron scattering.
Ge has a Debye temperature of 374 K, quoted at the high-temperature limit.
""",
    "survey_refractories.txt": """\
Refractory metals and diborides
===============================

Stiff bonding raises sound velocities even in dense metals, and the
layered diborides combine light boron sheets with strong covalent bonds.
Values below come from resonant ultrasound and calorimetry.

alpha-W has a Debye temperature of 400 K, remarkable for so dense a metal.
Cr exhibits a Debye temperature of 630 K, the highest among the 3d metals listed here.
The Debye temperature of MgB2 reaches 748 K, reflecting the stiff covalent boron sheets.
ZrB2 shows a Debye temperature of 755 K, from resonant ultrasound spectroscopy.
The Debye temperature of TiO2 is approximately 760 K, quoted for the rutile phase.
""",
    "survey_semiconductors.txt": """\
Semiconductors and oxides
=========================

Tetrahedral semiconductors sit in the middle of the acoustic scale, and
the beryllium oxides sit near its top.

ZnO has a Debye temperature of 440 K, quoted for the wurtzite polytype.
GaN shows a Debye temperature of 600 K, from low-temperature calorimetry.
Si has a Debye temperature of 645 K, the standard reference value.
BeO exhibits a Debye temperature of 1280 K, among the highest of any oxide.
""",
    "survey_light_compounds.txt": """\
Light-element compounds
=======================

The carbon end of the acoustic scale is extreme: short, stiff bonds and
tiny masses.

C (diamond) exhibits a Debye temperature of 2230 K, the highest known value.
Al shows a Debye temperature of 428 K, a useful light-metal baseline.
The Debye temperature of Fe is 470 K, taken below the Curie point.
A duplicate determination reads: (Theta_D = 470 K was found for a pure Fe).
The Debye temperature of Si is about 645 K, repeated here as a cross-check.
""",
}

LITERATURE_VALUES = {
    "Pb": 105.0,
    "Au": 165.0,
    "InSe": 190.0,
    "SnSe": 210.0,
    "NaCl": 321.0,
    "Cu": 343.0,
    "GaAs": 360.0,
    "Ge": 374.0,
    "W": 400.0,
    "Al": 428.0,
    "ZnO": 440.0,
    "Fe": 470.0,
    "GaN": 600.0,
    "Cr": 630.0,
    "Si": 645.0,
    "MgB2": 748.0,
    "ZrB2": 755.0,
    "TiO2": 760.0,
    "BeO": 1280.0,
    "C": 2230.0,
}

# ------------------------------------------------------------- structures

_FCC = [(0.0, 0.0, 0.0), (0.0, 0.5, 0.5), (0.5, 0.0, 0.5), (0.5, 0.5, 0.0)]


def _cubic(a: float, sites: list[tuple[str, tuple[float, float, float]]]) -> Structure:
    lat = Lattice.from_parameters(a, a, a, 90.0, 90.0, 90.0)
    return Structure(lat, [Site(el, frac) for el, frac in sites])


def fcc_metal(a: float, el: str) -> Structure:
    return _cubic(a, [(el, f) for f in _FCC])


def bcc_metal(a: float, el: str) -> Structure:
    return _cubic(a, [(el, (0.0, 0.0, 0.0)), (el, (0.5, 0.5, 0.5))])


def diamond_lattice(a: float, el: str) -> Structure:
    shifted = [(fa + 0.25, fb + 0.25, fc + 0.25) for fa, fb, fc in _FCC]
    return _cubic(a, [(el, f) for f in _FCC] + [(el, f) for f in shifted])


def zincblende(a: float, cation: str, anion: str) -> Structure:
    shifted = [(fa + 0.25, fb + 0.25, fc + 0.25) for fa, fb, fc in _FCC]
    return _cubic(a, [(cation, f) for f in _FCC] + [(anion, f) for f in shifted])


def rocksalt(a: float, cation: str, anion: str) -> Structure:
    shifted = [(fa + 0.5, fb + 0.5, fc + 0.5) for fa, fb, fc in _FCC]
    return _cubic(a, [(cation, f) for f in _FCC] + [(anion, f) for f in shifted])


def wurtzite(a: float, c: float, cation: str, anion: str, u: float) -> Structure:
    lat = Lattice.from_parameters(a, a, c, 90.0, 90.0, 120.0)
    third = 1.0 / 3.0
    sites = [
        Site(cation, (third, 2 * third, 0.0)),
        Site(cation, (2 * third, third, 0.5)),
        Site(anion, (third, 2 * third, u)),
        Site(anion, (2 * third, third, u + 0.5)),
    ]
    return Structure(lat, sites)


def hcp_metal(a: float, c: float, el: str) -> Structure:
    lat = Lattice.from_parameters(a, a, c, 90.0, 90.0, 120.0)
    third = 1.0 / 3.0
    return Structure(
        lat, [Site(el, (third, 2 * third, 0.25)), Site(el, (2 * third, third, 0.75))]
    )


def antifluorite_primitive(a: float, cation: str, anion: str) -> Structure:
    """3-atom fcc primitive cell: anion at the origin, cations on the
    tetrahedral pair. a is the conventional cubic parameter."""
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


def alb2_type(a: float, c: float, metal: str, boron: str) -> Structure:
    lat = Lattice.from_parameters(a, a, c, 90.0, 90.0, 120.0)
    third = 1.0 / 3.0
    sites = [
        Site(metal, (0.0, 0.0, 0.0)),
        Site(boron, (third, 2 * third, 0.5)),
        Site(boron, (2 * third, third, 0.5)),
    ]
    return Structure(lat, sites)


def perovskite(a: float, big: str, small: str, anion: str) -> Structure:
    return _cubic(
        a,
        [
            (big, (0.0, 0.0, 0.0)),
            (small, (0.5, 0.5, 0.5)),
            (anion, (0.0, 0.5, 0.5)),
            (anion, (0.5, 0.0, 0.5)),
            (anion, (0.5, 0.5, 0.0)),
        ],
    )


def spinel(a: float, u: float, a_el: str, b_el: str, o_el: str) -> Structure:
    """56-atom conventional normal spinel. A sits on the diamond sublattice,
    B on the octahedral 16d set, and each A carries its anion tetrahedron
    (u is the anion parameter, ideal 3/8)."""
    a_base = [(0.0, 0.0, 0.0), (0.25, 0.25, 0.25)]
    b_base = [
        (0.625, 0.625, 0.625),
        (0.625, 0.875, 0.875),
        (0.875, 0.625, 0.875),
        (0.875, 0.875, 0.625),
    ]
    # the two diamond sublattices carry opposite tetrahedral orientations
    tetra = {
        a_base[0]: [(-1, -1, -1), (-1, 1, 1), (1, -1, 1), (1, 1, -1)],
        a_base[1]: [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)],
    }
    delta = u - 0.25
    sites: list[tuple[str, tuple[float, float, float]]] = []
    for t in _FCC:
        for base in a_base:
            pos = tuple(p + q for p, q in zip(base, t))
            sites.append((a_el, pos))
            for sign in tetra[base]:
                sites.append(
                    (o_el, tuple(p + delta * s for p, s in zip(pos, sign)))
                )
        for base in b_base:
            sites.append((b_el, tuple(p + q for p, q in zip(base, t))))
    return _cubic(a, sites)


# (structure, cubic/hexagonal constants in GPa or None, accepted lit theta_d)
STUB_MATERIALS: list[tuple[str, str, Structure, tuple | None]] = [
    ("db-0001", "C", diamond_lattice(3.5668, "C"), ("cubic", 1079.0, 124.0, 578.0)),
    ("db-0002", "SiC", zincblende(4.3596, "Si", "C"), ("cubic", 390.0, 142.0, 256.0)),
    ("db-0003", "BeO", wurtzite(2.698, 4.378, "Be", "O", 0.378), ("hex", 470.0, 168.0, 119.0, 494.0, 153.0)),
    ("db-0004", "Be2C", antifluorite_primitive(4.342, "Be", "C"), ("cubic", 520.0, 90.0, 215.0)),
    ("db-0005", "Si", diamond_lattice(5.4310, "Si"), ("cubic", 166.0, 64.0, 80.0)),
    ("db-0006", "MgO", rocksalt(4.212, "Mg", "O"), ("cubic", 297.0, 95.0, 156.0)),
    ("db-0007", "Al", fcc_metal(4.0495, "Al"), ("cubic", 107.0, 61.0, 28.0)),
    ("db-0008", "Fe", bcc_metal(2.8665, "Fe"), ("cubic", 226.0, 140.0, 116.0)),
    ("db-0009", "Cu", fcc_metal(3.6149, "Cu"), ("cubic", 168.0, 121.0, 75.0)),
    ("db-0010", "BN", zincblende(3.6157, "B", "N"), ("cubic", 820.0, 190.0, 480.0)),
    ("db-0011", "Ge", diamond_lattice(5.6575, "Ge"), ("cubic", 126.0, 44.0, 68.0)),
    ("db-0012", "W", bcc_metal(3.1652, "W"), ("cubic", 522.0, 204.0, 161.0)),
    ("db-0013", "NaCl", rocksalt(5.6402, "Na", "Cl"), None),
    # anchors covering the substitution chemistry the generator explores
    ("db-0014", "CaO", rocksalt(4.811, "Ca", "O"), ("cubic", 221.0, 57.0, 80.0)),
    ("db-0015", "SrO", rocksalt(5.160, "Sr", "O"), ("cubic", 175.0, 46.0, 56.0)),
    ("db-0016", "BaO", rocksalt(5.523, "Ba", "O"), ("cubic", 112.0, 46.0, 34.0)),
    ("db-0017", "PbS", rocksalt(5.936, "Pb", "S"), ("cubic", 124.0, 33.0, 23.0)),
    ("db-0018", "Sn", diamond_lattice(6.489, "Sn"), ("cubic", 69.0, 29.0, 36.0)),
    ("db-0019", "Be", hcp_metal(2.2858, 3.5843, "Be"), ("hex", 292.3, 26.7, 14.0, 336.4, 162.5)),
    # stiff carbide/boride/nitride anchors between BeO and diamond
    ("db-0020", "TiC", rocksalt(4.328, "Ti", "C"), ("cubic", 513.0, 106.0, 178.0)),
    ("db-0021", "TiB2", alb2_type(3.030, 3.229, "Ti", "B"), ("hex", 660.0, 48.0, 93.0, 432.0, 260.0)),
    ("db-0022", "AlN", wurtzite(3.111, 4.981, "Al", "N", 0.382), ("hex", 396.0, 137.0, 108.0, 373.0, 116.0)),
    # ternaries so element-count and spread statistics are trained, not guessed
    ("db-0023", "SrTiO3", perovskite(3.905, "Sr", "Ti", "O"), ("cubic", 318.0, 102.0, 123.0)),
    ("db-0024", "BaTiO3", perovskite(4.012, "Ba", "Ti", "O"), ("cubic", 206.0, 140.0, 126.0)),
    ("db-0025", "MgAl2O4", spinel(8.086, 0.387, "Mg", "Al", "O"), ("cubic", 283.0, 155.0, 155.0)),
]


def _tensor(spec: tuple) -> ElasticTensor:
    if spec[0] == "cubic":
        return ElasticTensor.cubic(*spec[1:])
    return ElasticTensor.hexagonal(*spec[1:])


# ------------------------------------------------------- reference phases

REFERENCE_COMPOSITIONS = [
    "Be", "C", "Mg", "Ca", "Sr", "Ba", "Si", "Ge", "Sn", "Pb",
    "Be2C", "Mg2C", "Ca2C", "Sr2C", "Ba2C",
    "SiC", "GeC", "SnC",
    "Be2Si", "Be2Ge", "Be2Sn", "Be2Pb",
]


def build_references(model: CompositionEnergyModel) -> list[tuple[str, float]]:
    rows = []
    for formula in REFERENCE_COMPOSITIONS:
        comp = parse_formula(formula)
        e_form = 0.0 if len(comp) == 1 else model.e_form(comp)
        rows.append((formula, round(e_form, 6)))
    return rows


# ------------------------------------------------------------- run config

RUN_CONFIG = RunConfig(
    query="find stable materials with a high Debye temperature",
    evidence=EvidenceParams(),
    generation=GenConfig(supercell=(2, 2, 2), p_sub=0.15, sigma=0.03, seed=14, count=64),
    predictor=PredictorParams(ridge_lambda=0.008, test_fraction=0.2, split_seed=3),
    stability=StabilityParams(threshold=0.05),
    data=DataPaths(
        corpus_dir="corpus",
        references_csv="reference_phases.csv",
        db_base_url="http://stub.local",
        db_stub_file="stub_db.json",
        db_cache_dir=None,
        db_api_key="fixture-key",
        db_elements=(
            "Al", "B", "Ba", "Be", "C", "Ca", "Cl", "Cu", "Fe", "Ge", "Mg",
            "N", "Na", "O", "Pb", "S", "Si", "Sn", "Sr", "Ti", "W",
        ),
        prototype_ids=("db-0004",),
    ),
    service=ServiceParams(),
)


def main() -> int:
    corpus_dir = FIXTURES / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for name, text in CORPUS.items():
        (corpus_dir / name).write_text(text)

    materials = []
    report = []
    for mat_id, formula, structure, tensor_spec in STUB_MATERIALS:
        entry = {
            "id": mat_id,
            "formula": formula,
            "cif": write_cif(structure.with_id(mat_id)),
            "elastic_tensor": None,
        }
        if tensor_spec is not None:
            tensor = _tensor(tensor_spec)
            entry["elastic_tensor"] = [[float(x) for x in row] for row in tensor.c]
            theta = debye_from_tensor(structure, tensor)
            report.append((mat_id, formula, theta))
        materials.append(entry)
    (FIXTURES / "stub_db.json").write_text(
        json.dumps({"materials": materials}, indent=2, sort_keys=True)
    )

    model = CompositionEnergyModel(
        RUN_CONFIG.stability.energy_k_chi, RUN_CONFIG.stability.energy_k_radius
    )
    lines = ["formula,e_form_eV_per_atom"]
    for formula, e_form in build_references(model):
        lines.append(f"{formula},{e_form}")
    (FIXTURES / "reference_phases.csv").write_text("\n".join(lines) + "\n")

    (FIXTURES / "run_config.json").write_text(RUN_CONFIG.to_json() + "\n")

    values = sorted(LITERATURE_VALUES.values())
    bands = percentile_bands(values)
    print(f"literature corpus: {len(values)} values, p90 = {bands.p90:.1f} K "
          f"-> threshold {round(bands.p90 / 50.0) * 50.0:.0f} K")
    print("derived Debye temperatures from stub tensors:")
    for mat_id, formula, theta in report:
        print(f"  {mat_id}  {formula:<5} {theta:8.1f} K")
    be2c = parse_formula("Be2C")
    print(f"model e_form(Be2C) = {model.e_form(be2c):+.4f} eV/atom")
    return 0


if __name__ == "__main__":
    sys.exit(main())
