"""Candidate generation: supercell, substitution, perturbation, filtering.

Every candidate is produced from its own RNG substream derived from
(seed, candidate_index) with the counter-based Philox generator, so output
is bitwise identical regardless of worker count. Filters run in a fixed
order (duplicate, charge neutrality, minimum distance) and rejected
candidates stay in the output with their rejection reason.
"""

from __future__ import annotations

import hashlib
import itertools
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import elements
from ._kernels import min_image_distance_matrix
from .core import Composition, Lattice, Site, Structure, format_formula, reduce_composition
from .errors import MissingOxidationStates, NoPrototypes

__all__ = [
    "SubstitutionRules",
    "GenConfig",
    "Candidate",
    "DEFAULT_RULES",
    "STATUS_GENERATED",
    "STATUS_PREDICTED",
    "STATUS_VALIDATED",
    "STATUS_REJECTED",
    "make_supercell",
    "substitute",
    "perturb",
    "min_distance_ok",
    "charge_neutral_possible",
    "dedup_key",
    "generate",
]

STATUS_GENERATED = "generated"
STATUS_PREDICTED = "predicted"
STATUS_VALIDATED = "validated"
STATUS_REJECTED = "rejected"

_FORWARD = {
    STATUS_GENERATED: (STATUS_PREDICTED, STATUS_REJECTED),
    STATUS_PREDICTED: (STATUS_VALIDATED, STATUS_REJECTED),
    STATUS_VALIDATED: (),
    STATUS_REJECTED: (),
}


@dataclass(frozen=True)
class SubstitutionRules:
    """Same-group interchange sets; an element appears in at most one set."""

    groups: tuple[frozenset[str], ...]

    def __post_init__(self):
        groups = tuple(frozenset(g) for g in self.groups)
        seen: set[str] = set()
        for group in groups:
            for el in group:
                if not elements.is_element(el):
                    raise ValueError(f"unknown element {el!r} in substitution group")
                if el in seen:
                    raise ValueError(f"element {el!r} appears in more than one group")
                seen.add(el)
        object.__setattr__(self, "groups", groups)

    def group_of(self, element: str) -> frozenset[str] | None:
        for group in self.groups:
            if element in group:
                return group
        return None


# main-group rows 1, 2, 13, 14, 15, 16, 17; user-overridable
DEFAULT_RULES = SubstitutionRules(
    groups=(
        frozenset({"Li", "Na", "K", "Rb", "Cs"}),
        frozenset({"Be", "Mg", "Ca", "Sr", "Ba"}),
        frozenset({"B", "Al", "Ga", "In", "Tl"}),
        frozenset({"C", "Si", "Ge", "Sn", "Pb"}),
        frozenset({"N", "P", "As", "Sb", "Bi"}),
        frozenset({"O", "S", "Se", "Te"}),
        frozenset({"F", "Cl", "Br", "I"}),
    )
)


@dataclass(frozen=True)
class GenConfig:
    supercell: tuple[int, int, int] = (2, 2, 2)
    p_sub: float = 0.15
    sigma: float = 0.03  # Å, Cartesian
    min_dist_factor: float = 0.6
    seed: int = 0
    count: int = 100

    def __post_init__(self):
        if any(int(d) < 1 for d in self.supercell) or len(self.supercell) != 3:
            raise ValueError(f"supercell dims must be >= 1, got {self.supercell}")
        object.__setattr__(self, "supercell", tuple(int(d) for d in self.supercell))
        if not 0.0 <= self.p_sub <= 1.0:
            raise ValueError(f"p_sub must lie in [0, 1], got {self.p_sub}")
        if self.sigma < 0.0:
            raise ValueError(f"sigma must be non-negative, got {self.sigma}")
        if self.min_dist_factor <= 0.0:
            raise ValueError(f"min_dist_factor must be positive, got {self.min_dist_factor}")
        if self.count < 1:
            raise ValueError(f"count must be at least 1, got {self.count}")


@dataclass(frozen=True)
class Candidate:
    """One generated structure moving forward through the screening stages."""

    structure: Structure
    parent_id: str
    ops_log: tuple = ()
    predicted_theta_d: float | None = None
    e_form: float | None = None
    e_hull: float | None = None
    status: str = STATUS_GENERATED
    reason: str = ""

    @property
    def id(self) -> str:
        return self.structure.id

    def advance(self, status: str, **updates) -> "Candidate":
        """Move to a later status; backward transitions are a bug."""
        if status != self.status and status not in _FORWARD[self.status]:
            raise ValueError(f"illegal status transition {self.status} -> {status}")
        return replace(self, status=status, **updates)


def make_supercell(s: Structure, dims: Sequence[int]) -> Structure:
    da, db, dc = (int(d) for d in dims)
    if min(da, db, dc) < 1:
        raise ValueError(f"supercell dims must be >= 1, got {dims}")
    scale = np.diag([da, db, dc]).astype(float)
    lattice = Lattice(scale @ s.lattice.basis)
    dims_arr = np.array([da, db, dc], dtype=float)
    sites = []
    for ta, tb, tc in itertools.product(range(da), range(db), range(dc)):
        shift = np.array([ta, tb, tc], dtype=float)
        for site in s.sites:
            sites.append(Site(site.element, (site.frac + shift) / dims_arr))
    return Structure(lattice, sites, id=s.id)


def substitute(
    s: Structure,
    rules: SubstitutionRules,
    p: float,
    rng: np.random.Generator,
) -> Structure:
    """Each group-covered site swaps, with probability p, to a uniformly
    chosen other member of its group. Elements outside all groups never
    change. Positions and lattice are untouched."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"substitution probability must lie in [0, 1], got {p}")
    sites = []
    for site in s.sites:
        group = rules.group_of(site.element)
        if group is not None and len(group) > 1 and rng.random() < p:
            others = sorted(group - {site.element})
            element = others[int(rng.integers(len(others)))]
            sites.append(Site(element, site.frac))
        else:
            sites.append(site)
    return Structure(s.lattice, sites, id=s.id)


def perturb(s: Structure, sigma: float, rng: np.random.Generator) -> Structure:
    """Independent Normal(0, sigma²) Cartesian displacement per component,
    mapped through the inverse lattice to fractional shifts."""
    if sigma < 0.0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma == 0.0:
        return s
    disp = rng.normal(0.0, sigma, size=(s.n_sites, 3))
    frac_shift = disp @ np.linalg.inv(s.lattice.basis)
    sites = [
        Site(site.element, site.frac + frac_shift[i]) for i, site in enumerate(s.sites)
    ]
    return Structure(s.lattice, sites, id=s.id)


def min_distance_ok(s: Structure, factor: float) -> bool:
    """True iff every periodic-image pair distance clears
    factor * (r_cov(a) + r_cov(b)), images within one cell translation."""
    radii = np.array([elements.covalent_radius(site.element) for site in s.sites])
    dist = min_image_distance_matrix(s.frac_coords(), s.lattice.basis)
    threshold = factor * (radii[:, None] + radii[None, :])
    return bool(np.all(dist >= threshold))


def charge_neutral_possible(
    c: Composition, oxidation_table: dict[str, Iterable[int]] | None = None
) -> bool:
    """True iff one oxidation state per element (uniform over its sites)
    can balance the composition exactly. Single-element compositions are
    metallic and always pass."""
    reduced = reduce_composition(c)
    if len(reduced) == 1:
        return True
    per_element = []
    for el in reduced.elements:
        states = (
            tuple(oxidation_table[el])
            if oxidation_table is not None
            else elements.oxidation_states(el)
        )
        if not states:
            raise MissingOxidationStates(f"no oxidation states for {el!r}")
        per_element.append([(el, state) for state in states])
    counts = reduced.counts
    for assignment in itertools.product(*per_element):
        total = sum(counts[el] * state for el, state in assignment)
        if total == 0:
            return True
    return False


def dedup_key(s: Structure) -> str:
    """Digest invariant to site order and rigid fractional translation:
    (reduced formula, quantized cell parameters, quantized sorted
    minimum-image pair-distance multiset), all at 1e-3 resolution."""
    formula = format_formula(s.composition())
    a, b, c = s.lattice.lengths
    alpha, beta, gamma = s.lattice.angles
    cell_q = tuple(round(x * 1000.0) for x in (a, b, c, alpha, beta, gamma))
    dist = min_image_distance_matrix(s.frac_coords(), s.lattice.basis)
    iu = np.triu_indices(s.n_sites, k=1)
    dist_q = tuple(sorted(int(round(d * 1000.0)) for d in dist[iu]))
    payload = repr((formula, cell_q, dist_q)).encode()
    return hashlib.blake2b(payload, digest_size=16).hexdigest()


def _candidate_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence((seed, index))))


def _build_one(
    prototypes: Sequence[Structure],
    cfg: GenConfig,
    rules: SubstitutionRules,
    index: int,
) -> Candidate:
    prototype = prototypes[index % len(prototypes)]
    rng = _candidate_rng(cfg.seed, index)
    expanded = make_supercell(prototype, cfg.supercell)
    substituted = substitute(expanded, rules, cfg.p_sub, rng)
    changed = [
        (i, old.element, new.element)
        for i, (old, new) in enumerate(zip(expanded.sites, substituted.sites))
        if old.element != new.element
    ]
    final = perturb(substituted, cfg.sigma, rng).with_id(f"cand-{index:05d}")
    ops_log = (
        ("supercell", {"dims": list(cfg.supercell)}),
        ("substitute", {"p": cfg.p_sub, "changes": changed}),
        ("perturb", {"sigma": cfg.sigma}),
    )
    return Candidate(structure=final, parent_id=prototype.id, ops_log=ops_log)


def generate(
    prototypes: Sequence[Structure],
    cfg: GenConfig,
    rules: SubstitutionRules = DEFAULT_RULES,
    n_workers: int = 1,
) -> list[Candidate]:
    """Produce cfg.count candidates (round-robin over prototypes), then
    filter. The result is a pure function of (prototypes, cfg, rules):
    construction is data-parallel over candidate indices and the dedup
    pass runs in index order afterwards, so worker count never matters."""
    prototypes = list(prototypes)
    if not prototypes:
        raise NoPrototypes("candidate generation needs at least one prototype structure")
    indices = range(cfg.count)
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            built = list(pool.map(lambda i: _build_one(prototypes, cfg, rules, i), indices))
    else:
        built = [_build_one(prototypes, cfg, rules, i) for i in indices]

    out: list[Candidate] = []
    seen: set[str] = set()
    for cand in built:
        key = dedup_key(cand.structure)
        if key in seen:
            out.append(cand.advance(STATUS_REJECTED, reason="duplicate"))
            continue
        seen.add(key)
        if not charge_neutral_possible(cand.structure.composition()):
            out.append(cand.advance(STATUS_REJECTED, reason="charge_imbalance"))
            continue
        if not min_distance_ok(cand.structure, cfg.min_dist_factor):
            out.append(cand.advance(STATUS_REJECTED, reason="min_distance"))
            continue
        out.append(cand)
    return out
