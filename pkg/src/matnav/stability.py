"""Thermodynamic stability via energy above the composition convex hull.

The hull energy at a composition is the optimum of a tiny dense linear
program (minimize mixture formation energy subject to composition and
normalization constraints). A bespoke two-phase simplex with Bland's rule
solves it; problem sizes are a handful of rows by at most ~10³ columns,
and tests hold the solver to a brute-force mixture-enumeration oracle.

Formation energies are relative to elemental ground states (elements sit
at 0 by convention) and are supplied by a pluggable provider: a reference
file of externally relaxed energies, database-reported values, or an
explicitly labeled heuristic estimate.
"""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .core import Composition, atom_fractions, format_formula, parse_formula, reduce_composition
from .errors import InfeasibleComposition, MissingEnergy
from .structgen import STATUS_REJECTED, STATUS_VALIDATED, Candidate

__all__ = [
    "ReferencePhase",
    "HullResult",
    "hull_energy_at",
    "energy_above_hull",
    "filter_stable",
    "load_references",
    "references_to_csv",
    "CompositionEnergyModel",
    "TableEnergyProvider",
    "assign_energies",
    "DEFAULT_HULL_THRESHOLD",
]

DEFAULT_HULL_THRESHOLD = 0.05  # eV/atom, strict "<"
_LP_TOL = 1e-9


@dataclass(frozen=True)
class ReferencePhase:
    """A known phase competing on the hull; composition stored reduced."""

    composition: Composition
    e_form: float  # eV/atom, 0 for elemental ground states

    def __post_init__(self):
        if not math.isfinite(self.e_form):
            raise ValueError(f"e_form must be finite, got {self.e_form}")
        object.__setattr__(self, "composition", reduce_composition(self.composition))

    @property
    def formula(self) -> str:
        return format_formula(self.composition)


@dataclass(frozen=True)
class HullResult:
    e_hull: float  # eV/atom
    decomposition: tuple[tuple[ReferencePhase, float], ...]


# ------------------------------------------------------------ dense simplex


def _pivot(T: np.ndarray, basis: list[int], row: int, col: int) -> None:
    T[row] /= T[row, col]
    for r in range(T.shape[0]):
        if r != row and T[r, col] != 0.0:
            T[r] -= T[r, col] * T[row]
    basis[row] = col


def _bland_iterate(T: np.ndarray, basis: list[int], n_allowed: int) -> None:
    """Run simplex iterations under Bland's rule until optimal."""
    m = T.shape[0] - 1
    while True:
        entering = -1
        for j in range(n_allowed):
            if T[m, j] < -_LP_TOL:
                entering = j
                break
        if entering < 0:
            return
        leaving, best_ratio = -1, math.inf
        for i in range(m):
            if T[i, entering] > _LP_TOL:
                ratio = T[i, -1] / T[i, entering]
                if ratio < best_ratio - _LP_TOL or (
                    abs(ratio - best_ratio) <= _LP_TOL
                    and (leaving < 0 or basis[i] < basis[leaving])
                ):
                    leaving, best_ratio = i, ratio
        if leaving < 0:
            raise InfeasibleComposition("linear program is unbounded")
        _pivot(T, basis, leaving, entering)


def _solve_lp(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimize c @ x subject to A @ x = b, x >= 0. Two-phase simplex."""
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.array(c, dtype=float)
    m, n = A.shape
    for i in range(m):
        if b[i] < 0.0:
            A[i] = -A[i]
            b[i] = -b[i]

    # phase 1: artificial basis, minimize artificial sum
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -A.sum(axis=0)
    T[m, -1] = -b.sum()
    basis = list(range(n, n + m))
    _bland_iterate(T, basis, n_allowed=n + m)
    if -T[m, -1] > 1e-7:
        raise InfeasibleComposition("composition lies outside the span of the references")

    # drive residual artificials out of the basis; drop redundant rows
    keep = []
    for i in range(m):
        if basis[i] < n:
            keep.append(i)
            continue
        pivot_col = next((j for j in range(n) if abs(T[i, j]) > 1e-9), None)
        if pivot_col is None:
            continue  # redundant constraint row
        _pivot(T, basis, i, pivot_col)
        keep.append(i)
    rows = keep
    T2 = np.zeros((len(rows) + 1, n + 1))
    T2[: len(rows), :n] = T[rows][:, :n]
    T2[: len(rows), -1] = T[rows][:, -1]
    basis2 = [basis[i] for i in rows]

    # phase 2 cost row: reduced costs relative to the current basis
    T2[-1, :n] = c
    T2[-1, -1] = 0.0
    for i, bi in enumerate(basis2):
        T2[-1] -= c[bi] * T2[i]
    _bland_iterate(T2, basis2, n_allowed=n)

    x = np.zeros(n)
    for i, bi in enumerate(basis2):
        x[bi] = T2[i, -1]
    return x


# ------------------------------------------------------------- hull energy


def _fraction_vector(fractions: dict[str, float], element_order: Sequence[str]) -> np.ndarray:
    return np.array([fractions.get(el, 0.0) for el in element_order])


def _hull_lp(
    fractions: dict[str, float], refs: Sequence[ReferencePhase]
) -> tuple[float, tuple[tuple[ReferencePhase, float], ...]]:
    if not refs:
        raise InfeasibleComposition("reference set is empty")
    ref_elements: set[str] = set()
    for ref in refs:
        ref_elements.update(ref.composition.elements)
    missing = [el for el in fractions if fractions[el] > 0 and el not in ref_elements]
    if missing:
        raise InfeasibleComposition(
            f"no reference phase contains element(s): {', '.join(sorted(missing))}"
        )
    elements = sorted(ref_elements)
    ref_fracs = [atom_fractions(ref.composition) for ref in refs]
    # fraction rows for all but the last element; the dropped row is implied
    # by each column summing to 1 together with the normalization row
    A_rows = []
    b_vals = []
    for el in elements[:-1]:
        A_rows.append([rf.get(el, 0.0) for rf in ref_fracs])
        b_vals.append(fractions.get(el, 0.0))
    A_rows.append([1.0] * len(refs))
    b_vals.append(1.0)
    c = np.array([ref.e_form for ref in refs])
    lam = _solve_lp(c, np.array(A_rows), np.array(b_vals))
    energy = float(c @ lam)
    decomposition = tuple(
        (ref, float(weight)) for ref, weight in zip(refs, lam) if weight > 1e-9
    )
    return energy, decomposition


def hull_energy_at(
    x: dict[str, float] | Composition, refs: Sequence[ReferencePhase]
) -> float:
    """Lower convex envelope of the reference energies at composition x."""
    fractions = atom_fractions(x) if isinstance(x, Composition) else dict(x)
    energy, _ = _hull_lp(fractions, refs)
    return energy


def energy_above_hull(
    c: Composition,
    e_form: float,
    refs: Sequence[ReferencePhase],
    exclude: ReferencePhase | None = None,
) -> HullResult:
    """e_form minus the hull energy at c's composition.

    The full reference set competes by default, so a phase that IS the
    hull vertex at its composition gets e_hull = 0 exactly. Pass `exclude`
    to remove one specific entry (leave-one-out decomposition analysis).
    """
    if not math.isfinite(e_form):
        raise MissingEnergy(f"formation energy must be finite, got {e_form}")
    competing = [r for r in refs if r is not exclude] if exclude is not None else list(refs)
    fractions = atom_fractions(c)
    hull, decomposition = _hull_lp(fractions, competing)
    return HullResult(e_hull=e_form - hull, decomposition=decomposition)


def filter_stable(
    candidates: Sequence[Candidate],
    refs: Sequence[ReferencePhase],
    threshold: float = DEFAULT_HULL_THRESHOLD,
) -> tuple[list[Candidate], list[Candidate]]:
    """Partition candidates by e_hull < threshold (strict).

    Every candidate must carry an e_form from the energy provider; the
    returned candidates carry their computed e_hull and final status.
    """
    stable: list[Candidate] = []
    rejected: list[Candidate] = []
    for cand in candidates:
        if cand.e_form is None:
            raise MissingEnergy(f"candidate {cand.id} has no formation energy assigned")
        result = energy_above_hull(cand.structure.composition(), cand.e_form, refs)
        if result.e_hull < threshold:
            stable.append(cand.advance(STATUS_VALIDATED, e_hull=result.e_hull))
        else:
            rejected.append(
                cand.advance(
                    STATUS_REJECTED,
                    e_hull=result.e_hull,
                    reason=f"e_hull {result.e_hull:.4f} >= {threshold}",
                )
            )
    return stable, rejected


# --------------------------------------------------------------- providers


class TableEnergyProvider:
    """Formation energies ingested from a reference CSV (externally relaxed
    or database-reported values), keyed by reduced formula."""

    def __init__(self, table: dict[str, float]):
        self._table = {
            format_formula(parse_formula(formula)): float(value)
            for formula, value in table.items()
        }

    def e_form(self, c: Composition) -> float:
        formula = format_formula(c)
        if formula not in self._table:
            raise MissingEnergy(f"no tabulated formation energy for {formula}")
        return self._table[formula]


class CompositionEnergyModel:
    """Deterministic pairwise-interaction estimate of e_form (eV/atom).

    e_form(x) = -k_chi * sum_{i<j} x_i x_j (chi_i - chi_j)^2
                + k_r  * sum_{i<j} x_i x_j (r_i - r_j)^2

    This is an explicitly labeled heuristic stand-in for an external
    relaxed-energy calculation: electronegativity contrast binds, size
    mismatch strains. Elements evaluate to 0 by construction. Source tag
    "estimated" follows any value it produces.
    """

    source_tag = "estimated"

    def __init__(self, k_chi: float = 1.5, k_radius: float = 1.0):
        self.k_chi = k_chi
        self.k_radius = k_radius

    def e_form(self, c: Composition) -> float:
        from . import elements as el_data

        fracs = atom_fractions(c)
        symbols = sorted(fracs)
        energy = 0.0
        for i, a in enumerate(symbols):
            for b in symbols[i + 1 :]:
                xa, xb = fracs[a], fracs[b]
                d_chi = el_data.electronegativity(a) - el_data.electronegativity(b)
                d_r = el_data.covalent_radius(a) - el_data.covalent_radius(b)
                energy += xa * xb * (self.k_radius * d_r * d_r - self.k_chi * d_chi * d_chi)
        return energy


def assign_energies(
    candidates: Sequence[Candidate],
    provider: Callable[[Composition], float] | TableEnergyProvider | CompositionEnergyModel,
) -> list[Candidate]:
    """Fill each candidate's e_form from the provider."""
    e_form = provider.e_form if hasattr(provider, "e_form") else provider
    out = []
    for cand in candidates:
        value = float(e_form(cand.structure.composition()))
        if not math.isfinite(value):
            raise MissingEnergy(f"provider returned non-finite e_form for {cand.id}")
        out.append(cand if cand.e_form == value else cand.advance(cand.status, e_form=value))
    return out


# ----------------------------------------------------------------- file IO

REFERENCE_HEADER = ("formula", "e_form_eV_per_atom")


def load_references(text: str) -> list[ReferencePhase]:
    """Parse the reference-set CSV: header formula,e_form_eV_per_atom."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip() for h in header) != REFERENCE_HEADER:
        raise ValueError(f"reference CSV must start with header {','.join(REFERENCE_HEADER)}")
    refs = []
    for record in reader:
        if not record:
            continue
        formula, e_form = record
        refs.append(ReferencePhase(parse_formula(formula), float(e_form)))
    return refs


def references_to_csv(refs: Sequence[ReferencePhase]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REFERENCE_HEADER)
    for ref in refs:
        writer.writerow([ref.formula, repr(ref.e_form)])
    return buf.getvalue()


def hull_results_to_json(results: Sequence[tuple[Candidate, HullResult]]) -> str:
    """Per-candidate JSON: {id, e_form, e_hull, decomposition, stable}."""
    out = []
    for cand, result in results:
        out.append(
            {
                "id": cand.id,
                "e_form": cand.e_form,
                "e_hull": result.e_hull,
                "decomposition": [
                    {"formula": ref.formula, "weight": weight}
                    for ref, weight in result.decomposition
                ],
                "stable": result.e_hull < DEFAULT_HULL_THRESHOLD,
            }
        )
    return json.dumps(out, indent=2, sort_keys=True)
