"""Polycrystalline moduli, sound velocities, and Debye temperature.

The route is the canonical one: Voigt-Reuss-Hill averaging of the 6x6
stiffness tensor, Anderson's average sound velocity, then

    Theta_D = (h / k_B) * (3 n / (4 pi V))^(1/3) * v_s

with CODATA 2018 constants. Unphysical tensors raise instead of being
clamped so the repair loop can see them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import BOLTZMANN, PLANCK
from .core import Structure, density
from .errors import NonPositiveDensity, NonPositiveModulus, SingularTensor

__all__ = [
    "ElasticTensor",
    "ModuliSet",
    "VelocitySet",
    "voigt_moduli",
    "reuss_moduli",
    "vrh_moduli",
    "sound_velocities",
    "debye_temperature",
    "debye_from_tensor",
]

_SYMMETRY_TOL = 1e-6  # GPa
_MAX_CONDITION = 1e12


class ElasticTensor:
    """6x6 stiffness matrix in GPa, Voigt notation; symmetric within 1e-6."""

    __slots__ = ("_c",)

    def __init__(self, c) -> None:
        arr = np.asarray(c, dtype=float)
        if arr.shape != (6, 6) or not np.all(np.isfinite(arr)):
            raise ValueError("elastic tensor must be a finite 6x6 matrix")
        if np.max(np.abs(arr - arr.T)) > _SYMMETRY_TOL:
            raise ValueError("elastic tensor asymmetric beyond 1e-6 GPa")
        arr = (arr + arr.T) / 2.0
        arr.flags.writeable = False
        object.__setattr__(self, "_c", arr)

    def __setattr__(self, name, value):
        raise AttributeError("ElasticTensor is immutable")

    @property
    def c(self) -> np.ndarray:
        return self._c

    @classmethod
    def cubic(cls, c11: float, c12: float, c44: float) -> "ElasticTensor":
        m = np.zeros((6, 6))
        m[:3, :3] = c12
        np.fill_diagonal(m[:3, :3], c11)
        m[3, 3] = m[4, 4] = m[5, 5] = c44
        return cls(m)

    @classmethod
    def hexagonal(
        cls, c11: float, c12: float, c13: float, c33: float, c44: float
    ) -> "ElasticTensor":
        m = np.zeros((6, 6))
        m[0, 0] = m[1, 1] = c11
        m[0, 1] = m[1, 0] = c12
        m[0, 2] = m[2, 0] = m[1, 2] = m[2, 1] = c13
        m[2, 2] = c33
        m[3, 3] = m[4, 4] = c44
        m[5, 5] = (c11 - c12) / 2.0
        return cls(m)

    def __eq__(self, other):
        if not isinstance(other, ElasticTensor):
            return NotImplemented
        return np.array_equal(self._c, other._c)

    def __repr__(self):
        return f"ElasticTensor(c11={self._c[0, 0]:.1f}, c44={self._c[3, 3]:.1f})"


@dataclass(frozen=True)
class ModuliSet:
    """Bulk and shear moduli in GPa under one averaging scheme."""

    bulk: float
    shear: float
    scheme: str = "hill"


@dataclass(frozen=True)
class VelocitySet:
    """Longitudinal, transverse, and Anderson-average sound speeds, m/s."""

    v_l: float
    v_t: float
    v_s: float


def voigt_moduli(t: ElasticTensor) -> ModuliSet:
    c = t.c
    bulk = (c[0, 0] + c[1, 1] + c[2, 2] + 2.0 * (c[0, 1] + c[0, 2] + c[1, 2])) / 9.0
    shear = (
        c[0, 0] + c[1, 1] + c[2, 2]
        - c[0, 1] - c[0, 2] - c[1, 2]
        + 3.0 * (c[3, 3] + c[4, 4] + c[5, 5])
    ) / 15.0
    return ModuliSet(bulk, shear, "voigt")


def reuss_moduli(t: ElasticTensor) -> ModuliSet:
    if np.linalg.cond(t.c) >= _MAX_CONDITION:
        raise SingularTensor("stiffness matrix is numerically singular")
    s = np.linalg.inv(t.c)
    sum_diag = s[0, 0] + s[1, 1] + s[2, 2]
    sum_off = s[0, 1] + s[0, 2] + s[1, 2]
    sum_shear = s[3, 3] + s[4, 4] + s[5, 5]
    denom_b = sum_diag + 2.0 * sum_off
    denom_g = 4.0 * sum_diag - 4.0 * sum_off + 3.0 * sum_shear
    if denom_b <= 0.0 or denom_g <= 0.0:
        raise NonPositiveModulus("compliance sums imply a non-positive Reuss modulus")
    return ModuliSet(1.0 / denom_b, 15.0 / denom_g, "reuss")


def vrh_moduli(t: ElasticTensor) -> ModuliSet:
    """Hill average of the Voigt and Reuss bounds."""
    voigt = voigt_moduli(t)
    reuss = reuss_moduli(t)
    bulk = (voigt.bulk + reuss.bulk) / 2.0
    shear = (voigt.shear + reuss.shear) / 2.0
    for label, value in (
        ("B_V", voigt.bulk), ("G_V", voigt.shear),
        ("B_R", reuss.bulk), ("G_R", reuss.shear),
        ("B", bulk), ("G", shear),
    ):
        if value <= 0.0:
            raise NonPositiveModulus(f"{label} = {value:.3f} GPa is not positive")
    return ModuliSet(bulk, shear, "hill")


def sound_velocities(m: ModuliSet, rho: float) -> VelocitySet:
    """Velocities from moduli (GPa) and density (g/cm³).

    v_l = sqrt((B + 4G/3)/rho), v_t = sqrt(G/rho), and the Anderson average
    v_s = [(1/3)(2/v_t³ + 1/v_l³)]^(-1/3). The G -> 0 limit degrades
    continuously to v_t = v_s = 0.
    """
    if rho <= 0.0 or not math.isfinite(rho):
        raise NonPositiveDensity(f"density must be positive, got {rho!r}")
    rho_si = rho * 1000.0  # g/cm³ -> kg/m³
    v_l = math.sqrt((m.bulk + 4.0 * m.shear / 3.0) * 1e9 / rho_si)
    v_t = math.sqrt(m.shear * 1e9 / rho_si)
    if v_t == 0.0:
        return VelocitySet(v_l, 0.0, 0.0)
    v_s = ((2.0 / v_t**3 + 1.0 / v_l**3) / 3.0) ** (-1.0 / 3.0)
    return VelocitySet(v_l, v_t, v_s)


def debye_temperature(n: int, volume: float, v_s: float) -> float:
    """Theta_D in K from atom count, cell volume (ų), and v_s (m/s)."""
    if n < 1:
        raise ValueError("atom count must be at least 1")
    if volume <= 0.0 or not math.isfinite(volume):
        raise ValueError("cell volume must be positive")
    if v_s <= 0.0 or not math.isfinite(v_s):
        raise ValueError("average sound velocity must be positive")
    volume_m3 = volume * 1e-30
    return (PLANCK / BOLTZMANN) * (3.0 * n / (4.0 * math.pi * volume_m3)) ** (1.0 / 3.0) * v_s


def debye_from_tensor(structure: Structure, tensor: ElasticTensor) -> float:
    """density -> VRH moduli -> velocities -> Theta_D, all errors propagated."""
    rho = density(structure)
    moduli = vrh_moduli(tensor)
    velocities = sound_velocities(moduli, rho)
    return debye_temperature(structure.n_sites, structure.volume, velocities.v_s)
