"""Lie-Poisson structures from structure constants.

Index convention used throughout the package: the constants C^{ij}_k are
stored as ``c[i, j, k]`` with the raised pair first, so that

    {z^i, z^j} = C^{ij}_k z^k = (c @ z)[i, j].

Covectors (gradients) and tangent vectors are both plain length-n arrays.
The distinction is kept only in names, since every metric shipped here is
the identity.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

JACOBI_TOL = 1e-12
ANTISYMMETRY_TOL = 1e-12


class IncompatibleDimensions(ValueError):
    """Raised when arrays of different phase-space dimension are combined."""


class InvalidStructureConstants(ValueError):
    """Raised for constants that are not antisymmetric or violate Jacobi."""


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[j, i, k] = -1.0
    return eps


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def antisymmetry_residual(c: np.ndarray) -> float:
    return float(np.max(np.abs(c + c.transpose(1, 0, 2)), initial=0.0))


def jacobi_residual(c: np.ndarray) -> float:
    """Max over (i, j, k, l) of the cyclic sum of C^{ij}_a C^{ak}_l."""
    t = np.einsum("ija,akl->ijkl", c, c)
    cyc = t + t.transpose(1, 2, 0, 3) + t.transpose(2, 0, 1, 3)
    return float(np.max(np.abs(cyc), initial=0.0))


@dataclass(frozen=True)
class StructureConstants:
    """Constants C^{ij}_k of a Lie algebra, validated on construction."""

    c: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        c = _frozen(self.c)
        if c.ndim != 3 or not (c.shape[0] == c.shape[1] == c.shape[2]) or c.shape[0] == 0:
            raise InvalidStructureConstants(f"expected an (n, n, n) array, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidStructureConstants("structure constants must be finite")
        r = antisymmetry_residual(c)
        if r > ANTISYMMETRY_TOL:
            raise InvalidStructureConstants(f"c[i,j,k] != -c[j,i,k] (residual {r:.3e})")
        r = jacobi_residual(c)
        if r > JACOBI_TOL:
            raise InvalidStructureConstants(f"Jacobi identity fails (residual {r:.3e})")
        object.__setattr__(self, "c", c)

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def jacobi_residual(self) -> float:
        return jacobi_residual(self.c)

    def antisymmetry_residual(self) -> float:
        return antisymmetry_residual(self.c)


@dataclass(frozen=True)
class Metric:
    """Constant contravariant metric g^{ij}."""

    g: np.ndarray

    def __post_init__(self):
        g = _frozen(self.g)
        if g.ndim != 2 or g.shape[0] != g.shape[1]:
            raise ValueError(f"metric must be square, got shape {g.shape}")
        if not np.allclose(g, g.T, rtol=0, atol=1e-14):
            raise ValueError("metric must be symmetric")
        object.__setattr__(self, "g", g)

    @classmethod
    def euclidean(cls, dim: int) -> "Metric":
        return cls(np.eye(dim))

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def so3_constants() -> StructureConstants:
    """Free rigid body: {L^i, L^j} = -eps_{ijk} L^k."""
    return StructureConstants(-levi_civita(), name="so3")


def heavy_top_constants() -> StructureConstants:
    """Semidirect product so(3) x R^3 on z = (L1, L2, L3, G1, G2, G3).

    {L^i, L^j} = -eps_{ijk} L^k, {L^i, G^j} = -eps_{ijk} G^k,
    {G^i, L^j} = -eps_{ijk} G^k, {G^i, G^j} = 0.
    """
    eps = levi_civita()
    c = np.zeros((6, 6, 6))
    c[:3, :3, :3] = -eps
    c[:3, 3:, 3:] = -eps
    c[3:, :3, 3:] = -eps
    return StructureConstants(c, name="heavy-top")


def abelian_constants(dim: int) -> StructureConstants:
    return StructureConstants(np.zeros((dim, dim, dim)), name=f"abelian-{dim}")


def _vector(x, dim: int, what: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (dim,):
        raise IncompatibleDimensions(f"{what} has shape {x.shape}, expected ({dim},)")
    return x


def lie_poisson_bivector(C: StructureConstants, z) -> np.ndarray:
    """J^{ij}(z) = C^{ij}_k z^k."""
    z = _vector(z, C.dim, "phase point")
    return C.c @ z


def poisson_bracket(C: StructureConstants, z, dF, dG) -> float:
    J = lie_poisson_bivector(C, z)
    dF = _vector(dF, C.dim, "dF")
    dG = _vector(dG, C.dim, "dG")
    return float(dF @ J @ dG)


def anchor_apply(C: StructureConstants, z, alpha) -> np.ndarray:
    """J^#(alpha), the vector with components alpha_i J^{ij}."""
    J = lie_poisson_bivector(C, z)
    alpha = _vector(alpha, C.dim, "alpha")
    return alpha @ J
