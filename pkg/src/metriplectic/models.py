"""Free rigid body and symmetric heavy top with curvature-bracket dissipation.

Heavy-top phase points are ordered z = (L1, L2, L3, G1, G2, G3), with G the
body-frame gravity direction; the free rigid body uses z = (L1, L2, L3).

The dissipative term is built from the curvature bracket
(F, G) = (F, H; G, H), which for the Euclidean metric equals
1/4 (w^2 delta - w w^T) on the angular-momentum block. The equations of
motion use (w^2 delta - w w^T) itself; the factor 4 is absorbed into the
dissipation strength and exposed as ``BRACKET_NORMALIZATION``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .algebra import StructureConstants, lie_poisson_bivector
from .geometry import CurvatureTensor, metriplectic_matrix

BRACKET_NORMALIZATION = 4.0


class DomainError(ValueError):
    """State left the admissible phase space of the generator (G . L <= 0 for log)."""


@dataclass(frozen=True)
class TopParams:
    i1: float
    i2: float
    i3: float
    xi: float = 0.0

    def __post_init__(self):
        for name in ("i1", "i2", "i3"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")
        if not math.isfinite(self.xi):
            raise ValueError(f"xi must be finite, got {self.xi!r}")

    @classmethod
    def symmetric(cls, i1: float, i3: float, xi: float = 0.0) -> "TopParams":
        return cls(i1, i1, i3, xi)

    @property
    def inertia(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3])

    @property
    def is_symmetric(self) -> bool:
        return self.i1 == self.i2

    def require_symmetric(self):
        if not self.is_symmetric:
            raise ValueError(f"symmetric top required (i1 == i2), got i1={self.i1}, i2={self.i2}")


class GeneratorKind(str, Enum):
    LINEAR = "linear"
    LOG = "log"
    QUADRATIC = "quadratic"
    CUSTOM = "custom"


@dataclass(frozen=True)
class Generator:
    """Entropy generator S = C(x) with x the Casimir G . L (heavy top) or L . L (rigid body).

    ``lam`` must be non-negative; lam = 0 switches dissipation off.
    """

    kind: GeneratorKind
    lam: float
    c: Callable[[float], float] | None = field(default=None, compare=False)
    c_prime: Callable[[float], float] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", GeneratorKind(self.kind))
        if not (math.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be finite and >= 0, got {self.lam!r}")
        if self.kind is GeneratorKind.CUSTOM and (self.c is None or self.c_prime is None):
            raise ValueError("custom generator needs both c and c_prime")

    @classmethod
    def linear(cls, lam: float) -> "Generator":
        return cls(GeneratorKind.LINEAR, lam)

    @classmethod
    def log(cls, lam: float) -> "Generator":
        return cls(GeneratorKind.LOG, lam)

    @classmethod
    def quadratic(cls, lam: float) -> "Generator":
        return cls(GeneratorKind.QUADRATIC, lam)

    @classmethod
    def custom(cls, c, c_prime, lam: float = 1.0) -> "Generator":
        return cls(GeneratorKind.CUSTOM, lam, c, c_prime)

    def check_domain(self, x: float):
        if self.kind is GeneratorKind.LOG and not x > 0:
            raise DomainError(f"log generator needs a positive Casimir argument, got {x!r}")

    def value(self, x: float) -> float:
        self.check_domain(x)
        if self.kind is GeneratorKind.LINEAR:
            return self.lam * x
        if self.kind is GeneratorKind.LOG:
            return self.lam * math.log(x)
        if self.kind is GeneratorKind.QUADRATIC:
            return 0.5 * self.lam * x * x
        return float(self.c(x))

    def derivative(self, x: float) -> float:
        return generator_derivative(self, x)


def generator_derivative(gen: Generator, x: float) -> float:
    """C'(x): lam, lam / x or lam * x."""
    gen.check_domain(x)
    if gen.kind is GeneratorKind.LINEAR:
        return gen.lam
    if gen.kind is GeneratorKind.LOG:
        return gen.lam / x
    if gen.kind is GeneratorKind.QUADRATIC:
        return gen.lam * x
    return float(gen.c_prime(x))


@dataclass(frozen=True)
class Observables:
    h: float
    s: float
    c1: float
    c2: float | None
    theta: float


def _split(z) -> tuple[np.ndarray, np.ndarray | None]:
    z = np.asarray(z, dtype=float)
    if z.shape == (6,):
        return z[:3], z[3:]
    if z.shape == (3,):
        return z, None
    raise ValueError(f"phase point must have length 3 or 6, got shape {z.shape}")


def angular_velocity(params: TopParams, z) -> np.ndarray:
    L, _ = _split(z)
    return L / params.inertia


def hamiltonian(params: TopParams, z) -> float:
    """H = 1/2 sum (L^i)^2 / I_i  (+ xi G^3 for the heavy top)."""
    L, G = _split(z)
    h = 0.5 * float(np.sum(L * L / params.inertia))
    if G is not None:
        h += params.xi * float(G[2])
    return h


def hamiltonian_gradient(params: TopParams, z) -> np.ndarray:
    L, G = _split(z)
    w = L / params.inertia
    if G is None:
        return w
    return np.concatenate([w, [0.0, 0.0, params.xi]])


def casimir_argument(z) -> tuple[float, np.ndarray]:
    """The generator's argument x and its gradient.

    Heavy top: x = G . L with gradient (G, L). Rigid body: x = L . L with gradient 2L.
    """
    L, G = _split(z)
    if G is None:
        return float(L @ L), 2.0 * L
    return float(G @ L), np.concatenate([G, L])


def heavy_top_rhs(params: TopParams, gen: Generator, z) -> np.ndarray:
    """The six equations of motion of the dissipative symmetric heavy top, term by term."""
    params.require_symmetric()
    z = np.asarray(z, dtype=float)
    if z.shape != (6,):
        raise ValueError(f"heavy top state must have length 6, got shape {z.shape}")
    L1, L2, L3, G1, G2, G3 = z
    I1, I3, xi = params.i1, params.i3, params.xi
    k = generator_derivative(gen, G1 * L1 + G2 * L2 + G3 * L3)
    d = 1.0 / I1 - 1.0 / I3

    dL1 = -L2 * L3 * d + xi * G2 + k * (
        (L2**2 / I1**2 + L3**2 / I3**2) * G1 - L1 * L2 / I1**2 * G2 - L1 * L3 / (I1 * I3) * G3
    )
    dL2 = L1 * L3 * d - xi * G1 + k * (
        -L1 * L2 / I1**2 * G1 + (L1**2 / I1**2 + L3**2 / I3**2) * G2 - L2 * L3 / (I1 * I3) * G3
    )
    dL3 = k * (
        -L1 * L3 / (I1 * I3) * G1 - L2 * L3 / (I1 * I3) * G2 + (L2**2 / I1**2 + L1**2 / I1**2) * G3
    )
    dG1 = G2 * L3 / I3 - G3 * L2 / I1
    dG2 = G3 * L1 / I1 - G1 * L3 / I3
    dG3 = G1 * L2 / I1 - G2 * L1 / I1
    return np.array([dL1, dL2, dL3, dG1, dG2, dG3])


def frb_rhs(params: TopParams, gen: Generator, z) -> np.ndarray:
    """Free rigid body, L' = L x w + 2 C'(L.L) (w^2 delta - w w^T) L."""
    L = np.asarray(z, dtype=float)
    if L.shape != (3,):
        raise ValueError(f"rigid body state must have length 3, got shape {L.shape}")
    w = L / params.inertia
    k = generator_derivative(gen, float(L @ L))
    return np.cross(L, w) + 2.0 * k * (float(w @ w) * L - w * float(w @ L))


def rhs_from_brackets(
    C: StructureConstants,
    R: CurvatureTensor,
    params: TopParams,
    gen: Generator,
    z,
    normalization: float = BRACKET_NORMALIZATION,
) -> np.ndarray:
    """z'^i = {z^i, H} + normalization * (z^i, S), assembled from J(z) and R."""
    z = np.asarray(z, dtype=float)
    dH = hamiltonian_gradient(params, z)
    x, dx = casimir_argument(z)
    dS = generator_derivative(gen, x) * dx
    J = lie_poisson_bivector(C, z)
    return J @ dH + normalization * metriplectic_matrix(R, dH) @ dS


def entropy_production(params: TopParams, gen: Generator, z) -> float:
    """S' = C'(x)^2 |G|^2 |w|^2 sin^2(theta) for the heavy top."""
    L, G = _split(z)
    if G is None:
        raise ValueError("entropy_production closed form is for the heavy top")
    w = L / params.inertia
    k = generator_derivative(gen, float(G @ L))
    ww, gg, wg = float(w @ w), float(G @ G), float(w @ G)
    # w^2 G^2 sin^2 = w^2 G^2 - (w.G)^2, floored at 0 against cancellation
    return k * k * max(ww * gg - wg * wg, 0.0)


def entropy_production_bracket(R: CurvatureTensor, params: TopParams, gen: Generator, z,
                               normalization: float = BRACKET_NORMALIZATION) -> float:
    """S' = normalization * dS^T M dS with M the curvature bracket matrix."""
    dH = hamiltonian_gradient(params, z)
    x, dx = casimir_argument(z)
    dS = generator_derivative(gen, x) * dx
    return float(normalization * dS @ metriplectic_matrix(R, dH) @ dS)


def _angle(u: np.ndarray, v: np.ndarray) -> float:
    nu, nv = float(np.linalg.norm(u)), float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.arccos(np.clip(float(u @ v) / (nu * nv), -1.0, 1.0)))


def observables(params: TopParams, gen: Generator, z) -> Observables:
    L, G = _split(z)
    w = L / params.inertia
    x, _ = casimir_argument(z)
    s = gen.value(x)
    if G is None:
        return Observables(h=hamiltonian(params, z), s=s, c1=x, c2=None, theta=_angle(w, L))
    return Observables(h=hamiltonian(params, z), s=s, c1=x, c2=float(G @ G), theta=_angle(w, G))
