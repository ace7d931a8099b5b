"""Linear stability of the aligned (upright, spinning) heavy-top equilibrium."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .models import Generator, GeneratorKind, TopParams, generator_derivative, hamiltonian

ZERO_TOL = 1e-10
RESIDUAL_TOL = 1e-8
# transverse coordinates (dL1, dL2, dG1, dG2); dL3 and dG3 rows vanish
TRANSVERSE = [0, 1, 3, 4]


class UnsupportedCase(ValueError):
    """No closed form exists for the requested parameters."""


class Classification(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class Equilibrium:
    l3: float
    g3: float

    def __post_init__(self):
        if not (self.l3 > 0 and self.g3 > 0):
            raise ValueError(f"realizable equilibrium needs l3 > 0 and g3 > 0, got {self.l3}, {self.g3}")

    @classmethod
    def from_state(cls, params: TopParams, z) -> "Equilibrium":
        """Upright equilibrium sharing H and |G|^2 with z (both are conserved)."""
        z = np.asarray(z, dtype=float)
        g3 = float(np.linalg.norm(z[3:]))
        kinetic = hamiltonian(params, z) - params.xi * g3
        if kinetic <= 0:
            raise ValueError("no upright spinning equilibrium with this energy")
        return cls(l3=math.sqrt(2.0 * params.i3 * kinetic), g3=g3)

    @property
    def state(self) -> np.ndarray:
        return np.array([0.0, 0.0, self.l3, 0.0, 0.0, self.g3])


@dataclass
class StabilityReport:
    equilibrium: Equilibrium
    m: np.ndarray
    spectrum: np.ndarray
    classification: Classification
    closed_form: tuple[complex, complex] | None
    condition: bool | None


def dissipation_prefactor(gen: Generator, eq: Equilibrium) -> float:
    """kappa = C'(L3* G3*)."""
    return generator_derivative(gen, eq.l3 * eq.g3)


def linearize(params: TopParams, gen: Generator, eq: Equilibrium) -> np.ndarray:
    """Matrix M of d(dz)/dt = M dz about (0, 0, L3*, 0, 0, G3*)."""
    params.require_symmetric()
    I1, I3, xi = params.i1, params.i3, params.xi
    L, G = eq.l3, eq.g3
    k = dissipation_prefactor(gen, eq)
    a = L * (1.0 / I1 - 1.0 / I3)
    m = np.zeros((6, 6))
    m[0, 0] = -k * L * G / (I1 * I3)
    m[0, 1] = -a
    m[0, 3] = k * L**2 / I3**2
    m[0, 4] = xi
    m[1, 0] = a
    m[1, 1] = -k * L * G / (I1 * I3)
    m[1, 3] = -xi
    m[1, 4] = k * L**2 / I3**2
    m[3, 1] = -G / I1
    m[3, 4] = L / I3
    m[4, 0] = G / I1
    m[4, 3] = -L / I3
    return m


def spectrum(m: np.ndarray) -> np.ndarray:
    """Eigenvalues sorted by real then imaginary part, residual-checked."""
    m = np.asarray(m, dtype=float)
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    vals, vecs = np.linalg.eig(m)
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    for lam, v in zip(vals, vecs.T):
        res = np.linalg.norm(m @ v - lam * v) / np.linalg.norm(v)
        if res > RESIDUAL_TOL * scale:
            raise ArithmeticError(f"eigenpair residual {res:.2e} for {lam}")
    # snap roundoff so sorting and zero counting are stable
    vals = np.where(np.abs(vals.real) < 1e-14 * scale, 1j * vals.imag, vals)
    vals = np.where(np.abs(vals.imag) < 1e-14 * scale, vals.real + 0j, vals)
    return vals[np.lexsort((vals.imag, vals.real))]


def closed_form_AB(params: TopParams, gen: Generator, eq: Equilibrium) -> tuple[complex, complex]:
    """A and B of the spectrum (0, 0, A, A*, B, B*) when I3 = 2 I1.

    Linear:  A, B = (-G L lam -/+ sqrt(-4 I1^2 L^2 + G^2 L^2 lam^2 + 16 G I1^3 xi)) / (4 I1^2)
    Log:     A, B = (-G lam -/+ sqrt(-4 G^2 I1^2 L^2 + G^2 lam^2 + 16 G^3 I1^3 xi)) / (4 I1^2 G)

    with the principal square root. The quadratic generator has no closed form.
    """
    params.require_symmetric()
    if params.i3 != 2.0 * params.i1:
        raise UnsupportedCase(f"closed form needs i3 == 2*i1, got i1={params.i1}, i3={params.i3}")
    I1, xi, lam = params.i1, params.xi, gen.lam
    L, G = eq.l3, eq.g3
    if gen.kind is GeneratorKind.LINEAR:
        root = cmath.sqrt(-4 * I1**2 * L**2 + G**2 * L**2 * lam**2 + 16 * G * I1**3 * xi)
        den = 4 * I1**2
        return (-G * L * lam - root) / den, (-G * L * lam + root) / den
    if gen.kind is GeneratorKind.LOG:
        root = cmath.sqrt(-4 * G**2 * I1**2 * L**2 + G**2 * lam**2 + 16 * G**3 * I1**3 * xi)
        den = 4 * I1**2 * G
        return (-G * lam - root) / den, (-G * lam + root) / den
    raise UnsupportedCase(f"no closed form for the {gen.kind.value} generator")


def stability_condition(params: TopParams, gen: Generator, eq: Equilibrium) -> bool | None:
    """Closed-form stability inequality for I3 = 2 I1, or None where none applies.

    On the real-radical branch both the linear and the log generator are
    stable iff L*^2 > 4 G* I1 xi (the linear case uses >=, whose equality
    is the marginal boundary). On the complex branch they are stable
    whenever lam > 0.
    """
    I1, xi, lam = params.i1, params.xi, gen.lam
    L, G = eq.l3, eq.g3
    if params.i3 != 2.0 * params.i1:
        return None
    if gen.kind is GeneratorKind.LINEAR:
        disc = -4 * I1**2 * L**2 + G**2 * L**2 * lam**2 + 16 * G * I1**3 * xi
        if disc < 0:
            return lam > 0
        return L**2 >= 4 * G * I1 * xi
    if gen.kind is GeneratorKind.LOG:
        disc = -4 * G**2 * I1**2 * L**2 + G**2 * lam**2 + 16 * G**3 * I1**3 * xi
        if disc < 0:
            return lam > 0
        return L**2 > 4 * G * I1 * xi
    return None


def classify_spectrum(m: np.ndarray, zero_tol: float = ZERO_TOL) -> Classification:
    """Classify from the eigenvalues of the transverse block.

    The dL3 and dG3 rows are identically zero, so their two zero eigenvalues
    are structural and excluded.
    """
    vals = spectrum(m[np.ix_(TRANSVERSE, TRANSVERSE)])
    re = vals.real
    if np.any(re > zero_tol):
        return Classification.UNSTABLE
    if np.any(np.abs(re) <= zero_tol):
        return Classification.MARGINAL
    return Classification.STABLE


def classify(params: TopParams, gen: Generator, eq: Equilibrium) -> Classification:
    return classify_spectrum(linearize(params, gen, eq))


def analyze(params: TopParams, gen: Generator, eq: Equilibrium) -> StabilityReport:
    m = linearize(params, gen, eq)
    try:
        ab = closed_form_AB(params, gen, eq)
    except UnsupportedCase:
        ab = None
    return StabilityReport(
        equilibrium=eq,
        m=m,
        spectrum=spectrum(m),
        classification=classify_spectrum(m),
        closed_form=ab,
        condition=stability_condition(params, gen, eq),
    )


def describe_real_parts(vals: np.ndarray, zero_tol: float = ZERO_TOL) -> str:
    """'both negative' or 'differ in sign' for the two transverse modes A and B."""
    nz = vals[np.abs(vals) > zero_tol]
    if nz.size == 0:
        return "all zero"
    re = nz.real
    if np.all(re < -zero_tol):
        return "Re(A), Re(B) both negative"
    if np.any(re > zero_tol) and np.any(re < -zero_tol):
        return "Re(A), Re(B) differ in sign"
    return "some real parts zero"
