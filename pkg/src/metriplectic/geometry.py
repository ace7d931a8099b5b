"""Contravariant Levi-Civita connection, curvature and the derived brackets.

Two independent routes are provided:

* closed forms valid for a Lie-Poisson bivector with the Euclidean metric
  (``connection_euclidean`` and ``curvature_constant_gamma``), and
* a pointwise finite-difference oracle that evaluates the six-term Koszul
  formula for an arbitrary bivector field and metric field
  (``connection_general_oracle``) and composes it into the curvature
  operator (``curvature_oracle``).

Sign convention: the curvature operator is taken with Milnor's sign,

    R(a, b)c = D_[a,b] c - D_a D_b c + D_b D_a c,

so that R^{ijkl} = g(R(dz^i, dz^j)dz^k, dz^l) has R^{ijij} equal to the
sectional curvature. With it so(3) gives R^{ijkl} = +1/4 (d^ik d^jl - d^il d^jk)
and the bracket (F, G) = (F, H; G, H) is positive semidefinite, which is what
makes the entropy generator grow. The opposite sign flips every tensor
below and the bracket.

All tensors are stored fully contravariant. With g = identity raising and
lowering is the identity map; the oracle raises the last curvature index
with the actual metric so a non-Euclidean metric is handled there.

Connection coefficients are stored as ``gamma[i, j, k] = (D_{dz^i} dz^j)_k``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    IncompatibleDimensions,
    Metric,
    StructureConstants,
    lie_poisson_bivector,
)

IDENTITY_TOL = 1e-12

Field = Callable[[np.ndarray], np.ndarray]


class OracleError(ArithmeticError):
    """Finite-difference oracle could not produce a finite answer."""


@dataclass(frozen=True)
class ConnectionCoefficients:
    gamma: np.ndarray

    def __post_init__(self):
        g = np.array(self.gamma, dtype=float)
        g.setflags(write=False)
        object.__setattr__(self, "gamma", g)

    @property
    def dim(self) -> int:
        return self.gamma.shape[0]

    def torsion_residual(self, C: StructureConstants) -> float:
        """max |G^{ij}_k - G^{ji}_k - C^{ij}_k|."""
        return float(np.max(np.abs(self.gamma - self.gamma.transpose(1, 0, 2) - C.c)))

    def compatibility_residual(self) -> float:
        """max |G^{ij}_k + G^{ik}_j|, metric compatibility for g = identity."""
        return float(np.max(np.abs(self.gamma + self.gamma.transpose(0, 2, 1))))


@dataclass(frozen=True)
class CurvatureTensor:
    """Fully contravariant R^{ijkl}."""

    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        r.setflags(write=False)
        object.__setattr__(self, "r", r)

    @property
    def dim(self) -> int:
        return self.r.shape[0]

    def symmetry_residuals(self) -> dict[str, float]:
        r = self.r
        return {
            "antisym_first_pair": float(np.max(np.abs(r + r.transpose(1, 0, 2, 3)))),
            "antisym_second_pair": float(np.max(np.abs(r + r.transpose(0, 1, 3, 2)))),
            "pair_exchange": float(np.max(np.abs(r - r.transpose(2, 3, 0, 1)))),
        }

    def bianchi_residual(self) -> float:
        """First Bianchi identity R^{ijkl} + R^{jkil} + R^{kijl} = 0."""
        r = self.r
        cyc = r + r.transpose(2, 0, 1, 3) + r.transpose(1, 2, 0, 3)
        return float(np.max(np.abs(cyc)))

    def nonzero_entries(self, tol: float = IDENTITY_TOL) -> list[tuple[tuple[int, int, int, int], float]]:
        idx = np.argwhere(np.abs(self.r) > tol)
        return [(tuple(int(v) for v in ix), float(self.r[tuple(ix)])) for ix in idx]


# -- closed forms -------------------------------------------------------------

def connection_euclidean(C: StructureConstants) -> ConnectionCoefficients:
    """G^{ij}_k = (C^{ij}_k - C^{jk}_i + C^{ki}_j) / 2."""
    c = C.c
    gamma = 0.5 * (c - c.transpose(2, 0, 1) + c.transpose(1, 2, 0))
    return ConnectionCoefficients(gamma)


def curvature_constant_gamma(C: StructureConstants, conn: ConnectionCoefficients) -> CurvatureTensor:
    """Curvature for constant connection coefficients.

    R^{ijkl} = C^{ij}_a G^{ak}_l - G^{jk}_a G^{ia}_l + G^{ik}_a G^{ja}_l,
    last index raised with g = identity.
    """
    if C.dim != conn.dim:
        raise IncompatibleDimensions(f"constants dim {C.dim} != connection dim {conn.dim}")
    G = conn.gamma
    r = (
        np.einsum("ija,akl->ijkl", C.c, G)
        - np.einsum("jka,ial->ijkl", G, G)
        + np.einsum("ika,jal->ijkl", G, G)
    )
    return CurvatureTensor(r)


def curvature_euclidean(C: StructureConstants) -> CurvatureTensor:
    return curvature_constant_gamma(C, connection_euclidean(C))


def four_bracket(R: CurvatureTensor, dF, dK, dG, dN) -> float:
    """(F, K; G, N) = R^{ijkl} F_i K_j G_k N_l."""
    vs = [np.asarray(v, dtype=float) for v in (dF, dK, dG, dN)]
    for v in vs:
        if v.shape != (R.dim,):
            raise IncompatibleDimensions(f"covector shape {v.shape}, expected ({R.dim},)")
    return float(np.einsum("ijkl,i,j,k,l->", R.r, *vs))


def metriplectic_matrix(R: CurvatureTensor, dH) -> np.ndarray:
    """M^{ik} = R^{ijkl} H_j H_l, so that (F, G) = (F, H; G, H) = F_i M^{ik} G_k."""
    dH = np.asarray(dH, dtype=float)
    if dH.shape != (R.dim,):
        raise IncompatibleDimensions(f"dH shape {dH.shape}, expected ({R.dim},)")
    return np.einsum("ijkl,j,l->ik", R.r, dH, dH)


# -- finite-difference oracle ---------------------------------------------------

def fd_step(z: np.ndarray) -> float:
    """~1e-5 * max(1, |z|_inf), rounded to a power of two so z +/- h is exact."""
    h = 1e-5 * max(1.0, float(np.max(np.abs(z), initial=0.0)))
    return float(2.0 ** np.round(np.log2(h)))


def _jacobian(f: Field, z: np.ndarray, h: float) -> np.ndarray:
    """Central differences; derivative index appended last."""
    cols = []
    for m in range(z.size):
        e = np.zeros_like(z)
        e[m] = h
        with np.errstate(invalid="ignore", over="ignore"):
            cols.append((np.asarray(f(z + e), dtype=float) - np.asarray(f(z - e), dtype=float)) / (2 * h))
    jac = np.stack(cols, axis=-1)
    if not np.all(np.isfinite(jac)):
        raise OracleError("non-finite finite difference")
    return jac


def _as_bivector_field(J) -> Field:
    if isinstance(J, StructureConstants):
        return lambda z: lie_poisson_bivector(J, z)
    if callable(J):
        return J
    arr = np.asarray(J, dtype=float)
    return lambda z: arr


def _as_metric_field(g) -> Field:
    if isinstance(g, Metric):
        arr = g.g
        return lambda z: arr
    if callable(g):
        return g
    arr = np.asarray(g, dtype=float)
    return lambda z: arr


def _as_form_field(a) -> Field:
    if callable(a):
        return a
    arr = np.asarray(a, dtype=float)
    return lambda z: arr


def koszul_bracket(J, z, alpha, beta, h: float | None = None) -> np.ndarray:
    """Koszul bracket [alpha, beta] of two one-form fields, evaluated at z.

    In coordinates, for alpha = a_i dz^i and beta = b_j dz^j,

        [alpha, beta]_k = a_i b_j d_k J^{ij} + a_i J^{im} d_m b_k - b_j J^{jm} d_m a_k,

    which reduces to d{f, g} on exact forms. ``J`` is a StructureConstants
    instance or a callable bivector field; ``alpha`` and ``beta`` are
    callables (or constant arrays) returning covector components.
    """
    z = np.asarray(z, dtype=float)
    Jf, af, bf = _as_bivector_field(J), _as_form_field(alpha), _as_form_field(beta)
    h = fd_step(z) if h is None else h
    a, b, Jz = af(z), bf(z), Jf(z)
    if a.shape != z.shape or b.shape != z.shape or Jz.shape != (z.size, z.size):
        raise IncompatibleDimensions("form/bivector dimensions do not match the phase point")
    DJ = _jacobian(Jf, z, h)
    Da = _jacobian(af, z, h)
    Db = _jacobian(bf, z, h)
    return (
        np.einsum("i,j,ijk->k", a, b, DJ)
        + np.einsum("i,im,km->k", a, Jz, Db)
        - np.einsum("j,jm,km->k", b, Jz, Da)
    )


def connection_general_oracle(J, g, z, alpha, beta, h: float | None = None) -> np.ndarray:
    """D_alpha beta at z from the six-term Koszul formula.

    2 g(D_a b, c) = J#(a)[g(b,c)] - J#(c)[g(a,b)] + J#(b)[g(c,a)]
                    + g([a,b],c) - g([b,c],a) + g([c,a],b)

    evaluated with c running over the basis forms dz^d and solved for D_a b
    with the metric at z. Derivatives of every field are central differences.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    Jf, gf = _as_bivector_field(J), _as_metric_field(g)
    af, bf = _as_form_field(alpha), _as_form_field(beta)
    h = fd_step(z) if h is None else h

    a, b, Jz, gz = af(z), bf(z), Jf(z), gf(z)
    if a.shape != (n,) or b.shape != (n,) or Jz.shape != (n, n) or gz.shape != (n, n):
        raise IncompatibleDimensions("field dimensions do not match the phase point")
    DJ = _jacobian(Jf, z, h)  # [i, j, m] = d_m J^{ij}
    Dg = _jacobian(gf, z, h)
    Da = _jacobian(af, z, h)  # [k, m] = d_m a_k
    Db = _jacobian(bf, z, h)

    va = a @ Jz  # J#(alpha)
    vb = b @ Jz
    # J#(a)[g(b, dz^d)]
    t1 = np.einsum("j,pj,pd->d", va, Db, gz) + np.einsum("j,p,pdj->d", va, b, Dg)
    # -J#(dz^d)[g(a, b)]
    grad_gab = Da.T @ gz @ b + np.einsum("p,pqj,q->j", a, Dg, b) + Db.T @ gz @ a
    t2 = -Jz @ grad_gab
    # J#(b)[g(dz^d, a)]
    t3 = np.einsum("j,dpj,p->d", vb, Dg, a) + np.einsum("j,dp,pj->d", vb, gz, Da)
    # g([a, b], dz^d)
    kab = (
        np.einsum("i,j,ijk->k", a, b, DJ)
        + np.einsum("i,im,km->k", a, Jz, Db)
        - np.einsum("j,jm,km->k", b, Jz, Da)
    )
    t4 = kab @ gz
    # -g([b, dz^d], a), [b, dz^d]_k = b_i d_k J^{id} - J^{dm} d_m b_k
    kbd = np.einsum("i,idk->dk", b, DJ) - np.einsum("dm,km->dk", Jz, Db)
    t5 = -kbd @ gz @ a
    # g([dz^d, a], b), [dz^d, a]_k = d_k J^{dj} a_j + J^{dm} d_m a_k
    kda = np.einsum("djk,j->dk", DJ, a) + np.einsum("dm,km->dk", Jz, Da)
    t6 = kda @ gz @ b

    rhs = t1 + t2 + t3 + t4 + t5 + t6
    if not np.all(np.isfinite(rhs)):
        raise OracleError("non-finite Koszul formula terms")
    try:
        return np.linalg.solve(gz, rhs) / 2.0
    except np.linalg.LinAlgError as exc:
        raise OracleError("metric is singular at the evaluation point") from exc


def connection_oracle_coefficients(J, g, z, h: float | None = None) -> np.ndarray:
    """gamma[i, j, k] = (D_{dz^i} dz^j)_k at z via the oracle."""
    z = np.asarray(z, dtype=float)
    n = z.size
    eye = np.eye(n)
    out = np.empty((n, n, n))
    for i in range(n):
        for j in range(n):
            out[i, j] = connection_general_oracle(J, g, z, eye[i], eye[j], h)
    return out


class _Memo:
    def __init__(self, f):
        self.f = f
        self.cache: dict[bytes, np.ndarray] = {}

    def __call__(self, z):
        key = np.asarray(z, dtype=float).tobytes()
        if key not in self.cache:
            self.cache[key] = self.f(z)
        return self.cache[key]


def curvature_oracle(J, g, z) -> CurvatureTensor:
    """R^{ijkl} at z composed from the oracle connection, by definition.

    R(dz^i, dz^j)dz^k = D_[dz^i, dz^j] dz^k - D_i D_j dz^k + D_j D_i dz^k.

    Each connection application differentiates the previous one numerically,
    so nested central differences are involved; accuracy is ~1e-7 for
    Lie-Poisson bivectors and constant metrics.
    """
    z = np.asarray(z, dtype=float)
    n = z.size
    eye = np.eye(n)
    Jf, gf = _as_bivector_field(J), _as_metric_field(g)
    gamma_at = _Memo(lambda w: connection_oracle_coefficients(Jf, gf, w))
    brackets = {}
    r_low = np.empty((n, n, n, n))
    for i in range(n):
        for j in range(n):
            if (i, j) not in brackets:
                brackets[(i, j)] = _Memo(lambda w, i=i, j=j: koszul_bracket(Jf, w, eye[i], eye[j]))
            for k in range(n):
                dd1 = connection_general_oracle(Jf, gf, z, eye[i], lambda w, j=j, k=k: gamma_at(w)[j, k])
                dd2 = connection_general_oracle(Jf, gf, z, eye[j], lambda w, i=i, k=k: gamma_at(w)[i, k])
                dbr = connection_general_oracle(Jf, gf, z, brackets[(i, j)], eye[k])
                r_low[i, j, k] = dbr - dd1 + dd2
    return CurvatureTensor(np.einsum("ijkm,ml->ijkl", r_low, gf(z)))
