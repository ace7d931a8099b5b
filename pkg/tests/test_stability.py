import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metriplectic.cli import match_spectra
from metriplectic.models import Generator, GeneratorKind, TopParams, heavy_top_rhs
from metriplectic.stability import (
    Classification,
    Equilibrium,
    UnsupportedCase,
    analyze,
    classify,
    classify_spectrum,
    closed_form_AB,
    describe_real_parts,
    linearize,
    spectrum,
    stability_condition,
)
from strategies import positive

TOP = TopParams.symmetric(1.0, 2.0, 1.0)
KINDS = [GeneratorKind.LINEAR, GeneratorKind.LOG, GeneratorKind.QUADRATIC]


def fd_jacobian(params, gen, z, h=1e-6):
    cols = []
    for m in range(6):
        e = np.zeros(6)
        e[m] = h
        cols.append((heavy_top_rhs(params, gen, z + e) - heavy_top_rhs(params, gen, z - e)) / (2 * h))
    return np.stack(cols, axis=1)


@pytest.mark.parametrize("kind", KINDS)
def test_linearize_matches_fd_jacobian(kind):
    rng = np.random.default_rng(20)
    for _ in range(20):
        params = TopParams.symmetric(rng.uniform(0.5, 2), rng.uniform(0.5, 3), rng.uniform(-2, 2))
        gen = Generator(kind, rng.uniform(0, 1))
        eq = Equilibrium(rng.uniform(0.5, 6), rng.uniform(0.5, 4))
        m = linearize(params, gen, eq)
        np.testing.assert_allclose(m, fd_jacobian(params, gen, eq.state), atol=1e-6)


def test_linear_entries():
    lam, L, G = 0.3, 5.0, 3.0
    m = linearize(TOP, Generator.linear(lam), Equilibrium(L, G))
    assert m[0, 0] == m[1, 1] == pytest.approx(-lam * L * G / 2)
    assert m[0, 3] == m[1, 4] == pytest.approx(lam * L**2 / 4)
    assert np.all(m[2] == 0) and np.all(m[5] == 0)


def test_only_prefactor_depends_on_generator():
    eq = Equilibrium(5.2, 3.0)
    x = eq.l3 * eq.g3
    base = linearize(TOP, Generator.linear(1.0), eq)
    off = linearize(TOP, Generator.linear(0.0), eq)
    diss = base - off
    np.testing.assert_allclose(linearize(TOP, Generator.log(1.0), eq) - off, diss / x, atol=1e-15)
    np.testing.assert_allclose(linearize(TOP, Generator.quadratic(1.0), eq) - off, diss * x, atol=1e-12)


def test_equilibrium_must_be_realizable():
    with pytest.raises(ValueError):
        Equilibrium(-1.0, 3.0)
    with pytest.raises(ValueError):
        Equilibrium(5.0, 0.0)


def test_conservative_spectrum_imaginary():
    vals = spectrum(linearize(TOP, Generator.linear(0.0), Equilibrium(5.0, 3.0)))
    np.testing.assert_allclose(vals.real, 0.0, atol=1e-12)
    assert classify(TOP, Generator.linear(0.0), Equilibrium(5.0, 3.0)) is Classification.MARGINAL


def test_spectrum_zero_matrix_and_errors():
    np.testing.assert_array_equal(spectrum(np.zeros((6, 6))), np.zeros(6))
    with pytest.raises(ValueError):
        spectrum(np.full((6, 6), np.nan))


def test_spectrum_sorted_and_residual():
    rng = np.random.default_rng(1)
    m = rng.normal(size=(6, 6))
    vals = spectrum(m)
    assert list(vals) == sorted(vals, key=lambda v: (v.real, v.imag))
    for v in vals:
        assert abs(np.linalg.det(m - v * np.eye(6))) < 1e-8 * np.linalg.norm(m) ** 6


# spectra where the reported numbers and their equilibria are mutually consistent

def _close(vals, ref, tol):
    return match_spectra(vals, ref) <= tol


def test_linear_small_lambda_reported_spectrum():
    vals = spectrum(linearize(TOP, Generator.linear(0.1), Equilibrium(5.0, 3.0)))
    ref = [0, 0, -0.38 + 1.76j, -0.38 - 1.76j, -0.38 + 1.76j, -0.38 - 1.76j]
    assert _close(vals, ref, 0.01)


def test_linear_unit_lambda_at_five_three():
    vals = spectrum(linearize(TOP, Generator.linear(1.0), Equilibrium(5.0, 3.0)))
    assert _close(vals, [0, 0, -7.03, -7.03, -0.46, -0.46], 0.02)


def test_quadratic_reported_pair_at_five_point_two():
    # (-11.85, -0.317) belongs to lambda = 0.1 at (5.2, 3)
    vals = spectrum(linearize(TOP, Generator.quadratic(0.1), Equilibrium(5.2, 3.0)))
    assert _close(vals, [-11.85, -11.85, -0.317, -0.317, 0, 0], 0.02)


def test_quadratic_fig5_pair_with_unit_gravity_scale():
    vals = spectrum(linearize(TOP, Generator.quadratic(0.1), Equilibrium(4.35283, 3.0)))
    assert _close(vals, [-8.31, -8.31, -0.21, -0.21, 0, 0], 0.02)
    assert classify(TOP, Generator.quadratic(0.1), Equilibrium(4.35283, 3.0)) is Classification.STABLE


def test_log_real_parts():
    for lam, re in [(1.0, -0.25), (0.1, -0.025)]:
        vals = spectrum(linearize(TOP, Generator.log(lam), Equilibrium(5.2, 3.0)))
        nz = vals[np.abs(vals) > 1e-10]
        np.testing.assert_allclose(nz.real, re, atol=1e-12)


# closed forms

@settings(max_examples=50)
@given(st.sampled_from(["linear", "log"]), positive, st.floats(0.0, 2.0), st.floats(0.1, 3.0),
       st.floats(0.3, 8.0), st.floats(0.3, 5.0))
def test_closed_form_matches_numeric(kind, i1, lam, xi, l3, g3):
    params = TopParams.symmetric(i1, 2 * i1, xi)
    gen, eq = Generator(kind, lam), Equilibrium(l3, g3)
    a, b = closed_form_AB(params, gen, eq)
    pred = [0, 0, a, np.conj(a), b, np.conj(b)]
    vals = spectrum(linearize(params, gen, eq))
    assert match_spectra(vals, pred) < 1e-8 * max(1.0, np.abs(vals).max())


def test_closed_form_examples():
    a, b = closed_form_AB(TOP, Generator.log(1.0), Equilibrium(5.2, 3.0))
    assert a.real == pytest.approx(-0.25) and abs(a.imag) == pytest.approx(1.9229, abs=1e-4)
    # boundary with lambda -> 0: both roots vanish
    eq = Equilibrium(np.sqrt(12.0), 3.0)
    a, b = closed_form_AB(TOP, Generator.linear(0.0), eq)
    assert abs(a) < 1e-7 and abs(b) < 1e-7


def test_closed_form_unsupported():
    with pytest.raises(UnsupportedCase):
        closed_form_AB(TopParams.symmetric(1.0, 3.0, 1.0), Generator.linear(0.1), Equilibrium(5, 3))
    with pytest.raises(UnsupportedCase):
        closed_form_AB(TOP, Generator.quadratic(0.1), Equilibrium(5, 3))


@settings(max_examples=100)
@given(st.sampled_from(KINDS), st.floats(0.0, 2.0), st.floats(0.3, 8.0), st.floats(0.3, 5.0))
def test_two_zero_eigenvalues_and_conjugate_pairs(kind, lam, l3, g3):
    vals = spectrum(linearize(TOP, Generator(kind, lam), Equilibrium(l3, g3)))
    assert np.sum(np.abs(vals) <= 1e-10) >= 2
    nz = vals[np.abs(vals.imag) > 1e-10]
    np.testing.assert_allclose(np.sort_complex(nz), np.sort_complex(np.conj(nz)), atol=1e-9)


def test_stability_condition_boundary_sweep():
    lam, g3, i1, xi = 1e-3, 3.0, 1.0, 1.0
    boundary = np.sqrt(4 * g3 * i1 * xi)
    for l3 in boundary + np.linspace(-0.5, 0.5, 20):
        eq = Equilibrium(l3, g3)
        gen = Generator.linear(lam)
        vals = spectrum(linearize(TOP, gen, eq))
        unstable = vals.real.max() > 1e-10
        if lam**2 * g3**2 * l3**2 + 16 * g3 * i1**3 * xi - 4 * i1**2 * l3**2 >= 0:
            assert stability_condition(TOP, gen, eq) == (not unstable)


@settings(max_examples=50)
@given(st.floats(0.05, 2.0), st.floats(0.3, 8.0), st.floats(0.3, 5.0))
def test_log_condition_agrees_with_spectrum(lam, l3, g3):
    eq = Equilibrium(l3, g3)
    gen = Generator.log(lam)
    margin = abs(l3**2 - 4.0 * g3)
    if margin > 1e-6:
        expect = Classification.STABLE if stability_condition(TOP, gen, eq) else Classification.UNSTABLE
        assert classify(TOP, gen, eq) is expect


def test_classification_and_description():
    rep = analyze(TOP, Generator.quadratic(0.1), Equilibrium(3.0611, 4.3174))
    assert rep.classification is Classification.UNSTABLE
    assert describe_real_parts(rep.spectrum) == "Re(A), Re(B) differ in sign"
    rep = analyze(TOP, Generator.linear(0.1), Equilibrium(5.0, 3.0))
    assert rep.classification is Classification.STABLE and rep.condition is True
    assert describe_real_parts(rep.spectrum) == "Re(A), Re(B) both negative"
    assert classify_spectrum(np.zeros((6, 6))) is Classification.MARGINAL


def test_log_boundary_is_l_squared_over_g():
    # L*^2 = 4 < 4 G* I1 xi = 8 is unstable although G* L*^2 = 8 > 4 I1 xi
    eq = Equilibrium(2.0, 2.0)
    assert classify(TOP, Generator.log(1.0), eq) is Classification.UNSTABLE
    assert stability_condition(TOP, Generator.log(1.0), eq) is False
