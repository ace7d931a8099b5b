import math

import numpy as np
import pytest

from metriplectic.dynamics import (
    CSV_HEADER,
    FRB_CSV_HEADER,
    IntegratorOptions,
    detect_relaxation,
    integrate,
    monitor_report,
    read_csv,
)
from metriplectic.models import Generator, TopParams, observables
from metriplectic.stability import Equilibrium, linearize, spectrum

TOP = TopParams.symmetric(1.0, 2.0, 1.0)
Z_A = (1.0, 0.0, 4.2, 1.0, 0.0, 2.8)
Z_B = (0.5, 0.0, 5.2, 0.3, 0.0, 3.0)
Z_SWAP = (1.0, 0.0, 2.8, 1.0, 0.0, 4.2)


def test_options_validation():
    with pytest.raises(ValueError):
        IntegratorOptions(method="euler")
    with pytest.raises(ValueError):
        IntegratorOptions(dt=0.0)
    with pytest.raises(ValueError):
        IntegratorOptions(abs_tol=-1.0)
    with pytest.raises(ValueError):
        IntegratorOptions(record_every=0)


@pytest.mark.parametrize("gen", [Generator.linear(1.0), Generator.log(1.0), Generator.quadratic(0.1)])
def test_equilibrium_stays_put(gen):
    z0 = (0.0, 0.0, 5.0, 0.0, 0.0, 3.0)
    tr = integrate(TOP, gen, z0, IntegratorOptions(t_final=5.0, record_every=1))
    np.testing.assert_array_equal(tr.states, np.tile(z0, (len(tr), 1)))
    rel = detect_relaxation(tr)
    assert rel is not None and rel.time == 0.0


def test_trajectory_invariants():
    tr = integrate(TOP, Generator.linear(0.1), Z_A, IntegratorOptions(t_final=5.0, record_every=3))
    assert len(tr.times) == len(tr.states) == len(tr.observables)
    assert np.all(np.diff(tr.times) > 0)
    assert tr.times[0] == 0.0 and tr.times[-1] == 5.0


@pytest.mark.parametrize("lam", [0.0, 0.1, 1.0])
@pytest.mark.parametrize("kind", ["linear", "log", "quadratic"])
def test_conservation_over_100(kind, lam):
    gen = Generator(kind, lam)
    tr = integrate(TOP, gen, Z_A, IntegratorOptions(t_final=100.0))
    rep = monitor_report(tr, gen)
    assert rep.max_rel_dh < 1e-8
    assert rep.max_rel_dc2 < 1e-8
    assert rep.min_step_ds >= -1e-9
    assert rep.min_recorded_ds >= -1e-9
    if lam == 0.0:
        s = np.array([o.s for o in tr.observables])
        assert np.max(np.abs(s - s[0])) < 1e-8 * max(1.0, abs(s[0]))
    if kind == "linear" and lam > 0:
        assert rep.c1_monotone is True


def test_fig1_decay_rate_matches_linearization():
    gen = Generator.linear(0.1)
    tr = integrate(TOP, gen, Z_A, IntegratorOptions(t_final=40.0, record_every=1, record_dt=0.02))
    eq = Equilibrium.from_state(TOP, Z_A)
    rate = -max(v.real for v in spectrum(linearize(TOP, gen, eq)) if abs(v) > 1e-10)
    amp = np.max(np.abs(tr.states[:, [0, 1, 3, 4]]), axis=1)
    late = (tr.times > 15) & (tr.times < 35)
    slope = np.polyfit(tr.times[late], np.log(amp[late]), 1)[0]
    assert slope == pytest.approx(-rate, rel=0.1)


def test_fig6_does_not_relax_upright():
    tr = integrate(TOP, Generator.quadratic(0.1), Z_SWAP, IntegratorOptions(t_final=100.0, record_every=1))
    assert detect_relaxation(tr) is None
    # it settles, but into the flipped, hanging configuration
    hanging = detect_relaxation(tr, realizable=False)
    assert hanging is not None and hanging.l3 < 0 and hanging.g3 < 0


def test_fig3_relaxation_target():
    tr = integrate(TOP, Generator.log(1.0), Z_B, IntegratorOptions(t_final=80.0, record_every=1))
    rel = detect_relaxation(tr)
    assert rel is not None
    assert rel.l3 == pytest.approx(5.2, abs=0.05) and rel.g3 == pytest.approx(3.0, abs=0.05)
    # the limit is the equilibrium carrying the conserved H and |G|^2
    eq = Equilibrium.from_state(TOP, Z_B)
    assert rel.l3 == pytest.approx(eq.l3, abs=1e-5) and rel.g3 == pytest.approx(eq.g3, abs=1e-8)


def test_detect_relaxation_validation():
    tr = integrate(TOP, Generator.linear(0.1), Z_A, IntegratorOptions(t_final=1.0))
    with pytest.raises(ValueError):
        detect_relaxation(tr, tol=0.0)
    assert detect_relaxation(tr) is None


def test_domain_truncation():
    # G . L is non-decreasing along the exact flow, so the log guard is only hit
    # through roundoff; exercise the truncation path with a generator whose
    # admissible set ends at G . L = 12.9
    from metriplectic.models import DomainError

    def c_prime(x):
        if x >= 12.9:
            raise DomainError("left the admissible set")
        return 0.1

    gen = Generator.custom(lambda x: 0.1 * x, c_prime)
    tr = integrate(TOP, gen, Z_A, IntegratorOptions(t_final=50.0, record_every=5))
    assert tr.events and tr.events[-1][1] == "domain-error"
    assert tr.events[-1][0] == tr.times[-1] < 50.0
    assert all(o.c1 < 12.9 for o in tr.observables)


def test_inadmissible_start():
    from metriplectic.models import DomainError
    with pytest.raises(DomainError):
        integrate(TOP, Generator.log(1.0), (1, 0, 0, -1, 0, 0))


def _rk4_end(dt):
    opts = IntegratorOptions(method="rk4", dt=dt, t_final=2.0, record_every=10**6, record_dt=10.0)
    return integrate(TOP, Generator.linear(0.1), Z_A, opts).states[-1]


def test_rk4_observed_order():
    a, b, c = _rk4_end(0.04), _rk4_end(0.02), _rk4_end(0.01)
    order = math.log2(np.linalg.norm(a - b) / np.linalg.norm(b - c))
    assert order >= 3.8


def test_csv_round_trip(tmp_path):
    gen = Generator.quadratic(0.1)
    tr = integrate(TOP, gen, Z_A, IntegratorOptions(t_final=2.0, record_every=1))
    path = tmp_path / "t.csv"
    tr.write_csv(path)
    header, data = read_csv(path)
    assert header == CSV_HEADER
    np.testing.assert_array_equal(data, tr.table())
    assert data.shape == (len(tr), 11)
    o = observables(TOP, gen, data[-1, 1:7])
    assert o.s == data[-1, 8]


def test_frb_run(tmp_path):
    params = TopParams(1.0, 2.0, 3.0)
    gen = Generator.linear(0.05)
    tr = integrate(params, gen, (1.0, 1.0, 1.0), IntegratorOptions(t_final=20.0), model="frb")
    rep = monitor_report(tr, gen)
    assert rep.max_rel_dc2 is None and rep.max_rel_dh < 1e-8 and rep.min_step_ds >= -1e-9
    tr.write_csv(tmp_path / "f.csv")
    header, _ = read_csv(tmp_path / "f.csv")
    assert header == FRB_CSV_HEADER
    with pytest.raises(ValueError):
        detect_relaxation(tr)


def test_recording_stride():
    opts = IntegratorOptions(method="rk4", dt=0.01, t_final=1.0, record_every=10, record_dt=0.05)
    tr = integrate(TOP, Generator.linear(0.1), Z_A, opts)
    # coarser of 10 steps (0.1) and 0.05 wins
    np.testing.assert_allclose(np.diff(tr.times), 0.1, atol=1e-9)
    assert tr.steps == 100
