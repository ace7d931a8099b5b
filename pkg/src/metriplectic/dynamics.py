"""Time integration of the dissipative top with invariant monitoring.

Adaptive stepping uses SciPy's Dormand-Prince RK45 stepper driven one
accepted step at a time, so recording, the log-domain guard and per-step
entropy checks all happen here. A classical fixed-step RK4 is provided for
bit-reproducible runs.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import RK45

from .models import (
    DomainError,
    Generator,
    Observables,
    TopParams,
    frb_rhs,
    heavy_top_rhs,
    observables,
)

CSV_HEADER = ["t", "L1", "L2", "L3", "G1", "G2", "G3", "H", "S", "GdotL", "G2norm"]
FRB_CSV_HEADER = ["t", "L1", "L2", "L3", "H", "S", "L2norm"]


class IntegrationError(RuntimeError):
    """Step size underflow or another unrecoverable solver failure."""


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "rk45"
    t_final: float = 100.0
    dt: float = 0.01
    abs_tol: float = 1e-10
    rel_tol: float = 1e-9
    record_every: int = 100
    record_dt: float = 0.01

    def __post_init__(self):
        if self.method not in ("rk45", "rk4"):
            raise ValueError(f"method must be 'rk45' or 'rk4', got {self.method!r}")
        for name in ("t_final", "dt", "abs_tol", "rel_tol", "record_dt"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive, got {v!r}")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every!r}")


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    observables: list[Observables]
    events: list[tuple[float, str]] = field(default_factory=list)
    model: str = "heavy-top"
    steps: int = 0
    # min over every accepted step of S(t_{k+1}) - S(t_k), not just recorded ones
    min_step_ds: float = math.inf

    def __len__(self) -> int:
        return len(self.times)

    def column(self, name: str) -> np.ndarray:
        header = CSV_HEADER if self.model == "heavy-top" else FRB_CSV_HEADER
        return self.table()[:, header.index(name)]

    def table(self) -> np.ndarray:
        obs = self.observables
        h = np.array([o.h for o in obs])
        s = np.array([o.s for o in obs])
        c1 = np.array([o.c1 for o in obs])
        if self.model == "heavy-top":
            c2 = np.array([o.c2 for o in obs])
            return np.column_stack([self.times, self.states, h, s, c1, c2])
        return np.column_stack([self.times, self.states, h, s, c1])

    def write_csv(self, path) -> None:
        header = CSV_HEADER if self.model == "heavy-top" else FRB_CSV_HEADER
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in self.table():
                w.writerow([f"{v:.17g}" for v in row])


def read_csv(path) -> tuple[list[str], np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def _rhs_for(model: str) -> Callable:
    if model == "heavy-top":
        return heavy_top_rhs
    if model == "frb":
        return frb_rhs
    raise ValueError(f"unknown model {model!r}")


def _rk4_step(f, t, y, h):
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(params: TopParams, gen: Generator, z0, opts: IntegratorOptions | None = None,
              model: str = "heavy-top") -> Trajectory:
    """Integrate the metriplectic flow from z0 up to opts.t_final.

    A sample is recorded once at least ``record_every`` accepted steps and at
    least ``record_dt`` time have passed since the previous one (the coarser
    of the two); the first and last states are always recorded. If the log
    generator's domain is left the trajectory is truncated at the last good
    state and a ``domain-error`` event is appended.
    """
    opts = opts or IntegratorOptions()
    rhs = _rhs_for(model)
    y0 = np.array(z0, dtype=float)
    expected = 6 if model == "heavy-top" else 3
    if y0.shape != (expected,):
        raise ValueError(f"{model} initial state must have length {expected}, got {y0.shape}")
    obs0 = observables(params, gen, y0)  # raises DomainError for an inadmissible start

    def f(t, y):
        return rhs(params, gen, y)

    times, states, obs = [0.0], [y0.copy()], [obs0]
    events: list[tuple[float, str]] = []
    pending = None  # last accepted sample not yet recorded
    t_last, since_last, steps = 0.0, 0, 0
    s_prev, min_ds = obs0.s, math.inf

    def accept(t, y, force=False):
        nonlocal t_last, since_last, steps, s_prev, min_ds, pending
        y = np.array(y, dtype=float)
        o = observables(params, gen, y)
        steps += 1
        since_last += 1
        min_ds = min(min_ds, o.s - s_prev)
        s_prev = o.s
        pending = (t, y, o)
        if force or (since_last >= opts.record_every and t - t_last >= opts.record_dt):
            times.append(t)
            states.append(y)
            obs.append(o)
            t_last, since_last, pending = t, 0, None

    try:
        if opts.method == "rk4":
            n = max(1, int(math.ceil(opts.t_final / opts.dt - 1e-9)))
            y = y0
            for k in range(n):
                t0 = k * opts.dt
                h = min(opts.dt, opts.t_final - t0)
                y = _rk4_step(f, t0, y, h)
                if not np.all(np.isfinite(y)):
                    raise IntegrationError(f"non-finite state at t={t0 + h}")
                t = opts.t_final if k == n - 1 else (k + 1) * opts.dt
                accept(t, y, force=(k == n - 1))
        else:
            solver = RK45(f, 0.0, y0, opts.t_final, rtol=opts.rel_tol, atol=opts.abs_tol)
            while solver.status == "running":
                msg = solver.step()
                if solver.status == "failed":
                    raise IntegrationError(f"RK45 failed at t={solver.t}: {msg}")
                accept(solver.t, solver.y, force=solver.status == "finished")
    except DomainError:
        if pending is not None:
            t, y, o = pending
            times.append(t)
            states.append(y)
            obs.append(o)
        events.append((float(times[-1]), "domain-error"))

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        observables=obs,
        events=events,
        model=model,
        steps=steps,
        min_step_ds=min_ds,
    )


@dataclass(frozen=True)
class Relaxation:
    time: float
    l3: float
    g3: float


def detect_relaxation(traj: Trajectory, tol: float = 1e-3, hold: float = 0.1,
                      realizable: bool = True) -> Relaxation | None:
    """First time after which the transverse components stay small.

    The transverse size is max(|L1|, |L2|, |G1|, |G2|), compared against
    ``tol * max(|L(0)|, |G(0)|)``. It must stay under the threshold until the
    end of the trajectory and for at least ``hold`` times the trajectory
    duration, so a momentary dip at the final sample does not count. With
    ``realizable`` the limit must also be the upright state with L3 > 0 and
    G3 > 0; settling into a flipped, hanging state is not reported.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if traj.model != "heavy-top":
        raise ValueError("relaxation detection is defined for the heavy top")
    z = traj.states
    scale = max(np.linalg.norm(z[0, :3]), np.linalg.norm(z[0, 3:]))
    transverse = np.max(np.abs(z[:, [0, 1, 3, 4]]), axis=1)
    above = np.nonzero(transverse >= tol * scale)[0]
    first = 0 if above.size == 0 else above[-1] + 1
    if first >= len(z):
        return None
    duration = traj.times[-1] - traj.times[0]
    if first > 0 and traj.times[-1] - traj.times[first] < hold * duration:
        return None
    l3, g3 = float(z[-1, 2]), float(z[-1, 5])
    if realizable and not (l3 > 0 and g3 > 0):
        return None
    return Relaxation(time=float(traj.times[first]), l3=l3, g3=g3)


@dataclass(frozen=True)
class MonitorReport:
    max_rel_dh: float
    max_rel_dc2: float | None
    min_step_ds: float
    min_recorded_ds: float
    c1_monotone: bool | None

    def lines(self) -> list[str]:
        out = [
            f"max |dH|/|H|            {self.max_rel_dh:.3e}",
            f"min per-step dS         {self.min_step_ds:.3e}",
            f"min recorded dS         {self.min_recorded_ds:.3e}",
        ]
        if self.max_rel_dc2 is not None:
            out.insert(1, f"max |dG^2|/G^2          {self.max_rel_dc2:.3e}")
        if self.c1_monotone is not None:
            out.append(f"G.L non-decreasing      {self.c1_monotone}")
        return out


def monitor_report(traj: Trajectory, gen: Generator | None = None, step_tol: float = 1e-9) -> MonitorReport:
    """Conservation and monotonicity summary.

    The G . L monotonicity verdict is only given for a linear generator with
    positive strength, where S' >= 0 forces (G . L)' >= 0.
    """
    h = np.array([o.h for o in traj.observables])
    s = np.array([o.s for o in traj.observables])
    scale_h = max(abs(h[0]), np.finfo(float).tiny)
    max_rel_dh = float(np.max(np.abs(h - h[0])) / scale_h)
    max_rel_dc2 = None
    if traj.model == "heavy-top":
        c2 = np.array([o.c2 for o in traj.observables])
        max_rel_dc2 = float(np.max(np.abs(c2 - c2[0])) / max(abs(c2[0]), np.finfo(float).tiny))
    ds = np.diff(s)
    min_rec = float(ds.min()) if ds.size else 0.0
    monotone = None
    if gen is not None and gen.kind.value == "linear" and gen.lam > 0 and traj.model == "heavy-top":
        c1 = np.array([o.c1 for o in traj.observables])
        monotone = bool(np.all(np.diff(c1) >= -step_tol))
    min_step = traj.min_step_ds if math.isfinite(traj.min_step_ds) else 0.0
    return MonitorReport(max_rel_dh, max_rel_dc2, min_step, min_rec, monotone)
