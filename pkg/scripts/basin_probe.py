"""Empirical basin probe around the upright equilibrium.

Perturbs the transverse components of a stable upright state at random,
integrates, and counts how many runs relax back to an upright state. S is not
a Lyapunov function here, so this is only an empirical picture.

    python scripts/basin_probe.py --kind quadratic --lam 0.1 --samples 40 --seed 0
"""
import argparse
import os

import numpy as np

from metriplectic.dynamics import IntegratorOptions, detect_relaxation, integrate
from metriplectic.models import Generator, TopParams

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", default="quadratic", choices=["linear", "log", "quadratic"])
    ap.add_argument("--lam", type=float, default=0.1)
    ap.add_argument("--l3", type=float, default=4.2)
    ap.add_argument("--g3", type=float, default=2.8)
    ap.add_argument("--samples", type=int, default=40)
    ap.add_argument("--t-final", type=float, default=200.0)
    ap.add_argument("--seed", type=int, default=int(os.environ.get("METRIPLECTIC_SEED", "0")))
    args = ap.parse_args()

    params = TopParams.symmetric(1.0, 2.0, 1.0)
    gen = Generator(args.kind, args.lam)
    rng = np.random.default_rng(args.seed)
    opts = IntegratorOptions(t_final=args.t_final, record_every=1, record_dt=0.1)
    print("radius  relaxed/total")
    for radius in (0.25, 0.5, 1.0, 2.0, 4.0):
        ok = 0
        for _ in range(args.samples):
            d = rng.normal(size=4)
            d *= radius / np.linalg.norm(d)
            z0 = np.array([d[0], d[1], args.l3, d[2], d[3], args.g3])
            if args.kind == "log" and z0[:3] @ z0[3:] <= 0:
                continue
            ok += detect_relaxation(integrate(params, gen, z0, opts)) is not None
        print(f"{radius:6.2f}  {ok}/{args.samples}")
