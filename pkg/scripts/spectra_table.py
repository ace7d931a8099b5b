"""Reported spectra next to computed ones, plus a scan of nearby equilibria.

For each row the scan lists the spectrum at a few alternative equilibria and
generator strengths, to show which parameter set the reported numbers belong to.
"""
import numpy as np

from metriplectic.cli import match_spectra, spectra_rows, spectra_table
from metriplectic.config import spectrum_targets
from metriplectic.models import Generator, TopParams
from metriplectic.stability import Equilibrium, linearize, spectrum

TOP = TopParams.symmetric(1.0, 2.0, 1.0)
CANDIDATES = [(5.0, 3.0), (5.2, 3.0), (4.35283, 3.0), (4.35283, 2.97321), (5.24215, 3.01496)]


def scan(target):
    out = []
    for lam_scale in (0.1, 1.0, 10.0):
        gen = Generator(target.generator.kind, target.generator.lam * lam_scale)
        for l3, g3 in CANDIDATES:
            vals = spectrum(linearize(TOP, gen, Equilibrium(l3, g3)))
            out.append((match_spectra(vals, target.reported), gen.lam, l3, g3))
    return sorted(out)[:3]


if __name__ == "__main__":
    print(spectra_table(spectra_rows()))
    print("closest alternative parameter sets (deviation, lambda, L3*, G3*):")
    for t in spectrum_targets():
        best = ", ".join(f"({d:.3f}, {lam:g}, {l3:g}, {g3:g})" for d, lam, l3, g3 in scan(t))
        print(f"  {t.label}: {best}")
