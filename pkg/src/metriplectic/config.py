"""Run configuration (JSON) and the figure presets.

A config is a single JSON object::

    {
      "description": "free text, ignored by the solver",
      "model": "heavy-top",                       # or "frb"
      "generator": {"kind": "linear", "lambda": 0.1},
      "i1": 1.0, "i3": 2.0, "xi": 1.0,            # optional "i2", defaults to i1
      "z0": [L1, L2, L3, G1, G2, G3],             # three entries for "frb"
      "integrator": {"method": "rk45", "t_final": 60.0, ...},
      "equilibrium": {"l3": 5.0, "g3": 3.0},      # optional, for linearize
      "output": "fig1"                            # optional path prefix
    }

Unknown keys are rejected at every level.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .dynamics import IntegratorOptions
from .models import Generator, GeneratorKind, TopParams
from .stability import Equilibrium


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


_TOP_KEYS = {"description", "model", "generator", "i1", "i2", "i3", "xi", "z0",
             "integrator", "equilibrium", "output"}
_GEN_KEYS = {"kind", "lambda"}
_EQ_KEYS = {"l3", "g3"}
_INT_KEYS = {f.name for f in fields(IntegratorOptions)}


@dataclass(frozen=True)
class RunConfig:
    model: str
    generator: Generator
    params: TopParams
    z0: tuple[float, ...]
    integrator: IntegratorOptions = field(default_factory=IntegratorOptions)
    equilibrium: Equilibrium | None = None
    output: str | None = None
    description: str = ""

    def resolved_equilibrium(self) -> Equilibrium:
        if self.model != "heavy-top":
            raise ConfigError("model: linearization is defined for the heavy top only")
        if self.equilibrium is not None:
            return self.equilibrium
        try:
            return Equilibrium.from_state(self.params, self.z0)
        except ValueError as exc:
            raise ConfigError(f"equilibrium: cannot derive from z0 ({exc})") from exc

    def to_dict(self) -> dict:
        d = {
            "description": self.description,
            "model": self.model,
            "generator": {"kind": self.generator.kind.value, "lambda": self.generator.lam},
            "i1": self.params.i1,
            "i3": self.params.i3,
            "xi": self.params.xi,
            "z0": list(self.z0),
            "integrator": asdict(self.integrator),
        }
        if self.params.i2 != self.params.i1:
            d["i2"] = self.params.i2
        if self.equilibrium is not None:
            d["equilibrium"] = {"l3": self.equilibrium.l3, "g3": self.equilibrium.g3}
        if self.output is not None:
            d["output"] = self.output
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _number(obj: dict, key: str, where: str, default=None) -> float:
    if key not in obj:
        if default is None:
            raise ConfigError(f"{where}{key}: required")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}{key}: expected a number, got {v!r}")
    return float(v)


def _check_keys(obj, allowed: set[str], where: str):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where or 'config'}: expected an object")
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"{where}{extra[0]}: unknown field")


def parse_config(obj: dict) -> RunConfig:
    _check_keys(obj, _TOP_KEYS, "")
    model = obj.get("model", "heavy-top")
    if model not in ("heavy-top", "frb"):
        raise ConfigError(f"model: expected 'heavy-top' or 'frb', got {model!r}")

    gen_obj = obj.get("generator")
    if gen_obj is None:
        raise ConfigError("generator: required")
    _check_keys(gen_obj, _GEN_KEYS, "generator.")
    kind = gen_obj.get("kind")
    if kind not in ("linear", "log", "quadratic"):
        raise ConfigError(f"generator.kind: expected linear, log or quadratic, got {kind!r}")
    lam = _number(gen_obj, "lambda", "generator.")
    try:
        gen = Generator(GeneratorKind(kind), lam)
    except ValueError as exc:
        raise ConfigError(f"generator.lambda: {exc}") from exc

    i1 = _number(obj, "i1", "")
    i3 = _number(obj, "i3", "")
    i2 = _number(obj, "i2", "", default=i1)
    xi = _number(obj, "xi", "", default=0.0)
    try:
        params = TopParams(i1, i2, i3, xi)
    except ValueError as exc:
        raise ConfigError(f"i1/i2/i3/xi: {exc}") from exc
    if model == "heavy-top" and not params.is_symmetric:
        raise ConfigError("i2: the heavy-top equations of motion need i2 == i1")

    z0 = obj.get("z0")
    n = 6 if model == "heavy-top" else 3
    if (not isinstance(z0, list) or len(z0) != n
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in z0)):
        raise ConfigError(f"z0: expected a list of {n} numbers for model {model!r}")
    z0 = tuple(float(v) for v in z0)
    if gen.kind is GeneratorKind.LOG:
        x = sum(a * b for a, b in zip(z0[:3], z0[3:])) if n == 6 else sum(a * a for a in z0)
        if not x > 0:
            raise ConfigError("z0: log generator needs a positive Casimir argument at the start")

    int_obj = obj.get("integrator", {})
    _check_keys(int_obj, _INT_KEYS, "integrator.")
    try:
        opts = IntegratorOptions(**int_obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"integrator: {exc}") from exc

    eq = None
    if "equilibrium" in obj:
        eq_obj = obj["equilibrium"]
        _check_keys(eq_obj, _EQ_KEYS, "equilibrium.")
        try:
            eq = Equilibrium(_number(eq_obj, "l3", "equilibrium."), _number(eq_obj, "g3", "equilibrium."))
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"equilibrium: {exc}") from exc

    output = obj.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a string path prefix")
    desc = obj.get("description", "")
    if not isinstance(desc, str):
        raise ConfigError("description: expected a string")
    return RunConfig(model, gen, params, z0, opts, eq, output, desc)


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from exc
    return parse_config(obj)


# -- presets ---------------------------------------------------------------------

@dataclass(frozen=True)
class Expectation:
    relaxes: bool
    l3: float | None = None
    g3: float | None = None
    tol: float = 0.05


@dataclass(frozen=True)
class Preset:
    name: str
    config: RunConfig
    expect: Expectation


_TOP = TopParams.symmetric(1.0, 2.0, 1.0)
_RECORD = dict(record_every=1, record_dt=0.05)
_A = (1.0, 0.0, 4.2, 1.0, 0.0, 2.8)   # L(0) = (1, 0, 4.2), G(0) = (1, 0, 2.8)
_B = (0.5, 0.0, 5.2, 0.3, 0.0, 3.0)   # L(0) = (.5, 0, 5.2), G(0) = (.3, 0, 3)
_SWAP = (1.0, 0.0, 2.8, 1.0, 0.0, 4.2)  # L(0) = (1, 0, 2.8), G(0) = (1, 0, 4.2)


def _preset(name, desc, gen, z0, t_final, expect, eq=None) -> Preset:
    cfg = RunConfig(
        model="heavy-top",
        generator=gen,
        params=_TOP,
        z0=z0,
        integrator=IntegratorOptions(t_final=t_final, **_RECORD),
        equilibrium=eq,
        output=name,
        description=desc,
    )
    return Preset(name, cfg, expect)


# t_final values are chosen to show settling.
PRESETS: dict[str, Preset] = {p.name: p for p in [
    _preset("fig1", "C(x) = lambda x, lambda = 0.1; linearized at L3* = 5, G3* = 3",
            Generator.linear(0.1), _A, 60.0, Expectation(True), Equilibrium(5.0, 3.0)),
    _preset("fig2", "C(x) = lambda x, lambda = 1; linearized at L3* = 5, G3* = 3",
            Generator.linear(1.0), _B, 60.0, Expectation(True), Equilibrium(5.0, 3.0)),
    _preset("fig3", "C(x) = lambda log x, lambda = 1; relaxes to L3* ~ 5.2, G3* ~ 3.0",
            Generator.log(1.0), _B, 80.0, Expectation(True, l3=5.2, g3=3.0), Equilibrium(5.2, 3.0)),
    _preset("fig4", "C(x) = lambda log x, lambda = 0.1; equilibrium from conserved H and G^2",
            Generator.log(0.1), _A, 400.0, Expectation(True)),
    _preset("fig5", "C(x) = lambda x^2 / 2, lambda = 0.1; equilibrium from conserved H and G^2",
            Generator.quadratic(0.1), _A, 80.0, Expectation(True)),
    _preset("fig6", "C(x) = lambda x^2 / 2, lambda = 0.1, L and G initial vectors swapped; unstable",
            Generator.quadratic(0.1), _SWAP, 100.0, Expectation(False)),
    _preset("fig7", "C(x) = lambda x^2 / 2, lambda = 1; linearized at L3* = 5.2, G3* = 3",
            Generator.quadratic(1.0), _B, 400.0, Expectation(True), Equilibrium(5.2, 3.0)),
]}


@dataclass(frozen=True)
class SpectrumTarget:
    label: str
    generator: Generator
    equilibrium: Equilibrium
    reported: tuple[complex, ...]
    tol: float = 0.02


def _doubled(re: float, im: float) -> tuple[complex, ...]:
    return (0j, 0j, complex(re, im), complex(re, -im), complex(re, im), complex(re, -im))


def spectrum_targets() -> list[SpectrumTarget]:
    """The six reported spectra at the equilibria they are checked against."""
    fig4 = Equilibrium.from_state(_TOP, PRESETS["fig4"].config.z0)
    fig5 = Equilibrium.from_state(_TOP, PRESETS["fig5"].config.z0)
    return [
        SpectrumTarget("linear lambda=0.1", Generator.linear(0.1), Equilibrium(5.0, 3.0),
                       _doubled(-0.38, 1.76)),
        SpectrumTarget("linear lambda=1", Generator.linear(1.0), Equilibrium(5.2, 3.0),
                       (0j, 0j, -7.03 + 0j, -7.03 + 0j, -0.46 + 0j, -0.46 + 0j)),
        SpectrumTarget("log lambda=1", Generator.log(1.0), Equilibrium(5.2, 3.0),
                       _doubled(-0.25, 2.0)),
        SpectrumTarget("log lambda=0.1 (fig4)", Generator.log(0.1), fig4,
                       _doubled(-0.025, 1.67)),
        SpectrumTarget("quadratic lambda=0.1 (fig5)", Generator.quadratic(0.1), fig5,
                       (-8.31 + 0j, -8.31 + 0j, -0.21 + 0j, -0.21 + 0j, 0j, 0j)),
        SpectrumTarget("quadratic lambda=1", Generator.quadratic(1.0), Equilibrium(5.2, 3.0),
                       (-11.85 + 0j, -11.85 + 0j, -0.317 + 0j, -0.317 + 0j, 0j, 0j)),
    ]
