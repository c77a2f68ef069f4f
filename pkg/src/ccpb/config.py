"""Experiment configuration: JSON files with a fixed schema.

Unknown keys anywhere in the document are errors. ``to_dict`` output
re-parses to an equal config, which is what ``--dump-config`` relies on.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .grid import Grid, make_graded, make_uniform
from .ions import BoundaryData, IonSystem
from .solver import SolverConfig

COMMANDS = ("solve", "limits", "sweep", "nonneutral")
MODELS = ("ccpb", "pb")


class ConfigError(ValueError):
    pass


def _take(d: dict, cls, where: str) -> dict:
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object, got {type(d).__name__}")
    allowed = {f.name for f in fields(cls)}
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown key(s) {sorted(extra)}")
    return d


@dataclass(frozen=True)
class SpeciesBlock:
    label: str
    anions: list
    cations: list

    def system(self) -> IonSystem:
        return IonSystem(self.anions, self.cations)

    @classmethod
    def from_dict(cls, d, where="species"):
        d = _take(d, cls, where)
        try:
            blk = cls(str(d.get("label", "main")),
                      [[float(z), float(m)] for z, m in d["anions"]],
                      [[float(z), float(m)] for z, m in d["cations"]])
            blk.system()
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        return blk


@dataclass(frozen=True)
class EtaRule:
    """eta = 0, eta = value, or eta = coef * eps**power."""

    kind: str = "zero"
    value: float = 0.0
    coef: float = 0.0
    power: float = 0.0

    def __post_init__(self):
        if self.kind not in ("zero", "const", "scaled"):
            raise ConfigError(f"eta_rule.kind must be zero|const|scaled, got {self.kind!r}")
        if self.value < 0 or self.coef < 0:
            raise ConfigError("eta_rule values must be >= 0")

    def eta(self, eps: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "const":
            return self.value
        return self.coef * eps ** self.power

    def gamma_limit(self) -> float:
        """lim eta/eps as eps -> 0 (inf when eta/eps blows up)."""
        if self.kind == "zero":
            return 0.0
        if self.kind == "const":
            return math.inf if self.value > 0 else 0.0
        if self.coef == 0 or self.power > 1:
            return 0.0
        return self.coef if self.power == 1 else math.inf


@dataclass(frozen=True)
class GridSpec:
    kind: str = "uniform"
    n_cells: int = 4096
    min_cell_eps2: float = 0.05
    growth: float = 1.15
    interior_h: float = 2.0 ** -9

    def __post_init__(self):
        if self.kind not in ("uniform", "graded"):
            raise ConfigError(f"grid.kind must be uniform|graded, got {self.kind!r}")

    def build(self, eps: float) -> Grid:
        if self.kind == "uniform":
            return make_uniform(self.n_cells)
        return make_graded(self.min_cell_eps2 * eps * eps, self.growth, self.interior_h)


@dataclass(frozen=True)
class SolverSpec:
    relax_s: float | None = None
    relax_C: float = 0.5
    tol: float = 1e-6
    max_iter: int = 2_000_000
    init: str = "linear"

    def build(self) -> SolverConfig:
        return SolverConfig(relax_s=self.relax_s, relax_C=self.relax_C, tol=self.tol,
                            max_iter=int(self.max_iter), init=self.init)


@dataclass(frozen=True)
class GammaSpec:
    values: list | None = None
    lo: float = 1e-3
    hi: float = 1e3
    n: int = 200

    def grid(self) -> np.ndarray:
        if self.values is not None:
            return np.asarray(self.values, dtype=float)
        return np.logspace(np.log10(self.lo), np.log10(self.hi), int(self.n))


@dataclass(frozen=True)
class OutputSpec:
    precision: int = 6
    prefix: str = ""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    command: str
    species: list
    models: list = field(default_factory=lambda: ["ccpb"])
    phi_plus: float = 1.0
    phi_minus: float = -1.0
    eta_rule: EtaRule = field(default_factory=EtaRule)
    eps: list = field(default_factory=list)
    grid: GridSpec = field(default_factory=GridSpec)
    solver: SolverSpec = field(default_factory=SolverSpec)
    gammas: GammaSpec | None = None
    kappa: list = field(default_factory=lambda: [0.5])
    outputs: OutputSpec = field(default_factory=OutputSpec)
    description: str = ""

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"command must be one of {COMMANDS}, got {self.command!r}")
        if not self.species:
            raise ConfigError("species list must be nonempty")
        for m in self.models:
            if m not in MODELS:
                raise ConfigError(f"unknown model {m!r}")
        for e in self.eps:
            if not 0 < e < 1:
                raise ConfigError(f"eps values must lie in (0, 1), got {e}")
        for k in self.kappa:
            if not 0 < k < 1:
                raise ConfigError(f"kappa values must lie in (0, 1), got {k}")
        labels = [s.label for s in self.species]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"species labels must be unique, got {labels}")

    def boundary(self, eps: float) -> BoundaryData:
        return BoundaryData(self.phi_plus, self.phi_minus, self.eta_rule.eta(eps))

    def gamma_values(self) -> np.ndarray:
        if self.gammas is not None:
            return self.gammas.grid()
        return np.array([self.eta_rule.gamma_limit()])

    def to_dict(self) -> dict:
        d = asdict(self)
        d["species"] = [asdict(s) for s in self.species]
        return d

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(_take(d, cls, "config"))
        try:
            species = [SpeciesBlock.from_dict(s, f"species[{i}]") for i, s in enumerate(d.pop("species"))]
            name, command = d.pop("name"), d.pop("command")
        except KeyError as exc:
            raise ConfigError(f"config: missing key {exc}") from exc
        sub = {"eta_rule": EtaRule, "grid": GridSpec, "solver": SolverSpec,
               "gammas": GammaSpec, "outputs": OutputSpec}
        kw = {}
        for key, val in d.items():
            if key in sub and val is not None:
                try:
                    kw[key] = sub[key](**_take(val, sub[key], key))
                except TypeError as exc:
                    raise ConfigError(f"{key}: {exc}") from exc
            elif key in ("eps", "kappa"):
                kw[key] = [float(v) for v in val]
            elif key in ("phi_plus", "phi_minus"):
                kw[key] = float(val)
            else:
                kw[key] = val
        return cls(name=name, command=command, species=species, **kw)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    return ExperimentConfig.loads(Path(path).read_text())
