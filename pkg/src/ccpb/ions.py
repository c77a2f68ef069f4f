"""Ionic species data and the algebra built on it.

Anions carry valence ``-a_k`` and total concentration ``alpha_k``; cations
carry valence ``+b_l`` and total concentration ``beta_l``. Everything in the
package works with the scaled (dimensionless) potential, so the Boltzmann
factors are ``exp(a_k phi)`` for anions and ``exp(-b_l phi)`` for cations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

EXP_CAP = 700.0
NEUTRAL_TOL = 1e-12


class ExponentOverflowError(ArithmeticError):
    """Raised when a Boltzmann exponent leaves the representable range."""


def check_exponent(arg, cap: float = EXP_CAP) -> None:
    m = np.max(np.abs(arg)) if np.ndim(arg) else abs(arg)
    if not np.isfinite(m) or m > cap:
        raise ExponentOverflowError(f"|exponent| = {m:.4g} exceeds cap {cap:g}")


def _as_pairs(items: Iterable[Sequence[float]], label: str) -> tuple[tuple[float, float], ...]:
    pairs = tuple((float(z), float(m)) for z, m in items)
    if not pairs:
        raise ValueError(f"{label} list must be nonempty")
    for z, m in pairs:
        if z < 1.0:
            raise ValueError(f"{label} valence {z} must be >= 1")
        if not m > 0.0:
            raise ValueError(f"{label} concentration {m} must be > 0")
    zs = [z for z, _ in pairs]
    if any(b <= a for a, b in zip(zs, zs[1:])):
        raise ValueError(f"{label} valences must be strictly increasing, got {zs}")
    return pairs


@dataclass(frozen=True)
class IonSystem:
    """Anion and cation (valence, concentration) lists.

    Valences are stored as positive magnitudes; the sign is implied by the
    list they live in.
    """

    anions: tuple[tuple[float, float], ...]
    cations: tuple[tuple[float, float], ...]

    def __init__(self, anions, cations):
        object.__setattr__(self, "anions", _as_pairs(anions, "anion"))
        object.__setattr__(self, "cations", _as_pairs(cations, "cation"))

    @property
    def a(self) -> np.ndarray:
        return np.array([z for z, _ in self.anions])

    @property
    def alpha(self) -> np.ndarray:
        return np.array([m for _, m in self.anions])

    @property
    def b(self) -> np.ndarray:
        return np.array([z for z, _ in self.cations])

    @property
    def beta(self) -> np.ndarray:
        return np.array([m for _, m in self.cations])

    def signed(self) -> tuple[np.ndarray, np.ndarray]:
        """Species as (q, m) with q = +a_k for anions and q = -b_l for cations.

        With this convention every Boltzmann factor is ``exp(q * phi)`` and
        the source term is ``sum(q * m * exp(q * phi) / norm)``.
        """
        q = np.concatenate([self.a, -self.b])
        m = np.concatenate([self.alpha, self.beta])
        return q, m

    @property
    def total(self) -> float:
        return float(self.alpha.sum() + self.beta.sum())

    @property
    def electroneutral(self) -> bool:
        return abs(charge_imbalance(self)) <= NEUTRAL_TOL

    def scaled(self, lam: float) -> "IonSystem":
        return IonSystem([(z, lam * m) for z, m in self.anions],
                         [(z, lam * m) for z, m in self.cations])

    def to_dict(self) -> dict:
        return {"anions": [list(p) for p in self.anions],
                "cations": [list(p) for p in self.cations]}


@dataclass(frozen=True)
class BoundaryData:
    phi_plus: float
    phi_minus: float
    eta: float

    def __post_init__(self):
        if not self.eta >= 0.0:
            raise ValueError(f"eta must be >= 0, got {self.eta}")

    @property
    def dirichlet(self) -> bool:
        return self.eta == 0.0


def charge_imbalance(sys: IonSystem) -> float:
    return float(np.dot(sys.a, sys.alpha) - np.dot(sys.b, sys.beta))


def _terms(sys: IonSystem, s, cap: float):
    s = np.asarray(s, dtype=float)
    q, m = sys.signed()
    arg = np.multiply.outer(s, q)
    check_exponent(arg, cap)
    return q, m, arg


def f_eval(sys: IonSystem, s, cap: float = EXP_CAP):
    """sum alpha_k e^{a_k s} + sum beta_l e^{-b_l s}; vectorized over ``s``."""
    q, m, arg = _terms(sys, s, cap)
    out = np.exp(arg) @ m
    return float(out) if out.ndim == 0 else out


def f_minus_f0(sys: IonSystem, s, cap: float = EXP_CAP):
    """f(s) - f(0) without cancellation for small |s|."""
    q, m, arg = _terms(sys, s, cap)
    out = np.expm1(arg) @ m
    return float(out) if out.ndim == 0 else out


def f_prime(sys: IonSystem, s, cap: float = EXP_CAP):
    q, m, arg = _terms(sys, s, cap)
    out = np.exp(arg) @ (q * m)
    return float(out) if out.ndim == 0 else out


def f_second(sys: IonSystem, s, cap: float = EXP_CAP):
    q, m, arg = _terms(sys, s, cap)
    out = np.exp(arg) @ (q * q * m)
    return float(out) if out.ndim == 0 else out
