"""
Value and cost of a collaboration as a function of knowledge differentiation.

    V(s) = (v0 + b_1 s + ... + b_m s^m) e^eps,   c(s) = c0 s e^eps',   A = max{0, V - c}
"""

from dataclasses import dataclass
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from numpy.polynomial import polynomial

from app.config import SimConfig
from app.errors import DomainError, SizeMismatchError


@dataclass(frozen=True)
class ValueModel:
    v0: float
    c0: float
    coefficients: Tuple[float, ...]  # b_1..b_m

    @classmethod
    def from_config(cls, config: SimConfig) -> "ValueModel":
        return cls(v0=config.v0, c0=config.c0, coefficients=tuple(config.value_coefficients))

    def value(self, s):
        """Noise-free value v(s)"""
        return polynomial.polyval(s, (self.v0,) + self.coefficients)

    def cost(self, s):
        return self.c0 * np.asarray(s, dtype=float)


@dataclass(frozen=True)
class NetValue:
    gross: float
    cost: float
    surplus: float  # V - c before the zero floor
    A: float

    @property
    def active(self) -> bool:
        return self.A > 0


def net_value(s: float, model: ValueModel, noise: Tuple[float, float] = (0.0, 0.0)) -> NetValue:
    if not 0.0 <= s <= 0.5:
        raise DomainError(f"knowledge differentiation must lie in [0, 0.5], got {s}")
    value_noise, cost_noise = noise
    gross = float(model.value(s)) * float(np.exp(value_noise))
    cost = float(model.cost(s)) * float(np.exp(cost_noise))
    surplus = gross - cost
    return NetValue(gross=gross, cost=cost, surplus=surplus, A=max(0.0, surplus))


def pairwise_s(ki: Iterable[int], kj: Iterable[int]) -> float:
    """K^D / (K + K^D) for two equal-size knowledge sets under unit novelty"""
    ki, kj = set(ki), set(kj)
    if len(ki) != len(kj):
        raise SizeMismatchError(f"knowledge sets differ in size ({len(ki)} vs {len(kj)})")
    if not ki:
        raise SizeMismatchError("knowledge sets are empty")
    differentiated = len(ki - kj)
    return differentiated / (len(ki) + differentiated)


def feasible_s_set(knowledge_size: int) -> np.ndarray:
    """s attainable by two agents with K-element knowledge: K^D / (K^D + K), K^D = 0..K"""
    if knowledge_size < 1:
        raise DomainError(f"knowledge size must be at least 1, got {knowledge_size}")
    differentiated = np.arange(knowledge_size + 1)
    return differentiated / (differentiated + knowledge_size)


def optimal_s(
    knowledge_size: int,
    value: Callable[[np.ndarray], np.ndarray],
    cost: Callable[[np.ndarray], np.ndarray],
) -> List[float]:
    """Every feasible s maximizing V(s) - c(s)"""
    feasible = feasible_s_set(knowledge_size)
    objective = np.asarray(value(feasible), dtype=float) - np.asarray(cost(feasible), dtype=float)
    best = objective.max()
    tolerance = 1e-12 * max(1.0, abs(best))
    return [float(s) for s in feasible[objective >= best - tolerance]]
