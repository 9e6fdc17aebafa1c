"""Ice-storm damage scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import FrozenSet, Hashable, Iterable, Optional, Sequence, Tuple

import numpy as np

from .grid_model import NetworkInstance

RNG_ALGORITHM = "numpy.Philox"
DEFAULT_SCENARIO_COUNT = 100


@dataclass(frozen=True)
class DamageModel:
    """Independent one-mile segment failures at a uniform storm intensity.

    ``hardened_rate_ratio`` scales the per-mile rate for hardened lines.
    """

    per_mile_probability: float
    hardened_rate_ratio: float = 0.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.per_mile_probability <= 1.0:
            raise ValueError("per_mile_probability must lie in [0, 1]")
        if not 0.0 <= self.hardened_rate_ratio <= 1.0:
            raise ValueError("hardened_rate_ratio must lie in [0, 1]")


@dataclass(frozen=True)
class Scenario:
    id: int
    damaged_edges: FrozenSet[Hashable] = frozenset()
    hardened_damaged_edges: FrozenSet[Hashable] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "damaged_edges", frozenset(self.damaged_edges))
        object.__setattr__(self, "hardened_damaged_edges", frozenset(self.hardened_damaged_edges))
        if not self.hardened_damaged_edges <= self.damaged_edges:
            raise ValueError(f"scenario {self.id}: hardened damage set must be inside the damage set")


@dataclass(frozen=True)
class ScenarioSet:
    scenarios: Tuple[Scenario, ...]
    source_model: Optional[DamageModel] = None
    rng_algorithm: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        for k, s in enumerate(self.scenarios):
            if s.id != k:
                raise ValueError(f"scenario ids must be 0..n-1 in order; position {k} has id {s.id}")

    def __len__(self) -> int:
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, k) -> Scenario:
        return self.scenarios[k]

    def subset(self, ids: Iterable[int]) -> Tuple[Scenario, ...]:
        return tuple(self.scenarios[k] for k in sorted(set(ids)))

    @classmethod
    def from_edge_sets(cls, pairs: Sequence[Tuple[Iterable, Iterable]]) -> "ScenarioSet":
        """User-provided scenarios from ``(damaged, hardened_damaged)`` pairs."""
        return cls(tuple(Scenario(k, frozenset(d), frozenset(h)) for k, (d, h) in enumerate(pairs)))


def line_failure_probability(per_mile: float, length_miles: float) -> float:
    """Chance that at least one one-mile segment fails; fractional miles use the real exponent."""
    if not 0.0 <= per_mile <= 1.0:
        raise ValueError(f"per-mile probability {per_mile} outside [0, 1]")
    if not length_miles >= 0.0:
        raise ValueError(f"line length {length_miles} must be nonnegative")
    if length_miles == 0.0:
        return 0.0
    return -math.expm1(length_miles * math.log1p(-per_mile)) if per_mile < 1.0 else 1.0


def sample_scenarios(instance: NetworkInstance, model: DamageModel,
                     count: int = DEFAULT_SCENARIO_COUNT) -> ScenarioSet:
    """Draw ``count`` scenarios, one uniform per (scenario, edge).

    An edge is damaged when its uniform falls below the unhardened failure
    probability and hardened-damaged when it also falls below the hardened
    one, so the hardened set always nests inside the damaged set.
    """
    if count < 1:
        raise ValueError("count must be positive")
    p = np.array([line_failure_probability(model.per_mile_probability, e.length_miles)
                  for e in instance.edges])
    ph = np.array([line_failure_probability(model.per_mile_probability * model.hardened_rate_ratio,
                                            e.length_miles) for e in instance.edges])
    rng = np.random.Generator(np.random.Philox(model.rng_seed))
    u = rng.random((count, len(instance.edges)))
    ids = [e.id for e in instance.edges]
    out = []
    for s in range(count):
        dmg = frozenset(ids[k] for k in np.nonzero(u[s] < p)[0])
        hdmg = frozenset(ids[k] for k in np.nonzero(u[s] < ph)[0])
        out.append(Scenario(s, dmg, hdmg))
    return ScenarioSet(tuple(out), model, RNG_ALGORITHM)
