"""
Random draws for the matching simulation.

Every category gets its own counter-based stream keyed by (seed, category,
purpose), so results do not depend on the order or thread categories run on.
"""

from typing import Optional
import logging

import numpy as np

from app.config import SimConfig
from app.errors import InfeasibleError

logger = logging.getLogger(__name__)

STREAMS = {"size": 0, "agents": 1, "noise": 2}


def category_rng(seed: int, category: int, purpose: str) -> np.random.Generator:
    sequence = np.random.SeedSequence([seed, category, STREAMS[purpose]])
    return np.random.Generator(np.random.Philox(sequence))


def pareto_size(u, scale: float, shape: float, knowledge_size: int) -> np.ndarray:
    """Inverse-CDF Pareto draw rounded half to even, clamped above knowledge_size"""
    raw = scale / np.power(np.asarray(u, dtype=float), 1.0 / shape)
    sizes = np.rint(raw).astype(np.int64)
    return np.maximum(sizes, knowledge_size + 1)


def sample_category_sizes(config: SimConfig, rng: np.random.Generator, count: Optional[int] = None) -> np.ndarray:
    """K^l for `count` categories (default: all of them)"""
    count = config.n_categories if count is None else count
    u = 1.0 - rng.random(count)  # (0, 1]
    return pareto_size(u, config.pareto_scale, config.pareto_shape, config.knowledge_size)


def sample_agent_knowledge(pool_size: int, knowledge_size: int, rng: np.random.Generator) -> np.ndarray:
    """Sorted ids of `knowledge_size` distinct elements drawn uniformly from range(pool_size)"""
    if pool_size < knowledge_size:
        raise InfeasibleError(f"knowledge pool of {pool_size} elements cannot supply {knowledge_size} distinct ones")
    return np.sort(rng.choice(pool_size, size=knowledge_size, replace=False))
