"""
Category-structured collaboration simulation.

Each category draws its knowledge pool size K^l, gives every agent K distinct
elements of the pool, values every intra-category pair with noisy value and
cost, and matches greedily. Categories are independent and run in parallel.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional
import logging

import numpy as np

from app.analysis.curves import check_grid, s_grid, s_histogram
from app.analysis.quantile import fit_quantile, is_degenerate
from app.config import SimConfig
from app.errors import MatchingError
from app.models import MatchRecord
from app.simulation.matching import find_blocking_pairs, greedy_stable_matching
from app.simulation.model import ValueModel
from app.simulation.sampling import category_rng, sample_agent_knowledge, sample_category_sizes

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Agent:
    agent_id: int
    category: int
    knowledge: np.ndarray


@dataclass(frozen=True)
class SimulationSummary:
    n_categories: int
    n_matches: int
    n_active: int
    mean_s: float  # over active matches
    histogram_edges: np.ndarray
    histogram_counts: np.ndarray
    grid: np.ndarray
    value_curves: Dict[float, np.ndarray] = field(default_factory=dict)
    degenerate: List[float] = field(default_factory=list)


@dataclass(frozen=True)
class SimulationResult:
    records: List[MatchRecord]
    summary: Optional[SimulationSummary]


def overlap_matrix(agents: List[Agent]) -> np.ndarray:
    """|K_i ∩ K_j| for every pair, from a membership matrix over the union of elements"""
    elements, inverse = np.unique(np.concatenate([a.knowledge for a in agents]), return_inverse=True)
    membership = np.zeros((len(agents), len(elements)), dtype=np.int64)
    offsets = np.cumsum([0] + [len(a.knowledge) for a in agents])
    for k in range(len(agents)):
        membership[k, inverse[offsets[k]:offsets[k + 1]]] = 1
    return membership @ membership.T


def simulate_category(config: SimConfig, model: ValueModel, category: int) -> List[MatchRecord]:
    size = int(sample_category_sizes(config, category_rng(config.seed, category, "size"), count=1)[0])
    agent_rng = category_rng(config.seed, category, "agents")
    n = config.agents_per_category
    agents = [
        Agent(
            agent_id=category * n + k,
            category=category,
            knowledge=sample_agent_knowledge(size, config.knowledge_size, agent_rng),
        )
        for k in range(n)
    ]

    differentiated = config.knowledge_size - overlap_matrix(agents)
    s = differentiated / (config.knowledge_size + differentiated)

    rows, cols = np.triu_indices(n, k=1)
    noise = category_rng(config.seed, category, "noise").standard_normal((2, len(rows))) * config.noise_sd
    pair_s = s[rows, cols]
    gross = model.value(pair_s) * np.exp(noise[0])
    cost = model.cost(pair_s) * np.exp(noise[1])
    surplus = gross - cost
    net = np.maximum(surplus, 0.0)

    values = np.zeros((n, n))
    values[rows, cols] = values[cols, rows] = net
    tiebreak = None
    if config.surplus_tie_break:
        tiebreak = np.zeros((n, n))
        tiebreak[rows, cols] = tiebreak[cols, rows] = surplus
    matching = greedy_stable_matching(values, tiebreak)
    if config.verify_stability:
        blocking = find_blocking_pairs(values, matching)
        if blocking:
            raise MatchingError(f"category {category}: matching has blocking pairs {blocking[:3]}")

    position = {(int(i), int(j)): k for k, (i, j) in enumerate(zip(rows, cols))}
    records = []
    for i, j in matching:
        k = position[(i, j)]
        records.append(MatchRecord(
            category=category,
            i=agents[i].agent_id,
            j=agents[j].agent_id,
            s=float(pair_s[k]),
            gross=float(gross[k]),
            cost=float(cost[k]),
            A=float(net[k]),
            active=bool(net[k] > 0),
        ))
    return records


def summarize(records: List[MatchRecord], config: SimConfig, order: int, bins: int = 50) -> SimulationSummary:
    """Matched-s histogram and quantile curves of gross value in s"""
    kept = [r for r in records if r.active or config.include_inactive]
    active = [r for r in records if r.active]
    mean_s = float(np.mean([r.s for r in active])) if active else float("nan")
    edges, counts = s_histogram([r.s for r in kept], bins)
    grid = check_grid(s_grid(config.grid_points))

    curves: Dict[float, np.ndarray] = {}
    degenerate: List[float] = []
    y = np.array([r.gross for r in kept])
    s = np.array([r.s for r in kept])
    X = np.column_stack([s ** k for k in range(order + 1)]) if kept else np.empty((0, order + 1))
    if len(kept) <= order + 1:
        logger.warning(f"⚠️ Only {len(kept)} matches kept; value quantile curves skipped")
    else:
        powers = grid[:, None] ** np.arange(order + 1)[None, :]
        for tau in config.value_taus:
            if is_degenerate(y, tau):
                logger.warning(f"⚠️ Value quantile {tau} is degenerate")
                degenerate.append(tau)
                continue
            fit = fit_quantile(y, X, tau)
            curves[tau] = powers @ fit.coefficients

    return SimulationSummary(
        n_categories=config.n_categories,
        n_matches=len(records),
        n_active=len(active),
        mean_s=mean_s,
        histogram_edges=edges,
        histogram_counts=counts,
        grid=grid,
        value_curves=curves,
        degenerate=degenerate,
    )


def run_simulation(
    config: SimConfig,
    model: Optional[ValueModel] = None,
    threads: int = 1,
    with_summary: bool = True,
) -> SimulationResult:
    model = model or ValueModel.from_config(config)
    logger.info(
        f"🚀 Simulating {config.n_categories} categories x {config.agents_per_category} agents "
        f"(K={config.knowledge_size}, seed={config.seed})"
    )
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        per_category = list(pool.map(lambda l: simulate_category(config, model, l), range(config.n_categories)))
    records = [r for category in per_category for r in category]

    summary = None
    if with_summary:
        summary = summarize(records, config, order=max(1, len(model.coefficients)))
        logger.info(
            f"✅ {summary.n_matches} matches, {summary.n_active} active, mean matched s {summary.mean_s:.4f}"
        )
    return SimulationResult(records=records, summary=summary)
