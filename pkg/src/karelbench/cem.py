"""Cross-entropy-method search over real vectors, plus the best-of-n
random-sampling baseline.  The objective is an arbitrary callable; nothing
here knows about programs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Supported initial distributions for the search mean.
INIT_NORMAL_SMALL = "N(0,0.1I)"
INIT_NORMAL = "N(0,I)"
INIT_ONES = "N(1,0)"
INIT_DISTRIBUTIONS = (INIT_NORMAL_SMALL, INIT_NORMAL, INIT_ONES)


@dataclass
class CemConfig:
    population: int = 32
    sigma: float = 0.5
    elite_fraction: float = 0.1
    exp_decay: bool = False
    init_distribution: str = INIT_NORMAL_SMALL
    max_iterations: int = 1000
    decay_rate: float = 0.998
    sigma_floor: float = 0.05

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not 0 < self.elite_fraction <= 1:
            raise ValueError("elite fraction must be in (0, 1]")
        if self.init_distribution not in INIT_DISTRIBUTIONS:
            raise ValueError(f"unknown init distribution {self.init_distribution!r}")

    @property
    def n_elites(self):
        return max(1, round(self.population * self.elite_fraction))


@dataclass
class SearchResult:
    best_vector: np.ndarray
    best_value: float
    history: list = field(default_factory=list)  # (iteration mean value, sigma)


def _initial_mean(cfg, dim, rng):
    if cfg.init_distribution == INIT_NORMAL_SMALL:
        return rng.normal(0.0, np.sqrt(0.1), size=dim)
    if cfg.init_distribution == INIT_NORMAL:
        return rng.normal(0.0, 1.0, size=dim)
    return np.ones(dim)


def cem_search(objective, dim, cfg=None, rng=0, callback=None):
    """Iteratively sample N(mean, sigma^2 I), move the mean to the elite
    average, optionally decay sigma; return the best candidate ever seen."""
    cfg = cfg or CemConfig()
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    mean = _initial_mean(cfg, dim, rng)
    sigma = cfg.sigma
    best_vector, best_value = None, -np.inf
    result = SearchResult(best_vector=mean, best_value=-np.inf)
    for it in range(cfg.max_iterations):
        samples = mean + sigma * rng.standard_normal((cfg.population, dim))
        values = np.array([objective(s) for s in samples], dtype=float)
        order = np.argsort(values)[::-1]
        elites = samples[order[: cfg.n_elites]]
        if values[order[0]] > best_value:
            best_value = float(values[order[0]])
            best_vector = samples[order[0]].copy()
        mean = elites.mean(axis=0)
        if cfg.exp_decay:
            sigma = max(cfg.sigma_floor, sigma * cfg.decay_rate)
        result.history.append((float(values.mean()), sigma))
        result.best_vector, result.best_value = best_vector, best_value
        if callback is not None and callback(it, mean, result):
            break
    result.mean = mean
    return result


def best_sampled(objective, dim, n=1000, rng=0):
    """Best of ``n`` i.i.d. draws from N(0, I)."""
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    samples = rng.standard_normal((n, dim))
    values = np.array([objective(s) for s in samples], dtype=float)
    i = int(np.argmax(values))
    return SearchResult(
        best_vector=samples[i].copy(),
        best_value=float(values[i]),
        history=[(float(values.mean()), 1.0)],
    )
