"""EM-style fitting of a k-component Laplace-like mixture and the
derived posterior (MAP) clustering.

The expectation step is the usual responsibility update, computed in log
space.  The maximization step updates the component weights by column
means, each location by a responsibility-weighted truncated consensus
(extended Hamming) or a weighted hill climb (Levenshtein), and each
dispersion by the weighted mean distance around the new location.
Restart chains are independent and deterministic given the seed; the
returned fit is the chain with the best weighted log-likelihood.
"""

from __future__ import annotations

import logging
import math
import os
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import median_string
from .errors import DegenerateComponentError
from .estimators import consensus_from_table, frequency_table
from .spheres import sphere_size_ext_hamming, sphere_size_levenshtein
from .string_space import Alphabet, DistanceKind, Str

__all__ = [
    "MixtureParams",
    "FitConfig",
    "ChainLog",
    "MixtureFit",
    "e_step",
    "m_step_weights",
    "m_step_locations",
    "m_step_dispersions",
    "weighted_loglik",
    "fit",
    "map_cluster",
    "MIN_DISPERSION",
]

logger = logging.getLogger(__name__)

MIN_DISPERSION = 1e-6
_DEGENERATE_MASS = 1e-12


@dataclass(frozen=True)
class MixtureParams:
    """Component weights, location strings, and dispersions.

    Weights lie in (0, 1] and sum to 1; dispersions are floored at
    MIN_DISPERSION so every component keeps full support.
    """

    weights: tuple[float, ...]
    locations: tuple[Str, ...]
    dispersions: tuple[float, ...]

    def __post_init__(self):
        k = len(self.weights)
        if k < 1 or len(self.locations) != k or len(self.dispersions) != k:
            raise ValueError("weights, locations, dispersions must share length k >= 1")
        if any(not 0 < p <= 1 for p in self.weights):
            raise ValueError("component weights must lie in (0, 1]")
        if abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError("component weights must sum to 1")
        if any(r < MIN_DISPERSION for r in self.dispersions):
            raise ValueError(f"dispersions must be >= {MIN_DISPERSION}")

    @property
    def k(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class FitConfig:
    """Settings for a mixture fit.

    ``tau`` is the iteration at which a chain is scored for restart
    selection (defaults to max_iters, i.e. score at convergence).
    Location convergence is exact string equality; the numeric
    tolerances apply to the weights and dispersions.
    """

    k: int
    metric: DistanceKind
    epsilon: float = 0.05
    max_iters: int = 100
    tol_weight: float = 1e-8
    tol_dispersion: float = 1e-8
    restarts: int = 4
    tau: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.epsilon <= 0 or self.tol_weight <= 0 or self.tol_dispersion <= 0:
            raise ValueError("epsilon and tolerances must be positive")
        if self.max_iters < 1 or self.restarts < 1:
            raise ValueError("max_iters and restarts must be >= 1")
        if self.tau is not None and not 1 <= self.tau <= self.max_iters:
            raise ValueError("tau must lie in 1..max_iters")


@dataclass
class ChainLog:
    """Per-restart diagnostics; logliks has one entry per iteration."""

    restart_index: int
    logliks: list[float] = field(default_factory=list)
    converged: bool = False
    iters: int = 0
    failure: Optional[str] = None


@dataclass
class MixtureFit:
    params: MixtureParams
    responsibilities: np.ndarray
    weighted_loglik: float
    iters_used: int
    restart_index_chosen: int
    converged: bool
    chain_logs: list[ChainLog]


class _Corpus:
    """Encoded corpus with distance and sphere-size caches for one fit."""

    def __init__(self, strings: Sequence[Str]):
        if not strings:
            raise ValueError("need at least one string")
        self.strings = list(strings)
        self.alphabet: Alphabet = strings[0].alphabet
        for s in strings:
            if s.alphabet != self.alphabet:
                raise ValueError("all strings must share one alphabet")
        self.n = len(self.strings)
        a = self.alphabet.size
        self.width = max(len(s) for s in self.strings) + 1
        self.x = np.full((self.n, self.width), a, dtype=np.int64)
        for i, s in enumerate(self.strings):
            self.x[i, : len(s)] = s.symbols
        self._dist_cache: dict[tuple[Str, DistanceKind], np.ndarray] = {}
        self._log_size_cache: dict = {}

    def distances(self, center: Str, metric: DistanceKind) -> np.ndarray:
        key = (center, metric)
        d = self._dist_cache.get(key)
        if d is not None:
            return d
        if metric is DistanceKind.EXT_HAMMING:
            a = self.alphabet.size
            m = max(self.width, len(center))
            c = np.full(m, a, dtype=np.int64)
            c[: len(center)] = center.symbols
            x = self.x
            if m > self.width:
                x = np.pad(x, ((0, 0), (0, m - self.width)), constant_values=a)
            d = np.count_nonzero(x != c, axis=1)
        else:
            from .string_space import levenshtein

            d = np.array([levenshtein(s, center) for s in self.strings])
        self._dist_cache[key] = d
        return d

    def log_sizes(self, center: Str, metric: DistanceKind, max_radius: int) -> np.ndarray:
        """log sphere size for radii 0..max_radius around ``center``."""
        if metric is DistanceKind.EXT_HAMMING:
            key = (len(center), metric)
        else:
            key = (center, metric)
        logs = self._log_size_cache.get(key)
        if logs is None or len(logs) <= max_radius:
            if metric is DistanceKind.EXT_HAMMING:
                a = self.alphabet.size
                logs = np.array(
                    [
                        math.log(sphere_size_ext_hamming(len(center), r, a))
                        for r in range(max_radius + 1)
                    ]
                )
            else:
                logs = np.array(
                    [
                        math.log(sphere_size_levenshtein(center, r))
                        for r in range(max_radius + 1)
                    ]
                )
            self._log_size_cache[key] = logs
        return logs


def _log_densities(corpus: _Corpus, params: MixtureParams, metric: DistanceKind) -> np.ndarray:
    """Per-string, per-component log probabilities (n x k)."""
    logq = np.empty((corpus.n, params.k))
    for g, (loc, rho) in enumerate(zip(params.locations, params.dispersions)):
        d = corpus.distances(loc, metric)
        logs = corpus.log_sizes(loc, metric, int(d.max()))
        logq[:, g] = (
            -math.log(rho + 1.0)
            + d * math.log(rho / (rho + 1.0))
            - logs[d]
        )
    if not np.isfinite(logq).all():
        raise ValueError("non-finite log density encountered")
    return logq


def _e_step(corpus: _Corpus, params: MixtureParams, metric: DistanceKind) -> np.ndarray:
    logpost = _log_densities(corpus, params, metric) + np.log(params.weights)
    logpost -= logpost.max(axis=1, keepdims=True)
    zeta = np.exp(logpost)
    zeta /= zeta.sum(axis=1, keepdims=True)
    return zeta


def _m_locations(
    corpus: _Corpus,
    zeta: np.ndarray,
    metric: DistanceKind,
    epsilon: float,
    prev_dispersions: Sequence[float],
) -> tuple[Str, ...]:
    locations = []
    for g in range(zeta.shape[1]):
        col = zeta[:, g]
        if col.sum() < _DEGENERATE_MASS:
            raise DegenerateComponentError(g)
        if metric is DistanceKind.EXT_HAMMING:
            table = frequency_table(corpus.x, col, corpus.alphabet.size)
            locations.append(consensus_from_table(table, epsilon, corpus.alphabet))
        else:
            locations.append(
                median_string.best_location(corpus.strings, col, prev_dispersions[g])
            )
    return tuple(locations)


def _m_dispersions(
    corpus: _Corpus, zeta: np.ndarray, locations: Sequence[Str], metric: DistanceKind
) -> tuple[float, ...]:
    out = []
    for g, loc in enumerate(locations):
        col = zeta[:, g]
        total = col.sum()
        if total < _DEGENERATE_MASS:
            raise DegenerateComponentError(g)
        out.append(max(float(col @ corpus.distances(loc, metric)) / total, MIN_DISPERSION))
    return tuple(out)


def _weighted_loglik(
    corpus: _Corpus, zeta: np.ndarray, params: MixtureParams, metric: DistanceKind
) -> float:
    logq = _log_densities(corpus, params, metric)
    return float((zeta * logq).sum() / corpus.n)


# --- public single-step operations -------------------------------------


def e_step(strings: Sequence[Str], params: MixtureParams, metric: DistanceKind) -> np.ndarray:
    """Posterior component membership weights, one row per string.

    Rows are computed with the log-sum-exp trick and sum to 1.
    """
    return _e_step(_Corpus(strings), params, metric)


def m_step_weights(zeta: np.ndarray) -> np.ndarray:
    """Column means of the responsibilities."""
    return np.asarray(zeta, dtype=float).mean(axis=0)


def m_step_locations(
    strings: Sequence[Str],
    zeta: np.ndarray,
    metric: DistanceKind,
    epsilon: float,
    prev_dispersions: Sequence[float],
) -> tuple[Str, ...]:
    """Per-component location update.

    Extended Hamming: responsibility-weighted truncated consensus.
    Levenshtein: weighted hill climb at the previous dispersion.
    """
    return _m_locations(_Corpus(strings), np.asarray(zeta, float), metric, epsilon, prev_dispersions)


def m_step_dispersions(
    strings: Sequence[Str], zeta: np.ndarray, locations: Sequence[Str], metric: DistanceKind
) -> tuple[float, ...]:
    """Responsibility-weighted mean distance around each new location,
    floored at MIN_DISPERSION."""
    return _m_dispersions(_Corpus(strings), np.asarray(zeta, float), locations, metric)


def weighted_loglik(
    strings: Sequence[Str], zeta: np.ndarray, params: MixtureParams, metric: DistanceKind
) -> float:
    """Mean responsibility-weighted component log-likelihood."""
    return _weighted_loglik(_Corpus(strings), np.asarray(zeta, float), params, metric)


# --- full fit -----------------------------------------------------------


def _spread_seeds(corpus: _Corpus, k: int, metric: DistanceKind, rng: random.Random) -> list[int]:
    # First seed uniform; each next seed maximizes the minimum distance
    # to the seeds chosen so far, ties broken by the chain's RNG.
    first = rng.randrange(corpus.n)
    chosen = [first]
    dmin = corpus.distances(corpus.strings[first], metric).astype(float)
    for _ in range(k - 1):
        best = dmin.max()
        cands = np.flatnonzero(dmin == best)
        pick = int(cands[rng.randrange(len(cands))])
        chosen.append(pick)
        dmin = np.minimum(dmin, corpus.distances(corpus.strings[pick], metric))
    return chosen


@dataclass
class _ChainResult:
    params: MixtureParams
    score: float
    log: ChainLog


def _run_chain(
    corpus: _Corpus, config: FitConfig, restart_index: int, chain_seed: int
) -> _ChainResult:
    rng = random.Random(chain_seed)
    k, metric = config.k, config.metric
    seed_idx = _spread_seeds(corpus, k, metric, rng)
    locations = tuple(corpus.strings[i] for i in seed_idx)
    dmat = np.stack([corpus.distances(loc, metric) for loc in locations])
    rho0 = max(float(dmat.min(axis=0).mean()), MIN_DISPERSION)
    params = MixtureParams((1.0 / k,) * k, locations, (rho0,) * k)

    log = ChainLog(restart_index)
    tau = config.tau or config.max_iters
    score: Optional[float] = None
    converged = False
    for t in range(1, config.max_iters + 1):
        zeta = _e_step(corpus, params, metric)
        weights = tuple(float(p) for p in zeta.mean(axis=0))
        locations = _m_locations(corpus, zeta, metric, config.epsilon, params.dispersions)
        dispersions = _m_dispersions(corpus, zeta, locations, metric)
        new = MixtureParams(weights, locations, dispersions)
        ll = _weighted_loglik(corpus, zeta, new, metric)
        log.logliks.append(ll)
        log.iters = t
        if t == tau:
            score = ll
        converged = (
            max(abs(a - b) for a, b in zip(new.weights, params.weights)) < config.tol_weight
            and max(abs(a - b) for a, b in zip(new.dispersions, params.dispersions))
            < config.tol_dispersion
            and new.locations == params.locations
        )
        params = new
        if converged:
            break
    log.converged = converged
    if score is None:
        score = log.logliks[-1]
    return _ChainResult(params, score, log)


def fit(strings: Sequence[Str], config: FitConfig) -> MixtureFit:
    """Fit the mixture with multi-restart chains and return the best.

    Chains are deterministic given (string order, config, seed); the
    chain maximizing the weighted log-likelihood at iteration
    min(tau, convergence) wins, ties to the lowest restart index.
    Degenerate chains are discarded with a warning; if every chain
    degenerates an error is raised.
    """
    corpus = _Corpus(strings)
    if corpus.n < config.k:
        raise ValueError(f"need at least k={config.k} strings, got {corpus.n}")
    master = random.Random(config.seed)
    chain_seeds = [master.randrange(2**63) for _ in range(config.restarts)]

    def run(idx_seed: tuple[int, int]) -> tuple[Optional[_ChainResult], ChainLog]:
        idx, cs = idx_seed
        try:
            res = _run_chain(corpus, config, idx, cs)
            return res, res.log
        except DegenerateComponentError as exc:
            logger.warning("restart %d discarded: %s", idx, exc)
            return None, ChainLog(idx, failure=str(exc))

    jobs = list(enumerate(chain_seeds))
    workers = int(os.environ.get("STRLAP_THREADS", "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(j) for j in jobs]

    logs = [log for _, log in outcomes]
    results = [res for res, _ in outcomes if res is not None]
    if not results:
        raise RuntimeError("every restart chain lost a component; try smaller k")
    best = max(results, key=lambda r: (r.score, -r.log.restart_index))
    zeta = _e_step(corpus, best.params, config.metric)
    return MixtureFit(
        params=best.params,
        responsibilities=zeta,
        weighted_loglik=_weighted_loglik(corpus, zeta, best.params, config.metric),
        iters_used=best.log.iters,
        restart_index_chosen=best.log.restart_index,
        converged=best.log.converged,
        chain_logs=logs,
    )


def map_cluster(
    strings: Sequence[Str], params: MixtureParams, metric: DistanceKind
) -> list[tuple[int, tuple[float, ...]]]:
    """Assign each string to its maximum-posterior component.

    Returns (component index, posterior vector) per string; posterior
    ties go to the lowest component index.
    """
    zeta = e_step(strings, params, metric)
    return [
        (int(np.argmax(row)), tuple(float(v) for v in row))
        for row in zeta
    ]
