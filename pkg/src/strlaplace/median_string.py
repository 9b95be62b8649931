"""Approximate median strings and the local location search under the
Levenshtein distance.

The fit starts from a classical median-string approximation (set median
followed by greedy single-edit descent on the distance sum), then hill
climbs over the radius-1 Levenshtein sphere of the incumbent, moving to
the neighbor with the best strictly improved location score until no
neighbor improves.  Both weighted and unweighted data are supported;
weighted sums are normalized, which matches how mixture fitting calls in
with responsibility columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .spheres import SphereQuery, enumerate_sphere, sphere_size_levenshtein
from .string_space import DistanceKind, Str, length_lex_key, levenshtein

__all__ = [
    "TraceStep",
    "MedianTrace",
    "MedianFit",
    "approx_set_median",
    "fit",
    "best_location",
]


class TraceStep(NamedTuple):
    location: Str
    dispersion: float
    objective: float


@dataclass(frozen=True)
class MedianTrace:
    """Hill-climb history: the objective is non-decreasing along steps."""

    initial: Str
    steps: tuple[TraceStep, ...]
    converged_step: int


class MedianFit(NamedTuple):
    location: Str
    dispersion: float
    trace: MedianTrace


def _weight_vector(strings: Sequence[Str], weights: Optional[Sequence[float]]) -> np.ndarray:
    if not strings:
        raise ValueError("need at least one string")
    if weights is None:
        return np.ones(len(strings))
    w = np.asarray(weights, dtype=float)
    if w.shape != (len(strings),) or (w < 0).any():
        raise ValueError("weights must be nonnegative, one per string")
    if not w.sum() > 0:
        raise ValueError("weights must not all be zero")
    return w


def _distances(strings: Sequence[Str], center: Str) -> np.ndarray:
    return np.array([levenshtein(s, center) for s in strings])


def _weighted_sum(strings: Sequence[Str], w: np.ndarray, center: Str) -> float:
    return float(w @ _distances(strings, center))


def _pick(candidates: Sequence[Str]) -> Str:
    return min(candidates, key=length_lex_key)


def approx_set_median(
    strings: Sequence[Str], weights: Optional[Sequence[float]] = None
) -> Str:
    """Approximate minimizer of the (weighted) Levenshtein distance sum.

    Starts from the set median (the input string with the smallest
    weighted distance sum) and repeats the best strictly improving
    single-position edit until none remains.  Ties break toward the
    shortest, then lexicographically smallest, string.
    """
    w = _weight_vector(strings, weights)
    best_cost = None
    best: list[Str] = []
    for s in dict.fromkeys(strings):
        cost = _weighted_sum(strings, w, s)
        if best_cost is None or cost < best_cost - 1e-12:
            best_cost, best = cost, [s]
        elif abs(cost - best_cost) <= 1e-12:
            best.append(s)
    current, cost = _pick(best), best_cost
    while True:
        improvers: list[Str] = []
        improver_cost = cost
        for t in enumerate_sphere(SphereQuery(current, 1, DistanceKind.LEVENSHTEIN)):
            c = _weighted_sum(strings, w, t)
            if c < improver_cost - 1e-12:
                improver_cost, improvers = c, [t]
            elif improvers and abs(c - improver_cost) <= 1e-12:
                improvers.append(t)
        if not improvers:
            return current
        current, cost = _pick(improvers), improver_cost


def _location_score(
    strings: Sequence[Str], w: np.ndarray, center: Str, dispersion: float
) -> float:
    dists = _distances(strings, center)
    size_term = -float(
        w @ np.array([log(sphere_size_levenshtein(center, int(d))) for d in dists])
    )
    total = float(w @ dists)
    if total == 0:
        return size_term
    if dispersion == 0:
        return float("-inf")
    return size_term + log(dispersion / (dispersion + 1.0)) * total


def fit(
    strings: Sequence[Str], weights: Optional[Sequence[float]] = None
) -> MedianFit:
    """Estimate the location and dispersion under the Levenshtein distance.

    The dispersion is re-derived for every candidate as its weighted
    mean distance, so the climb accepts a neighbor only when the joint
    (location, dispersion) score strictly improves.  The recorded
    objective is per observation (weights normalized to sum 1).
    """
    w = _weight_vector(strings, weights)
    wn = w / w.sum()
    current = approx_set_median(strings, weights)
    disp = float(wn @ _distances(strings, current))
    score = _location_score(strings, wn, current, disp)
    steps = [TraceStep(current, disp, score)]
    cache: dict[Str, tuple[float, float]] = {current: (disp, score)}
    while True:
        best_score = score
        best: list[Str] = []
        for t in enumerate_sphere(SphereQuery(current, 1, DistanceKind.LEVENSHTEIN)):
            if t in cache:
                v, f = cache[t]
            else:
                v = float(wn @ _distances(strings, t))
                f = _location_score(strings, wn, t, v)
                cache[t] = (v, f)
            if f > best_score + 1e-12:
                best_score, best = f, [t]
            elif best and abs(f - best_score) <= 1e-12:
                best.append(t)
        if not best:
            break
        current = _pick(best)
        disp, score = cache[current][0], best_score
        steps.append(TraceStep(current, disp, score))
    trace = MedianTrace(steps[0].location, tuple(steps), len(steps) - 1)
    return MedianFit(current, disp, trace)


def best_location(
    strings: Sequence[Str], weights: Optional[Sequence[float]], dispersion: float
) -> Str:
    """Hill-climbed maximizer of the weighted location score at a fixed
    dispersion (the location update used by mixture fitting)."""
    wn = _weight_vector(strings, weights)
    wn = wn / wn.sum()
    current = approx_set_median(strings, weights)
    score = _location_score(strings, wn, current, dispersion)
    cache: dict[Str, float] = {current: score}
    while True:
        best_score = score
        best: list[Str] = []
        for t in enumerate_sphere(SphereQuery(current, 1, DistanceKind.LEVENSHTEIN)):
            f = cache.get(t)
            if f is None:
                f = _location_score(strings, wn, t, dispersion)
                cache[t] = f
            if f > best_score + 1e-12:
                best_score, best = f, [t]
            elif best and abs(f - best_score) <= 1e-12:
                best.append(t)
        if not best:
            return current
        current, score = _pick(best), best_score
