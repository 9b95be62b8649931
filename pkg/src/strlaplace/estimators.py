"""Estimation of a single Laplace-like distribution from observed strings.

The location estimate is a truncated consensus sequence: the per-site
majority letter, cut off where the empty letter first wins and,
optionally, earlier where the nonempty letters become epsilon-uniform
(which signals that the sites carry no location information).  The
dispersion estimate is the mean distance around the location.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import log
from typing import Optional, Sequence

import numpy as np

from .spheres import sphere_size
from .string_space import Alphabet, DistanceKind, Str, distance

__all__ = [
    "SiteFrequencies",
    "FitReport",
    "site_frequencies",
    "last_nonempty_site",
    "uniform_suffix",
    "truncated_consensus",
    "mean_distance",
    "location_objective",
    "fit_laplace",
]

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class SiteFrequencies:
    """Per-site relative letter frequencies.

    ``table`` has one row per site (up to the longest string plus one
    extra site, where the empty letter is certain) and one column per
    letter; the last column is the empty letter.  Rows sum to 1.
    """

    table: np.ndarray
    alphabet: Alphabet

    @property
    def num_sites(self) -> int:
        return self.table.shape[0]


def _encode(strings: Sequence[Str]) -> tuple[np.ndarray, Alphabet]:
    if not strings:
        raise ValueError("need at least one string")
    alphabet = strings[0].alphabet
    a = alphabet.size
    width = max(len(s) for s in strings) + 1
    x = np.full((len(strings), width), a, dtype=np.int64)
    for i, s in enumerate(strings):
        if s.alphabet != alphabet:
            raise ValueError("all strings must share one alphabet")
        x[i, : len(s)] = s.symbols
    return x, alphabet


def frequency_table(x: np.ndarray, weights: np.ndarray, num_letters: int) -> np.ndarray:
    """Weighted per-site letter frequencies from an encoded matrix.

    ``x`` holds letter indices with ``num_letters`` marking the empty
    letter; the result's last column is the empty letter.
    """
    total = weights.sum()
    if total <= 0:
        raise ValueError("weights must have positive total")
    table = np.empty((x.shape[1], num_letters + 1))
    for h in range(num_letters + 1):
        table[:, h] = weights @ (x == h)
    return table / total


def site_frequencies(
    strings: Sequence[Str], weights: Optional[Sequence[float]] = None
) -> SiteFrequencies:
    """Relative frequency of each letter at each site.

    Strings shorter than a site contribute the empty letter there.
    Optional nonnegative weights generalize the plain relative
    frequencies to weighted ones.
    """
    x, alphabet = _encode(strings)
    if weights is None:
        w = np.ones(len(strings))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (len(strings),) or (w < 0).any():
            raise ValueError("weights must be nonnegative, one per string")
    return SiteFrequencies(frequency_table(x, w, alphabet.size), alphabet)


def _j_star(table: np.ndarray) -> int:
    # Number of sites before the empty letter first attains the maximum
    # frequency (a tie counts as attaining it).
    empty = table[:, -1]
    wins = empty >= table.max(axis=1)
    idx = np.flatnonzero(wins)
    return int(idx[0]) if idx.size else table.shape[0]


def _spreads(table: np.ndarray) -> np.ndarray:
    # Spread of the nonempty-letter frequencies at each site, minimum
    # taken over every nonempty letter including unobserved ones.
    nonempty = table[:, :-1]
    return nonempty.max(axis=1) - nonempty.min(axis=1)


def _uniform_cutoff(table: np.ndarray, j_star: int, epsilon: float) -> tuple[bool, Optional[int]]:
    if j_star < 1:
        raise ValueError("cutoff undefined when no site precedes the empty-letter win")
    spreads = _spreads(table)[:j_star]
    if not spreads[-1] < epsilon:
        return False, None
    bad = np.flatnonzero(spreads >= epsilon)
    return True, int(bad[-1]) + 1 if bad.size else 0


def last_nonempty_site(freqs: SiteFrequencies) -> int:
    """Index of the last site at which a nonempty letter is guaranteed to
    hold the maximum frequency (0 when the empty letter wins site 1)."""
    return _j_star(freqs.table)


def uniform_suffix(freqs: SiteFrequencies, epsilon: float) -> tuple[bool, Optional[int]]:
    """Detect an epsilon-uniform run of sites ending at the last nonempty
    site.

    Returns (detected, cutoff) where cutoff is the number of leading
    sites to keep when the run is detected.  Requires at least one site
    before the empty-letter win.
    """
    return _uniform_cutoff(freqs.table, _j_star(freqs.table), epsilon)


def consensus_from_table(table: np.ndarray, epsilon: float, alphabet: Alphabet) -> Str:
    """Truncated consensus from a frequency table (shared with the
    responsibility-weighted variant used in mixture fitting)."""
    j_star = _j_star(table)
    if j_star == 0:
        return Str.empty(alphabet)
    detected, cutoff = _uniform_cutoff(table, j_star, epsilon)
    keep = cutoff if detected else j_star
    if keep == 0:
        return Str.empty(alphabet)
    # ties broken toward the smallest letter index; the empty letter
    # cannot win on the kept sites by construction
    symbols = tuple(int(np.argmax(table[j])) for j in range(keep))
    return Str(symbols, alphabet)


def truncated_consensus(strings: Sequence[Str], epsilon: float = DEFAULT_EPSILON) -> Str:
    """Per-site majority letter, truncated at the empty-letter win and,
    when the trailing sites are epsilon-uniform, at the start of that
    uniform run."""
    freqs = site_frequencies(strings)
    return consensus_from_table(freqs.table, epsilon, freqs.alphabet)


def mean_distance(strings: Sequence[Str], center: Str, metric: DistanceKind) -> float:
    """Mean distance of the strings around ``center`` (the maximum
    likelihood dispersion when the location is known)."""
    if not strings:
        raise ValueError("need at least one string")
    return sum(distance(s, center, metric) for s in strings) / len(strings)


def location_objective(
    strings: Sequence[Str], center: Str, dispersion: float, metric: DistanceKind
) -> float:
    """Location score: -sum of log sphere sizes at the observed radii
    plus log(dispersion/(dispersion+1)) times the total distance.

    Maximizing this over centers (given the dispersion) maximizes the
    likelihood.  A zero dispersion scores 0 on concentrated data and
    -inf otherwise.
    """
    dists = [distance(s, center, metric) for s in strings]
    size_term = -sum(log(sphere_size(center, d, metric)) for d in dists)
    total = sum(dists)
    if total == 0:
        return size_term
    if dispersion == 0:
        return float("-inf")
    return size_term + log(dispersion / (dispersion + 1.0)) * total


@dataclass(frozen=True)
class FitReport:
    """Result of fitting one Laplace-like distribution."""

    location: Str
    dispersion: float
    objective: float
    last_nonempty_site: int
    uniform_suffix_detected: bool
    uniform_cutoff: Optional[int]


def fit_laplace(
    strings: Sequence[Str], metric: DistanceKind, epsilon: float = DEFAULT_EPSILON
) -> FitReport:
    """Fit the location and dispersion of one Laplace-like distribution.

    Under the extended Hamming distance the location is the truncated
    consensus and the dispersion the mean distance around it.  Under the
    Levenshtein distance the estimate comes from the approximate-median
    hill climb (see ``median_string``).
    """
    freqs = site_frequencies(strings)
    j_star = _j_star(freqs.table)
    if j_star >= 1:
        detected, cutoff = _uniform_cutoff(freqs.table, j_star, epsilon)
    else:
        detected, cutoff = False, None
    if metric is DistanceKind.LEVENSHTEIN:
        from .median_string import fit as median_fit

        med = median_fit(strings)
        location, dispersion = med.location, med.dispersion
    else:
        location = consensus_from_table(freqs.table, epsilon, freqs.alphabet)
        dispersion = mean_distance(strings, location, metric)
    objective = location_objective(strings, location, dispersion, metric)
    return FitReport(location, dispersion, objective, j_star, detected, cutoff)
