"""Brute-force reference implementations over truncated string spaces.

Everything here trades efficiency for transparency: exhaustive
enumeration, direct argmin/argmax scans, and literal definitions.  The
test suite uses these as independent oracles for the fast engines; the
``selftest`` CLI subcommand runs the distribution worked examples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, NamedTuple, Sequence

from .errors import CapExceededError
from .spheres import SphereQuery, ball_size, sphere_size
from .string_space import Alphabet, DistanceKind, Str, all_strings, distance, length_lex_key

__all__ = [
    "FiniteDistribution",
    "CentralStrings",
    "enumerate_strings",
    "sphere_size_brute",
    "central_strings",
    "modified_median",
    "exhaustive_mle",
    "exhaustive_mle_ties",
]

MAX_ENUMERATION = 2_000_000
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class FiniteDistribution:
    """A finitely supported distribution on strings."""

    support: tuple[Str, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs) or not self.support:
            raise ValueError("support and probs must match and be nonempty")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support entries must be distinct")
        if any(p < 0 for p in self.probs):
            raise ValueError("probabilities must be nonnegative")
        if abs(sum(self.probs) - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to 1")

    @property
    def alphabet(self) -> Alphabet:
        return self.support[0].alphabet

    def max_len(self) -> int:
        return max(len(s) for s in self.support)

    def expected(self, f) -> float:
        """Expectation of a real-valued function of the string."""
        return sum(p * f(s) for s, p in zip(self.support, self.probs))


def enumerate_strings(alphabet: Alphabet, max_len: int) -> list[Str]:
    """All strings of length <= max_len, in length-lexicographic order."""
    if alphabet.size ** (max_len + 1) > MAX_ENUMERATION:
        raise CapExceededError(
            f"{alphabet.size}^{max_len + 1} strings exceeds cap {MAX_ENUMERATION}"
        )
    return list(all_strings(alphabet, max_len))


def sphere_size_brute(center: Str, radius: int, metric: DistanceKind) -> int:
    """Sphere size by scanning every string of length <= |center| + radius."""
    return sum(
        1
        for t in enumerate_strings(center.alphabet, len(center) + radius)
        if distance(t, center, metric) == radius
    )


class CentralStrings(NamedTuple):
    modes: tuple[Str, ...]
    medians: tuple[Str, ...]
    consensus: Str


def _candidates(dist: FiniteDistribution, max_len: int | None) -> tuple[list[Str], int]:
    bound = dist.max_len() + 2 if max_len is None else max_len
    return enumerate_strings(dist.alphabet, bound), bound


def _argmin_scan(candidates, bound, objective) -> list[Str]:
    values = {m: objective(m) for m in candidates}
    best = min(values.values())

    def best_at(length: int) -> float:
        return min(v for m, v in values.items() if len(m) == length)

    # truncation sanity: the best objective must not still be improving
    # at the candidate length boundary
    if bound >= 1 and best_at(bound) < best_at(bound - 1):
        raise RuntimeError("candidate length bound too small for this distribution")
    return sorted((m for m, v in values.items() if v <= best + _TIE_TOL), key=length_lex_key)


def central_strings(
    dist: FiniteDistribution, metric: DistanceKind, candidate_max_len: int | None = None
) -> CentralStrings:
    """Mode strings, median strings, and the consensus sequence.

    Modes are the probability argmax (all ties reported).  Medians
    minimize the expected distance over candidates up to the length
    bound (support max length + 2 by default).  The consensus takes the
    per-site argmax of the marginal letter distributions, stopping at
    the first site where the empty letter attains the maximum.
    """
    best_p = max(dist.probs)
    modes = tuple(
        sorted(
            (s for s, p in zip(dist.support, dist.probs) if p >= best_p - _TIE_TOL),
            key=length_lex_key,
        )
    )

    candidates, bound = _candidates(dist, candidate_max_len)
    medians = tuple(
        _argmin_scan(candidates, bound, lambda m: dist.expected(lambda s: distance(s, m, metric)))
    )

    a = dist.alphabet.size
    symbols: list[int] = []
    for j in range(dist.max_len() + 1):
        marg = [0.0] * (a + 1)
        for s, p in zip(dist.support, dist.probs):
            h = s.symbols[j] if j < len(s) else a
            marg[h] += p
        if marg[a] >= max(marg[:a]):
            break
        symbols.append(max(range(a), key=lambda h: (marg[h], -h)))
    consensus = Str(tuple(symbols), dist.alphabet)
    return CentralStrings(modes, medians, consensus)


def modified_median(
    dist: FiniteDistribution,
    phi: Literal["sphere", "ball"],
    metric: DistanceKind,
    candidate_max_len: int | None = None,
) -> Str:
    """Median under the size-aware objective: argmin of the expected
    sphere (or ball) size around the candidate at the observed distance.

    Weighting distances by how many strings share them compensates for
    longer centers having larger spheres; ties go to the shorter string.
    """
    if phi == "sphere":
        size = sphere_size
    else:
        size = lambda c, r, m: ball_size(SphereQuery(c, r, m))
    candidates, bound = _candidates(dist, candidate_max_len)
    results = _argmin_scan(
        candidates,
        bound,
        lambda m: dist.expected(lambda s: float(size(m, distance(s, m, metric), metric))),
    )
    return results[0]


def _full_loglik(strings: Sequence[Str], center: Str, metric: DistanceKind) -> tuple[float, float]:
    dists = [distance(s, center, metric) for s in strings]
    rho = sum(dists) / len(strings)
    if rho == 0:
        return 0.0, 0.0
    ll = sum(
        -math.log(rho + 1.0)
        - math.log(sphere_size(center, d, metric))
        + d * math.log(rho / (rho + 1.0))
        for d in dists
    )
    return ll, rho


def exhaustive_mle_ties(
    strings: Sequence[Str], metric: DistanceKind, candidate_max_len: int
) -> list[tuple[Str, float]]:
    """All (location, dispersion) pairs within a hair of the maximum
    likelihood over the truncated candidate set."""
    if not strings:
        raise ValueError("need at least one string")
    scored = []
    for m in enumerate_strings(strings[0].alphabet, candidate_max_len):
        ll, rho = _full_loglik(strings, m, metric)
        scored.append((m, rho, ll))
    best = max(ll for _, _, ll in scored)
    ties = [(m, rho) for m, rho, ll in scored if ll >= best - 1e-9]
    ties.sort(key=lambda t: length_lex_key(t[0]))
    return ties


def exhaustive_mle(
    strings: Sequence[Str], metric: DistanceKind, candidate_max_len: int
) -> tuple[Str, float]:
    """Maximum likelihood (location, dispersion) by exhaustive scan; the
    dispersion is the mean distance around the winning location."""
    return exhaustive_mle_ties(strings, metric, candidate_max_len)[0]
