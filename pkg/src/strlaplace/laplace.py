"""The Laplace-like distribution on a string space.

A location string and a positive dispersion parametrize a distribution
whose probability at s depends on s only through its distance to the
location: mass (dispersion/(dispersion+1))**r / (dispersion+1) is spread
uniformly over the sphere of radius r.  The dispersion equals the mean
absolute deviation around the location, mirroring the role the scale
parameter plays for the Laplace distribution on the reals.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

from .spheres import SphereQuery, enumerate_sphere, sphere_size, sphere_size_ext_hamming
from .string_space import DistanceKind, Str, distance

__all__ = [
    "LaplaceParams",
    "pmf",
    "log_pmf",
    "radius_pmf",
    "sample",
    "sample_with_rng",
    "truncated_entropy",
    "default_radius_cap",
    "EntropyEstimate",
]


@dataclass(frozen=True)
class LaplaceParams:
    """Location string and strictly positive dispersion."""

    location: Str
    dispersion: float

    def __post_init__(self):
        if not self.dispersion > 0:
            raise ValueError("dispersion must be strictly positive")


def log_pmf(s: Str, params: LaplaceParams, metric: DistanceKind) -> float:
    """Natural log of the probability of ``s``.

    Computed termwise to avoid underflow of the geometric factor at
    large distances.
    """
    rho = params.dispersion
    d = distance(s, params.location, metric)
    size = sphere_size(params.location, d, metric)
    return -math.log(rho + 1.0) - math.log(size) + d * math.log(rho / (rho + 1.0))


def pmf(s: Str, params: LaplaceParams, metric: DistanceKind) -> float:
    """Probability of ``s``; strictly positive for every string."""
    return math.exp(log_pmf(s, params, metric))


def radius_pmf(r: int, dispersion: float) -> float:
    """Probability that a draw lands at distance exactly ``r`` from the
    location (geometric law over radii)."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    rho = dispersion
    return (1.0 / (rho + 1.0)) * (rho / (rho + 1.0)) ** r


def default_radius_cap(dispersion: float, tail: float = 1e-12) -> int:
    """Smallest radius cap whose geometric tail mass is below ``tail``."""
    ratio = dispersion / (dispersion + 1.0)
    cap = 0
    while ratio ** (cap + 1) >= tail:
        cap += 1
    return cap


@lru_cache(maxsize=None)
def _ext_hamming_strata(center_len: int, radius: int, alphabet_size: int):
    """Per-target-length stratum weights of the extended Hamming sphere."""
    L, r, a = center_len, radius, alphabet_size
    strata = []
    total = 0
    for m in range(max(0, L - r), L + r + 1):
        if m >= L:
            k = r - (m - L)
            span = L
        else:
            k = r - (L - m)
            span = m
        if not 0 <= k <= span:
            continue
        w = math.comb(span, k) * (a - 1) ** k * a ** max(0, m - L)
        if w:
            strata.append((m, k, w))
            total += w
    return strata, total


def _draw_radius(rng: random.Random, dispersion: float) -> int:
    # Exact inverse method for the geometric radius law.
    ratio = dispersion / (dispersion + 1.0)
    u = rng.random()
    if u <= 0.0:
        return 0
    return int(math.floor(math.log1p(-u) / math.log(ratio)))


def _draw_ext_hamming_shell(rng: random.Random, center: Str, radius: int) -> Str:
    alphabet = center.alphabet
    a = alphabet.size
    c = center.symbols
    L = len(c)
    strata, total = _ext_hamming_strata(L, radius, a)
    pick = rng.randrange(total)
    for m, k, w in strata:
        if pick < w:
            break
        pick -= w
    span = L if m >= L else m
    positions = rng.sample(range(span), k) if k else []
    symbols = list(c[:span])
    for pos in positions:
        alt = rng.randrange(a - 1)
        symbols[pos] = alt if alt < c[pos] else alt + 1
    for _ in range(m - L if m > L else 0):
        symbols.append(rng.randrange(a))
    return Str(tuple(symbols), alphabet)


def sample_with_rng(
    params: LaplaceParams, metric: DistanceKind, rng: random.Random, n: int
) -> list[Str]:
    """Draw ``n`` independent strings using the caller's RNG stream.

    Each draw picks a radius from the geometric law, then a uniform
    element of that sphere.  Under the extended Hamming distance the
    shell element is built constructively (no radius bound); under the
    Levenshtein distance the sphere is enumerated, subject to the
    enumeration caps.
    """
    out = []
    shells: dict[int, list[Str]] = {}
    for _ in range(n):
        r = _draw_radius(rng, params.dispersion)
        if r == 0:
            out.append(params.location)
        elif metric is DistanceKind.EXT_HAMMING:
            out.append(_draw_ext_hamming_shell(rng, params.location, r))
        else:
            shell = shells.get(r)
            if shell is None:
                shell = list(enumerate_sphere(SphereQuery(params.location, r, metric)))
                shells[r] = shell
            out.append(shell[rng.randrange(len(shell))])
    return out


def sample(params: LaplaceParams, metric: DistanceKind, seed: int, n: int) -> list[Str]:
    """Deterministic ``n``-draw sample for a given seed."""
    return sample_with_rng(params, metric, random.Random(seed), n)


class EntropyEstimate(NamedTuple):
    entropy: float
    tail_mass: float


def truncated_entropy(
    params: LaplaceParams, metric: DistanceKind, radius_cap: int
) -> EntropyEstimate:
    """Entropy over the support of radius <= ``radius_cap``.

    Uses the shell decomposition: all strings on the radius-r sphere
    share one probability, so only sphere sizes are needed.  The
    returned tail mass bounds what the truncation ignores; the cap must
    leave tail mass below 1e-9.
    """
    rho = params.dispersion
    ratio = rho / (rho + 1.0)
    tail = ratio ** (radius_cap + 1)
    if not tail < 1e-9:
        raise ValueError(
            f"radius_cap {radius_cap} leaves tail mass {tail:.3g} >= 1e-9"
        )
    h = 0.0
    for r in range(radius_cap + 1):
        shell_mass = radius_pmf(r, rho)
        if shell_mass == 0.0:
            continue
        n_r = sphere_size(params.location, r, metric)
        # shell contributes -N p log p with p = shell_mass / N
        h -= shell_mass * (math.log(shell_mass) - math.log(n_r))
    return EntropyEstimate(h, tail)


def theoretical_mad(params: LaplaceParams, radius_cap: int) -> float:
    """Truncated mean absolute deviation sum; approaches the dispersion."""
    rho = params.dispersion
    return sum(r * radius_pmf(r, rho) for r in range(radius_cap + 1))
