"""Exact sphere and ball sizes around a center string.

A sphere of radius r is the set of strings at distance exactly r from
the center; a ball collects radii 0..r.  Under the extended Hamming
distance the count has a closed combinatorial form that depends on the
center only through its length.  Under the Levenshtein distance no
closed form is known; counts come from path counting in the determinized
Levenshtein automaton of (center, radius), cross-checked at desk scale
by brute-force enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from math import comb
from typing import Iterator

from .errors import CapExceededError
from .string_space import Alphabet, DistanceKind, Str, length_lex_key, levenshtein

__all__ = [
    "SphereQuery",
    "sphere_size_ext_hamming",
    "sphere_size_levenshtein",
    "sphere_size",
    "ball_size",
    "enumerate_sphere",
]

# Resource caps for the Levenshtein engines.  Module-level so cached
# results stay consistent within a process.
MAX_LEV_RADIUS = 64
MAX_LEV_STATES = 500_000
MAX_ENUM_STRINGS = 2_000_000


@dataclass(frozen=True)
class SphereQuery:
    """A sphere/ball request: center string, radius, metric."""

    center: Str
    radius: int
    metric: DistanceKind

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


@lru_cache(maxsize=None)
def sphere_size_ext_hamming(center_len: int, radius: int, alphabet_size: int) -> int:
    """Number of strings at extended Hamming distance exactly ``radius``
    from any center of length ``center_len``.

    Decomposed over the target length m: a target of length m >= L
    differs from the center at k chosen positions among the first L
    (each with alphabet_size - 1 alternatives) and carries m - L free
    trailing letters, with k + (m - L) = radius; a target of length
    m < L differs at k of its m positions plus the L - m truncated
    positions.  Exact integer arithmetic throughout.
    """
    if center_len < 0 or radius < 0:
        raise ValueError("center_len and radius must be nonnegative")
    if alphabet_size < 1:
        raise ValueError("alphabet_size must be positive")
    L, r, a = center_len, radius, alphabet_size
    total = 0
    for m in range(max(0, L - r), L + r + 1):
        if m >= L:
            k = r - (m - L)
            if 0 <= k <= L:
                total += comb(L, k) * (a - 1) ** k * a ** (m - L)
        else:
            k = r - (L - m)
            if 0 <= k <= m:
                total += comb(m, k) * (a - 1) ** k
    return total


def _lev_start_state(radius: int) -> tuple[tuple[int, int], ...]:
    # (0, 0) subsumes every epsilon-reachable (j, j).
    return ((0, 0),)


def _lev_reduce(positions: set[tuple[int, int]]) -> tuple[tuple[int, int], ...]:
    # Drop any (i2, e2) subsumed by some (i, e): e2 >= e + |i - i2|.
    keep = []
    for i2, e2 in sorted(positions):
        if not any(
            (i, e) != (i2, e2) and e2 >= e + abs(i - i2) for i, e in positions
        ):
            keep.append((i2, e2))
    return tuple(keep)


def _lev_step(
    state: tuple[tuple[int, int], ...], letter: int, center: tuple[int, ...], radius: int
) -> tuple[tuple[int, int], ...]:
    L = len(center)
    nxt: set[tuple[int, int]] = set()
    for i, e in state:
        if i < L and center[i] == letter:
            nxt.add((i + 1, e))
        if e < radius:
            nxt.add((i, e + 1))  # insertion
            if i < L:
                nxt.add((i + 1, e + 1))  # substitution
    # epsilon closure: deletions
    for i, e in list(nxt):
        j = 1
        while i + j <= L and e + j <= radius:
            nxt.add((i + j, e + j))
            j += 1
    return _lev_reduce(nxt)


def _lev_accepts(state: tuple[tuple[int, int], ...], center_len: int, radius: int) -> bool:
    return any(center_len - i + e <= radius for i, e in state)


@lru_cache(maxsize=None)
def _lev_ball_count(center: Str, radius: int) -> int:
    """Count strings within Levenshtein distance ``radius`` of ``center``."""
    if radius < 0:
        return 0
    letters = range(center.alphabet.size)
    symbols = center.symbols
    L = len(symbols)
    counts: dict[tuple[tuple[int, int], ...], int] = {_lev_start_state(radius): 1}
    transitions: dict[tuple[tuple[tuple[int, int], ...], int], tuple[tuple[int, int], ...]] = {}
    total = 0
    seen_states: set[tuple[tuple[int, int], ...]] = set(counts)
    for _length in range(L + radius + 1):
        total += sum(c for s, c in counts.items() if _lev_accepts(s, L, radius))
        nxt_counts: dict[tuple[tuple[int, int], ...], int] = {}
        for state, cnt in counts.items():
            for letter in letters:
                key = (state, letter)
                nstate = transitions.get(key)
                if nstate is None:
                    nstate = _lev_step(state, letter, symbols, radius)
                    transitions[key] = nstate
                if nstate:
                    nxt_counts[nstate] = nxt_counts.get(nstate, 0) + cnt
        counts = nxt_counts
        seen_states.update(counts)
        if len(seen_states) > MAX_LEV_STATES:
            raise CapExceededError(
                f"Levenshtein automaton exceeded {MAX_LEV_STATES} states"
            )
    return total


def sphere_size_levenshtein(center: Str, radius: int) -> int:
    """Number of strings at Levenshtein distance exactly ``radius``.

    Ball-count difference: |ball(r)| - |ball(r-1)| from the automaton
    path counts.  Raises CapExceededError beyond the configured caps.
    """
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    if radius > MAX_LEV_RADIUS:
        raise CapExceededError(
            f"radius {radius} above Levenshtein cap {MAX_LEV_RADIUS}"
        )
    if radius == 0:
        return 1
    return _lev_ball_count(center, radius) - _lev_ball_count(center, radius - 1)


def sphere_size(center: Str, radius: int, metric: DistanceKind) -> int:
    if metric is DistanceKind.EXT_HAMMING:
        return sphere_size_ext_hamming(len(center), radius, center.alphabet.size)
    return sphere_size_levenshtein(center, radius)


def ball_size(query: SphereQuery) -> int:
    """Number of strings within distance ``query.radius`` of the center."""
    if query.metric is DistanceKind.EXT_HAMMING:
        a = query.center.alphabet.size
        L = len(query.center)
        return sum(
            sphere_size_ext_hamming(L, r, a) for r in range(query.radius + 1)
        )
    if query.radius > MAX_LEV_RADIUS:
        raise CapExceededError(
            f"radius {query.radius} above Levenshtein cap {MAX_LEV_RADIUS}"
        )
    return _lev_ball_count(query.center, query.radius)


def _enumerate_ext_hamming(center: Str, radius: int) -> Iterator[Str]:
    alphabet = center.alphabet
    a = alphabet.size
    c = center.symbols
    L = len(c)
    letters = range(a)
    for m in range(max(0, L - radius), L + radius + 1):
        if m >= L:
            k = radius - (m - L)
            span = L
        else:
            k = radius - (L - m)
            span = m
        if not 0 <= k <= span:
            continue
        tail_len = m - L if m > L else 0
        for positions in combinations(range(span), k):
            for repl in product(range(a - 1), repeat=k):
                symbols = list(c[:span])
                for pos, alt in zip(positions, repl):
                    # pick among the a-1 letters different from the center's
                    symbols[pos] = alt if alt < c[pos] else alt + 1
                if tail_len:
                    for tail in product(letters, repeat=tail_len):
                        yield Str(tuple(symbols) + tail, alphabet)
                else:
                    yield Str(tuple(symbols), alphabet)


def _single_edits(center: Str) -> set[Str]:
    alphabet = center.alphabet
    c = center.symbols
    out: set[Str] = set()
    for i in range(len(c)):
        out.add(Str(c[:i] + c[i + 1 :], alphabet))  # deletion
        for x in range(alphabet.size):  # substitution
            if x != c[i]:
                out.add(Str(c[:i] + (x,) + c[i + 1 :], alphabet))
    for i in range(len(c) + 1):  # insertion
        for x in range(alphabet.size):
            out.add(Str(c[:i] + (x,) + c[i:], alphabet))
    out.discard(center)
    return out


def _enumerate_levenshtein(center: Str, radius: int) -> Iterator[Str]:
    if radius == 1:
        # Radius-1 spheres are exactly the distinct single-edit results,
        # so no brute-force cap is needed for them.
        yield from sorted(_single_edits(center), key=length_lex_key)
        return
    a = center.alphabet.size
    max_len = len(center) + radius
    if a ** (max_len + 1) > MAX_ENUM_STRINGS:
        raise CapExceededError(
            f"enumeration of {a}^{max_len + 1} strings exceeds cap {MAX_ENUM_STRINGS}"
        )
    from .string_space import all_strings

    for t in all_strings(center.alphabet, max_len):
        if levenshtein(t, center) == radius:
            yield t


def enumerate_sphere(query: SphereQuery) -> Iterator[Str]:
    """Yield each string at distance exactly ``query.radius`` once."""
    if query.radius == 0:
        yield query.center
        return
    if query.metric is DistanceKind.EXT_HAMMING:
        yield from _enumerate_ext_hamming(query.center, query.radius)
    else:
        yield from _enumerate_levenshtein(query.center, query.radius)
