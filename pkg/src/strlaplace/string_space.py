"""Alphabets, strings, and the two distances used throughout the package.

Strings are finite sequences of letter indices over an alphabet.  The
formal empty-letter padding that extends every string to an infinite
sequence is never stored; distance code reconstructs it logically.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from .errors import AlphabetMismatchError, ParseError

__all__ = [
    "Alphabet",
    "Str",
    "DistanceKind",
    "concat",
    "ext_hamming",
    "levenshtein",
    "distance",
    "parse",
    "length_lex_key",
]


@dataclass(frozen=True)
class Alphabet:
    """An ordered set of distinct nonempty letters.

    The empty letter exists only implicitly, as "absence beyond the end
    of a string"; it is never listed among ``letters``.
    """

    letters: tuple[str, ...]

    def __post_init__(self):
        if len(self.letters) < 1:
            raise ValueError("alphabet needs at least one letter")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError("alphabet letters must be distinct")

    @property
    def size(self) -> int:
        """Number of nonempty letters."""
        return len(self.letters)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.letters)}

    def index(self, letter: str) -> int:
        try:
            return self._index[letter]
        except KeyError:
            raise KeyError(f"letter {letter!r} not in alphabet") from None

    @classmethod
    def from_text(cls, text: str) -> "Alphabet":
        """Alphabet whose letters are the characters of ``text``, in order."""
        return cls(tuple(text))


@dataclass(frozen=True)
class Str:
    """A string: a sequence of letter indices into an alphabet.

    The empty string has no symbols.  Values are immutable and hashable,
    so they are safe to share across threads and to use as dict keys.
    """

    symbols: tuple[int, ...]
    alphabet: Alphabet

    def __post_init__(self):
        a = self.alphabet.size
        for i in self.symbols:
            if not 0 <= i < a:
                raise ValueError(f"symbol index {i} out of range for alphabet of size {a}")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return "".join(self.alphabet.letters[i] for i in self.symbols)

    def __repr__(self) -> str:
        return f"Str({str(self)!r})"

    @classmethod
    def empty(cls, alphabet: Alphabet) -> "Str":
        return cls((), alphabet)

    @classmethod
    def from_text(cls, text: str, alphabet: Alphabet) -> "Str":
        return parse(text, alphabet)


class DistanceKind(enum.Enum):
    """The two metrics on the string space."""

    EXT_HAMMING = "ext-hamming"
    LEVENSHTEIN = "levenshtein"


def _check_same_alphabet(s: Str, t: Str) -> None:
    if s.alphabet != t.alphabet:
        raise AlphabetMismatchError(
            f"strings over different alphabets: {s.alphabet.letters} vs {t.alphabet.letters}"
        )


def concat(s: Str, t: Str) -> Str:
    """Concatenation; the empty string is the identity element."""
    _check_same_alphabet(s, t)
    return Str(s.symbols + t.symbols, s.alphabet)


def ext_hamming(s: Str, t: Str) -> int:
    """Extended Hamming distance.

    Number of positions at which the empty-letter-padded sequences of
    ``s`` and ``t`` differ.  End insertions/deletions count as
    substitutions against the empty letter, which makes this a metric on
    strings of unequal lengths.
    """
    _check_same_alphabet(s, t)
    a, b = s.symbols, t.symbols
    if len(a) < len(b):
        a, b = b, a
    d = len(a) - len(b)
    for x, y in zip(a, b):
        if x != y:
            d += 1
    return d


def levenshtein(s: Str, t: Str) -> int:
    """Levenshtein distance via the standard dynamic program."""
    _check_same_alphabet(s, t)
    a, b = s.symbols, t.symbols
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cost = 0 if x == y else 1
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost))
        prev = cur
    return prev[-1]


def distance(s: Str, t: Str, kind: DistanceKind) -> int:
    if kind is DistanceKind.EXT_HAMMING:
        return ext_hamming(s, t)
    return levenshtein(s, t)


def parse(text: Sequence[str], alphabet: Alphabet, record: str | None = None) -> Str:
    """Map each character of ``text`` through the alphabet.

    Raises ParseError naming the offending character and its 1-based
    position.
    """
    index = alphabet._index
    symbols = []
    for pos, ch in enumerate(text, start=1):
        try:
            symbols.append(index[ch])
        except KeyError:
            raise ParseError(ch, pos, record) from None
    return Str(tuple(symbols), alphabet)


def length_lex_key(s: Str) -> tuple[int, tuple[int, ...]]:
    """Sort key for the shortest-then-lexicographic tie-break order."""
    return (len(s.symbols), s.symbols)


def all_strings(alphabet: Alphabet, max_len: int) -> Iterable[Str]:
    """Yield every string of length <= max_len in length-lexicographic order."""
    from itertools import product

    for m in range(max_len + 1):
        for combo in product(range(alphabet.size), repeat=m):
            yield Str(combo, alphabet)
