"""Alphabets, finite words, amalgamation maps, and exhaustive enumeration.

Symbols are arbitrary string labels; all arithmetic runs on dense integer
indices so that word ranks double as array offsets.  Everything here is
immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import AlphabetMismatchError, EnumerationCapError

DEFAULT_ENUMERATION_CAP = 10_000_000


class Alphabet:
    """Ordered finite symbol set (size >= 2).

    The construction order is fixed and defines the lexicographic order of
    words over the alphabet.
    """

    __slots__ = ("symbols", "_index")

    def __init__(self, symbols: Iterable[str]):
        syms = tuple(str(s) for s in symbols)
        if len(syms) < 2:
            raise ValueError("alphabet needs at least 2 symbols, got %d" % len(syms))
        if len(set(syms)) != len(syms):
            raise ValueError("alphabet symbols must be distinct: %r" % (syms,))
        object.__setattr__(self, "symbols", syms)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(syms)})

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("Alphabet is immutable")

    @property
    def size(self) -> int:
        return len(self.symbols)

    def __len__(self) -> int:
        return len(self.symbols)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alphabet) and self.symbols == other.symbols

    def __hash__(self) -> int:
        return hash(self.symbols)

    def __repr__(self) -> str:
        return "Alphabet(%s)" % ", ".join(self.symbols)

    def index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise AlphabetMismatchError(
                "symbol %r not in %r" % (label, self)
            ) from None

    def word(self, letters: Sequence[int]) -> "Word":
        return Word(self, tuple(int(x) for x in letters))

    def parse(self, text: str, sep: str = "") -> "Word":
        """Parse a word from symbol labels joined by ``sep`` (empty sep
        splits into single characters)."""
        labels = list(text) if sep == "" else text.split(sep)
        return self.word([self.index(s) for s in labels])


@dataclass(frozen=True)
class Word:
    """A finite word: a nonempty tuple of symbol indices over an alphabet."""

    alphabet: Alphabet
    letters: tuple[int, ...]

    def __post_init__(self):
        if len(self.letters) == 0:
            raise ValueError("words must have length >= 1")
        n = self.alphabet.size
        for x in self.letters:
            if not (0 <= x < n):
                raise AlphabetMismatchError(
                    "letter index %d out of range for %r" % (x, self.alphabet)
                )

    def __len__(self) -> int:
        return len(self.letters)

    def __repr__(self) -> str:
        return "Word(%s)" % self.label()

    def label(self, sep: str = "") -> str:
        return sep.join(self.alphabet.symbols[i] for i in self.letters)

    def sub(self, m: int, n: int) -> "Word":
        """The subword from position m through n inclusive (length n-m+1)."""
        if not (0 <= m <= n < len(self.letters)):
            raise IndexError("subword [%d..%d] out of range" % (m, n))
        return Word(self.alphabet, self.letters[m : n + 1])

    def concat(self, other: "Word") -> "Word":
        if other.alphabet != self.alphabet:
            raise AlphabetMismatchError("cannot concatenate across alphabets")
        return Word(self.alphabet, self.letters + other.letters)

    def cyclic_window(self, start: int, width: int) -> "Word":
        """Width letters read cyclically starting at ``start``; the word is
        treated as one period of an infinite periodic sequence."""
        p = len(self.letters)
        return Word(
            self.alphabet,
            tuple(self.letters[(start + k) % p] for k in range(width)),
        )

    def extend_periodic(self, length: int) -> "Word":
        """Prefix of length ``length`` of the periodic extension of the word."""
        if length <= len(self.letters):
            return Word(self.alphabet, self.letters[:length])
        return self.cyclic_window(0, length)

    def rank(self) -> int:
        """Position in the lexicographic enumeration of words of this length."""
        r = 0
        n = self.alphabet.size
        for x in self.letters:
            r = r * n + x
        return r


def word_from_rank(alphabet: Alphabet, rank: int, length: int) -> Word:
    n = alphabet.size
    letters = [0] * length
    for k in range(length - 1, -1, -1):
        letters[k] = rank % n
        rank //= n
    return Word(alphabet, tuple(letters))


def enumerate_words(
    alphabet: Alphabet, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[Word]:
    """All words of length n in lexicographic order (Card(A)**n of them)."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    count = alphabet.size**n
    if count > cap:
        raise EnumerationCapError(
            "enumerating %d words exceeds cap %d" % (count, cap)
        )
    return [
        Word(alphabet, letters)
        for letters in itertools.product(range(alphabet.size), repeat=n)
    ]


def periodic_orbit_words(
    alphabet: Alphabet, p: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> list[Word]:
    """Generating words of all points of period p (non-minimal periods
    included): one word per periodic point, i.e. all of A**p."""
    return enumerate_words(alphabet, p, cap=cap)


def digit_matrix(size: int, n: int, cap: int = DEFAULT_ENUMERATION_CAP) -> np.ndarray:
    """(size**n, n) int array of all length-n digit strings in lexicographic
    order; the vectorized counterpart of enumerate_words."""
    count = size**n
    if count > cap:
        raise EnumerationCapError(
            "enumerating %d words exceeds cap %d" % (count, cap)
        )
    out = np.empty((count, n), dtype=np.int64)
    r = np.arange(count, dtype=np.int64)
    for k in range(n - 1, -1, -1):
        out[:, k] = r % size
        r //= size
    return out


def window_ranks(digits: np.ndarray, width: int, size: int) -> np.ndarray:
    """Ranks of all sliding windows of ``width`` letters in each row of a
    digit matrix; output shape (rows, n - width + 1)."""
    n = digits.shape[1]
    if width > n:
        raise ValueError("window wider than word")
    r = np.zeros(digits.shape[0], dtype=np.int64)
    for k in range(width):
        r = r * size + digits[:, k]
    out = np.empty((digits.shape[0], n - width + 1), dtype=np.int64)
    out[:, 0] = r
    drop = size ** (width - 1)
    for j in range(1, n - width + 1):
        r = (r % drop) * size + digits[:, j + width - 1]
        out[:, j] = r
    return out


def cyclic_window_ranks(digits: np.ndarray, width: int, size: int) -> np.ndarray:
    """Like window_ranks but reading the rows cyclically; output shape
    (rows, n): one window per starting position."""
    n = digits.shape[1]
    reps = -(-(n + width - 1) // n)  # ceil
    tiled = np.concatenate([digits] * reps, axis=1)[:, : n + width - 1]
    return window_ranks(tiled, width, size)


class AmalgamationMap:
    """Letter-wise surjection pi from a source alphabet A onto a strictly
    smaller target alphabet B (Card(B) >= 2).  Extends to words letter by
    letter, so it commutes with taking subwords and with the shift."""

    __slots__ = ("source", "target", "table", "_fibers")

    def __init__(self, source: Alphabet, target: Alphabet, mapping: dict[str, str]):
        if target.size >= source.size:
            raise ValueError(
                "amalgamation must strictly shrink the alphabet "
                "(Card(A)=%d, Card(B)=%d)" % (source.size, target.size)
            )
        table = [None] * source.size
        for a_label, b_label in mapping.items():
            table[source.index(a_label)] = target.index(b_label)
        missing = [source.symbols[i] for i, t in enumerate(table) if t is None]
        if missing:
            raise ValueError("amalgamation table misses source symbols %r" % missing)
        hit = set(table)
        missed_b = [s for i, s in enumerate(target.symbols) if i not in hit]
        if missed_b:
            raise ValueError(
                "amalgamation not surjective: target symbol(s) %r have empty "
                "fiber" % missed_b
            )
        fibers = tuple(
            tuple(a for a in range(source.size) if table[a] == b)
            for b in range(target.size)
        )
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "table", tuple(table))
        object.__setattr__(self, "_fibers", fibers)

    def __setattr__(self, name, value):  # pragma: no cover - immutability guard
        raise AttributeError("AmalgamationMap is immutable")

    def __repr__(self) -> str:
        pairs = ", ".join(
            "%s->%s" % (a, self.target.symbols[b])
            for a, b in zip(self.source.symbols, self.table)
        )
        return "AmalgamationMap(%s)" % pairs

    def apply(self, word: Word) -> Word:
        if word.alphabet != self.source:
            raise AlphabetMismatchError("word is not over the source alphabet")
        return Word(self.target, tuple(self.table[a] for a in word.letters))

    def apply_digits(self, digits: np.ndarray) -> np.ndarray:
        lut = np.asarray(self.table, dtype=np.int64)
        return lut[digits]

    def fiber_of_symbol(self, b: int) -> tuple[int, ...]:
        return self._fibers[b]

    def fiber(
        self, word: Word, cap: int = DEFAULT_ENUMERATION_CAP
    ) -> list[Word]:
        """All preimage words of a target word, in lexicographic order."""
        if word.alphabet != self.target:
            raise AlphabetMismatchError("word is not over the target alphabet")
        count = 1
        for b in word.letters:
            count *= len(self._fibers[b])
            if count > cap:
                raise EnumerationCapError(
                    "fiber of %r exceeds cap %d" % (word, cap)
                )
        choices = [self._fibers[b] for b in word.letters]
        return [
            Word(self.source, letters) for letters in itertools.product(*choices)
        ]

    def fiber_ranks(self, word: Word) -> np.ndarray:
        """Ranks (over A**len) of the fiber, in lexicographic order."""
        if word.alphabet != self.target:
            raise AlphabetMismatchError("word is not over the target alphabet")
        n = self.source.size
        ranks = np.zeros(1, dtype=np.int64)
        for b in word.letters:
            fib = np.asarray(self._fibers[b], dtype=np.int64)
            ranks = (ranks[:, None] * n + fib[None, :]).reshape(-1)
        return ranks
