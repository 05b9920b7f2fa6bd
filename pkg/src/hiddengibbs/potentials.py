"""Locally constant potentials, variation-bounded general potentials,
their finite-range approximants, Birkhoff sums and variation profiles.

Potential values are natural-log weights throughout; the transfer matrix
exponentiates them.  A locally constant potential of range r is a total
table over words of length r+1. A general potential ships an evaluator on
finite words (read as the value at the periodic extension of the word)
plus a certified upper bound on each variation; the library never infers
decay from samples for certification purposes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import AlphabetMismatchError, CertificationError
from .symbols import Alphabet, Word, enumerate_words, word_from_rank


@dataclass(frozen=True)
class Holder:
    """var_n <= coeff * ratio**n with 0 < ratio < 1."""

    coeff: float
    ratio: float

    def __post_init__(self):
        if not (0.0 < self.ratio < 1.0):
            raise ValueError("holder ratio must lie in (0, 1)")
        if self.coeff < 0:
            raise ValueError("holder coefficient must be >= 0")


@dataclass(frozen=True)
class Subexponential:
    """var_n <= coeff * exp(-rate * n**gamma) with 0 < gamma < 1."""

    coeff: float
    rate: float
    gamma: float

    def __post_init__(self):
        if not (0.0 < self.gamma < 1.0):
            raise ValueError("gamma must lie in (0, 1)")
        if self.rate <= 0 or self.coeff < 0:
            raise ValueError("rate must be > 0 and coeff >= 0")


@dataclass(frozen=True)
class Polynomial:
    """var_n <= coeff * n**(-power) for n >= 1."""

    coeff: float
    power: float

    def __post_init__(self):
        if self.power <= 1.0:
            raise ValueError("polynomial decay needs power > 1 for summability")
        if self.coeff < 0:
            raise ValueError("coeff must be >= 0")


@dataclass(frozen=True)
class Summable:
    """Summable variations with no closed-form tail; certificates that need
    one are refused."""


DecayClass = Union[Holder, Subexponential, Polynomial, Summable]


@dataclass(frozen=True)
class LocallyConstantPotential:
    """A potential depending on the first r+1 symbols only, stored as a
    dense table indexed by word rank over A**(r+1).

    ``approx_error`` records a sup-norm bound to the potential this table
    was derived from (zero when the table is the ground truth).
    """

    alphabet: Alphabet
    r: int
    table: np.ndarray
    approx_error: float = 0.0

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("range r must be >= 1")
        t = np.array(self.table, dtype=float, copy=True)
        expected = self.alphabet.size ** (self.r + 1)
        if t.shape != (expected,):
            raise ValueError(
                "table must be total over A**(r+1): expected %d entries, got %s"
                % (expected, t.shape)
            )
        if not np.all(np.isfinite(t)):
            raise ValueError("table values must be finite")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_dict(
        cls, alphabet: Alphabet, r: int, values: dict[str, float], sep: str = ""
    ) -> "LocallyConstantPotential":
        expected = alphabet.size ** (r + 1)
        table = np.full(expected, np.nan)
        for text, value in values.items():
            w = alphabet.parse(text, sep=sep)
            if len(w) != r + 1:
                raise ValueError(
                    "table word %r has length %d, expected %d" % (text, len(w), r + 1)
                )
            table[w.rank()] = float(value)
        if np.isnan(table).any():
            missing = word_from_rank(alphabet, int(np.isnan(table).argmax()), r + 1)
            raise ValueError("table misses word %s" % missing.label())
        return cls(alphabet, r, table)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.table)))

    def value(self, word: Word) -> float:
        if word.alphabet != self.alphabet:
            raise AlphabetMismatchError("word alphabet does not match potential")
        if len(word) != self.r + 1:
            raise ValueError("value() expects a word of length r+1 = %d" % (self.r + 1))
        return float(self.table[word.rank()])

    def variation(self, n: int) -> float:
        """Exact sup of |psi(a) - psi(b)| over table entries agreeing on the
        first n+1 letters; zero for n >= r."""
        if n < 0:
            raise ValueError("variation depth must be >= 0")
        if n >= self.r:
            return 0.0
        groups = self.table.reshape(
            self.alphabet.size ** (n + 1), self.alphabet.size ** (self.r - n)
        )
        return float(np.max(groups.max(axis=1) - groups.min(axis=1)))

    def birkhoff_sum_periodic(self, word: Word) -> float:
        """Sum of the potential along one period of the periodic point
        generated by ``word`` (p terms for a word of length p)."""
        if word.alphabet != self.alphabet:
            raise AlphabetMismatchError("word alphabet does not match potential")
        total = 0.0
        for k in range(len(word)):
            total += self.table[word.cyclic_window(k, self.r + 1).rank()]
        return float(total)

    def shifted(self, offset: float) -> "LocallyConstantPotential":
        return LocallyConstantPotential(
            self.alphabet, self.r, self.table + offset, self.approx_error
        )

    def to_json_dict(self, sep: str = "") -> dict:
        entries = [
            {
                "word": word_from_rank(self.alphabet, k, self.r + 1).label(sep),
                "value": float(v),
            }
            for k, v in enumerate(self.table)
        ]
        return {
            "alphabet": list(self.alphabet.symbols),
            "r": self.r,
            "entries": entries,
        }

    @classmethod
    def from_json_dict(cls, data: dict, sep: str = "") -> "LocallyConstantPotential":
        alphabet = Alphabet(data["alphabet"])
        values = {e["word"]: e["value"] for e in data["entries"]}
        return cls.from_dict(alphabet, int(data["r"]), values, sep=sep)


def normalize(
    pot: LocallyConstantPotential, pressure: float
) -> LocallyConstantPotential:
    """Subtract a pressure constant from every table entry.  The associated
    Gibbs measure is unchanged."""
    if not math.isfinite(pressure):
        raise ValueError("pressure must be finite")
    return pot.shifted(-pressure)


@dataclass(frozen=True)
class VariationBoundedPotential:
    """General potential with certified variation bounds.

    ``evaluator`` maps a finite word to the potential value at the periodic
    extension of that word (the canonical point of its cylinder);
    ``var_bound`` is a certified nonincreasing upper bound on the n-th
    variation and must be consistent with ``decay_class``.
    ``sup_bound``, when given, certifies sup |psi|.
    """

    alphabet: Alphabet
    evaluator: Callable[[Word], float]
    var_bound: Callable[[int], float]
    decay_class: DecayClass
    sup_bound: float | None = None

    def value(self, word: Word) -> float:
        if word.alphabet != self.alphabet:
            raise AlphabetMismatchError("word alphabet does not match potential")
        return float(self.evaluator(word))


def approximant(
    psi: VariationBoundedPotential, r: int
) -> LocallyConstantPotential:
    """The (r+1)-symbol truncation of a general potential: table value on a
    word w of length r+1 is the evaluator at the periodic extension of w.
    The recorded sup-norm guarantee is var_bound(r)."""
    if r < 1:
        raise ValueError("approximant range must be >= 1")
    words = enumerate_words(psi.alphabet, r + 1)
    table = np.array([psi.evaluator(w) for w in words], dtype=float)
    return LocallyConstantPotential(
        psi.alphabet, r, table, approx_error=float(psi.var_bound(r))
    )


@dataclass(frozen=True)
class VariationProfile:
    """Variation sequence of a potential with a certified bound on the full
    sum: s_psi >= sum_k var_k (exact for locally constant potentials) and
    theta = 1 - exp(-s_psi)."""

    values: tuple[float, ...]
    s_psi: float
    theta: float
    card_a: int
    sup_norm: float
    var_bound: Callable[[int], float]
    decay_class: DecayClass
    locally_constant_range: int | None = None

    def __post_init__(self):
        if self.s_psi < 0 or not math.isfinite(self.s_psi):
            raise CertificationError("variation sum must be finite and >= 0")
        if not (0.0 <= self.theta < 1.0):
            raise ValueError("theta must lie in [0, 1)")


def _lc_var_bound(pot: LocallyConstantPotential) -> Callable[[int], float]:
    cached = tuple(pot.variation(n) for n in range(pot.r))

    def bound(n: int) -> float:
        return cached[n] if n < pot.r else 0.0

    return bound


def variation_profile(
    pot: LocallyConstantPotential | VariationBoundedPotential, depth: int = 0
) -> VariationProfile:
    """Variation profile with a certified upper bound on sum_k var_k.

    For a locally constant potential the sum is exact (finitely many
    nonzero terms).  For a general potential the listed values come from
    var_bound and the tail beyond the evaluation depth is bounded in
    closed form per decay class; a Summable class cannot certify a tail.
    """
    if isinstance(pot, LocallyConstantPotential):
        values = tuple(pot.variation(n) for n in range(depth + 1))
        s = float(sum(pot.variation(n) for n in range(pot.r)))  # exact full sum
        return VariationProfile(
            values=values,
            s_psi=s,
            theta=-math.expm1(-s),
            card_a=pot.alphabet.size,
            sup_norm=pot.sup_norm,
            var_bound=_lc_var_bound(pot),
            # tails beyond the range vanish identically; no closed form needed
            decay_class=Summable(),
            locally_constant_range=pot.r,
        )
    values = tuple(float(pot.var_bound(n)) for n in range(depth + 1))
    if any(v < 0 for v in values):
        raise ValueError("variation bounds must be nonnegative")
    cutoff = max(depth + 1, 64)
    partial = float(sum(pot.var_bound(n) for n in range(cutoff)))
    tail = variation_tail_sum(pot.decay_class, pot.var_bound, cutoff, weight=0)
    s = partial + tail
    sup = pot.sup_bound
    if sup is None:
        # evaluator sup over A**2 plus var_bound(1) certifies sup |psi|
        words = enumerate_words(pot.alphabet, 2)
        sup = max(abs(pot.evaluator(w)) for w in words) + float(pot.var_bound(1))
    return VariationProfile(
        values=values,
        s_psi=s,
        theta=-math.expm1(-s),
        card_a=pot.alphabet.size,
        sup_norm=float(sup),
        var_bound=pot.var_bound,
        decay_class=pot.decay_class,
        locally_constant_range=None,
    )


def variation_tail_sum(
    decay: DecayClass,
    var_bound: Callable[[int], float],
    start: int,
    weight: int,
) -> float:
    """Certified upper bound on sum_{s >= start} s**weight * var_s for
    weight in {0, 1, 2}, using the decay class's closed form.

    Elementary bounds used (g decreasing on [K, inf)):
        sum_{s>=K} g(s) <= g(K) + integral_K^inf g(t) dt.
    - holder: sum_{s>=K} s**j ratio**s has an exact closed form obtained by
      differentiating the geometric series j times.
    - subexponential: integral_K^inf t**j exp(-c t**g) dt =
      (1/g) c**(-(j+1)/g) Gamma((j+1)/g, c K**g) (substitute u = c t**g);
      t**j exp(-c t**g) decreases once t >= (j/(c g))**(1/g), so K is
      raised to that threshold first (the skipped terms are summed
      explicitly).
    - polynomial: sum_{s>=K} s**(j-q) <= K**(j-q) + K**(j-q+1)/(q-j-1),
      needing q > j + 1.
    """
    if weight not in (0, 1, 2):
        raise ValueError("weight must be 0, 1 or 2")
    if isinstance(decay, Summable):
        raise CertificationError(
            "summable decay class carries no closed-form tail bound"
        )
    if isinstance(decay, Holder):
        return _holder_weighted_tail(decay.coeff, decay.ratio, start, weight)
    if isinstance(decay, Polynomial):
        q = decay.power
        if q <= weight + 1:
            raise CertificationError(
                "polynomial decay q=%.3g cannot certify a weight-%d tail "
                "(needs q > %d)" % (q, weight, weight + 1)
            )
        k = max(start, 1)
        head = sum(var_bound(s) * s**weight for s in range(start, k))
        return head + decay.coeff * (
            float(k) ** (weight - q) + float(k) ** (weight - q + 1) / (q - weight - 1)
        )
    # subexponential
    c, g = decay.rate, decay.gamma
    threshold = (
        0 if weight == 0 else int(math.ceil((weight / (c * g)) ** (1.0 / g))) + 1
    )
    k = max(start, threshold, 1)
    head = sum(var_bound(s) * s**weight for s in range(start, k))
    from scipy.special import gammaincc, gamma as gamma_fn

    a = (weight + 1) / g
    integral = (1.0 / g) * c ** (-a) * gammaincc(a, c * k**g) * gamma_fn(a)
    return head + decay.coeff * (float(k) ** weight * math.exp(-c * k**g) + integral)


def _holder_weighted_tail(coeff: float, x: float, start: int, weight: int) -> float:
    """Exact sum_{s>=K} coeff * s**weight * x**s via derivatives of the
    geometric tail x**K/(1-x)."""
    k = start
    if weight == 0:
        return coeff * x**k / (1.0 - x)
    if weight == 1:
        # sum s x**s from K = x**K (K(1-x) + x) / (1-x)**2
        return coeff * x**k * (k * (1.0 - x) + x) / (1.0 - x) ** 2
    # sum_{s>=K} s^2 x^s = x^K (K^2(1-x)^2 + x(2K(1-x) + 1 + x)) / (1-x)^3,
    # from s^2 = s(s-1) + s and two derivatives of the geometric tail
    one = 1.0 - x
    term = k * k * one * one + x * (2.0 * k * one + 1.0 + x)
    return coeff * x**k * term / one**3


def geometric_weighted_tail(theta: float, start: int) -> float:
    """Exact closed form for sum_{s >= start} s * theta**s."""
    if theta == 0.0:
        return 0.0
    return _holder_weighted_tail(1.0, theta, start, 1)


# ---------------------------------------------------------------------------
# built-in parametric families


def table_family(
    alphabet: Alphabet, r: int, values: dict[str, float], sep: str = ""
) -> LocallyConstantPotential:
    return LocallyConstantPotential.from_dict(alphabet, r, values, sep=sep)


def first_symbol_weighted(
    alphabet: Alphabet, weights: dict[str, float]
) -> LocallyConstantPotential:
    """Range-1 potential whose value depends on the first symbol only."""
    w = np.array([float(weights[s]) for s in alphabet.symbols])
    table = np.repeat(w, alphabet.size)
    return LocallyConstantPotential(alphabet, 1, table)


def geometric_tail(
    alphabet: Alphabet, f: dict[str, float], base: float = 2.0
) -> VariationBoundedPotential:
    """psi(a) = sum_k base**(-k) f(a_k): summable with geometric variation
    decay var_n <= spread(f) * base**(-n) / (base - 1)."""
    if base <= 1.0:
        raise ValueError("base must exceed 1")
    fvals = np.array([float(f[s]) for s in alphabet.symbols])
    spread = float(fvals.max() - fvals.min())
    sup = float(np.max(np.abs(fvals))) * base / (base - 1.0)

    def evaluator(word: Word) -> float:
        # closed form on the periodic extension of the word
        m = len(word)
        partial = sum(base ** (-k) * fvals[word.letters[k]] for k in range(m))
        return partial / (1.0 - base ** (-m))

    def var_bound(n: int) -> float:
        return spread * base ** (-n) / (base - 1.0)

    return VariationBoundedPotential(
        alphabet=alphabet,
        evaluator=evaluator,
        var_bound=var_bound,
        decay_class=Holder(coeff=spread / (base - 1.0), ratio=1.0 / base),
        sup_bound=sup,
    )
