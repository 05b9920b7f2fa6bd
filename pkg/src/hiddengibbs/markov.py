"""Transfer matrices of finite-range potentials, their Parry-formula Gibbs
measures, pressure, Gibbs constants and periodic-point approximations.

The transfer matrix of a range-r potential acts on words of length r with
the de Bruijn overlap pattern: entry (v, w) is exp(psi(v + last letter of
w)) when the length-(r-1) overlap matches, zero otherwise.  Cylinder
probabilities follow the closed product formula with the certified Perron
eigendata; everything is evaluated in the log domain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError
from .potentials import LocallyConstantPotential
from .projective import (
    DEFAULT_PERRON_TOL,
    IndexedMatrix,
    PerronData,
    perron_data,
)
from .symbols import (
    DEFAULT_ENUMERATION_CAP,
    Word,
    cyclic_window_ranks,
    digit_matrix,
    window_ranks,
    word_from_rank,
)


@dataclass(frozen=True)
class TransferMatrix:
    """Nonnegative matrix over A**r with the de Bruijn sparsity pattern;
    primitive with primitivity index exactly r on the full shift."""

    potential: LocallyConstantPotential
    matrix: IndexedMatrix

    @property
    def r(self) -> int:
        return self.potential.r

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def build_transfer(pot: LocallyConstantPotential) -> TransferMatrix:
    size = pot.alphabet.size
    r = pot.r
    dim = size**r
    log_entries = np.full((dim, dim), -np.inf)
    # nonzero columns of row v are (v mod size**(r-1)) * size + a for a in A,
    # and the weight is the table entry of the (r+1)-word v*size + a
    rows = np.arange(dim, dtype=np.int64)
    tail = rows % (size ** (r - 1))
    for a in range(size):
        cols = tail * size + a
        log_entries[rows, cols] = pot.table[rows * size + a]
    labels = tuple(
        word_from_rank(pot.alphabet, k, r).label() for k in range(dim)
    )
    matrix = IndexedMatrix.from_log_entries(log_entries, labels, labels)
    _check_primitivity_index(matrix, r)
    return TransferMatrix(potential=pot, matrix=matrix)


def _check_primitivity_index(matrix: IndexedMatrix, r: int) -> None:
    pattern = matrix.mantissa > 0
    power = pattern.copy()
    for _ in range(r - 1):
        if power.all():
            raise AssertionError("transfer matrix positive before step r")
        power = power @ pattern
    if not power.all():
        raise AssertionError("transfer matrix not positive at step r")


@dataclass(frozen=True)
class MarkovGibbsMeasure:
    """Gibbs (r-step Markov) measure of a finite-range potential, evaluated
    through the closed product formula over the transfer eigendata."""

    transfer: TransferMatrix
    perron: PerronData
    pressure: float
    gibbs_constant: float
    log_gibbs_constant: float

    @property
    def potential(self) -> LocallyConstantPotential:
        return self.transfer.potential

    @property
    def r(self) -> int:
        return self.transfer.r

    # log left/right eigenvector entries, indexed by A**r rank
    @property
    def _log_left(self) -> np.ndarray:
        return np.log(self.perron.left)

    @property
    def _log_right(self) -> np.ndarray:
        return np.log(self.perron.right.entries)

    def cylinder_log_prob(self, word: Word) -> float:
        """Natural-log probability of the cylinder of ``word``.

        Words of length >= r use the product formula directly (length r
        reduces to left(w) * right(w)); shorter words sum the formula over
        all completions to length r, which is the unique consistent
        extension.
        """
        pot = self.potential
        if word.alphabet != pot.alphabet:
            raise ValueError("word alphabet does not match measure")
        r = self.r
        m = len(word)
        size = pot.alphabet.size
        if m < r:
            block = size ** (r - m)
            lo = word.rank() * block
            lr = self._log_left[lo : lo + block] + self._log_right[lo : lo + block]
            return float(_logsumexp(lr))
        prefix = word.sub(0, r - 1).rank()
        suffix = word.sub(m - r, m - 1).rank()
        total = self._log_left[prefix] + self._log_right[suffix]
        total -= (m - r) * self.pressure
        for j in range(m - r):
            total += pot.table[word.sub(j, j + r).rank()]
        return float(total)

    def cylinder_log_probs_all(
        self, n: int, cap: int = DEFAULT_ENUMERATION_CAP
    ) -> np.ndarray:
        """Vector of cylinder log-probabilities over all of A**n, indexed by
        word rank (vectorized counterpart of cylinder_log_prob)."""
        pot = self.potential
        size = pot.alphabet.size
        r = self.r
        if n < r:
            full = self._log_left + self._log_right
            block = size ** (r - n)
            return _logsumexp_rows(full.reshape(size**n, block))
        digits = digit_matrix(size, n, cap=cap)
        out = self._log_left[window_ranks(digits[:, :r], r, size)[:, 0]].astype(float)
        out += self._log_right[window_ranks(digits[:, n - r :], r, size)[:, 0]]
        if n > r:
            wide = window_ranks(digits, r + 1, size)
            out += pot.table[wide].sum(axis=1)
        out -= (n - r) * self.pressure
        return out

    def to_csv_rows(self, max_len: int, sep: str = "") -> list[tuple[str, float]]:
        rows = []
        for n in range(1, max_len + 1):
            probs = self.cylinder_log_probs_all(n)
            for k, lp in enumerate(probs):
                rows.append(
                    (word_from_rank(self.potential.alphabet, k, n).label(sep), float(lp))
                )
        return rows


def measure_from(
    pot: LocallyConstantPotential, tol: float = DEFAULT_PERRON_TOL
) -> MarkovGibbsMeasure:
    """Assemble the Gibbs measure: certified eigendata plus the closed-form
    Gibbs constant.

    The constant bounds both ends of the Gibbs ratio
    left(w0..) * right(..wn) * rho**r * exp(-(r trailing terms of the
    Birkhoff sum)), giving
        C = max( max(L)max(R) rho**r e^{r||psi||},
                 1 / (min(L)min(R) rho**r e^{-r||psi||}) )  >= 1.
    """
    transfer = build_transfer(pot)
    eig = perron_data(transfer.matrix, tol=tol)
    r = pot.r
    sup = pot.sup_norm
    log_l = np.log(eig.left)
    log_r = np.log(eig.right.entries)
    hi = float(log_l.max() + log_r.max()) + r * eig.log_rho + r * sup
    lo = float(log_l.min() + log_r.min()) + r * eig.log_rho - r * sup
    log_c = max(hi, -lo)
    return MarkovGibbsMeasure(
        transfer=transfer,
        perron=eig,
        pressure=eig.log_rho,
        gibbs_constant=math.exp(log_c),
        log_gibbs_constant=log_c,
    )


def pressure_periodic(
    pot: LocallyConstantPotential, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> float:
    """(1/n) log sum over period-n points of exp(Birkhoff sum), by direct
    enumeration of the Card(A)**n generating words."""
    if n < 1:
        raise ValueError("period must be >= 1")
    size = pot.alphabet.size
    if size**n > cap:
        raise EnumerationCapError("period %d exceeds enumeration cap" % n)
    digits = digit_matrix(size, n, cap=cap)
    ranks = cyclic_window_ranks(digits, pot.r + 1, size)
    sums = pot.table[ranks].sum(axis=1)
    return float(_logsumexp(sums)) / n


def pressure_trace(pot: LocallyConstantPotential, n: int) -> float:
    """(1/n) log Trace(M**n): the matrix route to the same quantity, used
    as a cross-check against the enumeration route."""
    transfer = build_transfer(pot)
    power = transfer.matrix.power(n)
    diag = np.diag(power.mantissa)
    return (math.log(float(diag.sum())) + power.log_scale) / n


def periodic_measure(
    pot: LocallyConstantPotential,
    p: int,
    word: Word,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> float:
    """Weight of the cylinder of ``word`` under the period-p point
    approximation: the ratio of exp(Birkhoff sums) over period-p points
    starting with ``word`` to the sum over all period-p points, computed
    in matrix form (no enumeration)."""
    r = pot.r
    if p <= len(word) + r:
        raise ValueError("period p must exceed len(word) + r")
    transfer = build_transfer(pot)
    return _periodic_measure_from_transfer(transfer, p, word, cap)


def _periodic_measure_from_transfer(
    transfer: TransferMatrix, p: int, word: Word, cap: int
) -> float:
    pot = transfer.potential
    r = pot.r
    size = pot.alphabet.size
    n = len(word)
    power_full = transfer.matrix.power(p)
    log_denom = math.log(float(np.trace(power_full.mantissa))) + power_full.log_scale
    if n < r:
        block = size ** (r - n)
        lo = word.rank() * block
        # sum the length-r case (diagonal entries of M**p) over completions
        vals = np.log(np.diag(power_full.mantissa)[lo : lo + block])
        vals += power_full.log_scale
        return float(math.exp(_logsumexp(vals) - log_denom))
    log_num = 0.0
    for s in range(n - r):
        log_num += pot.table[word.sub(s, s + r).rank()]
    connector = transfer.matrix.power(p - n + r)
    row = word.sub(n - r, n - 1).rank()
    col = word.sub(0, r - 1).rank()
    entry = connector.mantissa[row, col]
    log_num += math.log(entry) + connector.log_scale
    return float(math.exp(log_num - log_denom))


@dataclass(frozen=True)
class GibbsReport:
    """Extremal Gibbs ratios observed on an exhaustive scan."""

    constant: float
    max_ratio: float
    min_ratio: float
    per_depth: tuple[tuple[int, float, float], ...]
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def gibbs_inequality_check(
    measure: MarkovGibbsMeasure,
    n_max: int,
    cap: int = DEFAULT_ENUMERATION_CAP,
    slack: float = 1e-12,
) -> GibbsReport:
    """Exhaustively verify mu[w] / exp(S_{n+1} psi(periodic w) - (n+1) P)
    in [1/C, C] for all words with n <= n_max, C the measure's closed-form
    Gibbs constant.  Returns the extremal ratios per depth."""
    pot = measure.potential
    size = pot.alphabet.size
    log_c = measure.log_gibbs_constant
    per_depth = []
    violations = 0
    overall_max = -np.inf
    overall_min = np.inf
    for n in range(n_max + 1):
        m = n + 1
        if size**m > cap:
            raise EnumerationCapError("depth %d exceeds enumeration cap" % n)
        log_mu = measure.cylinder_log_probs_all(m, cap=cap)
        digits = digit_matrix(size, m, cap=cap)
        ranks = cyclic_window_ranks(digits, pot.r + 1, size)
        birkhoff = pot.table[ranks].sum(axis=1)
        log_ratio = log_mu - (birkhoff - m * measure.pressure)
        hi = float(log_ratio.max())
        lo = float(log_ratio.min())
        per_depth.append((n, math.exp(hi), math.exp(lo)))
        overall_max = max(overall_max, hi)
        overall_min = min(overall_min, lo)
        tol = math.log1p(slack)
        violations += int(np.count_nonzero(log_ratio > log_c + tol))
        violations += int(np.count_nonzero(log_ratio < -log_c - tol))
    return GibbsReport(
        constant=measure.gibbs_constant,
        max_ratio=math.exp(overall_max),
        min_ratio=math.exp(overall_min),
        per_depth=tuple(per_depth),
        violations=violations,
    )


def _logsumexp(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    hi = float(values.max())
    if not math.isfinite(hi):
        return hi
    return hi + math.log(float(np.exp(values - hi).sum()))


def _logsumexp_rows(values: np.ndarray) -> np.ndarray:
    hi = values.max(axis=1)
    return hi + np.log(np.exp(values - hi[:, None]).sum(axis=1))
