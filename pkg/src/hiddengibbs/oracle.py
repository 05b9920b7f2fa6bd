"""Independent brute-force references used by tests and the CLI verify
command.  Exhaustive and exponential-time by design; the config caps keep
everything at desk scale.  Nothing here touches the certified pipeline:
eigendata comes from a dense eigensolver and probabilities from plain
enumeration, sharing only the symbolic layer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationCapError
from .potentials import LocallyConstantPotential
from .symbols import AmalgamationMap, Word, cyclic_window_ranks, digit_matrix


@dataclass(frozen=True)
class OracleConfig:
    max_word_length: int = 12
    max_period: int = 14
    tolerance: float = 1e-10


DEFAULT_ORACLE_CONFIG = OracleConfig()


def oracle_cylinder(
    pot: LocallyConstantPotential,
    word: Word,
    p: int,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> float:
    """Period-p approximation of the cylinder weight by enumerating all
    Card(A)**p periodic words: ratio of exp(Birkhoff sums) over those
    starting with ``word`` to the total."""
    if p <= len(word) + pot.r:
        raise ValueError("period p must exceed len(word) + r")
    if p > config.max_period:
        raise EnumerationCapError("period %d exceeds oracle cap %d" % (p, config.max_period))
    size = pot.alphabet.size
    digits = digit_matrix(size, p)
    sums = pot.table[cyclic_window_ranks(digits, pot.r + 1, size)].sum(axis=1)
    sums -= sums.max()  # stabilize; ratio is scale-free
    weights = np.exp(sums)
    prefix = np.asarray(word.letters, dtype=np.int64)
    mask = (digits[:, : len(word)] == prefix[None, :]).all(axis=1)
    return float(weights[mask].sum() / weights.sum())


def dense_eigendata(weights: np.ndarray) -> tuple[float, np.ndarray, np.ndarray]:
    """(rho, right, left) of a primitive nonnegative matrix via numpy's
    dense eigensolver; right sums to 1 and left . right = 1."""
    evals, evecs = np.linalg.eig(weights)
    k = int(np.argmax(evals.real))
    rho = float(evals[k].real)
    right = evecs[:, k].real
    right = np.abs(right)
    right /= right.sum()
    evals_l, evecs_l = np.linalg.eig(weights.T)
    k_l = int(np.argmax(evals_l.real))
    left = np.abs(evecs_l[:, k_l].real)
    left /= float(left @ right)
    return rho, right, left


def _transfer_weights(pot: LocallyConstantPotential) -> np.ndarray:
    size = pot.alphabet.size
    dim = size**pot.r
    weights = np.zeros((dim, dim))
    rows = np.arange(dim, dtype=np.int64)
    tail = rows % (size ** (pot.r - 1))
    for a in range(size):
        weights[rows, tail * size + a] = np.exp(pot.table[rows * size + a])
    return weights


def markov_cylinder_prob(pot: LocallyConstantPotential, word: Word) -> float:
    """Plain-float Parry probability of a cylinder, from dense eigendata."""
    r = pot.r
    size = pot.alphabet.size
    rho, right, left = dense_eigendata(_transfer_weights(pot))
    m = len(word)
    if m < r:
        block = size ** (r - m)
        lo = word.rank() * block
        return float((left[lo : lo + block] * right[lo : lo + block]).sum())
    value = left[word.sub(0, r - 1).rank()] * right[word.sub(m - r, m - 1).rank()]
    for j in range(m - r):
        value *= math.exp(pot.table[word.sub(j, j + r).rank()]) / rho
    return float(value)


def oracle_pushforward(
    pot: LocallyConstantPotential,
    amap: AmalgamationMap,
    word: Word,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> float:
    """Pushforward cylinder probability as the plain sum of Parry-formula
    probabilities over the fiber of ``word``."""
    if len(word) > config.max_word_length:
        raise EnumerationCapError(
            "word length %d exceeds oracle cap %d"
            % (len(word), config.max_word_length)
        )
    total = 0.0
    for v in amap.fiber(word):
        total += markov_cylinder_prob(pot, v)
    return total


def oracle_pushforward_table(
    pot: LocallyConstantPotential,
    amap: AmalgamationMap,
    n: int,
    config: OracleConfig = DEFAULT_ORACLE_CONFIG,
) -> np.ndarray:
    """All pushforward cylinder probabilities over B**n at once, indexed by
    target-word rank (vectorized fiber sums over all of A**n)."""
    if n > config.max_word_length:
        raise EnumerationCapError("length %d exceeds oracle cap" % n)
    pot_size = pot.alphabet.size
    r = pot.r
    rho, right, left = dense_eigendata(_transfer_weights(pot))
    digits = digit_matrix(pot_size, n)
    if n >= r:
        from .symbols import window_ranks

        log_mu = np.log(left)[window_ranks(digits[:, :r], r, pot_size)[:, 0]]
        log_mu = log_mu + np.log(right)[
            window_ranks(digits[:, n - r :], r, pot_size)[:, 0]
        ]
        if n > r:
            log_mu += pot.table[window_ranks(digits, r + 1, pot_size)].sum(axis=1)
        log_mu -= (n - r) * math.log(rho)
        mu = np.exp(log_mu)
    else:
        lr = left * right
        block = pot_size ** (r - n)
        mu = lr.reshape(pot_size**n, block).sum(axis=1)
    b_digits = amap.apply_digits(digits)
    b_size = amap.target.size
    b_ranks = np.zeros(digits.shape[0], dtype=np.int64)
    for k in range(n):
        b_ranks = b_ranks * b_size + b_digits[:, k]
    return np.bincount(b_ranks, weights=mu, minlength=b_size**n)


def oracle_lumped_chain(
    q: np.ndarray, amap: AmalgamationMap, atol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray] | None:
    """Classical lumpability test for a row-stochastic matrix on A.

    Returns (lumped transition matrix on B, its stationary distribution)
    when every state in a fiber has the same total transition probability
    into each target fiber; None otherwise.
    """
    q = np.asarray(q, dtype=float)
    n_a = amap.source.size
    n_b = amap.target.size
    if q.shape != (n_a, n_a):
        raise ValueError("transition matrix shape does not match alphabet")
    if np.any(q < 0) or not np.allclose(q.sum(axis=1), 1.0, atol=1e-9):
        raise ValueError("matrix must be row-stochastic")
    lumped = np.zeros((n_b, n_b))
    for b in range(n_b):
        fiber = amap.fiber_of_symbol(b)
        for b_to in range(n_b):
            cols = list(amap.fiber_of_symbol(b_to))
            sums = q[np.asarray(fiber)][:, cols].sum(axis=1)
            if np.max(sums) - np.min(sums) > atol:
                return None
            lumped[b, b_to] = float(sums[0])
    return lumped, stationary_distribution(lumped)


def stationary_distribution(q: np.ndarray) -> np.ndarray:
    """Stationary row vector of a row-stochastic matrix via a linear solve."""
    n = q.shape[0]
    a = np.vstack([q.T - np.eye(n), np.ones((1, n))])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    pi, *_ = np.linalg.lstsq(a, b, rcond=None)
    return pi
