import numpy as np
import pytest

from hiddengibbs import Alphabet, AmalgamationMap, LocallyConstantPotential


@pytest.fixture
def alpha2():
    return Alphabet(["0", "1"])


@pytest.fixture
def alpha3():
    return Alphabet(["0", "1", "2"])


@pytest.fixture
def amap32(alpha3, alpha2):
    return AmalgamationMap(alpha3, alpha2, {"0": "0", "1": "1", "2": "1"})


def chain_potential(alphabet, q):
    """Range-1 potential of a stochastic matrix: psi(ab) = log q[a, b]."""
    q = np.asarray(q, dtype=float)
    return LocallyConstantPotential(alphabet, 1, np.log(q).reshape(-1))


# a fixed non-lumpable chain on three states used across tests: merging
# states 1 and 2 produces a genuinely non-Markov image process
GENERIC_Q3 = np.array(
    [
        [0.5, 0.3, 0.2],
        [0.2, 0.6, 0.2],
        [0.3, 0.3, 0.4],
    ]
)

# lumpable chains for the 0|{1,2} merge: transition mass into each fiber is
# constant along the fiber
LUMPABLE_Q3 = [
    # identical rows: the image is an i.i.d. process
    np.array(
        [
            [0.55, 0.25, 0.20],
            [0.55, 0.25, 0.20],
            [0.55, 0.25, 0.20],
        ]
    ),
    # distinct rows inside the merged fiber, equal fiber sums
    np.array(
        [
            [0.40, 0.35, 0.25],
            [0.30, 0.42, 0.28],
            [0.30, 0.38, 0.32],
        ]
    ),
    # equal rows inside the merged fiber only
    np.array(
        [
            [0.50, 0.30, 0.20],
            [0.30, 0.45, 0.25],
            [0.30, 0.45, 0.25],
        ]
    ),
]


@pytest.fixture
def generic_chain(alpha3):
    return chain_potential(alpha3, GENERIC_Q3)


def random_potential(alphabet, r, seed, scale=1.0):
    rng = np.random.default_rng(seed)
    table = rng.uniform(-scale, scale, alphabet.size ** (r + 1))
    return LocallyConstantPotential(alphabet, r, table)
