"""Hilbert projective metric, Birkhoff contraction coefficients, and
certified Perron-Frobenius eigendata for nonnegative matrices.

Matrices are stored as a nonnegative mantissa array plus one shared
log-scale factor, so that chains of products never underflow: the entry
value is ``mantissa * exp(log_scale)`` and products simply add scales.

The power iteration terminates on an a-priori contraction bound (the
distance of the current iterate to the fixed point is at most
``ell * delta0 * tau**k / (1 - tau)`` after k applications of the
ell-th power map), never on observed convergence alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    AlphabetMismatchError,
    CertificationError,
    NotPrimitiveError,
    RowAllowabilityError,
)

DEFAULT_PERRON_TOL = 1e-12
_ITERATION_CAP = 500_000


@dataclass(frozen=True)
class IndexedMatrix:
    """Dense nonnegative matrix over ordered index sets, with a shared
    log-scale: entries equal ``mantissa * exp(log_scale)``."""

    row_index: tuple
    col_index: tuple
    mantissa: np.ndarray
    log_scale: float = 0.0

    def __post_init__(self):
        m = np.array(self.mantissa, dtype=float, copy=True)
        if m.shape != (len(self.row_index), len(self.col_index)):
            raise ValueError("mantissa shape does not match index sets")
        if np.any(m < 0) or not np.all(np.isfinite(m)):
            raise ValueError("matrix entries must be finite and >= 0")
        m.setflags(write=False)
        object.__setattr__(self, "mantissa", m)

    @classmethod
    def from_entries(cls, entries, row_index=None, col_index=None) -> "IndexedMatrix":
        e = np.asarray(entries, dtype=float)
        if row_index is None:
            row_index = tuple(range(e.shape[0]))
        if col_index is None:
            col_index = tuple(range(e.shape[1]))
        hi = float(e.max()) if e.size else 0.0
        if hi <= 0.0:
            return cls(tuple(row_index), tuple(col_index), e, 0.0)
        return cls(tuple(row_index), tuple(col_index), e / hi, math.log(hi))

    @classmethod
    def from_log_entries(
        cls, log_entries, row_index=None, col_index=None
    ) -> "IndexedMatrix":
        """Build from natural-log entries; -inf encodes a structural zero."""
        le = np.asarray(log_entries, dtype=float)
        if row_index is None:
            row_index = tuple(range(le.shape[0]))
        if col_index is None:
            col_index = tuple(range(le.shape[1]))
        finite = np.isfinite(le)
        if not finite.any():
            return cls(tuple(row_index), tuple(col_index), np.zeros_like(le), 0.0)
        scale = float(le[finite].max())
        mant = np.where(finite, np.exp(le - scale), 0.0)
        return cls(tuple(row_index), tuple(col_index), mant, scale)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mantissa.shape

    def is_square(self) -> bool:
        return self.shape[0] == self.shape[1]

    def is_positive(self) -> bool:
        return bool(np.all(self.mantissa > 0))

    def is_row_allowable(self) -> bool:
        return bool(np.all(self.mantissa.max(axis=1) > 0))

    def log_entries(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.mantissa) + self.log_scale

    def entry(self, i: int, j: int) -> float:
        return float(self.mantissa[i, j]) * math.exp(self.log_scale)

    def scaled(self, log_factor: float) -> "IndexedMatrix":
        return IndexedMatrix(
            self.row_index, self.col_index, self.mantissa, self.log_scale + log_factor
        )

    def transpose(self) -> "IndexedMatrix":
        return IndexedMatrix(
            self.col_index, self.row_index, self.mantissa.T.copy(), self.log_scale
        )

    def matmul(self, other: "IndexedMatrix") -> "IndexedMatrix":
        if self.col_index != other.row_index:
            raise AlphabetMismatchError("index sets do not chain")
        prod = self.mantissa @ other.mantissa
        hi = float(prod.max())
        scale = self.log_scale + other.log_scale
        if hi > 0.0:
            prod = prod / hi
            scale += math.log(hi)
        return IndexedMatrix(self.row_index, other.col_index, prod, scale)

    def power(self, k: int) -> "IndexedMatrix":
        if not self.is_square():
            raise ValueError("power of a non-square matrix")
        if k < 1:
            raise ValueError("power must be >= 1")
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result.matmul(base)
            k >>= 1
            if k:
                base = base.matmul(base)
        return result


@dataclass(frozen=True)
class SimplexVector:
    """Strictly positive vector over an ordered index set, summing to 1."""

    index: tuple
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float, copy=True)
        if e.shape != (len(self.index),):
            raise ValueError("entry count does not match index set")
        if np.any(e <= 0) or not np.all(np.isfinite(e)):
            raise ValueError("simplex entries must be finite and > 0")
        if abs(float(e.sum()) - 1.0) > 1e-12:
            raise ValueError("simplex entries must sum to 1 within 1e-12")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @classmethod
    def normalized(cls, values, index=None) -> "SimplexVector":
        v = np.asarray(values, dtype=float)
        if index is None:
            index = tuple(range(v.shape[0]))
        s = float(v.sum())
        if s <= 0:
            raise ValueError("cannot normalize a nonpositive vector")
        return cls(tuple(index), v / s)

    @classmethod
    def uniform(cls, index) -> "SimplexVector":
        index = tuple(index)
        n = len(index)
        return cls(index, np.full(n, 1.0 / n))


def hilbert_metric(x: SimplexVector, y: SimplexVector) -> float:
    """Projective distance max over (e,f) of log[x(e)y(f)/(x(f)y(e))].

    Equals the spread of the log-ratios log(x/y), so it is computed in
    O(dim) rather than over all index pairs.
    """
    if x.index != y.index:
        raise AlphabetMismatchError("simplex vectors live on different index sets")
    ratios = np.log(x.entries) - np.log(y.entries)
    return float(ratios.max() - ratios.min())


def phi_of(M: IndexedMatrix) -> float:
    """Cross-ratio floor of a nonnegative matrix: the minimum over index
    quadruples of M(e,e')M(f,f')/(M(e,f')M(f,e')); zero if any entry is 0.

    Invariant under positive row and column scalings, always in [0, 1].
    """
    a = M.mantissa
    if a.size == 0 or np.any(a == 0):
        return 0.0
    la = np.log(a)
    # min over e of la[e, e'] - la[e, f'] for every column pair (e', f')
    g = (la[:, :, None] - la[:, None, :]).min(axis=0)
    val = (g + g.T).min()
    return min(float(np.exp(val)), 1.0)


def tau_of(M: IndexedMatrix) -> float:
    """Birkhoff contraction coefficient (1 - sqrt(phi)) / (1 + sqrt(phi));
    strictly below 1 exactly when the matrix is strictly positive."""
    s = math.sqrt(phi_of(M))
    return (1.0 - s) / (1.0 + s)


def project_apply(M: IndexedMatrix, x: SimplexVector) -> SimplexVector:
    """Normalized image Mx / |Mx|_1 on the row index set."""
    if M.col_index != x.index:
        raise AlphabetMismatchError("matrix columns do not match vector index")
    y = M.mantissa @ x.entries
    if np.any(y <= 0):
        raise RowAllowabilityError("zero row met while applying matrix")
    return SimplexVector.normalized(y, M.row_index)


def normalized_product(
    chain: Sequence[IndexedMatrix], seed: SimplexVector
) -> tuple[SimplexVector, float]:
    """Right-to-left composition of projective applications.

    Returns the final simplex vector together with the accumulated
    log-scale s such that ``chain[0] @ ... @ chain[-1] @ seed`` equals
    ``exp(s) * result.entries`` exactly (up to rounding).
    """
    x = seed
    log_scale = 0.0
    for M in reversed(list(chain)):
        if M.col_index != x.index:
            raise AlphabetMismatchError("chain index sets do not match")
        y = M.mantissa @ x.entries
        if np.any(y <= 0):
            raise RowAllowabilityError("zero row met inside matrix chain")
        s = float(y.sum())
        log_scale += math.log(s) + M.log_scale
        x = SimplexVector(M.row_index, y / s)
    return x, log_scale


def primitivity_index(M: IndexedMatrix) -> int:
    """Least ell with M**ell strictly positive; the search stops at the
    Wielandt bound (dim-1)**2 + 1 and fails with NotPrimitiveError there."""
    if not M.is_square():
        raise ValueError("primitivity is defined for square matrices")
    pattern = M.mantissa > 0
    dim = pattern.shape[0]
    bound = (dim - 1) ** 2 + 1
    current = pattern.copy()
    for ell in range(1, bound + 1):
        if current.all():
            return ell
        current = current @ pattern
    raise NotPrimitiveError(
        "no strictly positive power up to the Wielandt bound %d" % bound
    )


@dataclass(frozen=True)
class PerronData:
    """Certified maximal eigendata of a primitive nonnegative matrix.

    ``certified_residual`` is the a-priori projective-distance bound that
    triggered termination; ``aposteriori_delta`` the measured distance
    between the final iterate and one more application of the ell-th
    power map.  ``left`` is scaled so that left . right = 1.
    ``residual_right``/``residual_left`` are the measured relative eigen
    residuals ||Mx - rho x||_inf / rho expressed at simplex level.
    """

    index: tuple
    rho: float
    log_rho: float
    right: SimplexVector
    left: np.ndarray
    primitivity: int
    tau: float
    certified_residual: float
    aposteriori_delta: float
    residual_right: float
    residual_left: float
    certified: bool = True

    @property
    def right_entries(self) -> np.ndarray:
        return self.right.entries


def _iterate_to_fixed_point(
    power_mat: IndexedMatrix,
    single: IndexedMatrix,
    ell: int,
    tau: float,
    tol_delta: float,
    seed: SimplexVector,
) -> tuple[SimplexVector, float, float]:
    """Iterate the ell-th power projective map until the a-priori bound
    ell * delta0 * tau**k / (1 - tau) drops to tol_delta."""
    delta0 = hilbert_metric(seed, project_apply(single, seed))
    x = seed
    if delta0 == 0.0:
        return x, 0.0, hilbert_metric(x, project_apply(power_mat, x))
    lead = ell * delta0 / (1.0 - tau)
    bound = lead
    k = 0
    while bound > tol_delta:
        if k >= _ITERATION_CAP:
            raise CertificationError(
                "a-priori bound %.3g not below %.3g within %d iterations"
                % (bound, tol_delta, _ITERATION_CAP)
            )
        x = project_apply(power_mat, x)
        k += 1
        bound = lead * tau**k
    post = hilbert_metric(x, project_apply(power_mat, x))
    return x, bound, post


def perron_data(
    M: IndexedMatrix,
    tol: float = DEFAULT_PERRON_TOL,
    seed: SimplexVector | None = None,
) -> PerronData:
    """Certified Perron eigendata via Birkhoff-contracted power iteration.

    Termination is a-priori: the projective distance to the fixed point is
    driven below tol/4, which forces the relative sup-norm eigen residual
    below tol.  Passing a non-uniform seed drops the certificate (the
    a-priori constant is only proved for the uniform start).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    ell = primitivity_index(M)
    power_mat = M if ell == 1 else M.power(ell)
    tau = tau_of(power_mat)
    certified = seed is None
    start = SimplexVector.uniform(M.row_index) if seed is None else seed
    tol_delta = tol / 4.0
    x, bound, post = _iterate_to_fixed_point(
        power_mat, M, ell, tau, tol_delta, start
    )

    # With rho taken as |Mx|_1 at the fixed point, the relative residual
    # ||Mx - rho x||_inf / rho equals ||y/|y|_1 - x||_inf, scale-free.
    y = M.mantissa @ x.entries
    log_rho = math.log(float(y.sum())) + M.log_scale
    rho = math.exp(log_rho)
    resid_r = float(np.max(np.abs(y / float(y.sum()) - x.entries)))

    Mt = M.transpose()
    power_t = Mt if ell == 1 else power_mat.transpose()
    start_t = SimplexVector.uniform(Mt.row_index) if seed is None else seed
    lx, _, _ = _iterate_to_fixed_point(power_t, Mt, ell, tau, tol_delta, start_t)
    left = lx.entries / float(lx.entries @ x.entries)
    yl = Mt.mantissa @ lx.entries
    resid_l = float(np.max(np.abs(yl / float(yl.sum()) - lx.entries)))

    return PerronData(
        index=M.row_index,
        rho=rho,
        log_rho=log_rho,
        right=x,
        left=left,
        primitivity=ell,
        tau=tau,
        certified_residual=bound,
        aposteriori_delta=post,
        residual_right=resid_r,
        residual_left=resid_l,
        certified=certified,
    )
