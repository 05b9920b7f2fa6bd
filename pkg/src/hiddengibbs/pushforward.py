"""Hidden (amalgamated) measures, restricted transfer blocks, tail vectors,
and the induced potential of the image process with certified truncation
error.

The pushforward of an r-step Markov-Gibbs measure under a letter map is
evaluated through restrictions of the transfer matrix to fiber
coordinates.  Chains of these blocks act on fiber simplices; every block
spanning a full window of 2r target letters is strictly positive on the
full shift, so the chain contracts the Hilbert metric at a uniform rate.
Truncation errors are certified two ways and the smaller wins:

- the closed-form coefficient from the uniform contraction bound
  theta = 1 - exp(-s_psi):   c1 * r**2 * theta**(n/r);
- a telescoped bound with the measured per-block Birkhoff coefficients:
  peeling k = floor(n/r) - 1 full blocks off the left of the composition
  leaves two tails on the same simplex whose distance telescopes over
  seed-to-image gaps, each at most d_star, with ratio at most tau_star:
      delta(x_n, x_inf) <= (prod of the k peeled block coefficients)
                            * d_star / (1 - tau_star).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CertificationError
from .markov import MarkovGibbsMeasure, _logsumexp
from .potentials import VariationProfile
from .projective import (
    IndexedMatrix,
    SimplexVector,
    hilbert_metric,
    normalized_product,
    project_apply,
    tau_of,
)
from .symbols import AmalgamationMap, Word, word_from_rank

# Additive numerical allowance on certified bars: the closed-form bounds
# hold in exact arithmetic, evaluation itself carries rounding noise.
BAR_FLOOR = 1e-12


@dataclass(frozen=True)
class ContractionConstants:
    """Closed-form coefficients of the truncation bounds: c0 bounds the
    projective distance from a uniform seed to its image, c1 multiplies
    the tail-vector bound, c = 2*c1 the induced-value bound."""

    c0: float
    c1: float
    c: float


def contraction_constants(profile: VariationProfile) -> ContractionConstants:
    c0 = 2.0 * (math.log(profile.card_a) + profile.sup_norm)
    theta = profile.theta
    if theta == 0.0:
        # constant potential: blocks are projectively constant, the closed
        # form degenerates; the measured-coefficient bound is 0 instead
        return ContractionConstants(c0=c0, c1=math.inf, c=math.inf)
    c1 = 4.0 * c0 * (1.0 + math.exp(profile.s_psi) * theta) / (
        theta * theta * (1.0 - theta)
    )
    return ContractionConstants(c0=c0, c1=c1, c=2.0 * c1)


@dataclass(frozen=True)
class RestrictedMatrixFamily:
    """All restrictions of a transfer matrix to fiber coordinates: one
    block per target word of length r+1, plus the measured contraction
    data of every full window of 2r target letters."""

    amap: AmalgamationMap
    r: int
    fiber_ranks: tuple[np.ndarray, ...]  # per B**r rank: A**r ranks
    blocks: tuple[IndexedMatrix, ...]  # per B**(r+1) rank
    window_tau: np.ndarray  # per B**(2r) rank
    tau_star: float
    positivity_verified: bool

    @property
    def b_size(self) -> int:
        return self.amap.target.size


def build_family(transfer, amap: AmalgamationMap) -> RestrictedMatrixFamily:
    """Materialize all fiber-restricted blocks and verify that every
    product over a full 2r-letter target window is strictly positive."""
    r = transfer.r
    b_size = amap.target.size
    b_alph = amap.target
    fiber_ranks = tuple(
        amap.fiber_ranks(word_from_rank(b_alph, k, r)) for k in range(b_size**r)
    )
    mant = transfer.matrix.mantissa
    scale = transfer.matrix.log_scale
    blocks = []
    for u in range(b_size ** (r + 1)):
        rows = fiber_ranks[u // b_size]
        cols = fiber_ranks[u % (b_size**r)]
        sub = mant[np.ix_(rows, cols)]
        block = IndexedMatrix(tuple(rows), tuple(cols), sub, scale)
        if not block.is_row_allowable():
            raise AssertionError("restricted block has a zero row")
        blocks.append(block)
    window_tau = np.empty(b_size ** (2 * r))
    for w in range(b_size ** (2 * r)):
        prod = None
        for j in range(r):
            u = (w // b_size ** (r - 1 - j)) % (b_size ** (r + 1))
            prod = blocks[u] if prod is None else prod.matmul(blocks[u])
        if not prod.is_positive():
            raise AssertionError("full-window product block is not positive")
        window_tau[w] = tau_of(prod)
    return RestrictedMatrixFamily(
        amap=amap,
        r=r,
        fiber_ranks=fiber_ranks,
        blocks=tuple(blocks),
        window_tau=window_tau,
        tau_star=float(window_tau.max()),
        positivity_verified=True,
    )


@dataclass(frozen=True)
class PushforwardMeasure:
    """Image of a Markov-Gibbs measure under an amalgamation, with the
    contraction data needed for certified induced-potential evaluation."""

    base: MarkovGibbsMeasure
    family: RestrictedMatrixFamily
    profile: VariationProfile
    theta: float
    constants: ContractionConstants
    seeds: tuple[SimplexVector, ...]  # normalized restricted right eigenvectors
    restricted_left: tuple[np.ndarray, ...]
    log_seed_norms: tuple[float, ...]
    d_star: float

    @property
    def r(self) -> int:
        return self.family.r

    @property
    def amap(self) -> AmalgamationMap:
        return self.family.amap

    # -- cylinder probabilities ------------------------------------------

    def cylinder_log_prob(self, word: Word) -> float:
        """Log-probability of a target cylinder: the restricted product
        formula, equal to the exact sum of base-measure probabilities over
        the fiber."""
        if word.alphabet != self.amap.target:
            raise ValueError("word is not over the target alphabet")
        r = self.r
        m = len(word)
        b_size = self.family.b_size
        if m < r:
            block = b_size ** (r - m)
            lo = word.rank() * block
            vals = [self._log_prob_length_r(k) for k in range(lo, lo + block)]
            return float(_logsumexp(np.array(vals)))
        if m == r:
            return self._log_prob_length_r(word.rank())
        chain = [
            self.family.blocks[word.sub(j, j + r).rank()] for j in range(m - r)
        ]
        tail_rank = word.sub(m - r, m - 1).rank()
        x, log_scale = normalized_product(chain, self.seeds[tail_rank])
        value = float(np.dot(self.restricted_left[word.sub(0, r - 1).rank()], x.entries))
        return (
            math.log(value)
            + log_scale
            + self.log_seed_norms[tail_rank]
            - (m - r) * self.base.pressure
        )

    def _log_prob_length_r(self, b_rank: int) -> float:
        ranks = self.family.fiber_ranks[b_rank]
        val = float(
            np.dot(self.base.perron.left[ranks], self.base.perron.right.entries[ranks])
        )
        return math.log(val)

    def cylinder_log_probs_all(self, n: int) -> np.ndarray:
        """All target cylinder log-probabilities at length n, by prefix
        recursion over the restricted blocks."""
        r = self.r
        b_size = self.family.b_size
        if n <= r:
            out = np.array(
                [self._log_prob_length_r(k) for k in range(b_size**r)]
            )
            if n == r:
                return out
            return _fold_logsumexp(out, b_size ** (r - n))
        states = [
            (
                self.restricted_left[k] / self.restricted_left[k].sum(),
                math.log(self.restricted_left[k].sum()),
            )
            for k in range(b_size**r)
        ]
        for m in range(r + 1, n + 1):
            new_states = []
            for rank in range(b_size**m):
                prefix = rank // b_size
                u = rank % (b_size ** (r + 1))  # window of the last r+1 letters
                vec, log_scale = states[prefix]
                block = self.family.blocks[u]
                y = vec @ block.mantissa
                s = float(y.sum())
                new_states.append((y / s, log_scale + math.log(s) + block.log_scale))
            states = new_states
        out = np.empty(b_size**n)
        for rank, (vec, log_scale) in enumerate(states):
            tail_rank = rank % (b_size**r)
            val = float(vec @ self.base.perron.right.entries[self.family.fiber_ranks[tail_rank]])
            out[rank] = math.log(val) + log_scale - (n - r) * self.base.pressure
        return out

    def to_csv_rows(self, max_len: int, sep: str = "") -> list[tuple[str, float]]:
        rows = []
        for n in range(1, max_len + 1):
            probs = self.cylinder_log_probs_all(n)
            for k, lp in enumerate(probs):
                rows.append(
                    (word_from_rank(self.amap.target, k, n).label(sep), float(lp))
                )
        return rows

    # -- certified truncation bounds --------------------------------------

    def delta_bound_paper(self, n: int) -> float:
        """Closed-form projective bound c1 * r**2 * theta**(n/r) on the
        distance from the depth-n tail vector to its limit."""
        if self.theta == 0.0:
            return 0.0
        r = self.r
        return self.constants.c1 * r * r * self.theta ** (n / r)

    def delta_bound_measured(self, n: int, tau_product: float | None = None) -> float:
        """Telescoped bound with measured block coefficients (module
        docstring); ``tau_product`` may carry the exact product along a
        known context, otherwise tau_star**k is used."""
        k = max(n // self.r - 1, 0)
        if tau_product is None:
            tau_product = self.family.tau_star**k
        return tau_product * self.d_star / (1.0 - self.family.tau_star)

    def delta_bound(self, n: int, tau_product: float | None = None) -> float:
        return min(self.delta_bound_paper(n), self.delta_bound_measured(n, tau_product))


def pushforward_measure(
    measure: MarkovGibbsMeasure, amap: AmalgamationMap, profile: VariationProfile
) -> PushforwardMeasure:
    """Assemble the pushforward of ``measure`` under ``amap``; ``profile``
    is the variation profile of the potential the measure came from (the
    original potential when the measure is an approximant)."""
    family = build_family(measure.transfer, amap)
    r = family.r
    b_size = family.b_size
    right = measure.perron.right.entries
    left = measure.perron.left
    seeds = []
    log_norms = []
    restricted_left = []
    for k in range(b_size**r):
        ranks = family.fiber_ranks[k]
        raw = right[ranks]
        seeds.append(SimplexVector.normalized(raw, tuple(ranks)))
        log_norms.append(math.log(float(raw.sum())))
        restricted_left.append(left[ranks])
    d_star = _seed_image_gap(family, seeds)
    return PushforwardMeasure(
        base=measure,
        family=family,
        profile=profile,
        theta=profile.theta,
        constants=contraction_constants(profile),
        seeds=tuple(seeds),
        restricted_left=tuple(restricted_left),
        log_seed_norms=tuple(log_norms),
        d_star=d_star,
    )


def _seed_image_gap(family: RestrictedMatrixFamily, seeds) -> float:
    """d_star: the largest projective distance between a seed and the image
    of another seed under a linking window of r+1 .. 2r target letters."""
    r = family.r
    b_size = family.b_size
    worst = 0.0
    for length in range(r + 1, 2 * r + 1):
        for v in range(b_size**length):
            lead = v // b_size ** (length - r)
            x = seeds[v % (b_size**r)]
            for j in range(length - r - 1, -1, -1):
                u = (v // b_size ** (length - r - 1 - j)) % (b_size ** (r + 1))
                x = project_apply(family.blocks[u], x)
            worst = max(worst, hilbert_metric(seeds[lead], x))
    return worst


@dataclass(frozen=True)
class TailVector:
    """Composed projective image of a seed along a target-word context,
    with a certified distance bound to the infinite-context limit."""

    context: Word
    vector: SimplexVector
    truncation_error: float
    paper_error: float
    tau_product: float
    depth: int


def tail_vector(pf: PushforwardMeasure, context: Word) -> TailVector:
    """Tail vector of a finite context (length n >= r over the target
    alphabet): the composed block images of the restricted-eigenvector
    seed of the trailing r letters."""
    if context.alphabet != pf.amap.target:
        raise ValueError("context is not over the target alphabet")
    r = pf.r
    n = len(context)
    if n < r:
        raise ValueError("context must have length >= r")
    x = pf.seeds[context.sub(n - r, n - 1).rank()]
    for j in range(n - r - 1, -1, -1):
        x = project_apply(pf.family.blocks[context.sub(j, j + r).rank()], x)
    k = max(n // r - 1, 0)
    tau_product = 1.0
    for i in range(1, k + 1):
        w = context.sub((i - 1) * r, (i + 1) * r - 1).rank()
        tau_product *= float(pf.family.window_tau[w])
    paper = pf.delta_bound_paper(n)
    err = min(paper, pf.delta_bound_measured(n, tau_product)) + BAR_FLOOR
    return TailVector(
        context=context,
        vector=x,
        truncation_error=err,
        paper_error=paper,
        tau_product=tau_product,
        depth=n,
    )


@dataclass(frozen=True)
class InducedValue:
    """One induced-potential evaluation with its certified error bar."""

    word: str
    value: float
    error_bar: float
    r: int
    n: int
    finite_log_ratio: float | None = None
    limit_bar: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "word": self.word,
            "value": self.value,
            "error_bar": self.error_bar,
            "r": self.r,
            "n": self.n,
        }


def sup_induced_value(pf: PushforwardMeasure) -> float:
    """Exact uniform bound on every induced-potential value.

    The ansatz value is log of a ratio of two linear forms of a simplex
    vector, minus the log eigenvalue; over the simplex closure the ratio
    is extremal at vertices, so the bound is a finite scan over blocks
    and coordinates.  It covers all finite depths and the limit alike.
    """
    worst = 0.0
    b_size = pf.family.b_size
    r = pf.r
    for u, block in enumerate(pf.family.blocks):
        left0 = pf.restricted_left[u // b_size]
        left1 = pf.restricted_left[u % (b_size**r)]
        num = left0 @ block.mantissa  # over columns
        vals = np.log(num) - np.log(left1) + block.log_scale - pf.base.pressure
        worst = max(worst, float(np.max(np.abs(vals))))
    return worst


def induced_potential_exact_r(
    pf: PushforwardMeasure,
    word: Word,
    n: int,
    cross_check: bool = False,
    sep: str = "",
) -> InducedValue:
    """Induced-potential value at the periodic extension of ``word`` using
    a depth-n tail vector.

    The returned value equals log(nu[b_0^n] / nu[b_1^n]) for the periodic
    point b exactly (same product, renormalized), and it is within
    error_bar of the n -> infinity limit.
    """
    r = pf.r
    if n <= r:
        raise ValueError("depth n must exceed r")
    if len(word) < r + 1:
        word = word.extend_periodic(r + 1)
    bp = word.extend_periodic(n + 1)
    context = bp.sub(1, n)
    tv = tail_vector(pf, context)
    lead_block = pf.family.blocks[bp.sub(0, r).rank()]
    num = float(
        np.dot(
            pf.restricted_left[bp.sub(0, r - 1).rank()],
            lead_block.mantissa @ tv.vector.entries,
        )
    )
    den = float(np.dot(pf.restricted_left[bp.sub(1, r).rank()], tv.vector.entries))
    value = (
        math.log(num)
        + lead_block.log_scale
        - math.log(den)
        - pf.base.pressure
    )
    bar = 2.0 * tv.truncation_error + BAR_FLOOR * abs(value)
    ratio = None
    if cross_check:
        ratio = pf.cylinder_log_prob(bp) - pf.cylinder_log_prob(bp.sub(1, n))
    return InducedValue(
        word=word.label(sep),
        value=value,
        error_bar=bar,
        r=r,
        n=n,
        finite_log_ratio=ratio,
    )


# -- batched evaluation over many words ------------------------------------


def _tail_vectors_for_contexts(
    pf: PushforwardMeasure, contexts: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Tail vectors for many contexts at once.

    ``contexts`` is an int matrix (count, depth) of target letters.
    Returns a padded array (count, max_fiber_dim) of simplex entries plus
    the per-row leading-window rank (over B**r) identifying the fiber.
    """
    r = pf.r
    b_size = pf.family.b_size
    count, depth = contexts.shape
    if depth < r:
        raise ValueError("contexts must be at least r letters deep")
    dims = np.array([len(f) for f in pf.family.fiber_ranks])
    max_dim = int(dims.max())

    def window_rank_at(j: int, width: int) -> np.ndarray:
        out = np.zeros(count, dtype=np.int64)
        for k in range(width):
            out = out * b_size + contexts[:, j + k]
        return out

    lead = window_rank_at(depth - r, r)
    x = np.zeros((count, max_dim))
    for k in range(b_size**r):
        mask = lead == k
        if mask.any():
            x[mask, : dims[k]] = pf.seeds[k].entries
    for j in range(depth - r - 1, -1, -1):
        u = window_rank_at(j, r + 1)
        new_lead = u // b_size
        x_new = np.zeros_like(x)
        for uu in np.unique(u):
            mask = u == uu
            block = pf.family.blocks[int(uu)]
            din = block.shape[1]
            dout = block.shape[0]
            y = x[mask, :din] @ block.mantissa.T
            x_new[mask, :dout] = y / y.sum(axis=1, keepdims=True)
        x = x_new
        lead = new_lead
    return x, lead


def periodic_values_batch(pf: PushforwardMeasure, m: int, depth: int) -> np.ndarray:
    """Induced-potential evaluations at the periodic extensions of all
    target words of length m, each truncated at ``depth``; indexed by word
    rank.  The uniform error bar is 2 * pf.delta_bound(depth)."""
    r = pf.r
    b_size = pf.family.b_size
    count = b_size**m
    words = np.empty((count, m), dtype=np.int64)
    rr = np.arange(count, dtype=np.int64)
    for k in range(m - 1, -1, -1):
        words[:, k] = rr % b_size
        rr //= b_size
    reps = -(-(depth + 1) // m)
    tiled = np.concatenate([words] * (reps + 1), axis=1)
    contexts = tiled[:, 1 : depth + 1]
    x, _ = _tail_vectors_for_contexts(pf, contexts)
    values = np.empty(count)
    lead_u = np.zeros(count, dtype=np.int64)
    for k in range(r + 1):
        lead_u = lead_u * b_size + tiled[:, k]
    dims = np.array([len(f) for f in pf.family.fiber_ranks])
    for uu in np.unique(lead_u):
        mask = lead_u == uu
        block = pf.family.blocks[int(uu)]
        left0 = pf.restricted_left[int(uu) // b_size]
        left1 = pf.restricted_left[int(uu) % (b_size**r)]
        xs = x[mask, : block.shape[1]]
        num = (xs @ block.mantissa.T) @ left0
        den = xs @ left1
        values[mask] = np.log(num) - np.log(den) + block.log_scale
    return values - pf.base.pressure


@dataclass(frozen=True)
class VariationRow:
    n: int
    empirical_var: float
    certified_bound: float
    error_bar: float


@dataclass(frozen=True)
class VariationReport:
    rows: tuple[VariationRow, ...]
    depth: int
    horizon: int
    sup_value_bound: float

    def to_csv_rows(self) -> list[tuple[int, float, float, float]]:
        return [
            (row.n, row.empirical_var, row.certified_bound, row.error_bar)
            for row in self.rows
        ]


def variation_report(
    pf: PushforwardMeasure,
    n_max: int,
    horizon: int = 3,
    depth: int | None = None,
    limit_bar: float = 0.0,
) -> VariationReport:
    """Empirical variations of the induced potential against certified
    envelopes.

    Words of length n_max + 1 + horizon are evaluated at their periodic
    extensions; the empirical n-variation is the largest spread within a
    class of words sharing the first n+1 letters.  The certified bound is
    twice the evaluation bound at that depth (plus any approximant-to-
    limit bar), valid for the true potential by the same two-term
    argument that certifies single evaluations; for n <= r the trivial
    bound twice-the-sup applies.
    """
    r = pf.r
    m = n_max + 1 + horizon
    if depth is None:
        depth = max(4 * r, 2 * m)
    values = periodic_values_batch(pf, m, depth)
    eval_bar = 2.0 * pf.delta_bound(depth) + BAR_FLOOR + limit_bar
    sup_bound = sup_induced_value(pf) + limit_bar
    b_size = pf.family.b_size
    rows = []
    for n in range(n_max + 1):
        classes = values.reshape(b_size ** (n + 1), b_size ** (m - n - 1))
        emp = float((classes.max(axis=1) - classes.min(axis=1)).max())
        if n > r:
            cert = 2.0 * (2.0 * pf.delta_bound(n) + limit_bar) + BAR_FLOOR
            cert = min(cert, 2.0 * sup_bound)
        else:
            cert = 2.0 * sup_bound
        rows.append(
            VariationRow(
                n=n,
                empirical_var=emp,
                certified_bound=cert,
                error_bar=2.0 * eval_bar,
            )
        )
    return VariationReport(
        rows=tuple(rows), depth=depth, horizon=horizon, sup_value_bound=sup_bound
    )


@dataclass(frozen=True)
class PushforwardGibbsReport:
    """Gibbs-inequality scan of the pushforward against its induced
    potential: per-depth extremal log ratios, the computed constant, and
    the least-squares drift of the per-depth maxima."""

    log_constant: float
    per_depth: tuple[tuple[int, float, float], ...]
    drift: float
    violations: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def gibbs_check_pushforward(
    pf: PushforwardMeasure, n_max: int, depth: int | None = None
) -> PushforwardGibbsReport:
    """Check nu[b_0^n] / exp(S_{n+1} phi(b)) against a computed constant.

    The constant exponentiates
        (r+1) * (B_g + sup|phi|) + c r^2 theta^((r+1)/r) / (1 - theta^(1/r)),
    where B_g bounds the backward log-ratios at depths 1..r (finite scan):
    writing log nu[b_0^n] as a telescoping sum of backward ratios, the
    terms deeper than r are within c r^2 theta^(depth/r) of the matching
    phi values and their sum is the geometric tail above; the at-most r+1
    shallow terms are bounded brutally by B_g + sup|phi| each.
    Evaluation bars widen the admissible band by (n+1) bars per depth.
    """
    r = pf.r
    if depth is None:
        depth = max(4 * r, 2 * (n_max + 1), 16)
    b_size = pf.family.b_size
    eval_bar = 2.0 * pf.delta_bound(depth) + BAR_FLOOR

    # B_g: backward one-step log ratios at depths 1..r, plus |log nu| at
    # depth 1 (the last telescoping term)
    b_g = 0.0
    tables = {n: pf.cylinder_log_probs_all(n) for n in range(1, r + 2)}
    b_g = max(b_g, float(np.max(np.abs(tables[1]))))
    for m in range(2, r + 2):
        full = tables[m]
        drop = tables[m - 1]
        for rank in range(b_size**m):
            g = full[rank] - drop[rank % (b_size ** (m - 1))]
            b_g = max(b_g, abs(g))

    sup_phi = sup_induced_value(pf)
    theta = pf.theta
    if theta > 0.0:
        tail = (
            pf.constants.c
            * r
            * r
            * theta ** ((r + 1) / r)
            / (1.0 - theta ** (1.0 / r))
        )
    else:
        tail = 0.0
    log_c = (r + 1) * (b_g + sup_phi) + tail

    per_depth = []
    violations = 0
    maxima = []
    for n in range(n_max + 1):
        m = n + 1
        log_nu = pf.cylinder_log_probs_all(m)
        phi_vals = periodic_values_batch(pf, m, depth)
        ranks = np.arange(b_size**m, dtype=np.int64)
        birkhoff = np.zeros(b_size**m)
        shifted = ranks
        for _ in range(m):
            birkhoff += phi_vals[shifted]
            shifted = (shifted % (b_size ** (m - 1))) * b_size + shifted // (
                b_size ** (m - 1)
            )
        log_ratio = log_nu - birkhoff
        hi = float(log_ratio.max())
        lo = float(log_ratio.min())
        per_depth.append((n, hi, lo))
        maxima.append(max(abs(hi), abs(lo)))
        band = log_c + m * eval_bar + 1e-9
        violations += int(np.count_nonzero(np.abs(log_ratio) > band))
    xs = np.arange(len(maxima), dtype=float)
    drift = float(np.polyfit(xs[4:], np.array(maxima)[4:], 1)[0]) if len(maxima) > 5 else 0.0
    return PushforwardGibbsReport(
        log_constant=log_c,
        per_depth=tuple(per_depth),
        drift=drift,
        violations=violations,
    )


def _fold_logsumexp(values: np.ndarray, block: int) -> np.ndarray:
    groups = values.reshape(-1, block)
    hi = groups.max(axis=1)
    return hi + np.log(np.exp(groups - hi[:, None]).sum(axis=1))


# -- front door -------------------------------------------------------------


def pushforward_from_potential(
    pot, amap: AmalgamationMap, tol: float | None = None
) -> PushforwardMeasure:
    """Pushforward of the Gibbs measure of a finite-range potential."""
    from .markov import measure_from
    from .potentials import variation_profile
    from .projective import DEFAULT_PERRON_TOL

    measure = measure_from(pot, tol=tol if tol is not None else DEFAULT_PERRON_TOL)
    return pushforward_measure(measure, amap, variation_profile(pot))


@dataclass(frozen=True)
class InducedPotentialEvaluator:
    """Evaluator of the induced potential of a pushforward process.

    In exact-r mode the working measure is the exact pushforward of a
    finite-range potential and bars only carry truncation error.  In
    double-limit mode the working measure is the pushforward of a chosen
    approximant and every bar is widened by the approximant-to-limit
    bound along the schedule.
    """

    mode: str
    pushforward: PushforwardMeasure
    default_depth: int
    limit_bar: float = 0.0
    schedule: dict | None = None

    def evaluate(
        self, word: Word, n: int | None = None, cross_check: bool = False
    ) -> InducedValue:
        depth = self.default_depth if n is None else n
        base = induced_potential_exact_r(
            self.pushforward, word, depth, cross_check=cross_check
        )
        if self.limit_bar == 0.0:
            return base
        return InducedValue(
            word=base.word,
            value=base.value,
            error_bar=base.error_bar + self.limit_bar,
            r=base.r,
            n=base.n,
            finite_log_ratio=base.finite_log_ratio,
            limit_bar=self.limit_bar,
        )

    def variation(self, n_max: int, horizon: int = 3) -> VariationReport:
        return variation_report(
            self.pushforward,
            n_max,
            horizon=horizon,
            depth=max(self.default_depth, 2 * (n_max + 1 + horizon)),
            limit_bar=self.limit_bar,
        )


def exact_evaluator(
    pf: PushforwardMeasure, depth: int | None = None
) -> InducedPotentialEvaluator:
    if depth is None:
        depth = max(4 * pf.r, 16)
    return InducedPotentialEvaluator(
        mode="exact-r", pushforward=pf, default_depth=depth
    )


def _depth_for_bar(pf: PushforwardMeasure, target: float, start: int) -> int:
    """Smallest scanned depth whose value bar 2*delta_bound(n) meets the
    target; the measured tau_star < 1 guarantees termination."""
    n = max(start, pf.r + 1)
    for _ in range(64):
        if 2.0 * pf.delta_bound(n) + BAR_FLOOR <= target:
            return n
        n = max(n + pf.r, int(1.5 * n))
    raise CertificationError(
        "value bar %.3g unreachable (tau_star=%.6f)"
        % (target, pf.family.tau_star)
    )


def induced_potential_general(
    psi,
    amap: AmalgamationMap,
    tol: float | None = None,
    r: int | None = None,
    delta: float = 1.0,
    r_cap: int = 8,
    perron_tol: float | None = None,
) -> InducedPotentialEvaluator:
    """Double-limit evaluator for a general summable-variation potential.

    Either fix the approximant range ``r`` directly, or give a total
    tolerance ``tol``; then the smallest admissible r >= r_star with
    2 (2 eps(r, n(r)) + c r^2 theta^(n(r)/r)) <= tol/2 is chosen and the
    evaluation depth is raised until the truncation bar fits in tol/2.
    Raises CertificationError (with the best achievable bound in the
    message) when no r up to r_cap fits.
    """
    from .bounds import budget_constants, limit_bar as limit_bar_fn, r_star
    from .markov import measure_from
    from .potentials import (
        LocallyConstantPotential,
        approximant,
        variation_profile,
    )
    from .projective import DEFAULT_PERRON_TOL

    if perron_tol is None:
        perron_tol = DEFAULT_PERRON_TOL
    if isinstance(psi, LocallyConstantPotential):
        # the approximant chain is constant from the potential's own range
        pf = pushforward_from_potential(psi, amap, tol=perron_tol)
        depth = _depth_for_bar(pf, tol / 2.0, 2 * psi.r) if tol else max(4 * psi.r, 16)
        return InducedPotentialEvaluator(
            mode="exact-r",
            pushforward=pf,
            default_depth=depth,
            limit_bar=0.0,
            schedule={"r": psi.r, "delta": delta},
        )
    profile = variation_profile(psi, depth=8)
    consts = contraction_constants(profile)
    bconsts = budget_constants(profile)
    if r is None:
        if tol is None:
            raise ValueError("give either a tolerance or an explicit range r")
        r_min = r_star(profile, delta, constants=bconsts)
        best = math.inf
        chosen = None
        for cand in range(r_min, r_cap + 1):
            bar = limit_bar_fn(profile, consts.c, cand, delta, bconsts)
            best = min(best, bar)
            if 2.0 * bar <= tol:
                chosen = cand
                break
        if chosen is None:
            raise CertificationError(
                "tolerance %.3g unreachable up to r=%d (best limit bar %.3g, "
                "achievable tolerance about %.3g)" % (tol, r_cap, best, 4.0 * best)
            )
        r = chosen
    lim = limit_bar_fn(profile, consts.c, r, delta, bconsts)
    if profile.locally_constant_range is not None and r >= profile.locally_constant_range:
        lim = 0.0
    pot_r = approximant(psi, r)
    measure = measure_from(pot_r, tol=perron_tol)
    pf = pushforward_measure(measure, amap, profile)
    if tol is not None:
        depth = _depth_for_bar(pf, tol / 2.0, 2 * r)
    else:
        from .bounds import schedule_depth

        depth = max(schedule_depth(r, delta), 2 * r + 2)
    return InducedPotentialEvaluator(
        mode="double-limit",
        pushforward=pf,
        default_depth=depth,
        limit_bar=lim,
        schedule={"r": r, "delta": delta, "tol": tol},
    )
