"""Closed-form error budgets for the Markov-approximant convergence and
decay-class certificates for the induced potential.

The projective gap between the r-th approximant measure and the limit on
words of length n is controlled by

    epsilon(r, n) = D * sum_{s >= r} [ (n + (s+1)(s+2)) var_s + s theta**s ]

with D = max(2, 2 e^{s_psi} D1) and D1 = 4 (log Card(A) + s_psi + ||psi||).
The s*theta**s series has an exact closed form; the variation series is
summed explicitly to a cutoff with a per-decay-class closed-form tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CertificationError
from .potentials import (
    Holder,
    Polynomial,
    Subexponential,
    Summable,
    VariationProfile,
    geometric_weighted_tail,
    variation_tail_sum,
)


@dataclass(frozen=True)
class BudgetConstants:
    """d1 = 4(log Card(A) + s_psi + ||psi||); d = max(2, 2 e^{s_psi} d1)."""

    d1: float
    d: float


def budget_constants(profile: VariationProfile) -> BudgetConstants:
    d1 = 4.0 * (math.log(profile.card_a) + profile.s_psi + profile.sup_norm)
    return BudgetConstants(d1=d1, d=max(2.0, 2.0 * math.exp(profile.s_psi) * d1))


@dataclass(frozen=True)
class ErrorBudget:
    """Evaluated epsilon(r, n) with the constants and series pieces that
    produced it, for external audit."""

    r: int
    n: int
    epsilon: float
    d: float
    d1: float
    theta: float
    var_sum: float  # sum_{s>=r} var_s (certified upper bound)
    weighted_var_sum: float  # sum_{s>=r} (s+1)(s+2) var_s
    geometric_sum: float  # sum_{s>=r} s theta**s

    def to_json_dict(self) -> dict:
        return {
            "r": self.r,
            "n": self.n,
            "epsilon": self.epsilon,
            "D": self.d,
            "D1": self.d1,
            "theta": self.theta,
        }


def _variation_series(
    profile: VariationProfile, r: int, weight: int
) -> float:
    """Certified upper bound on sum_{s >= r} s**weight * var_s."""
    r0 = profile.locally_constant_range
    if r0 is not None:
        # finite-range potential: exact finite sum, zero beyond the range
        return float(
            sum(profile.var_bound(s) * s**weight for s in range(r, r0))
        )
    cutoff = max(r, 512)
    head = float(sum(profile.var_bound(s) * s**weight for s in range(r, cutoff)))
    return head + variation_tail_sum(
        profile.decay_class, profile.var_bound, cutoff, weight
    )


def epsilon_budget(
    profile: VariationProfile,
    r: int,
    n: int,
    constants: BudgetConstants | None = None,
) -> ErrorBudget:
    """Evaluate epsilon(r, n); raises CertificationError when the decay
    class cannot certify the weighted variation tail (e.g. polynomial
    decay with q <= 3, or a bare summable class)."""
    if r < 1 or n < 1:
        raise ValueError("r and n must be >= 1")
    if constants is None:
        constants = budget_constants(profile)
    if not (0.0 <= profile.theta < 1.0):
        raise CertificationError("theta must lie in [0, 1) for the budget")
    v0 = _variation_series(profile, r, 0)
    # (s+1)(s+2) = s**2 + 3 s + 2
    w = (
        _variation_series(profile, r, 2)
        + 3.0 * _variation_series(profile, r, 1)
        + 2.0 * v0
    )
    g = geometric_weighted_tail(profile.theta, r)
    eps = constants.d * (n * v0 + w + g)
    return ErrorBudget(
        r=r,
        n=n,
        epsilon=float(eps),
        d=constants.d,
        d1=constants.d1,
        theta=profile.theta,
        var_sum=v0,
        weighted_var_sum=w,
        geometric_sum=g,
    )


def pressure_gap_bound(profile: VariationProfile, r: int) -> float:
    """Bound on |log rho_r - P|: the r-th variation bound of the potential
    (the approximant table is within var_r of the potential sup-norm-wise,
    and pressure is 1-Lipschitz for the sup norm)."""
    return float(profile.var_bound(r))


def schedule_depth(r: int, delta: float) -> int:
    """Evaluation depth n(r) = ceil(r**(1+delta)) of the double-limit
    schedule; delta = 1 is the default n = r**2."""
    if delta <= 0:
        raise ValueError("schedule delta must be positive")
    return max(int(math.ceil(r ** (1.0 + delta))), r + 1)


def limit_bar(
    profile: VariationProfile,
    c_value: float,
    r: int,
    delta: float = 1.0,
    constants: BudgetConstants | None = None,
) -> float:
    """Approximant-to-limit bound 2 (2 eps(r, n(r)) + c r^2 theta^(n(r)/r))
    on |phi_r - phi| along the schedule."""
    n_sched = schedule_depth(r, delta)
    eps = epsilon_budget(profile, r, n_sched, constants).epsilon
    theta = profile.theta
    tail = 0.0 if theta == 0.0 else c_value * r * r * theta ** (n_sched / r)
    return 2.0 * (2.0 * eps + tail)


def r_star(
    profile: VariationProfile,
    delta: float = 1.0,
    scan: int = 64,
    constants: BudgetConstants | None = None,
) -> int:
    """Numerical threshold past which both s**2 theta**s and the scheduled
    budget s -> epsilon(s, n(s)) are nonincreasing (scanned window)."""
    theta = profile.theta
    lo = 1 if theta == 0.0 else int(math.ceil(2.0 / (-math.log(theta)))) + 1
    if constants is None:
        constants = budget_constants(profile)
    values = [
        epsilon_budget(profile, s, schedule_depth(s, delta), constants).epsilon
        for s in range(1, lo + scan + 1)
    ]
    # smallest s whose scanned tail is nonincreasing (values[j] is s = j+1)
    j = len(values) - 1
    while j >= 1 and values[j] <= values[j - 1] * (1.0 + 1e-12):
        j -= 1
    return max(lo, j + 1)


@dataclass(frozen=True)
class DecayCertificate:
    """Envelope var_n(phi) <= leading * shape(n) with

    - kind 'stretched':     shape = exp(-rate * n**(1/2))
    - kind 'subexponential':shape = exp(-rate * n**exponent)
    - kind 'polynomial':    shape = n**(-rate)
    - kind 'exponential':   shape = rate**n   (finite-range potentials)
    """

    kind: str
    leading: float
    rate: float
    exponent: float | None
    inputs: dict

    def envelope(self, n: int) -> float:
        if n < 1:
            return math.inf
        if self.kind == "exponential":
            return self.leading * self.rate**n
        if self.kind == "polynomial":
            return self.leading * float(n) ** (-self.rate)
        return self.leading * math.exp(-self.rate * float(n) ** self.exponent)

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "leading": self.leading,
            "rate": self.rate,
            "exponent": self.exponent,
            "inputs": self.inputs,
        }


def certified_variation_envelope(
    profile: VariationProfile,
    c_value: float,
    n: int,
    r_min: int,
    delta: float = 1.0,
    constants: BudgetConstants | None = None,
) -> float:
    """Certified bound on var_n(phi): minimum over admissible r < n of
    4 (2 eps(r, n(r)) + c r^2 theta^r) + 2 (2 eps(r, n) + c r^2 theta^(n/r))."""
    if constants is None:
        constants = budget_constants(profile)
    theta = profile.theta
    best = math.inf
    for r in range(r_min, n):  # the two-term bound needs n > r
        eps_sched = epsilon_budget(
            profile, r, schedule_depth(r, delta), constants
        ).epsilon
        eps_n = epsilon_budget(profile, r, max(n, 1), constants).epsilon
        t1 = 0.0 if theta == 0.0 else c_value * r * r * theta**r
        t2 = 0.0 if theta == 0.0 else c_value * r * r * theta ** (n / r)
        best = min(best, 4.0 * (2.0 * eps_sched + t1) + 2.0 * (2.0 * eps_n + t2))
    return best


def decay_certificate(
    profile: VariationProfile,
    c_value: float,
    schedule_delta: float = 1.0,
    eps_slack: float | None = None,
    scan_max: int = 96,
) -> DecayCertificate:
    """Decay-class certificate for the induced potential.

    Holder input yields the stretched-exponential envelope with exponent
    1/2 and rate -log(rho_env), rho_env = sqrt(max(holder ratio, theta));
    subexponential(gamma) yields exponent gamma/(1+gamma); polynomial(q)
    needs q > 3 and yields the n**-(q-2-eps) envelope.  Leading constants
    are the suprema of the certified variation envelope against the shape
    over the scanned range of depths, so the certificate dominates the
    rigorous bound wherever it was evaluated.
    """
    decay = profile.decay_class
    constants = budget_constants(profile)
    if isinstance(decay, Summable):
        raise CertificationError("summable class carries no decay certificate")
    if isinstance(decay, Polynomial) and decay.power <= 3.0:
        raise CertificationError(
            "polynomial decay q=%.3g certifies no induced envelope (needs q > 3)"
            % decay.power
        )
    r_min = r_star(profile, schedule_delta, constants=constants)

    def envelope(n: int) -> float:
        return certified_variation_envelope(
            profile, c_value, n, r_min, schedule_delta, constants
        )

    ns = [n for n in range(max(r_min + 1, 2), scan_max + 1)]
    if isinstance(decay, Holder):
        rho_env = math.sqrt(max(decay.ratio, profile.theta))
        rate = -math.log(rho_env)
        kind, exponent = "stretched", 0.5
        shape = [math.exp(-rate * math.sqrt(n)) for n in ns]
    elif isinstance(decay, Subexponential):
        exponent = decay.gamma / (1.0 + decay.gamma)
        rate = decay.rate / 2.0
        kind = "subexponential"
        shape = [math.exp(-rate * n**exponent) for n in ns]
    else:
        if eps_slack is None:
            eps_slack = min(0.5, (decay.power - 3.0) / 2.0)
        if not (0.0 < eps_slack < decay.power - 3.0):
            raise CertificationError(
                "eps_slack must lie in (0, q-3) = (0, %.3g)" % (decay.power - 3.0)
            )
        rate = decay.power - 2.0 - eps_slack
        kind, exponent = "polynomial", None
        shape = [float(n) ** (-rate) for n in ns]
    leading = max(envelope(n) / s for n, s in zip(ns, shape))
    return DecayCertificate(
        kind=kind,
        leading=leading,
        rate=rate,
        exponent=exponent,
        inputs={
            "theta": profile.theta,
            "s_psi": profile.s_psi,
            "D": constants.d,
            "D1": constants.d1,
            "r_star": r_min,
            "delta": schedule_delta,
            "scan_max": scan_max,
        },
    )


def exact_range_certificate(
    theta: float, r: int, c_value: float, d_star_bar: float
) -> DecayCertificate:
    """Exponential envelope for a finite-range potential: var_n(phi_r) is
    at most 2 min(c r^2 theta^(n/r), 2 d_bar tau^(floor(n/r)-1)); the
    certificate keeps the closed-form part leading * (theta^(1/r))**n."""
    if theta == 0.0:
        return DecayCertificate(
            kind="exponential",
            leading=2.0 * d_star_bar,
            rate=0.0,
            exponent=None,
            inputs={"theta": theta, "r": r},
        )
    return DecayCertificate(
        kind="exponential",
        leading=2.0 * c_value * r * r,
        rate=theta ** (1.0 / r),
        exponent=None,
        inputs={"theta": theta, "r": r, "C": c_value},
    )
