"""Hoeffding and Bernoulli-KL confidence bounds on one shared threshold.

Both bound families spend the same exploration budget per round,
``tau(t) = ln(k1 * n * t^4 / delta)`` with ``k1 = 5/4`` and natural logs.
Hoeffding bounds are the empirical mean plus/minus ``sqrt(tau / (2 u))``,
left unclipped; KL bounds invert the Bernoulli divergence by bisection and
always lie in [0, 1]. Everything here is a pure function of its inputs.

The compiled engine (:mod:`goodarms._engine`) mirrors the arithmetic of
this module line for line; a test pins the two implementations together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ArmState, UsageError

K1 = 1.25
# The contract tolerance for the KL inversion is 1e-9; the loop bisects all
# the way to adjacent floats (at most 80 halvings from a unit bracket) so
# the residual u*kl(p, q*) stays within 1e-6 of the threshold even when the
# root sits within ~1e-7 of the boundary, where the divergence is steep.
BISECT_MAX_ITERS = 80


@dataclass(frozen=True)
class ExplorationThreshold:
    """Per-round exploration budget ln(k1 * n * t^4 / delta).

    Strictly increasing in t and positive for every t >= 1 whenever
    k1 * n * t^4 > delta.
    """

    n_arms: int
    delta: float

    def __post_init__(self) -> None:
        if self.n_arms < 1:
            raise UsageError("threshold needs n_arms >= 1")
        if self.delta <= 0.0:
            raise UsageError("threshold needs delta > 0")

    def value(self, t: int) -> float:
        if t < 1:
            raise UsageError("round index t must be >= 1")
        # ln(k1*n/delta) + 4 ln t: same float recipe as the compiled engine.
        return math.log(K1 * self.n_arms / self.delta) + 4.0 * math.log(t)


def beta(pulls: int, t: int, threshold: ExplorationThreshold) -> float:
    """Hoeffding radius sqrt(tau(t) / (2 * pulls)).

    Zero pulls yield an infinite radius (documented sentinel) so unvisited
    arms sort first for exploration.
    """
    if pulls < 0:
        raise UsageError("pulls must be >= 0")
    if pulls == 0:
        return math.inf
    tau = threshold.value(t)
    return math.sqrt(tau / (2.0 * pulls))


def kl_bernoulli(p: float, q: float) -> float:
    """KL(Bernoulli(p) || Bernoulli(q)) in nats.

    Conventions: 0 * ln(0/x) = 0; the divergence is +inf when q is 0 or 1
    while p differs from it.
    """
    if not 0.0 <= p <= 1.0 or not 0.0 <= q <= 1.0:
        raise UsageError("kl_bernoulli needs p, q in [0, 1]")
    return _kl(p, q)


def _kl(p: float, q: float) -> float:
    # Unvalidated core shared by the bisections; mirrored in the engine.
    if q <= 0.0:
        return 0.0 if p <= 0.0 else math.inf
    if q >= 1.0:
        return 0.0 if p >= 1.0 else math.inf
    t1 = 0.0 if p <= 0.0 else p * math.log(p / q)
    t2 = 0.0 if p >= 1.0 else (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return t1 + t2


def _kl_ucb_core(p_hat: float, pulls: int, tau: float) -> float:
    if tau <= 0.0:
        return p_hat
    if p_hat >= 1.0:
        return 1.0
    lo, hi = p_hat, 1.0
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float grid exhausted
            break
        if pulls * _kl(p_hat, mid) <= tau:
            lo = mid
        else:
            hi = mid
    return lo


def _kl_lcb_core(p_hat: float, pulls: int, tau: float) -> float:
    if tau <= 0.0:
        return p_hat
    if p_hat <= 0.0:
        return 0.0
    lo, hi = 0.0, p_hat
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pulls * _kl(p_hat, mid) <= tau:
            hi = mid
        else:
            lo = mid
    return hi


def kl_ucb(p_hat: float, pulls: int, t: int, threshold: ExplorationThreshold) -> float:
    """max{q in [p_hat, 1] : pulls * kl(p_hat, q) <= tau(t)}, by bisection."""
    if pulls < 1:
        raise UsageError("kl_ucb needs pulls >= 1")
    if not 0.0 <= p_hat <= 1.0:
        raise UsageError("empirical mean must lie in [0, 1]")
    return _kl_ucb_core(p_hat, pulls, threshold.value(t))


def kl_lcb(p_hat: float, pulls: int, t: int, threshold: ExplorationThreshold) -> float:
    """min{q in [0, p_hat] : pulls * kl(p_hat, q) <= tau(t)}, by bisection."""
    if pulls < 1:
        raise UsageError("kl_lcb needs pulls >= 1")
    if not 0.0 <= p_hat <= 1.0:
        raise UsageError("empirical mean must lie in [0, 1]")
    return _kl_lcb_core(p_hat, pulls, threshold.value(t))


HOEFFDING = "hoeffding"
KL = "kl"
SCHEMES = (HOEFFDING, KL)


@dataclass(frozen=True)
class BoundScheme:
    """A bound family (Hoeffding or Bernoulli-KL) tied to one threshold."""

    variant: str
    threshold: ExplorationThreshold

    def __post_init__(self) -> None:
        if self.variant not in SCHEMES:
            raise UsageError(f"unknown bound scheme {self.variant!r}; use one of {SCHEMES}")

    def ucb(self, state: ArmState, t: int) -> float:
        """Upper bound; +inf sentinel at zero pulls."""
        if state.pulls == 0:
            return math.inf
        if self.variant == HOEFFDING:
            return state.mean + beta(state.pulls, t, self.threshold)
        return _kl_ucb_core(state.mean, state.pulls, self.threshold.value(t))

    def lcb(self, state: ArmState, t: int) -> float:
        """Lower bound; -inf sentinel at zero pulls."""
        if state.pulls == 0:
            return -math.inf
        if self.variant == HOEFFDING:
            return state.mean - beta(state.pulls, t, self.threshold)
        return _kl_lcb_core(state.mean, state.pulls, self.threshold.value(t))
