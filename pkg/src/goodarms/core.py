"""Bandit instance models: finite arm sets, reservoirs, and reward sampling.

Instances are immutable once built and safe to share across concurrent runs;
all mutable run state (pull counts, rng streams) lives with the caller.
Bernoulli is the only built-in reward model. Any object exposing
``mean``, ``sample(rng)`` and ``sample_sum(count, rng)`` with rewards in
[0, 1] can stand in for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import RngStream

MAX_EPS_LOWER_BOUND = 1.0 / math.sqrt(32.0)


class UsageError(ValueError):
    """A caller violated a documented precondition."""


class NoArmAvailableError(RuntimeError):
    """A reservoir draw was requested with its whole support excluded."""


class Tally:
    """Mutable pull counter, used to attribute samples to one scope."""

    __slots__ = ("count",)

    def __init__(self) -> None:
        self.count = 0

    def add(self, n: int) -> None:
        self.count += int(n)


@dataclass(frozen=True)
class BernoulliArm:
    """Bernoulli reward model with success probability ``mean``."""

    mean: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.mean <= 1.0:
            raise UsageError(f"Bernoulli mean must lie in [0, 1], got {self.mean}")

    def sample(self, rng: RngStream) -> float:
        """One reward draw; consumes exactly one uniform from rng."""
        return 1.0 if rng.random() < self.mean else 0.0

    def sample_sum(self, count: int, rng: RngStream) -> float:
        """Sum of ``count`` i.i.d. rewards; consumes one binomial draw."""
        if count < 0:
            raise UsageError("count must be >= 0")
        if count == 0:
            return 0.0
        return float(rng.binomial(count, self.mean))


class FiniteBandit:
    """Immutable n-armed instance. Pulls never mutate it.

    Stored arm order is the caller's; it need not be sorted by mean.
    Analysis helpers sort internally when ranks are needed.
    """

    __slots__ = ("arms",)

    def __init__(self, arms) -> None:
        arms = tuple(arms)
        if not arms:
            raise UsageError("a bandit needs at least one arm")
        for a in arms:
            if not 0.0 <= a.mean <= 1.0:
                raise UsageError(f"arm mean {a.mean} outside [0, 1]")
        object.__setattr__(self, "arms", arms)

    def __setattr__(self, *_):  # immutability guard
        raise AttributeError("FiniteBandit is immutable")

    @classmethod
    def from_means(cls, means) -> "FiniteBandit":
        return cls(BernoulliArm(float(m)) for m in means)

    @property
    def n(self) -> int:
        return len(self.arms)

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(a.mean for a in self.arms)

    def pull(self, arm: int, rng: RngStream) -> float:
        """One i.i.d. reward from arm ``arm``; one rng draw per pull."""
        if not 0 <= arm < len(self.arms):
            raise UsageError(f"arm index {arm} out of range [0, {len(self.arms)})")
        return self.arms[arm].sample(rng)

    def __repr__(self) -> str:  # pragma: no cover
        return f"FiniteBandit(n={self.n})"


@dataclass(frozen=True)
class ArmState:
    """Online per-arm statistics: pull count and accumulated reward."""

    pulls: int = 0
    reward_sum: float = 0.0

    def __post_init__(self) -> None:
        if self.pulls < 0:
            raise UsageError("pulls must be >= 0")
        if not -1e-12 <= self.reward_sum <= self.pulls + 1e-12:
            raise UsageError("reward_sum must lie in [0, pulls] for [0,1] rewards")

    @property
    def mean(self) -> float:
        """Empirical mean; undefined (error) before the first pull."""
        if self.pulls == 0:
            raise UsageError("empirical mean is undefined at zero pulls")
        return self.reward_sum / self.pulls

    def updated(self, reward: float) -> "ArmState":
        return ArmState(self.pulls + 1, self.reward_sum + reward)


def make_linear_instance(n: int) -> FiniteBandit:
    """n Bernoulli arms with means linearly spaced 0.999 down to 0.001.

    Arm i has mean 0.999 - i * 0.998 / (n - 1); order is descending.
    """
    if n < 2:
        raise UsageError("linear instance needs n >= 2")
    step = 0.998 / (n - 1)
    means = [0.999 - i * step for i in range(n)]
    means[-1] = 0.001  # endpoints are inclusive and exact
    return FiniteBandit.from_means(means)


def make_lower_bound_instance(n: int, m: int, k: int, epsilon: float, included) -> FiniteBandit:
    """Hard-instance generator used by the worst-case analysis.

    Arms 0..m-k (the base block) get mean 1/2; arms in ``included`` get
    1/2 + 2*epsilon; every other arm gets 1/2 - 2*epsilon.

    Args:
        n: arm count, at least 2*m.
        m: top-set size, with 1 <= k <= m.
        k: number of arms to be identified.
        epsilon: gap parameter in (0, 1/sqrt(32)].
        included: subset of {m-k+1, ..., n-1} of size k-1 or m.
    """
    if not 1 <= k <= m:
        raise UsageError("need 1 <= k <= m")
    if n < 2 * m:
        raise UsageError("need n >= 2*m")
    if not 0.0 < epsilon <= MAX_EPS_LOWER_BOUND:
        raise UsageError(f"epsilon must lie in (0, {MAX_EPS_LOWER_BOUND:.6f}]")
    included = frozenset(int(i) for i in included)
    base = frozenset(range(m - k + 1))
    if included & base:
        raise UsageError("included set must not intersect the base block {0..m-k}")
    if not all(m - k + 1 <= i <= n - 1 for i in included):
        raise UsageError("included indices must lie in {m-k+1, ..., n-1}")
    if len(included) not in (k - 1, m):
        raise UsageError(f"|included| must be {k - 1} or {m}, got {len(included)}")
    means = []
    for a in range(n):
        if a in base:
            means.append(0.5)
        elif a in included:
            means.append(0.5 + 2.0 * epsilon)
        else:
            means.append(0.5 - 2.0 * epsilon)
    return FiniteBandit.from_means(means)


@dataclass(frozen=True)
class ReservoirArm:
    """An arm drawn from a reservoir: stable identity plus a reward model.

    Discrete reservoirs use the support index as ``uid``; continuous
    reservoirs attach a fresh 63-bit nonce per draw, so distinct draws are
    distinct arms with probability 1.
    """

    uid: int
    model: BernoulliArm

    @property
    def mean(self) -> float:
        return self.model.mean

    def sample(self, rng: RngStream) -> float:
        return self.model.sample(rng)

    def sample_sum(self, count: int, rng: RngStream) -> float:
        return self.model.sample_sum(count, rng)


class DiscreteReservoir:
    """Finite-support sampling distribution over arms with known weights.

    Ground truth (means and weights) is available to oracles and validity
    checks only; algorithms observe the reservoir through ``draw`` and pulls.
    """

    __slots__ = ("arms", "probs", "_cum")

    def __init__(self, means, probs=None) -> None:
        means = tuple(float(x) for x in means)
        if not means:
            raise UsageError("reservoir support must be nonempty")
        if probs is None:
            probs = tuple(1.0 / len(means) for _ in means)
        else:
            probs = tuple(float(p) for p in probs)
        if len(probs) != len(means):
            raise UsageError("means and probs must have equal length")
        if any(p < 0.0 for p in probs):
            raise UsageError("sampling probabilities must be >= 0")
        if abs(math.fsum(probs) - 1.0) > 1e-12:
            raise UsageError("sampling probabilities must sum to 1 within 1e-12")
        object.__setattr__(self, "arms", tuple(
            ReservoirArm(i, BernoulliArm(mu)) for i, mu in enumerate(means)))
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "_cum", np.cumsum(np.asarray(probs, dtype=float)))

    def __setattr__(self, *_):
        raise AttributeError("DiscreteReservoir is immutable")

    @property
    def is_discrete(self) -> bool:
        return True

    @property
    def means(self) -> tuple[float, ...]:
        return tuple(a.mean for a in self.arms)

    def draw(self, excluded, rng: RngStream) -> ReservoirArm:
        """One arm ~ P_A conditioned on not being excluded.

        Implemented by rejection: excluded draws are discarded and the draw
        repeats. Raises NoArmAvailableError when the exclusion covers all of
        the support's probability mass.
        """
        excluded_uids = {a.uid for a in excluded}
        remaining = math.fsum(
            p for i, p in enumerate(self.probs) if i not in excluded_uids)
        if remaining <= 0.0:
            raise NoArmAvailableError("exclusion set covers the full support")
        while True:
            u = rng.random()
            idx = int(np.searchsorted(self._cum, u, side="right"))
            if idx >= len(self.arms):  # guard against cum[-1] rounding below 1
                idx = len(self.arms) - 1
            if idx not in excluded_uids:
                return self.arms[idx]


class UniformMeanLaw:
    """Uniform mean-generating law on [low, high] within [0, 1]."""

    __slots__ = ("low", "high")

    def __init__(self, low: float = 0.0, high: float = 1.0) -> None:
        if not 0.0 <= low < high <= 1.0:
            raise UsageError("need 0 <= low < high <= 1")
        object.__setattr__(self, "low", float(low))
        object.__setattr__(self, "high", float(high))

    def __setattr__(self, *_):
        raise AttributeError("UniformMeanLaw is immutable")

    def sample_mean(self, rng: RngStream) -> float:
        return self.low + (self.high - self.low) * rng.random()

    def quantile_upper(self, p: float) -> float:
        """inf{x : F(x) > p}; coincides with the plain quantile here."""
        if not 0.0 <= p <= 1.0:
            raise UsageError("quantile level must lie in [0, 1]")
        return self.low + (self.high - self.low) * p


class PiecewiseUniformLaw:
    """Mixture of uniform segments: weight w_j on [lo_j, hi_j)."""

    __slots__ = ("segments",)

    def __init__(self, segments) -> None:
        segs = tuple((float(lo), float(hi), float(w)) for lo, hi, w in segments)
        if not segs:
            raise UsageError("need at least one segment")
        for lo, hi, w in segs:
            if not 0.0 <= lo < hi <= 1.0:
                raise UsageError("segments must satisfy 0 <= lo < hi <= 1")
            if w < 0.0:
                raise UsageError("segment weights must be >= 0")
        if abs(math.fsum(w for _, _, w in segs) - 1.0) > 1e-12:
            raise UsageError("segment weights must sum to 1 within 1e-12")
        if any(segs[j][1] > segs[j + 1][0] for j in range(len(segs) - 1)):
            raise UsageError("segments must be sorted and non-overlapping")
        object.__setattr__(self, "segments", segs)

    def __setattr__(self, *_):
        raise AttributeError("PiecewiseUniformLaw is immutable")

    def sample_mean(self, rng: RngStream) -> float:
        u = rng.random()
        acc = 0.0
        for lo, hi, w in self.segments:
            if u < acc + w or (lo, hi, w) == self.segments[-1]:
                frac = (u - acc) / w if w > 0.0 else 0.0
                frac = min(max(frac, 0.0), 1.0)
                return lo + (hi - lo) * frac
            acc += w
        return self.segments[-1][1]  # pragma: no cover

    def quantile_upper(self, p: float) -> float:
        if not 0.0 <= p <= 1.0:
            raise UsageError("quantile level must lie in [0, 1]")
        acc = 0.0
        for lo, hi, w in self.segments:
            if p < acc + w - 1e-15 or w == 0.0:
                if w > 0.0:
                    return lo + (hi - lo) * (p - acc) / w
            acc += w
        return self.segments[-1][1]


class ContinuousReservoir:
    """Atomless reservoir: each draw realises a fresh arm from a mean law.

    Any finite set of arms has draw probability 0, so exclusion sets never
    constrain the distribution; draws always succeed on the first attempt.
    """

    __slots__ = ("law",)

    def __init__(self, law) -> None:
        object.__setattr__(self, "law", law)

    def __setattr__(self, *_):
        raise AttributeError("ContinuousReservoir is immutable")

    @property
    def is_discrete(self) -> bool:
        return False

    def draw(self, excluded, rng: RngStream) -> ReservoirArm:
        # Fresh nonce per draw: the handle is new with probability 1, so the
        # exclusion set is structurally a no-op, matching the atomless law.
        mean = self.law.sample_mean(rng)
        nonce = rng.integers(0, 2 ** 63)
        return ReservoirArm(nonce, BernoulliArm(mean))


def draw_arm(reservoir, excluded, rng: RngStream) -> ReservoirArm:
    """Draw one arm ~ P_A conditioned on not being in ``excluded``."""
    return reservoir.draw(excluded, rng)


def make_two_level_reservoir(n: int, top_fraction: float,
                             mu_top: float, mu_bottom: float) -> DiscreteReservoir:
    """Uniform-weight discrete reservoir with a two-level mean profile."""
    if n < 1:
        raise UsageError("need n >= 1")
    n_top = round(n * top_fraction)
    if abs(n_top - n * top_fraction) > 1e-9:
        raise UsageError("top_fraction * n must be an integer")
    means = [mu_top] * n_top + [mu_bottom] * (n - n_top)
    return DiscreteReservoir(means)
