"""Fully sequential PAC algorithms for finite instances.

``lucb_km`` pulls three contentious arms per round (two in the subset-
selection case k = m) and stops on a confidence-bound certificate; ``f2``
is the single-arm baseline with the highest-LCB anchor; Median Elimination
is the classic phased subroutine used by the reservoir algorithms.

Bernoulli instances run on the compiled kernels in :mod:`goodarms._engine`;
any other [0, 1] reward model falls back to the pure-Python path below. The
two paths consume the run's RngStream identically and produce bit-identical
records, which the test suite asserts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import _engine
from .bounds import KL, SCHEMES, BoundScheme, ExplorationThreshold
from .core import ArmState, BernoulliArm, FiniteBandit, ReservoirArm, Tally, UsageError
from .rng import RngStream

H_STAR_MODES = ("argmin", "argmax")


@dataclass(frozen=True)
class Partition:
    """One round's split into top (A1), middle (A2) and bottom (A3) arms.

    ``h_star`` is A1's least-certain member (see ``h_star_mode``), ``m_star``
    the least-pulled A2 arm (None when k = m), ``l_star`` the highest-UCB A3
    arm. The bound values behind the stopping rule ride along.
    """

    a1: tuple[int, ...]
    a2: tuple[int, ...]
    a3: tuple[int, ...]
    h_star: int
    m_star: int | None
    l_star: int
    lcb_h_star: float
    ucb_l_star: float


@dataclass(frozen=True)
class RunRecord:
    """Outcome of one algorithm execution on a finite instance."""

    algorithm: str
    n: int
    k: int
    m: int
    epsilon: float
    delta: float
    scheme: str
    h_star_mode: str | None
    seed: int
    returned: tuple[int, ...]
    total_samples: int
    rounds: int
    pulls_by_arm: tuple[int, ...]
    pulls_by_group: tuple[int, int, int]
    certificate_gap: float
    mistake: bool | None = None

    def with_mistake(self, mistake: bool) -> "RunRecord":
        return replace(self, mistake=mistake)


def _validate_run_params(n: int, k: int, m: int, epsilon: float, delta: float,
                         scheme: str) -> None:
    if not 1 <= k <= m < n:
        raise UsageError(f"need 1 <= k <= m < n, got k={k}, m={m}, n={n}")
    if not 0.0 < epsilon <= 1.0:
        raise UsageError("epsilon must lie in (0, 1]")
    if not 0.0 < delta <= 1.0:
        raise UsageError("delta must lie in (0, 1]")
    if scheme not in SCHEMES:
        raise UsageError(f"unknown scheme {scheme!r}; use one of {SCHEMES}")


def _true_groups(means, k: int, m: int):
    # Ground-truth groups by descending mean, ties by original index.
    order = sorted(range(len(means)), key=lambda a: (-means[a], a))
    return order[:k], order[k:m], order[m:]


def _group_pulls(means, pulls, k: int, m: int) -> tuple[int, int, int]:
    b1, b2, b3 = _true_groups(means, k, m)
    return (int(sum(pulls[a] for a in b1)),
            int(sum(pulls[a] for a in b2)),
            int(sum(pulls[a] for a in b3)))


def _bernoulli_means(instance: FiniteBandit):
    """Means array when every arm is Bernoulli-backed, else None."""
    means = []
    for arm in instance.arms:
        model = arm.model if isinstance(arm, ReservoirArm) else arm
        if not isinstance(model, BernoulliArm):
            return None
        means.append(model.mean)
    return np.asarray(means, dtype=np.float64)


def partition(states, k: int, m: int, t: int, scheme: BoundScheme,
              rng: RngStream, h_star_mode: str = "argmin") -> Partition:
    """Partition arms by empirical mean and pick the contentious arms.

    Sorting is by empirical mean descending; all ties (in means, bounds and
    pull counts) break uniformly at random via one priority draw per arm.
    Bounds are evaluated at round index ``t``.

    Args:
        states: per-arm ArmState, every arm pulled at least once.
        k, m: partition sizes, 1 <= k <= m < len(states).
        t: round index for the confidence bounds.
        scheme: bound scheme in force.
        rng: the run's stream (consumes exactly len(states) draws).
        h_star_mode: "argmin" certifies A1's weakest member; "argmax" is
            the literal reading of the algorithm box.
    """
    n = len(states)
    if not 1 <= k <= m < n:
        raise UsageError(f"need 1 <= k <= m < n, got k={k}, m={m}, n={n}")
    if h_star_mode not in H_STAR_MODES:
        raise UsageError(f"h_star_mode must be one of {H_STAR_MODES}")
    if any(s.pulls < 1 for s in states):
        raise UsageError("every arm must be pulled at least once before partitioning")

    pri = rng.generator.random(n)
    means_hat = np.array([s.mean for s in states])
    perm = np.argsort(pri, kind="mergesort")
    order = perm[np.argsort(-means_hat[perm], kind="mergesort")]
    a1, a2, a3 = order[:k], order[k:m], order[m:]

    h_star = int(a1[0])
    h_val = scheme.lcb(states[h_star], t)
    for a in a1[1:]:
        a = int(a)
        v = scheme.lcb(states[a], t)
        if h_star_mode == "argmin":
            better = v < h_val or (v == h_val and pri[a] < pri[h_star])
        else:
            better = v > h_val or (v == h_val and pri[a] < pri[h_star])
        if better:
            h_val, h_star = v, a

    m_star = None
    if len(a2):
        m_star = int(a2[0])
        for a in a2[1:]:
            a = int(a)
            if states[a].pulls < states[m_star].pulls or (
                    states[a].pulls == states[m_star].pulls and pri[a] < pri[m_star]):
                m_star = a

    l_star = int(a3[0])
    l_val = scheme.ucb(states[l_star], t)
    for a in a3[1:]:
        a = int(a)
        v = scheme.ucb(states[a], t)
        if v > l_val or (v == l_val and pri[a] < pri[l_star]):
            l_val, l_star = v, a

    return Partition(tuple(int(x) for x in a1), tuple(int(x) for x in a2),
                     tuple(int(x) for x in a3), h_star, m_star, l_star,
                     h_val, l_val)


def _lucb_python(instance: FiniteBandit, k, m, epsilon, scheme_obj, rng, h_star_mode):
    n = instance.n
    pulls = [0] * n
    sums = [0.0] * n
    for a in range(n):
        pulls[a] = 1
        sums[a] = instance.pull(a, rng)
    t = n
    rounds = 0
    while True:
        states = [ArmState(pulls[a], sums[a]) for a in range(n)]
        part = partition(states, k, m, t + 1, scheme_obj, rng, h_star_mode)
        gap = part.ucb_l_star - part.lcb_h_star
        if gap <= epsilon:
            return list(part.a1), pulls, rounds, gap
        targets = [part.h_star] if part.m_star is None else [part.h_star, part.m_star]
        targets.append(part.l_star)
        for a in targets:
            pulls[a] += 1
            sums[a] += instance.pull(a, rng)
        t += 1
        rounds += 1


def lucb_km(instance: FiniteBandit, k: int, m: int, epsilon: float, delta: float,
            scheme: str, rng: RngStream, *, h_star_mode: str = "argmin",
            tally: Tally | None = None, _impl: str = "auto") -> RunRecord:
    """Identify k distinct arms from the top m with confidence 1 - delta.

    Pulls every arm once, then repeats: re-partition, stop and return A1 as
    soon as ucb(l*, t+1) - lcb(h*, t+1) <= epsilon, otherwise pull h*, m*
    (when k < m) and l*. Bounds for both the stars and the stopping rule are
    evaluated at t+1, after the partition and before the pulls.

    Args:
        instance: the bandit to sample.
        k: arms to return, 1 <= k <= m.
        m: top-set size, m < n.
        epsilon: tolerance in (0, 1].
        delta: mistake probability in (0, 1].
        scheme: "hoeffding" or "kl".
        rng: the run's stream.
        h_star_mode: which A1 member anchors the stopping rule.
        tally: optional pull counter to attribute samples to a caller scope.
        _impl: "auto" (engine for Bernoulli instances), "compiled", "python".
    """
    _validate_run_params(instance.n, k, m, epsilon, delta, scheme)
    if h_star_mode not in H_STAR_MODES:
        raise UsageError(f"h_star_mode must be one of {H_STAR_MODES}")
    threshold = ExplorationThreshold(instance.n, delta)
    means = _bernoulli_means(instance)
    use_engine = _impl == "compiled" or (_impl == "auto" and means is not None)
    if use_engine and means is None:
        raise UsageError("compiled path needs Bernoulli reward models")

    if use_engine:
        tau_const = math.log(1.25 * instance.n / delta)
        variant = _engine.VARIANT_KL if scheme == KL else _engine.VARIANT_HOEFFDING
        h_mode = (_engine.H_STAR_ARGMIN if h_star_mode == "argmin"
                  else _engine.H_STAR_ARGMAX)
        a1, pulls, rounds, gap = _engine.lucb_run(
            means, k, m, epsilon, tau_const, variant, h_mode, rng.generator)
        returned = [int(a) for a in a1]
        pulls = [int(p) for p in pulls]
        rounds = int(rounds)
        gap = float(gap)
    else:
        scheme_obj = BoundScheme(scheme, threshold)
        returned, pulls, rounds, gap = _lucb_python(
            instance, k, m, epsilon, scheme_obj, rng, h_star_mode)

    total = int(sum(pulls))
    if tally is not None:
        tally.add(total)
    return RunRecord(
        algorithm="lucb_km", n=instance.n, k=k, m=m, epsilon=epsilon,
        delta=delta, scheme=scheme, h_star_mode=h_star_mode, seed=rng.seed,
        returned=tuple(sorted(returned)), total_samples=total, rounds=rounds,
        pulls_by_arm=tuple(pulls),
        pulls_by_group=_group_pulls(instance.means, pulls, k, m),
        certificate_gap=gap)


def _f2_python(instance: FiniteBandit, m, epsilon, scheme_obj, rng):
    n = instance.n
    pulls = [0] * n
    sums = [0.0] * n
    for a in range(n):
        pulls[a] = 1
        sums[a] = instance.pull(a, rng)
    t = n
    rounds = 0
    while True:
        e = t + 1
        pri = rng.generator.random(n)
        states = [ArmState(pulls[a], sums[a]) for a in range(n)]

        a1 = 0
        a1_val = scheme_obj.lcb(states[0], e)
        for a in range(1, n):
            v = scheme_obj.lcb(states[a], e)
            if v > a1_val or (v == a1_val and pri[a] < pri[a1]):
                a1_val, a1 = v, a

        rest_idx = [a for a in range(n) if a != a1]
        rest_pri = np.array([pri[a] for a in rest_idx])
        perm = np.argsort(rest_pri, kind="mergesort")
        key = np.array([-scheme_obj.ucb(states[rest_idx[int(j)]], e) for j in perm])
        order = perm[np.argsort(key, kind="mergesort")]
        l_star = rest_idx[int(order[m - 1])]
        l_val = scheme_obj.ucb(states[l_star], e)

        gap = l_val - a1_val
        if gap <= epsilon:
            return a1, pulls, rounds, gap

        targets = [a1]
        if m > 1:
            m_star = rest_idx[int(order[0])]
            for j in order[1:m - 1]:
                a = rest_idx[int(j)]
                if pulls[a] < pulls[m_star] or (
                        pulls[a] == pulls[m_star] and pri[a] < pri[m_star]):
                    m_star = a
            targets.append(m_star)
        targets.append(l_star)
        for a in targets:
            pulls[a] += 1
            sums[a] += instance.pull(a, rng)
        t += 1
        rounds += 1


def f2(instance: FiniteBandit, m: int, epsilon: float, delta: float,
       scheme: str, rng: RngStream, *, tally: Tally | None = None,
       _impl: str = "auto") -> RunRecord:
    """Single-arm baseline: anchor on the highest-LCB arm.

    Each round puts the highest-LCB arm alone on top, the m-1 highest-UCB
    arms of the rest in the middle, and pulls the anchor, the least-sampled
    middle arm and the highest-UCB bottom arm. Stops, returning the anchor,
    when lcb(anchor, t+1) >= max-over-bottom ucb(t+1) - epsilon; this
    stopping rule is the single-arm analogue of the LUCB-k-m rule and is
    recorded as a reconstruction in run metadata.
    """
    _validate_run_params(instance.n, 1, m, epsilon, delta, scheme)
    threshold = ExplorationThreshold(instance.n, delta)
    means = _bernoulli_means(instance)
    use_engine = _impl == "compiled" or (_impl == "auto" and means is not None)
    if use_engine and means is None:
        raise UsageError("compiled path needs Bernoulli reward models")

    if use_engine:
        tau_const = math.log(1.25 * instance.n / delta)
        variant = _engine.VARIANT_KL if scheme == KL else _engine.VARIANT_HOEFFDING
        a1, pulls, rounds, gap = _engine.f2_run(
            means, m, epsilon, tau_const, variant, rng.generator)
        a1 = int(a1)
        pulls = [int(p) for p in pulls]
        rounds = int(rounds)
        gap = float(gap)
    else:
        scheme_obj = BoundScheme(scheme, threshold)
        a1, pulls, rounds, gap = _f2_python(instance, m, epsilon, scheme_obj, rng)

    total = int(sum(pulls))
    if tally is not None:
        tally.add(total)
    return RunRecord(
        algorithm="f2", n=instance.n, k=1, m=m, epsilon=epsilon, delta=delta,
        scheme=scheme, h_star_mode=None, seed=rng.seed, returned=(a1,),
        total_samples=total, rounds=rounds, pulls_by_arm=tuple(pulls),
        pulls_by_group=_group_pulls(instance.means, pulls, 1, m),
        certificate_gap=gap)


def median_elimination(arms, epsilon: float, delta: float, rng: RngStream,
                       tally: Tally | None = None):
    """Return an (epsilon, 1)-optimal entry of ``arms`` w.p. >= 1 - delta.

    Standard schedule: eps_1 = epsilon/4, delta_1 = delta/2; each phase
    samples every survivor ceil((4 / (eps_l / 2)^2) * ln(3 / delta_l)) times,
    drops the worse half on empirical means (ties uniform), then updates
    eps_{l+1} = 3 eps_l / 4, delta_{l+1} = delta_l / 2. Duplicate entries
    are legal and treated as separate arms sharing a reward distribution.
    A single arm is returned immediately with zero pulls.
    """
    arms = list(arms)
    if not arms:
        raise UsageError("median elimination needs at least one arm")
    if not 0.0 < epsilon <= 1.0 or not 0.0 < delta <= 1.0:
        raise UsageError("epsilon and delta must lie in (0, 1]")
    if len(arms) == 1:
        return arms[0]

    survivors = list(range(len(arms)))
    eps_l = epsilon / 4.0
    delta_l = delta / 2.0
    while len(survivors) > 1:
        reps = math.ceil((4.0 / (eps_l / 2.0) ** 2) * math.log(3.0 / delta_l))
        means = [arms[i].sample_sum(reps, rng) / reps for i in survivors]
        if tally is not None:
            tally.add(reps * len(survivors))
        pri = rng.generator.random(len(survivors))
        keep = math.ceil(len(survivors) / 2)
        ranked = sorted(range(len(survivors)), key=lambda j: (-means[j], pri[j]))
        survivors = [survivors[j] for j in ranked[:keep]]
        eps_l *= 0.75
        delta_l *= 0.5
    return arms[survivors[0]]
