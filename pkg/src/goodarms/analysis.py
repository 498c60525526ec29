"""Ground-truth oracles: gaps, hardness, pull budgets, optimal-set checks.

Everything here reads true means, so it belongs to analysis and harness
code only; the algorithms never touch it. Ranks use descending true means
with ties broken by original index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

from .bounds import ExplorationThreshold
from .core import FiniteBandit, UsageError

BUDGET_CONSTANT = 2732  # round-bound constant from the sample-complexity analysis


def _ranks_desc(means) -> list[int]:
    return sorted(range(len(means)), key=lambda a: (-means[a], a))


def gaps(instance: FiniteBandit, k: int, m: int) -> tuple[float, ...]:
    """Per-arm decision gaps, in the instance's stored arm order.

    With ranks 1..n by true mean: top-k arms get mu_a - mu_(m+1), the middle
    band gets mu_k - mu_(m+1), and the bottom gets mu_m - mu_a.
    """
    n = instance.n
    if not 1 <= k <= m < n:
        raise UsageError(f"need 1 <= k <= m < n, got k={k}, m={m}, n={n}")
    means = instance.means
    order = _ranks_desc(means)
    mu_k = means[order[k - 1]]
    mu_m = means[order[m - 1]]
    mu_m1 = means[order[m]]
    out = [0.0] * n
    for rank, a in enumerate(order):
        if rank < k:
            out[a] = means[a] - mu_m1
        elif rank < m:
            out[a] = mu_k - mu_m1
        else:
            out[a] = mu_m - means[a]
    return tuple(out)


def hardness(instance: FiniteBandit, k: int, m: int, epsilon: float) -> float:
    """H_eps = sum over arms of 1 / max(gap, epsilon/2)^2."""
    if epsilon <= 0.0:
        raise UsageError("epsilon must be > 0")
    floor = epsilon / 2.0
    return math.fsum(1.0 / max(d, floor) ** 2 for d in gaps(instance, k, m))


def u_star(gap: float, epsilon: float, n: int, t: int, delta: float) -> int:
    """Per-arm pull budget ceil(32 / max(gap, eps/2)^2 * tau(t))."""
    if epsilon <= 0.0:
        raise UsageError("epsilon must be > 0")
    tau = ExplorationThreshold(n, delta).value(t)
    return math.ceil(32.0 / max(gap, epsilon / 2.0) ** 2 * tau)


def predicted_budget(h_eps: float, delta: float) -> int:
    """Theoretical round bound ceil(2732 * H_eps * ln(H_eps / delta)).

    Diagnostic only; never used to stop an algorithm (the constant is a
    proof artifact). H_eps <= delta makes the log nonpositive: reports 0
    with a warning.
    """
    if h_eps <= 0.0:
        raise UsageError("hardness must be > 0")
    if delta <= 0.0:
        raise UsageError("delta must be > 0")
    if h_eps <= delta:
        warnings.warn("H_eps <= delta: predicted budget degenerate, reporting 0",
                      RuntimeWarning, stacklevel=2)
        return 0
    return math.ceil(BUDGET_CONSTANT * h_eps * math.log(h_eps / delta))


@dataclass(frozen=True)
class HardnessProfile:
    """Gap vector, hardness and budget functions for one (instance, k, m)."""

    deltas: tuple[float, ...]
    h_eps: float
    u_star_fn: Callable[[int, int], int]
    t_star: int


def hardness_profile(instance: FiniteBandit, k: int, m: int, epsilon: float,
                     delta: float) -> HardnessProfile:
    dvec = gaps(instance, k, m)
    h = hardness(instance, k, m, epsilon)
    n = instance.n

    def budget(arm: int, t: int) -> int:
        return u_star(dvec[arm], epsilon, n, t, delta)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        t_star = predicted_budget(h, delta)
    return HardnessProfile(dvec, h, budget, t_star)


def top_m_eps(instance: FiniteBandit, m: int, epsilon: float) -> set[int]:
    """Arms with true mean >= (m-th largest mean) - epsilon."""
    n = instance.n
    if not 1 <= m <= n:
        raise UsageError(f"need 1 <= m <= n, got m={m}, n={n}")
    means = instance.means
    mth = sorted(means, reverse=True)[m - 1]
    return {a for a in range(n) if means[a] >= mth - epsilon}


# Cumulative probabilities within this tolerance of the target level count
# as equal, so float accumulation cannot flip an atom across the quantile.
_QUANTILE_ATOL = 1e-9


def mean_quantile(reservoir, rho: float) -> float:
    """Upper (1 - rho)-quantile of the mean distribution under the draw law.

    Defined as inf{x : P(mean <= x) > 1 - rho}. On atomless laws this is the
    plain quantile; at atoms it resolves conservatively, so an arm sitting
    exactly at the quantile with P(mean <= x) = 1 - rho does not qualify.
    Worked two-point example: with P(0.1) = 0.8 and P(0.9) = 0.2 and
    rho = 0.2, the quantile is 0.9, so only the 0.9 arms are top-rho.
    """
    if not 0.0 < rho <= 1.0:
        raise UsageError("rho must lie in (0, 1]")
    target = 1.0 - rho
    if reservoir.is_discrete:
        pairs = sorted(zip(reservoir.means, reservoir.probs))
        acc = 0.0
        for mean, p in pairs:
            acc += p
            if acc > target + _QUANTILE_ATOL:
                return mean
        return pairs[-1][0]
    return reservoir.law.quantile_upper(target)


def top_rho_eps(reservoir, rho: float, epsilon: float) -> Callable:
    """Membership predicate for [epsilon, rho]-optimality of an arm handle."""
    if epsilon < 0.0:
        raise UsageError("epsilon must be >= 0")
    threshold = mean_quantile(reservoir, rho) - epsilon

    def is_optimal(arm) -> bool:
        return arm.mean >= threshold

    return is_optimal


def verify_run(record, instance: FiniteBandit, m: int, epsilon: float) -> bool:
    """True iff the returned set has size k, no duplicates, and sits in
    TOP_m(epsilon)."""
    returned = tuple(record.returned)
    if len(returned) != record.k:
        return False
    if len(set(returned)) != len(returned):
        return False
    good = top_m_eps(instance, m, epsilon)
    return all(a in good for a in returned)
