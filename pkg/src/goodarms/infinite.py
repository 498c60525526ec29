"""Quantile-based identification over reservoirs.

``p2`` draws a batch of arms and runs Median Elimination on it; ``p3``
boosts p2 with a constant per-copy confidence and a final elimination;
``kqp1`` finds k distinct arms phase by phase with rejection-sampled
exclusions and the conservative quantile schedule rho * (k-y+1) / k;
``opt_qp`` swaps p3's elimination stage for a pluggable finite solver.
Finite instances embed as uniform discrete reservoirs via the wrappers at
the bottom.

Drawing an arm from a reservoir costs no samples; only reward pulls count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .analysis import top_rho_eps
from .core import (DiscreteReservoir, FiniteBandit, ReservoirArm, Tally,
                   UsageError)
from .finite import f2, lucb_km, median_elimination
from .rng import RngStream

DEFAULT_DELTA_PRIME = 0.25


@dataclass(frozen=True)
class QuantileProblem:
    """A (k, rho) identification problem over a reservoir."""

    reservoir: object
    rho: float
    k: int
    epsilon: float
    delta: float

    def __post_init__(self) -> None:
        if not 0.0 < self.rho <= 1.0:
            raise UsageError("rho must lie in (0, 1]")
        if self.k < 1:
            raise UsageError("k must be >= 1")
        if not 0.0 < self.epsilon <= 1.0:
            raise UsageError("epsilon must lie in (0, 1]")
        if not 0.0 < self.delta <= 1.0:
            raise UsageError("delta must lie in (0, 1]")


@dataclass(frozen=True)
class PhaseState:
    """Diagnostics of one kqp1 phase."""

    phase: int
    rho_target: float
    excluded: tuple[ReservoirArm, ...]
    selected: ReservoirArm
    samples: int


def p2_draw_count(rho: float, delta: float) -> int:
    """Arms drawn by p2: ceil((1 / rho) * ln(2 / delta))."""
    return math.ceil((1.0 / rho) * math.log(2.0 / delta))


def p3_copy_count(delta: float, delta_prime: float = DEFAULT_DELTA_PRIME) -> int:
    """p2 copies run by p3: ceil((1 / delta') * ln(2 / delta))."""
    return math.ceil((1.0 / delta_prime) * math.log(2.0 / delta))


def opt_qp_copy_count(delta: float, delta_prime: float = DEFAULT_DELTA_PRIME) -> int:
    """p2 copies run by opt_qp: ceil(ln(2 / delta) / (2 (1/2 - delta')^2))."""
    return math.ceil(math.log(2.0 / delta) / (2.0 * (0.5 - delta_prime) ** 2))


def _check_eps_delta(epsilon: float, delta: float) -> None:
    if not 0.0 < epsilon <= 1.0:
        raise UsageError("epsilon must lie in (0, 1]")
    if not 0.0 < delta <= 1.0:
        raise UsageError("delta must lie in (0, 1]")


def p2(reservoir, rho: float, epsilon: float, delta: float, rng: RngStream,
       excluded=(), tally: Tally | None = None) -> ReservoirArm:
    """Draw-then-eliminate: one [epsilon, rho]-optimal arm w.p. >= 1 - delta.

    Draws ceil((1/rho) ln(2/delta)) arms i.i.d. from the reservoir (under
    the active exclusion set), then returns the Median Elimination winner at
    (epsilon, delta/2). The delta split between the draw phase and the
    elimination is this implementation's choice.
    """
    if not 0.0 < rho <= 1.0:
        raise UsageError("rho must lie in (0, 1]")
    _check_eps_delta(epsilon, delta)
    count = p2_draw_count(rho, delta)
    drawn = [reservoir.draw(excluded, rng) for _ in range(count)]
    return median_elimination(drawn, epsilon, delta / 2.0, rng, tally)


def p3(reservoir, rho: float, epsilon: float, delta: float, rng: RngStream,
       excluded=(), delta_prime: float = DEFAULT_DELTA_PRIME,
       tally: Tally | None = None, s_log: list | None = None) -> ReservoirArm:
    """Boosted p2: run ceil((1/delta') ln(2/delta)) copies of
    p2(rho, epsilon/2, delta') and eliminate down to one arm at
    (epsilon/2, delta/2).

    delta' defaults to 1/4; any sufficiently small constant works and only
    moves the multiplicative constant of the sample complexity. Duplicate
    arms across copies (possible in discrete mode) are kept as separate
    entries.
    """
    if not 0.0 < rho <= 1.0:
        raise UsageError("rho must lie in (0, 1]")
    _check_eps_delta(epsilon, delta)
    if not 0.0 < delta_prime < 0.5:
        raise UsageError("delta_prime must lie in (0, 0.5)")
    copies = p3_copy_count(delta, delta_prime)
    chosen = [p2(reservoir, rho, epsilon / 2.0, delta_prime, rng, excluded, tally)
              for _ in range(copies)]
    if s_log is not None:
        s_log.append(tuple(chosen))
    return median_elimination(chosen, epsilon / 2.0, delta / 2.0, rng, tally)


def validate_equiprobable(reservoir, k: int, rho: float):
    """Check max draw probability over the top-rho set against rho / k.

    Returns (True, None) when every top-rho arm has weight <= rho / k,
    else (False, witness_arm). Ground truth only; discrete reservoirs only.
    """
    if not reservoir.is_discrete:
        raise UsageError("equiprobability check needs a discrete reservoir "
                         "(continuous reservoirs satisfy it vacuously)")
    if k < 1:
        raise UsageError("k must be >= 1")
    member = top_rho_eps(reservoir, rho, 0.0)
    cap = rho / k
    worst = None
    for arm, p in zip(reservoir.arms, reservoir.probs):
        if member(arm) and p > cap and (worst is None or p > reservoir.probs[worst.uid]):
            worst = arm
    return (worst is None), worst


def _check_problem(problem: QuantileProblem) -> None:
    reservoir = problem.reservoir
    if not reservoir.is_discrete:
        return  # unknown weights: validity is trusted
    member = top_rho_eps(reservoir, problem.rho, 0.0)
    n_top = sum(1 for arm in reservoir.arms if member(arm))
    if n_top < problem.k:
        raise UsageError(
            f"invalid instance: only {n_top} top-rho arms, need k={problem.k}")
    ok, witness = validate_equiprobable(reservoir, problem.k, problem.rho)
    if not ok:
        raise UsageError(
            f"not at-most-{problem.k}-equiprobable: arm {witness.uid} has draw "
            f"probability {reservoir.probs[witness.uid]} > rho/k = "
            f"{problem.rho / problem.k}")


def kqp1(problem: QuantileProblem, rng: RngStream,
         delta_prime: float = DEFAULT_DELTA_PRIME, tally: Tally | None = None,
         phase_log: list | None = None) -> tuple[ReservoirArm, ...]:
    """k distinct [epsilon, rho]-optimal arms from an at-most-k-equiprobable
    instance, w.p. >= 1 - delta.

    Phase y targets quantile rho * (k - y + 1) / k at confidence delta / k,
    excluding everything returned so far; exclusions are realised by
    rejection sampling inside the reservoir. The true draw probability of a
    returned arm is never used, only the conservative rho / k decrement.
    """
    _check_problem(problem)
    reservoir, k = problem.reservoir, problem.k
    excluded: list[ReservoirArm] = []
    for y in range(1, k + 1):
        rho_y = problem.rho * (k - y + 1) / k
        phase_tally = Tally()
        arm = p3(reservoir, rho_y, problem.epsilon, problem.delta / k, rng,
                 excluded=tuple(excluded), delta_prime=delta_prime,
                 tally=phase_tally)
        if tally is not None:
            tally.add(phase_tally.count)
        if phase_log is not None:
            phase_log.append(PhaseState(y, rho_y, tuple(excluded), arm,
                                        phase_tally.count))
        excluded.append(arm)
    outputs = tuple(excluded)
    if len(set(outputs)) != k:  # exclusion makes this unreachable
        raise RuntimeError("kqp1 produced duplicate arms")
    return outputs


def k_independent_qp(problem: QuantileProblem, rng: RngStream,
                     delta_prime: float = DEFAULT_DELTA_PRIME,
                     tally: Tally | None = None) -> tuple[ReservoirArm, ...]:
    """k independent p3 copies at confidence delta / k.

    Continuous reservoirs only: distinctness of the k outputs holds with
    probability 1 because every finite arm set has draw probability 0.
    """
    if problem.reservoir.is_discrete:
        raise UsageError("k_independent_qp needs a continuous reservoir; "
                         "discrete draws can collide, use kqp1")
    outputs = tuple(
        p3(problem.reservoir, problem.rho, problem.epsilon, problem.delta / problem.k,
           rng, delta_prime=delta_prime, tally=tally)
        for _ in range(problem.k))
    if len(set(outputs)) != problem.k:  # measure-zero event
        raise RuntimeError("continuous draws collided")
    return outputs


def opt_qp(reservoir, rho: float, epsilon: float, delta: float, qf_solver,
           rng: RngStream, excluded=(), delta_prime: float = DEFAULT_DELTA_PRIME,
           tally: Tally | None = None) -> ReservoirArm:
    """Reduce the quantile problem to one finite instance and delegate.

    Runs ceil(ln(2/delta) / (2 (1/2 - delta')^2)) copies of
    p2(rho, epsilon/2, delta') to form an arm set S, then asks ``qf_solver``
    for one of the best floor(|S|/2) arms of S at (epsilon/2, delta/2).

    Args:
        qf_solver: callable (instance, m, epsilon, delta, rng, tally) -> arm
            index, solving the single-arm finite problem; see
            ``lucb_qf_solver`` and ``f2_qf_solver``.
    """
    if not 0.0 < rho <= 1.0:
        raise UsageError("rho must lie in (0, 1]")
    _check_eps_delta(epsilon, delta)
    if not 0.0 < delta_prime < 0.5:
        raise UsageError("delta_prime must lie in (0, 0.5)")
    copies = opt_qp_copy_count(delta, delta_prime)
    chosen = [p2(reservoir, rho, epsilon / 2.0, delta_prime, rng, excluded, tally)
              for _ in range(copies)]
    finite_view = FiniteBandit(chosen)
    winner = qf_solver(finite_view, copies // 2, epsilon / 2.0, delta / 2.0,
                       rng, tally)
    return chosen[winner]


def lucb_qf_solver(instance: FiniteBandit, m: int, epsilon: float, delta: float,
                   rng: RngStream, tally: Tally | None = None) -> int:
    """(1, m, n) solver backed by lucb_km with KL bounds."""
    record = lucb_km(instance, 1, m, epsilon, delta, "kl", rng, tally=tally)
    return record.returned[0]


def f2_qf_solver(instance: FiniteBandit, m: int, epsilon: float, delta: float,
                 rng: RngStream, tally: Tally | None = None) -> int:
    """(1, m, n) solver backed by the F2 baseline with KL bounds."""
    record = f2(instance, m, epsilon, delta, "kl", rng, tally=tally)
    return record.returned[0]


def uniform_embedding(instance: FiniteBandit) -> DiscreteReservoir:
    """View a finite instance as a uniform-draw discrete reservoir."""
    return DiscreteReservoir(instance.means)


def solve_qf_via_p3(instance: FiniteBandit, m: int, epsilon: float, delta: float,
                    rng: RngStream, delta_prime: float = DEFAULT_DELTA_PRIME,
                    tally: Tally | None = None) -> int:
    """Solve the (1, m, n) problem by embedding into a quantile problem.

    Uniform draw weights 1/n and target quantile m/n; returns the arm's
    index in the finite instance.
    """
    if not 1 <= m < instance.n:
        raise UsageError(f"need 1 <= m < n, got m={m}, n={instance.n}")
    _check_eps_delta(epsilon, delta)
    reservoir = uniform_embedding(instance)
    arm = p3(reservoir, m / instance.n, epsilon, delta, rng,
             delta_prime=delta_prime, tally=tally)
    return arm.uid


def solve_kmn_via_kqp1(instance: FiniteBandit, k: int, m: int, epsilon: float,
                       delta: float, rng: RngStream,
                       delta_prime: float = DEFAULT_DELTA_PRIME,
                       tally: Tally | None = None,
                       phase_log: list | None = None) -> tuple[int, ...]:
    """Solve (k, m, n) through the k-phase quantile algorithm.

    The uniform embedding is always at-most-k-equiprobable here since
    1/n <= (m/n)/k whenever k <= m. Returns arm indices.
    """
    if not 2 <= k <= m < instance.n:
        raise UsageError(f"need 2 <= k <= m < n, got k={k}, m={m}, n={instance.n}")
    _check_eps_delta(epsilon, delta)
    problem = QuantileProblem(uniform_embedding(instance), m / instance.n, k,
                              epsilon, delta)
    arms = kqp1(problem, rng, delta_prime=delta_prime, tally=tally,
                phase_log=phase_log)
    return tuple(arm.uid for arm in arms)
