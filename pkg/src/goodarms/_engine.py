"""Compiled inner loops for the fully sequential finite-instance algorithms.

These kernels exist purely for throughput: a sequential run at delta = 0.001
can take hundreds of thousands of rounds, each needing a handful of KL
inversions. The arithmetic mirrors :mod:`goodarms.bounds` line for line and
consumes the run's PCG64 stream in exactly the same order as the pure-Python
reference path in :mod:`goodarms.finite`:

  per round: n tie-break priorities, then (after the stop check) one uniform
  per pulled arm, in star order.

Tests assert bit-identical behaviour between the two paths.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

VARIANT_HOEFFDING = 0
VARIANT_KL = 1

H_STAR_ARGMIN = 0
H_STAR_ARGMAX = 1

BISECT_MAX_ITERS = 80


@njit(cache=True)
def _kl(p, q):
    if q <= 0.0:
        return 0.0 if p <= 0.0 else np.inf
    if q >= 1.0:
        return 0.0 if p >= 1.0 else np.inf
    t1 = 0.0 if p <= 0.0 else p * math.log(p / q)
    t2 = 0.0 if p >= 1.0 else (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return t1 + t2


@njit(cache=True)
def _kl_ucb_core(p_hat, pulls, tau):
    if tau <= 0.0:
        return p_hat
    if p_hat >= 1.0:
        return 1.0
    lo = p_hat
    hi = 1.0
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # float grid exhausted
            break
        if pulls * _kl(p_hat, mid) <= tau:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def _kl_lcb_core(p_hat, pulls, tau):
    if tau <= 0.0:
        return p_hat
    if p_hat <= 0.0:
        return 0.0
    lo = 0.0
    hi = p_hat
    for _ in range(BISECT_MAX_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if pulls * _kl(p_hat, mid) <= tau:
            hi = mid
        else:
            lo = mid
    return hi


@njit(cache=True)
def _ucb(p_hat, pulls, tau, variant):
    if variant == VARIANT_HOEFFDING:
        return p_hat + math.sqrt(tau / (2.0 * pulls))
    return _kl_ucb_core(p_hat, pulls, tau)


@njit(cache=True)
def _lcb(p_hat, pulls, tau, variant):
    if variant == VARIANT_HOEFFDING:
        return p_hat - math.sqrt(tau / (2.0 * pulls))
    return _kl_lcb_core(p_hat, pulls, tau)


@njit(cache=True)
def _mean_order(sums, pulls, pri):
    # Empirical-mean descending order with uniform tie-breaks: random
    # permutation first, then a stable sort on the negated means.
    n = sums.size
    perm = np.argsort(pri, kind="mergesort")
    key = np.empty(n)
    for i in range(n):
        key[i] = -(sums[perm[i]] / pulls[perm[i]])
    return perm[np.argsort(key, kind="mergesort")]


@njit(cache=True)
def lucb_run(means, k, m, eps, tau_const, variant, h_mode, g):
    """One LUCB-k-m run on Bernoulli arms; returns (A1, pulls, rounds, gap).

    tau_const is ln(k1 * n / delta); the per-round threshold adds 4 ln t.
    """
    n = means.size
    sums = np.zeros(n)
    pulls = np.zeros(n, dtype=np.int64)
    for a in range(n):
        pulls[a] = 1
        if g.random() < means[a]:
            sums[a] = 1.0
    t = n
    rounds = np.int64(0)
    pri = np.empty(n)
    while True:
        e = t + 1
        tau = tau_const + 4.0 * math.log(e)
        for i in range(n):
            pri[i] = g.random()
        order = _mean_order(sums, pulls, pri)

        h_star = order[0]
        h_val = _lcb(sums[h_star] / pulls[h_star], pulls[h_star], tau, variant)
        for i in range(1, k):
            a = order[i]
            v = _lcb(sums[a] / pulls[a], pulls[a], tau, variant)
            if h_mode == H_STAR_ARGMIN:
                better = v < h_val or (v == h_val and pri[a] < pri[h_star])
            else:
                better = v > h_val or (v == h_val and pri[a] < pri[h_star])
            if better:
                h_val = v
                h_star = a

        l_star = order[m]
        l_val = _ucb(sums[l_star] / pulls[l_star], pulls[l_star], tau, variant)
        for i in range(m + 1, n):
            a = order[i]
            v = _ucb(sums[a] / pulls[a], pulls[a], tau, variant)
            if v > l_val or (v == l_val and pri[a] < pri[l_star]):
                l_val = v
                l_star = a

        gap = l_val - h_val
        if gap <= eps:
            return order[:k].copy(), pulls, rounds, gap

        m_star = np.int64(-1)
        if m > k:
            m_star = order[k]
            for i in range(k + 1, m):
                a = order[i]
                if pulls[a] < pulls[m_star] or (
                        pulls[a] == pulls[m_star] and pri[a] < pri[m_star]):
                    m_star = a

        pulls[h_star] += 1
        if g.random() < means[h_star]:
            sums[h_star] += 1.0
        if m_star >= 0:
            pulls[m_star] += 1
            if g.random() < means[m_star]:
                sums[m_star] += 1.0
        pulls[l_star] += 1
        if g.random() < means[l_star]:
            sums[l_star] += 1.0
        t += 1
        rounds += 1


@njit(cache=True)
def f2_run(means, m, eps, tau_const, variant, g):
    """One F2 run on Bernoulli arms; returns (a1, pulls, rounds, gap)."""
    n = means.size
    sums = np.zeros(n)
    pulls = np.zeros(n, dtype=np.int64)
    for a in range(n):
        pulls[a] = 1
        if g.random() < means[a]:
            sums[a] = 1.0
    t = n
    rounds = np.int64(0)
    pri = np.empty(n)
    rest_idx = np.empty(n - 1, dtype=np.int64)
    rest_pri = np.empty(n - 1)
    while True:
        e = t + 1
        tau = tau_const + 4.0 * math.log(e)
        for i in range(n):
            pri[i] = g.random()

        a1 = np.int64(0)
        a1_val = _lcb(sums[0] / pulls[0], pulls[0], tau, variant)
        for a in range(1, n):
            v = _lcb(sums[a] / pulls[a], pulls[a], tau, variant)
            if v > a1_val or (v == a1_val and pri[a] < pri[a1]):
                a1_val = v
                a1 = a

        j = 0
        for a in range(n):
            if a != a1:
                rest_idx[j] = a
                rest_pri[j] = pri[a]
                j += 1
        perm = np.argsort(rest_pri, kind="mergesort")
        key = np.empty(n - 1)
        for i in range(n - 1):
            a = rest_idx[perm[i]]
            key[i] = -_ucb(sums[a] / pulls[a], pulls[a], tau, variant)
        order = perm[np.argsort(key, kind="mergesort")]
        # rest sorted by (ucb desc, priority): first m-1 form A2, the rest A3
        # with its head being the highest-ucb A3 arm.
        l_star = rest_idx[order[m - 1]]
        l_val = _ucb(sums[l_star] / pulls[l_star], pulls[l_star], tau, variant)

        gap = l_val - a1_val
        if gap <= eps:
            return a1, pulls, rounds, gap

        m_star = np.int64(-1)
        if m > 1:
            m_star = rest_idx[order[0]]
            for i in range(1, m - 1):
                a = rest_idx[order[i]]
                if pulls[a] < pulls[m_star] or (
                        pulls[a] == pulls[m_star] and pri[a] < pri[m_star]):
                    m_star = a

        pulls[a1] += 1
        if g.random() < means[a1]:
            sums[a1] += 1.0
        if m_star >= 0:
            pulls[m_star] += 1
            if g.random() < means[m_star]:
                sums[m_star] += 1.0
        pulls[l_star] += 1
        if g.random() < means[l_star]:
            sums[l_star] += 1.0
        t += 1
        rounds += 1
