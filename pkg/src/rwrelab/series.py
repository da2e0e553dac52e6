"""Quenched series with certified truncation error.

All series here have strictly positive terms that are eventually geometric in
the convergent regimes.  Truncation is certified by a trailing-window ratio
test: once every ratio t_{i+1}/t_i over the last `window` terms is <= r < 1
and t_N * r/(1-r) <= tol, the tail is bounded by the geometric majorant.
Divergence is declared only after the windowed geometric-mean ratio stayed
>= 1 for `divergence_run` consecutive terms (which covers terms bounded below
by a positive constant).  Anything else within the term budget is
inconclusive, which callers must distinguish from divergence.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator

from .environments import DiscreteEnv, RateEnv

CONVERGED = "converged"
DIVERGED = "diverged"
INCONCLUSIVE = "inconclusive"

_TERM_OVERFLOW = 1e280


@dataclass(frozen=True)
class SeriesValue:
    """A numeric series result with a certified truncation-error bound.

    If status == "converged" the true sum lies in
    [value - error_bound, value + error_bound]; otherwise error_bound is inf
    and value holds the partial sum actually accumulated (diagnostic only).
    """

    value: float
    error_bound: float
    status: str
    terms_used: int

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def diverged(self) -> bool:
        return self.status == DIVERGED


def certified_sum(terms: Iterable[float], tol: float, max_terms: int = 10**6,
                  window: int = 50, divergence_run: int = 500) -> SeriesValue:
    """Sum a positive-term series with a certified tail bound."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    total = 0.0
    prev = None
    ratios: deque[float] = deque(maxlen=window)
    heights: deque[float] = deque(maxlen=window + 1)
    div_count = 0
    n = 0
    for t in itertools.islice(terms, max_terms):
        n += 1
        total += t
        if t == 0.0:
            # positive product terms reach 0 only by underflow: the tail is
            # below double resolution
            return SeriesValue(total, 0.0, CONVERGED, n)
        if t > _TERM_OVERFLOW:
            return SeriesValue(total, math.inf, DIVERGED, n)
        if prev is not None:
            ratios.append(t / prev)
        heights.append(t)
        prev = t
        if len(ratios) == window:
            r = max(ratios)
            if r < 1.0:
                bound = t * r / (1.0 - r)
                if bound <= tol:
                    return SeriesValue(total, bound, CONVERGED, n)
            gm_ratio = (t / heights[0]) ** (1.0 / window)
            if gm_ratio >= 1.0:
                div_count += 1
                if div_count >= divergence_run:
                    return SeriesValue(total, math.inf, DIVERGED, n)
            else:
                div_count = 0
    return SeriesValue(total, math.inf, INCONCLUSIVE, n)


# ---------------------------------------------------------------------------
# quenched evaluators (environment windows grow as terms are consumed)
# ---------------------------------------------------------------------------

def _sbar_terms(env: DiscreteEnv, lam: float) -> Iterator[float]:
    # 1/omega+_{-i}(lam) * rho_0(lam) ... rho_{-i+1}(lam)
    prod = 1.0
    for i in itertools.count():
        _, w_plus = env.omega_biased(-i, lam)
        yield prod / w_plus
        prod *= env.rho_biased(-i, lam)


def sbar_quenched(env: DiscreteEnv, lam: float, tol: float = 1e-10,
                  max_terms: int = 10**6) -> SeriesValue:
    """Quenched expected crossing series whose annealed mean is 1/v."""
    return certified_sum(_sbar_terms(env, lam), tol, max_terms)


def _fbar_terms(env: DiscreteEnv, lam: float) -> Iterator[float]:
    prod = 1.0
    for i in itertools.count():
        w_minus, _ = env.omega_biased(i, lam)
        yield prod / w_minus
        prod /= env.rho_biased(i, lam)


def fbar_quenched(env: DiscreteEnv, lam: float, tol: float = 1e-10,
                  max_terms: int = 10**6) -> SeriesValue:
    """Leftward counterpart of the crossing series."""
    return certified_sum(_fbar_terms(env, lam), tol, max_terms)


def _u_terms(env: DiscreteEnv, lam: float) -> Iterator[float]:
    prod = 1.0
    for i in itertools.count():
        prod *= env.rho_biased(-i, lam)
        yield prod


def u_quenched(env: DiscreteEnv, lam: float, tol: float = 1e-10,
               max_terms: int = 10**6) -> SeriesValue:
    """Leftward weighted ratio products; satisfies sbar = 1 + 2u."""
    return certified_sum(_u_terms(env, lam), tol, max_terms)


def _v_terms(env: DiscreteEnv, lam: float) -> Iterator[float]:
    prod = 1.0
    for i in itertools.count(1):
        prod *= env.rho_biased(i, lam)
        yield prod


def v_quenched(env: DiscreteEnv, lam: float, tol: float = 1e-10,
               max_terms: int = 10**6) -> SeriesValue:
    """Rightward weighted ratio products (sites >= 1)."""
    return certified_sum(_v_terms(env, lam), tol, max_terms)


def lambda_factor(env: DiscreteEnv, lam: float, tol: float = 1e-10,
                  max_terms: int = 10**6) -> SeriesValue:
    """Steady-state density factor (1/omega+_0(lam)) * (1 + sum of rightward
    ratio products); equals (1 + rho_0 e^{-2 lam})(1 + V)."""
    v = v_quenched(env, lam, tol, max_terms)
    _, w_plus = env.omega_biased(0, lam)
    pref = 1.0 / w_plus
    if not v.converged:
        return SeriesValue(math.inf, math.inf, v.status, v.terms_used)
    return SeriesValue(pref * (1.0 + v.value), pref * v.error_bound,
                       v.status, v.terms_used)


def _shat_terms(env: RateEnv, lam: float) -> Iterator[float]:
    prod = 1.0
    for i in itertools.count():
        _, r_plus = env.rates_biased(-i, lam)
        yield prod / r_plus
        prod *= env.rho_biased(-i, lam)


def shat_quenched(env: RateEnv, lam: float, tol: float = 1e-10,
                  max_terms: int = 10**6) -> SeriesValue:
    """Continuous-time crossing series; its annealed mean is E[tau_1]."""
    return certified_sum(_shat_terms(env, lam), tol, max_terms)


def _fhat_terms(env: RateEnv, lam: float) -> Iterator[float]:
    prod = 1.0
    for i in itertools.count():
        r_minus, _ = env.rates_biased(i, lam)
        yield prod / r_minus
        prod /= env.rho_biased(i, lam)


def fhat_quenched(env: RateEnv, lam: float, tol: float = 1e-10,
                  max_terms: int = 10**6) -> SeriesValue:
    """Leftward continuous-time crossing series."""
    return certified_sum(_fhat_terms(env, lam), tol, max_terms)
