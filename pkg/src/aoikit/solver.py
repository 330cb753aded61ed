"""Numeric oracle for the age process: dense solves of the chain's linear systems.

Three systems are solved, all small and dense:

* stationary balance (5 unknowns, one balance row replaced by the
  normalization row; the balance equations alone are rank 4);
* first-moment correlation vectors v_q = E[x * indicator(state q)]
  (15 unknowns);
* exponential correlation vectors v_q(s) = E[exp(s*x) * indicator(state q)]
  (15 unknowns), whose component-0 sum is the MGF of the source-1 age.

The mean age is sum_q v_q0 and the MGF is sum_q v_q0(s).  No closed forms
are used anywhere here; this module is the reference the rest of the
toolkit is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConditioningError,
    DomainError,
    ModelViolationError,
    SolverError,
)
from .model import Policy, ShsChain, SystemParams, build_chain, rate_value

__all__ = [
    "StationaryDist",
    "CorrelationSolution",
    "stationary_distribution",
    "solve_first_moment",
    "average_aoi",
    "aoi_second_moment",
    "admissible_bound",
    "solve_mgf_correlations",
    "mgf_at",
    "mgf_curve",
    "mgf_source2_at",
    "default_s_grid",
]

_NEG_TOL = 1e-12  # entries in [-1e-12, 0) are rounding noise and get clamped
_COND_LIMIT = 1e13  # dense solves beyond this condition number are rejected
_RESIDUAL_TOL = 1e-10

# Flat indices (3*state + component) of the x2 entries of states 00 and 01.
# When lambda2 = 0 these two expectations have no finite stationary limit:
# the waiting-slot proxy x2 is never reset on the recurrent states, so its
# equations are inconsistent (they sum to 0 = pi_0 + pi_1).  The remaining
# 13 unknowns form a closed, well-posed subsystem; nothing that feeds the
# component-0 outputs depends on the two dropped entries.
_DIVERGENT_AT_LAMBDA2_ZERO = (2, 5)


@dataclass(frozen=True, eq=False)
class StationaryDist:
    """Stationary probabilities indexed by DiscreteState.index."""

    pi: np.ndarray

    def __post_init__(self) -> None:
        pi = np.asarray(self.pi, dtype=float)
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)


@dataclass(frozen=True, eq=False)
class CorrelationSolution:
    """5x3 matrix of correlation values; row q, column j = component j.

    Column 0 is the age-relevant component.  For the first-moment system
    at lambda2 = 0 the entries (0, 2) and (1, 2) are NaN: they have no
    finite stationary limit (see solve_first_moment).
    """

    v: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.v, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "v", v)

    @property
    def aoi_components(self) -> np.ndarray:
        return self.v[:, 0]


def _checked_solve(m: np.ndarray, b: np.ndarray, context: str) -> np.ndarray:
    cond = np.linalg.cond(m)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise ConditioningError(
            f"{context}: system is numerically singular (condition number {cond:.3e})"
        )
    try:
        return np.linalg.solve(m, b)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - cond check fires first
        raise SolverError(f"{context}: {exc}") from exc


def _clamp_rounding_negatives(x: np.ndarray) -> np.ndarray:
    out = x.copy()
    mask = (out > -_NEG_TOL) & (out < 0)
    out[mask] = 0.0
    # normalize -0.0 so formatted output is stable
    out[out == 0.0] = 0.0
    return out


def stationary_distribution(chain: ShsChain) -> StationaryDist:
    """Solve the global balance equations plus normalization.

    Raises SolverError if the balance system is degenerate beyond the
    normalization redundancy (a reducible chain) or if the solution
    violates nonnegativity or the balance residuals.
    """
    params = chain.params
    n = len(chain.states)
    m = np.zeros((n, n))
    for t in chain.transitions:
        rate = rate_value(t, params)
        m[t.source.index, t.source.index] += rate
        m[t.target.index, t.source.index] -= rate
    balance = m.copy()  # keep all 5 balance rows for the residual check
    m[n - 1, :] = 1.0
    b = np.zeros(n)
    b[n - 1] = 1.0
    try:
        pi = _checked_solve(m, b, "stationary distribution")
    except ConditioningError as exc:
        raise SolverError(f"balance system not uniquely solvable: {exc}") from exc
    pi = _clamp_rounding_negatives(pi)
    if (pi < 0).any():
        raise SolverError(f"stationary solve produced negative probabilities: {pi}")
    if abs(pi.sum() - 1.0) > 1e-12:
        raise SolverError(f"stationary probabilities sum to {pi.sum()!r}, not 1")
    residual = np.abs(balance @ pi).max()
    if residual > 1e-12 * max(1.0, params.lambda_total + params.mu):
        raise SolverError(f"balance residual {residual:.3e} too large")
    return StationaryDist(pi)


def _system_matrix(chain: ShsChain, s: float) -> np.ndarray:
    """Matrix of the correlation linear systems (first-moment uses s=0)."""
    params = chain.params
    n = len(chain.states)
    m = np.zeros((3 * n, 3 * n))
    for q in range(n):
        exit_rate = chain.exit_rate(q)
        for j in range(3):
            m[3 * q + j, 3 * q + j] += exit_rate - s
    for t in chain.transitions:
        rate = rate_value(t, params)
        if rate == 0.0:
            continue
        q, f = t.target.index, t.source.index
        a = t.reset.a
        for j in range(3):
            for k in range(3):
                if a[k, j]:
                    m[3 * q + j, 3 * f + k] -= rate * a[k, j]
    return m


def _reduced_solve(m: np.ndarray, b: np.ndarray, drop: tuple[int, ...], context: str):
    keep = [i for i in range(m.shape[0]) if i not in drop]
    sub = _checked_solve(m[np.ix_(keep, keep)], b[keep], context)
    full = np.full(m.shape[0], np.nan)
    full[keep] = sub
    return full, keep


def solve_first_moment(chain: ShsChain, pi: StationaryDist) -> CorrelationSolution:
    """Solve the 15-unknown first-moment system.

    Every equation's residual is checked against 1e-10 and entries must be
    nonnegative up to rounding.  At lambda2 = 0 the x2 entries of states
    00 and 01 grow without bound (the proxy is never reset while only
    those two states recur), so the corresponding variable/equation pairs
    are dropped and reported as NaN; all component-0 outputs are exact.
    """
    m = _system_matrix(chain, 0.0)
    b = np.repeat(np.asarray(pi.pi, dtype=float), 3)
    if chain.params.lambda2 > 0:
        flat = _checked_solve(m, b, "first-moment system")
        keep = list(range(m.shape[0]))
    else:
        flat, keep = _reduced_solve(
            m, b, _DIVERGENT_AT_LAMBDA2_ZERO, "first-moment system (lambda2=0)"
        )
    residual = np.abs(m[np.ix_(keep, keep)] @ flat[keep] - b[keep]).max()
    if residual > _RESIDUAL_TOL:
        raise SolverError(f"first-moment residual {residual:.3e} exceeds {_RESIDUAL_TOL}")
    finite = flat[keep]
    if (finite < -_NEG_TOL).any():
        raise ModelViolationError(
            f"first-moment solution has negative entries: min {finite.min():.3e}"
        )
    flat[keep] = _clamp_rounding_negatives(finite)
    return CorrelationSolution(flat.reshape(len(chain.states), 3))


def average_aoi(chain: ShsChain) -> float:
    """Mean age of source 1: the component-0 sum of the first-moment solve."""
    pi = stationary_distribution(chain)
    v = solve_first_moment(chain, pi)
    return float(v.v[:, 0].sum())


def aoi_second_moment(chain: ShsChain) -> float:
    """Exact second moment of the source-1 age from chained linear solves.

    The correlation vector solves (M - s*I) x(s) = b with b independent
    of s, so x''(0) = 2 M^{-1} x'(0), and x'(0) is exactly the
    first-moment solution.  One extra solve with the first moment as
    right-hand side therefore gives the second moment with no finite
    differences.  The lambda2 = 0 reduction mirrors the first-moment
    solve; the component-0 entries summed here are never among the
    dropped ones.
    """
    pi = stationary_distribution(chain)
    vbar = solve_first_moment(chain, pi).v.ravel()
    m = _system_matrix(chain, 0.0)
    if chain.params.lambda2 > 0:
        half = _checked_solve(m, vbar, "second-moment system")
    else:
        b = np.where(np.isfinite(vbar), vbar, 0.0)
        half, _ = _reduced_solve(
            m, b, _DIVERGENT_AT_LAMBDA2_ZERO, "second-moment system (lambda2=0)"
        )
    return float(2.0 * half[0::3].sum())


def admissible_bound(params: SystemParams) -> float:
    """Upper bound s0 of the admissible MGF argument region.

    The exponential-correlation system degenerates at s/mu = min(rho1, 1),
    the smallest positive pole of the age transform, so s must stay
    strictly below mu*min(rho1, 1).  The dense solver additionally
    monitors conditioning, so the bound is a guard, not the only defense.
    """
    return params.mu * min(params.rho1, 1.0)


def solve_mgf_correlations(
    chain: ShsChain, pi: StationaryDist, s: float
) -> CorrelationSolution:
    """Solve the 15-unknown exponential-correlation system at argument s.

    Requires s < admissible_bound(params).  At s = 0 the solution equals
    the outer product pi x [1,1,1]; that identity is left to emerge from
    the solve (it is a validation target, not a special case).  The one
    exception is lambda2 = 0 at s = 0, where the x2 block of states 00
    and 01 is rank-deficient; the reduced system is solved and the two
    affected entries are filled with their exact values pi_0 and pi_1
    (exp(0 * x) = 1 regardless of x).
    """
    if not isinstance(s, (int, float)) or isinstance(s, bool) or not math.isfinite(s):
        raise DomainError(f"s must be a finite real, got {s!r}")
    s = float(s)
    s0 = admissible_bound(chain.params)
    if s >= s0:
        raise DomainError(
            f"s={s!r} is outside the admissible region; need s < s0={s0!r}"
        )
    m = _system_matrix(chain, s)
    b = np.zeros(3 * len(chain.states))
    pivec = np.asarray(pi.pi, dtype=float)
    for t in chain.transitions:
        rate = rate_value(t, chain.params)
        if rate == 0.0:
            continue
        q, f = t.target.index, t.source.index
        hat = t.reset.hat
        for j in range(3):
            if hat[j, j]:
                b[3 * q + j] += rate * pivec[f]
    if chain.params.lambda2 == 0 and s == 0.0:
        flat, _ = _reduced_solve(
            m, b, _DIVERGENT_AT_LAMBDA2_ZERO, "exponential-correlation system"
        )
        flat[_DIVERGENT_AT_LAMBDA2_ZERO[0]] = pivec[0]
        flat[_DIVERGENT_AT_LAMBDA2_ZERO[1]] = pivec[1]
    else:
        try:
            flat = _checked_solve(m, b, "exponential-correlation system")
        except ConditioningError as exc:
            raise ConditioningError(f"{exc}; s={s!r} approaches a pole (s0={s0!r})") from exc
    flat = _clamp_rounding_negatives(flat)
    return CorrelationSolution(flat.reshape(len(chain.states), 3))


def mgf_at(chain: ShsChain, s: float) -> float:
    """MGF of the source-1 age at argument s: the component-0 sum."""
    pi = stationary_distribution(chain)
    v = solve_mgf_correlations(chain, pi, s)
    return float(v.v[:, 0].sum())


def mgf_curve(chain: ShsChain, s_values) -> np.ndarray:
    """Vectorized mgf_at over many s values (one stationary solve)."""
    pi = stationary_distribution(chain)
    out = np.empty(len(s_values))
    for i, s in enumerate(s_values):
        out[i] = solve_mgf_correlations(chain, pi, float(s)).v[:, 0].sum()
    return out


def mgf_source2_at(policy: Policy, params: SystemParams, s: float) -> float:
    """MGF of the source-2 age: source-1 analysis on the relabeled system."""
    return mgf_at(build_chain(policy, params.swapped()), s)


def default_s_grid(params: SystemParams, n: int = 101) -> np.ndarray:
    """Default curve grid: s/mu from -2 to 0.9*min(rho1, 1), n points."""
    sbar_hi = 0.9 * min(params.rho1, 1.0)
    return np.linspace(-2.0 * params.mu, sbar_hi * params.mu, n)
