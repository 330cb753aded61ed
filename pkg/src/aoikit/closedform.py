"""Verbatim evaluation of the published closed-form expressions under audit.

Every function here transcribes a printed expression exactly as it
appears in the source analysis, including its known inconsistencies; the
numeric solver in aoikit.solver is the authority on correctness, and the
validator reports where the printed forms disagree with it.  Nothing in
this module is ever "fixed" silently: several of these expressions fail
basic sanity checks (the printed MGFs do not even satisfy M(0) = 1), and
detecting that is the point.

The one expression that is consistent with the solver everywhere is the
stationary vector, which the rest of the toolkit may safely use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError
from .model import Policy, SystemParams
from .solver import StationaryDist

__all__ = [
    "EvalPoint",
    "stationary_closed_form",
    "printed_mgf",
    "printed_mgf_self_preemptive",
    "printed_mgf_non_preemptive",
    "printed_second_moment",
    "printed_state_term",
    "POLE_TOL",
]

POLE_TOL = 1e-9


def _poles(params: SystemParams) -> tuple[float, ...]:
    # union of the denominator roots (in s/mu units) across all printed forms
    return (params.rho1, 1.0, 1.0 + params.rho1, 1.0 + params.rho2, 1.0 + params.rho)


@dataclass(frozen=True)
class EvalPoint:
    """Evaluation point (params, s/mu) kept away from every printed pole.

    The guard uses the union pole set {rho1, 1, 1+rho1, 1+rho2, 1+rho};
    a point within 1e-9 of any of them is rejected even for expressions
    that lack that particular factor, which keeps the domain rule uniform.
    """

    params: SystemParams
    s_bar: float

    def __post_init__(self) -> None:
        if not isinstance(self.s_bar, (int, float)) or isinstance(self.s_bar, bool):
            raise ParameterError(f"s_bar must be a real number, got {self.s_bar!r}")
        if not math.isfinite(self.s_bar):
            raise DomainError(f"s_bar must be finite, got {self.s_bar!r}")
        object.__setattr__(self, "s_bar", float(self.s_bar))
        for pole in _poles(self.params):
            if abs(self.s_bar - pole) < POLE_TOL:
                raise DomainError(
                    f"s_bar={self.s_bar!r} is within {POLE_TOL} of the pole {pole!r}"
                )

    @classmethod
    def from_s(cls, params: SystemParams, s: float) -> "EvalPoint":
        return cls(params, s / params.mu)


def _poly(x: float, *coeffs: float) -> float:
    """Horner evaluation; coeffs are ascending (c0 + c1 x + c2 x^2 + ...)."""
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def stationary_closed_form(params: SystemParams) -> StationaryDist:
    """Printed stationary vector [1, r1, r2, r1 r2, r1 r2] / (2 r1 r2 + rho + 1)."""
    r1, r2 = params.rho1, params.rho2
    norm = 2.0 * r1 * r2 + params.rho + 1.0
    return StationaryDist(np.array([1.0, r1, r2, r1 * r2, r1 * r2]) / norm)


def printed_mgf_self_preemptive(point: EvalPoint) -> float:
    """Printed MGF under the self-preemptive policy, evaluated verbatim.

    Known inconsistent: returns 1/3 instead of 1 at rho1=rho2=1, s=0.
    """
    r1, r2 = point.params.rho1, point.params.rho2
    rho = point.params.rho
    sb = point.s_bar
    g1 = (
        r2**2 * _poly(sb, 4, -6, 4, -1)
        + r2 * _poly(sb, 8, -20, 16, -6, 1)
        + (1 - sb) ** 3 * (4 - sb)
    )
    g2 = (
        r2**2 * _poly(sb, 5, -6, 2)
        + r2 * _poly(sb, 12, -22, 14, -3)
        + 3 * (1 - sb) ** 2 * (2 - sb)
    )
    g3 = r2**2 * (2 - sb) + r2 * _poly(sb, 8, -10, 3) + _poly(sb, 4, -7, 3)
    g4 = r2 * (2 - sb) + 1 - sb
    numerator = (
        r2**2 * (1 - sb) ** 2
        + 2 * r2 * (1 - sb) ** 3
        + (1 - sb) ** 4
        + r1 * g1
        + r1**2 * g2
        + r1**3 * g3
        + r1**4 * g4
    )
    denominator = (r1 - sb) * (1 - sb) ** 2 * (1 + r1 - sb) ** 2 * (1 + rho - sb) ** 2
    return r1 / (2 * r1 * r2 + rho + 1) * (numerator / denominator)


def printed_mgf_non_preemptive(point: EvalPoint) -> float:
    """Printed MGF under the non-preemptive policy, evaluated verbatim.

    Known inconsistent: returns 29/15 instead of 1 at rho1=rho2=1, s=0.
    """
    r1, r2 = point.params.rho1, point.params.rho2
    rho = point.params.rho
    sb = point.s_bar
    gb1 = (
        r2**3 * _poly(sb, 3, -3, 1)
        + r2**2 * _poly(sb, 9, -19, 11, -2)
        + r2 * _poly(sb, 9, -28, 29, -11, 1)
        + 3 * (1 - sb) ** 4
    )
    gb2 = (
        r2**3 * (2 - sb)
        + r2**2 * _poly(sb, 8, -10, 3)
        + r2 * _poly(sb, 9, -19, 11, -2)
        + (1 - sb) ** 3
    )
    gb3 = r2**2 * (2 - sb) + r2 * _poly(sb, 3, -3, 1) + (1 - sb) ** 2
    numerator = (
        r2**3 * (1 - sb) ** 2
        + 3 * r2**2 * (1 - sb) ** 3
        + 3 * r2 * (1 - sb) ** 4
        + (1 - sb) ** 5
        + r1 * gb1
        + r1**2 * gb2
        + r1**3 * gb3
    )
    denominator = (r1 - sb) * (1 - sb) ** 3 * (1 + r1 - sb) * (1 + rho - sb)
    return r1 / (2 * r1 * r2 + rho + 1) * (numerator / denominator)


def printed_mgf(policy: Policy, point: EvalPoint) -> float:
    if policy is Policy.SELF_PREEMPTIVE:
        return printed_mgf_self_preemptive(point)
    return printed_mgf_non_preemptive(point)


def printed_second_moment(policy: Policy, params: SystemParams) -> float:
    """Printed second moment of the source-1 age, evaluated verbatim.

    The printed denominators carry a single factor of mu exactly as they
    appear; dimensional oddity included.  The self-preemptive expression
    is known to disagree with the solver away from rho2 = 0.
    """
    r1, r2 = params.rho1, params.rho2
    rho, mu = params.rho, params.mu
    if policy is Policy.SELF_PREEMPTIVE:
        xi = (
            _poly(r2, 7, 21, 21, 7),
            _poly(r2, 22, 68, 68, 22),
            _poly(r2, 41, 134, 113, 40),
            _poly(r2, 50, 180, 161, 36),
            _poly(r2, 41, 160, 113, 18),
            _poly(r2, 22, 88, 45, 4),
            _poly(r2, 7, 28, 8),
            _poly(r2, 1, 4),
        )
        numerator = 2 * (r2 + 1) ** 3 + 2 * sum(
            r1 ** (k + 1) * x for k, x in enumerate(xi)
        )
        denominator = (
            mu * r1**2 * (1 + r1) ** 3 * (1 + rho) ** 2 * (2 * r1 * r2 + rho + 1)
        )
        return numerator / denominator
    xihat = (
        _poly(r2, 6, 30, 60, 60, 30, 6),
        _poly(r2, 17, 88, 180, 182, 91, 18),
        _poly(r2, 31, 169, 355, 361, 178, 34),
        _poly(r2, 39, 224, 463, 439, 190, 29),
        _poly(r2, 32, 192, 365, 293, 97, 9),
        _poly(r2, 15, 93, 151, 92, 18),
        _poly(r2, 3, 19, 24, 9),
    )
    numerator = 2 * (r2 + 1) ** 5 + 2 * sum(
        r1 ** (k + 1) * x for k, x in enumerate(xihat)
    )
    denominator = (
        mu
        * r1**2
        * (1 + r1) ** 2
        * (1 + r2) ** 2
        * (1 + rho) ** 2
        * (2 * r1 * r2 + rho + 1)
    )
    return numerator / denominator


def _state_term_self(q: int, point: EvalPoint) -> float:
    r1, r2 = point.params.rho1, point.params.rho2
    rho = point.params.rho
    sb = point.s_bar
    share = 2 * r1 * r2 + rho + 1
    if q == 0:
        numerator = (
            (1 - sb) ** 2
            + r2
            + r1**3
            + r1**2 * (3 - 2 * sb + r2)
            + r1 * ((2 - sb) ** 2 + r2 * (2 - sb) - 1)
        )
        denominator = (r1 - sb) * (1 + r1 - sb) ** 2 * (1 + rho - sb) ** 2
        return r1 / share * (numerator / denominator)
    if q == 1:
        a11 = (r2 + 2) ** 2 + 2 * (sb - 2) ** 2 + 3 * (1 - r2) - 9
        a12 = r2**2 * (2 - sb) + r2 * _poly(sb, 5, -6, 2) + _poly(sb, 3, -7, 5, -1)
        numerator = (
            r1**3 * (r2 + 1 - sb)
            + r1**2 * a11
            + r1 * a12
            + (1 - sb) ** 3
            + (r2 + 1) ** 2
            - 3 * r2 * sb
            - 1
        )
        denominator = (
            (1 - sb) * (r1 - sb) * (1 + r1 - sb) ** 2 * (1 + r2 - sb) * (1 + rho - sb)
        )
        return r1**2 / share * (numerator / denominator)
    if q == 2:
        numerator = (
            1
            - 2 * sb
            + r2
            + r1**3
            + r1**2 * (3 - 2 * sb + r2)
            + r1 * (3 * (1 - sb) + sb**2 + (2 - sb))
        )
        denominator = (r1 - sb) * (1 + r1 - sb) ** 2 * (1 + rho - sb)
        return r1 * r2 / share * (numerator / denominator)
    if q == 3:
        a31 = (r2 + 2) ** 2 + 2 * (sb - 1) ** 2 - sb * (3 * r2 + 1) - 3
        a32 = r2**2 * (2 - sb) + r2 * _poly(sb, 5, -6, 2) + _poly(sb, 3, -7, 5, -1)
        numerator = (
            r1**3 * (r2 + 1 - sb)
            + r1**2 * a31
            + r1 * a32
            + (r2 + 1) ** 2
            + (1 - sb) ** 3
            - 3 * r2 * sb
            - 1
        )
        denominator = (
            (r1 - sb)
            * (1 - sb) ** 2
            * (1 + r1 - sb) ** 2
            * (1 + r2 - sb)
            * (1 + rho - sb)
        )
        return r1**2 * r2 / share * (numerator / denominator)
    numerator = (
        r1**3
        + r1**2 * (3 - 2 * sb + r2)
        + r1 * (3 * (1 - sb) + r2 * (2 - sb) + sb**2 + 1)
        + 1
        - 2 * sb
        + r2
    )
    denominator = (r1 - sb) * (1 - sb) * (1 + r1 - sb) ** 2 * (1 + rho - sb)
    return r1**2 * r2 / share * (numerator / denominator)


def _state_term_nonpre(q: int, point: EvalPoint) -> float:
    r1, r2 = point.params.rho1, point.params.rho2
    rho = point.params.rho
    sb = point.s_bar
    share = 2 * r1 * r2 + rho + 1
    if q == 0:
        ab01 = r2 * (r2 + 3) + r2 * sb * (sb - 3) + 2 * (1 - sb)
        numerator = (
            r1**2 * (1 - sb) * (1 + r2)
            + r1 * ab01
            + (1 + r2) ** 2
            + r2 * sb * (sb - 3)
            + (1 - sb) ** 3
            - 1
        )
        denominator = (
            (r1 - sb) * (1 - sb) * (1 + r1 - sb) * (1 + r2 - sb) * (1 + rho - sb)
        )
        return r1 / share * (numerator / denominator)
    if q == 1:
        ab11 = (r2 + 1) ** 2 + r2 * sb * (sb - 2) + (1 - sb) ** 2 - 1
        ab12 = r2**3 + r2**2 * (4 - 3 * sb) + r2 * _poly(sb, 5, -9, 4, -1) + 2 * (1 - sb) ** 3
        numerator = (
            r1**2 * ab11
            + r1 * ab12
            + r2**3
            + r2**2 * (3 - 4 * sb)
            + r2 * _poly(sb, 3, -8, 6, -1)
            + (1 - sb) ** 4
        )
        denominator = (
            (r1 - sb)
            * (1 - sb) ** 2
            * (1 + r1 - sb)
            * (1 + r2 - sb) ** 2
            * (1 + rho - sb)
        )
        return r1**2 / share * (numerator / denominator)
    if q == 2:
        numerator = (
            r1**2 * (r2 + 1)
            + r1 * (r2**2 + 3 * r2 + 2 - sb * (2 * r2 + 3))
            + r2**2
            + r2 * (2 - 3 * sb)
            + 1
            - 3 * sb
            + 2 * sb**2
        )
        denominator = (
            (r1 - sb) * (1 - sb) * (1 + r1 - sb) * (1 + r2 - sb) * (1 + rho - sb)
        )
        return r1 * r2 / share * (numerator / denominator)
    if q == 3:
        ab31 = (r2 + 1) ** 2 + r2 * sb * (sb - 2) + (1 - sb) ** 2 - 1
        ab32 = r2**3 + r2**2 * (4 - 3 * sb) + r2 * _poly(sb, 5, -9, 4, -1) + 2 * (1 - sb) ** 3
        numerator = (
            r1**2 * ab31
            + r1 * ab32
            + r2**3
            + r2**2 * (3 - 4 * sb)
            + r2 * _poly(sb, 3, -8, 6, -1)
            + (1 - sb) ** 2
        )
        denominator = (
            (r1 - sb)
            * (1 - sb) ** 3
            * (1 + r1 - sb)
            * (1 + r2 - sb) ** 2
            * (1 + rho - sb)
        )
        return r1**2 * r2 / share * (numerator / denominator)
    numerator = (
        r1**2 * (r2 + 1)
        + r1 * (r2**2 + 3 * r2 + 2 - sb * (2 * r2 + 3))
        + (r2 + 1) ** 2
        + 3 * r2
        - 3 * sb
        + 2 * sb**2
    )
    denominator = (
        (r1 - sb) * (1 - sb) ** 2 * (1 + r1 - sb) * (1 + r2 - sb) * (1 + rho - sb)
    )
    return r1**2 * r2 / share * (numerator / denominator)


def printed_state_term(policy: Policy, q: int, point: EvalPoint) -> float:
    """Printed per-state exponential-correlation value (component 0) for state q.

    These are the per-state building blocks the printed MGFs are claimed
    to sum; both the individual values and their sum are audit targets.
    """
    if q not in (0, 1, 2, 3, 4):
        raise ParameterError(f"state index must be 0..4, got {q!r}")
    if policy is Policy.SELF_PREEMPTIVE:
        return _state_term_self(q, point)
    return _state_term_nonpre(q, point)
