"""Moments of the age extracted from an MGF by numerical differentiation.

Derivatives at s = 0 are taken with symmetric central differences plus
one Richardson extrapolation step, evaluated at two step sizes so every
result carries a self-consistency measure.  The stencil extends into
s < 0, which is always inside the convergence region, and only orders 1
and 2 are exposed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import ParameterError, SolverError
from .model import ShsChain
from .solver import admissible_bound, solve_mgf_correlations, stationary_distribution

__all__ = [
    "MomentSet",
    "DerivativeEstimate",
    "estimate_derivative",
    "moment_from_mgf",
    "summarize",
]

# beyond this the two Richardson levels disagree too much to trust either
_GROSS_INSTABILITY = 1e-3


@dataclass(frozen=True)
class DerivativeEstimate:
    """Derivative value plus the relative gap between two Richardson levels."""

    value: float
    self_check_rel: float


@dataclass(frozen=True)
class MomentSet:
    mean: float
    second_moment: float
    variance: float
    std_dev: float
    source_of_truth: str

    @classmethod
    def from_mean_second(
        cls, mean: float, second_moment: float, source_of_truth: str
    ) -> "MomentSet":
        variance = second_moment - mean * mean
        if variance < -1e-9 * abs(second_moment):
            raise SolverError(
                f"variance {variance!r} is negative beyond numerical tolerance "
                f"(mean={mean!r}, second={second_moment!r})"
            )
        return cls(
            mean=mean,
            second_moment=second_moment,
            variance=variance,
            std_dev=max(variance, 0.0) ** 0.5,
            source_of_truth=source_of_truth,
        )


def _central(fn: Callable[[float], float], order: int, h: float) -> float:
    if order == 1:
        return (fn(h) - fn(-h)) / (2.0 * h)
    return (fn(h) - 2.0 * fn(0.0) + fn(-h)) / (h * h)


def _richardson(fn: Callable[[float], float], order: int, h: float) -> float:
    # central differences have O(h^2) error; this cancels the leading term
    return (4.0 * _central(fn, order, h / 2.0) - _central(fn, order, h)) / 3.0


def estimate_derivative(
    fn: Callable[[float], float], order: int, s0: float, h: float | None = None
) -> DerivativeEstimate:
    """Order-1 or order-2 derivative of fn at 0 with a self-consistency gap.

    fn must be defined on [-h, h]; the default step is 1e-3 * s0.  The
    returned value is the finer of two Richardson extrapolations and the
    gap between them is reported; a gap beyond 1e-3 relative raises.
    """
    if order not in (1, 2):
        raise ParameterError(f"derivative order must be 1 or 2, got {order!r}")
    if not s0 > 0:
        raise ParameterError(f"scale s0 must be positive, got {s0!r}")
    if h is None:
        h = 1e-3 * s0
    if not 0 < h < s0:
        raise ParameterError(f"step h={h!r} must lie in (0, s0={s0!r})")
    coarse = _richardson(fn, order, h)
    fine = _richardson(fn, order, h / 2.0)
    gap = abs(coarse - fine) / max(abs(fine), 1e-300)
    if gap > _GROSS_INSTABILITY:
        raise SolverError(
            f"numerical differentiation unstable: Richardson levels differ by "
            f"{gap:.3e} relative (order {order}, h={h!r})"
        )
    return DerivativeEstimate(value=fine, self_check_rel=gap)


def moment_from_mgf(
    fn: Callable[[float], float], order: int, s0: float, h: float | None = None
) -> float:
    """The order-th moment of the distribution whose MGF is fn."""
    return estimate_derivative(fn, order, s0, h).value


def summarize(chain: ShsChain) -> MomentSet:
    """Mean, second moment, variance, and std of the source-1 age.

    The mean comes from the exact first-moment linear solve; the second
    moment from differentiating the solver MGF twice.
    """
    from .solver import average_aoi  # local import keeps module load light

    pi = stationary_distribution(chain)

    def fn(s: float) -> float:
        return float(solve_mgf_correlations(chain, pi, s).v[:, 0].sum())

    mean = average_aoi(chain)
    second = moment_from_mgf(fn, 2, admissible_bound(chain.params))
    return MomentSet.from_mean_second(mean, second, "oracle")
