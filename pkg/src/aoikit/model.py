"""Discrete chain and reset maps for the two-source status-update queue.

The system is a single exponential server (rate mu) fed by two Poisson
sources (rates lambda1, lambda2) with a one-slot waiting queue that holds
at most one packet per source.  The age process of source 1 is tracked by
a hybrid state (q, x): q is one of five occupancy labels and
x = [x0, x1, x2] carries the current age, the age-if-delivered of the
in-service packet, and the age-if-delivered of the waiting packet.  Every
transition resets x to x @ A with a binary 3x3 matrix A.

Two packet-management policies are modeled.  Under the self-preemptive
policy a fresh arrival replaces an in-service packet of the same source;
under the non-preemptive policy such an arrival is discarded.  In both
policies a fresh arrival replaces a same-source packet sitting in the
waiting slot.  The two transition tables differ only in rows 3 and 6.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

__all__ = [
    "SystemParams",
    "Policy",
    "RateKind",
    "DiscreteState",
    "STATES",
    "ResetMap",
    "Transition",
    "ShsChain",
    "build_chain",
    "derive_hat_matrix",
    "rate_value",
]


class Policy(enum.Enum):
    SELF_PREEMPTIVE = "self-preemptive"
    NON_PREEMPTIVE = "non-preemptive"

    @classmethod
    def parse(cls, token: str) -> "Policy":
        aliases = {
            "self": cls.SELF_PREEMPTIVE,
            "self-preemptive": cls.SELF_PREEMPTIVE,
            "selfpreemptive": cls.SELF_PREEMPTIVE,
            "nonpre": cls.NON_PREEMPTIVE,
            "non-preemptive": cls.NON_PREEMPTIVE,
            "nonpreemptive": cls.NON_PREEMPTIVE,
        }
        try:
            return aliases[token.strip().lower()]
        except KeyError:
            raise ParameterError(
                f"unknown policy {token!r}; expected one of "
                "self, self-preemptive, nonpre, non-preemptive"
            ) from None


class RateKind(enum.Enum):
    LAMBDA1 = "lambda1"
    LAMBDA2 = "lambda2"
    MU = "mu"


@dataclass(frozen=True)
class SystemParams:
    """Arrival and service rates, with loads derived on access.

    lambda1 must be strictly positive (the source-1 age diverges
    otherwise); lambda2 may be zero, which degenerates the model to a
    single-source queue.
    """

    lambda1: float
    lambda2: float
    mu: float

    def __post_init__(self) -> None:
        for name in ("lambda1", "lambda2", "mu"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.lambda1 <= 0:
            raise ParameterError(f"lambda1 must be > 0, got {self.lambda1}")
        if self.lambda2 < 0:
            raise ParameterError(f"lambda2 must be >= 0, got {self.lambda2}")
        if self.mu <= 0:
            raise ParameterError(f"mu must be > 0, got {self.mu}")

    @property
    def rho1(self) -> float:
        return self.lambda1 / self.mu

    @property
    def rho2(self) -> float:
        return self.lambda2 / self.mu

    @property
    def rho(self) -> float:
        return self.rho1 + self.rho2

    @property
    def lambda_total(self) -> float:
        return self.lambda1 + self.lambda2

    def swapped(self) -> "SystemParams":
        """Relabel the sources (used for source-2 quantities)."""
        return SystemParams(self.lambda2, self.lambda1, self.mu)


@dataclass(frozen=True)
class DiscreteState:
    """Occupancy label a1a2: a2 = source in service, a1 = source waiting."""

    label: str
    index: int


STATES: tuple[DiscreteState, ...] = (
    DiscreteState("00", 0),
    DiscreteState("01", 1),
    DiscreteState("02", 2),
    DiscreteState("21", 3),
    DiscreteState("12", 4),
)

_STATE_BY_LABEL = {s.label: s for s in STATES}


def derive_hat_matrix(a: np.ndarray) -> np.ndarray:
    """Companion matrix of a reset map: diag(1 at j iff column j of a is zero).

    Marks the components that a transition resets to zero rather than
    copying from an old component; those contribute the constant term in
    the exponential-correlation linear system.
    """
    a = np.asarray(a)
    if a.shape != (3, 3) or not np.isin(a, (0, 1)).all():
        raise ParameterError("reset map must be a 3x3 binary matrix")
    hat = np.zeros((3, 3))
    for j in range(3):
        if not a[:, j].any():
            hat[j, j] = 1.0
    return hat


@dataclass(frozen=True, eq=False)
class ResetMap:
    """Binary reset x' = x @ a, with the derived companion hat matrix."""

    a: np.ndarray
    hat: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        a = np.asarray(self.a, dtype=float)
        if a.shape != (3, 3) or not np.isin(a, (0.0, 1.0)).all():
            raise ParameterError("reset map must be a 3x3 binary matrix")
        # each new component copies at most one old component
        if (a.sum(axis=0) > 1).any():
            raise ParameterError("reset map columns must have at most one nonzero")
        hat = derive_hat_matrix(a)
        a.setflags(write=False)
        hat.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "hat", hat)


@dataclass(frozen=True, eq=False)
class Transition:
    id: int
    source: DiscreteState
    target: DiscreteState
    rate_kind: RateKind
    reset: ResetMap


def rate_value(t: Transition, params: SystemParams) -> float:
    """Numeric rate of a transition under the given parameters."""
    return {
        RateKind.LAMBDA1: params.lambda1,
        RateKind.LAMBDA2: params.lambda2,
        RateKind.MU: params.mu,
    }[t.rate_kind]


# Transition table for the self-preemptive policy.  Row layout:
# (id, from label, to label, rate kind, reset matrix rows).  The matrix
# acts on the right, so row k says where old component k is copied.
_TABLE_SELF: tuple[tuple[int, str, str, RateKind, tuple], ...] = (
    # l=1: source-1 arrival to empty system; fresh packet enters service
    (1, "00", "01", RateKind.LAMBDA1, ((1, 0, 0), (0, 0, 0), (0, 0, 1))),
    # l=2: source-2 arrival to empty system
    (2, "00", "02", RateKind.LAMBDA2, ((1, 1, 0), (0, 0, 0), (0, 0, 1))),
    # l=3: source-1 arrival replaces the source-1 packet in service
    (3, "01", "01", RateKind.LAMBDA1, ((1, 0, 0), (0, 0, 0), (0, 0, 1))),
    # l=4: source-2 arrival while source 1 is served; the source-2 packet waits
    (4, "01", "21", RateKind.LAMBDA2, ((1, 0, 0), (0, 1, 1), (0, 0, 0))),
    # l=5: source-1 arrival while source 2 is served; source 1 waits
    (5, "02", "12", RateKind.LAMBDA1, ((1, 1, 0), (0, 0, 0), (0, 0, 0))),
    # l=6: source-1 arrival replaces the in-service source-1 packet (source 2 waits)
    (6, "21", "21", RateKind.LAMBDA1, ((1, 0, 0), (0, 0, 0), (0, 0, 0))),
    # l=7: source-1 arrival replaces the waiting source-1 packet
    (7, "12", "12", RateKind.LAMBDA1, ((1, 1, 0), (0, 0, 0), (0, 0, 0))),
    # l=8: source-1 delivery from state 01; the age drops to x1
    (8, "01", "00", RateKind.MU, ((0, 0, 0), (1, 1, 0), (0, 0, 1))),
    # l=9: source-2 delivery from state 02; source-1 age unaffected
    (9, "02", "00", RateKind.MU, ((1, 0, 0), (0, 1, 0), (0, 0, 1))),
    # l=10: source-1 delivery from state 21; waiting source-2 packet promoted
    (10, "21", "02", RateKind.MU, ((0, 0, 0), (1, 1, 0), (0, 0, 1))),
    # l=11: source-2 delivery from state 12; waiting source-1 packet promoted
    (11, "12", "01", RateKind.MU, ((1, 0, 0), (0, 0, 0), (0, 1, 1))),
)

# The non-preemptive policy differs only in rows 3 and 6: the same-source
# arrival is discarded, so the reset keeps the in-service component.
_TABLE_NONPRE_OVERRIDES: dict[int, tuple] = {
    3: (3, "01", "01", RateKind.LAMBDA1, ((1, 0, 0), (0, 1, 0), (0, 0, 1))),
    6: (6, "21", "21", RateKind.LAMBDA1, ((1, 0, 0), (0, 1, 1), (0, 0, 0))),
}


@dataclass(frozen=True, eq=False)
class ShsChain:
    """The five-state chain with its eleven transitions and parameters."""

    states: tuple[DiscreteState, ...]
    transitions: tuple[Transition, ...]
    params: SystemParams
    policy: Policy
    continuous_dim: int = 3

    def outgoing(self, q: int) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.source.index == q)

    def incoming(self, q: int) -> tuple[Transition, ...]:
        return tuple(t for t in self.transitions if t.target.index == q)

    def exit_rate(self, q: int) -> float:
        return sum(rate_value(t, self.params) for t in self.outgoing(q))


def build_chain(policy: Policy, params: SystemParams) -> ShsChain:
    """Build the transition structure for one policy.

    Zero-rate transitions (lambda2 = 0) are kept; they simply contribute
    nothing wherever rates are summed, so the degenerate single-source
    system uses the same structure.
    """
    if not isinstance(policy, Policy):
        raise ParameterError(f"policy must be a Policy, got {policy!r}")
    if not isinstance(params, SystemParams):
        raise ParameterError(f"params must be SystemParams, got {params!r}")
    rows = []
    for row in _TABLE_SELF:
        if policy is Policy.NON_PREEMPTIVE and row[0] in _TABLE_NONPRE_OVERRIDES:
            row = _TABLE_NONPRE_OVERRIDES[row[0]]
        rows.append(row)
    transitions = tuple(
        Transition(
            id=tid,
            source=_STATE_BY_LABEL[src],
            target=_STATE_BY_LABEL[dst],
            rate_kind=kind,
            reset=ResetMap(np.array(matrix, dtype=float)),
        )
        for tid, src, dst, kind, matrix in rows
    )
    return ShsChain(states=STATES, transitions=transitions, params=params, policy=policy)
