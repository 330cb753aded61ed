"""Event-driven Monte Carlo simulation of the two-source status-update queue.

The physical system is simulated directly from its verbal description
(one server, one waiting slot per the packet-management policy), with no
reference to the transition tables used by the analytical solver, so
agreement between the two is a meaningful check.

Randomness is a race of exponentials: at each event the holding time is
a unit exponential scaled by the total active rate, and an independent
uniform picks which rate fired.  Both streams come from a single PCG64
generator with inverse-CDF exponential sampling, so identical seeds give
bit-identical results.  Age integrals are accumulated exactly per
inter-event segment (the age is piecewise linear with unit slope).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import DomainError, ParameterError
from .model import Policy, SystemParams
from .solver import admissible_bound

__all__ = ["SimConfig", "SimResult", "simulate", "simulate_replications"]

# e^x overflows float64 near x = 709; trip the guard with margin
_EXP_GUARD = 700.0


@dataclass(frozen=True)
class SimConfig:
    """Configuration of one simulation run.

    horizon_events counts simulated events including warmup; the first
    warmup_fraction of them is discarded and the remainder is split into
    batch_count equal-event batches (a trailing remainder of fewer than
    batch_count events is dropped).  s_probes are MGF arguments sampled
    alongside the age moments; each must lie below the admissible bound.
    """

    params: SystemParams
    policy: Policy
    seed: int = 12345
    horizon_events: int = 1_000_000
    warmup_fraction: float = 0.1
    batch_count: int = 20
    s_probes: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or isinstance(self.seed, bool) or self.seed < 0:
            raise ParameterError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if not isinstance(self.horizon_events, int) or self.horizon_events <= 0:
            raise ParameterError(
                f"horizon_events must be a positive integer, got {self.horizon_events!r}"
            )
        if not isinstance(self.batch_count, int) or self.batch_count < 2:
            raise ParameterError(
                f"batch_count must be an integer >= 2, got {self.batch_count!r}"
            )
        if not 0.0 <= self.warmup_fraction < 1.0:
            raise ParameterError(
                f"warmup_fraction must lie in [0, 1), got {self.warmup_fraction!r}"
            )
        if self.horizon_events < 10 * self.batch_count:
            raise ParameterError(
                f"horizon_events={self.horizon_events} is too small for "
                f"batch_count={self.batch_count}; need at least 10 events per batch"
            )
        object.__setattr__(self, "s_probes", tuple(float(s) for s in self.s_probes))
        s0 = admissible_bound(self.params)
        for s in self.s_probes:
            if not math.isfinite(s):
                raise DomainError(f"MGF probe s={s!r} must be finite")
            if s >= s0:
                raise DomainError(
                    f"MGF probe s={s!r} is outside the admissible region; "
                    f"need s < s0={s0!r}"
                )

    @property
    def warmup_events(self) -> int:
        return int(self.horizon_events * self.warmup_fraction)

    @property
    def batch_events(self) -> int:
        return (self.horizon_events - self.warmup_events) // self.batch_count

    @property
    def events_processed(self) -> int:
        return self.warmup_events + self.batch_events * self.batch_count


@njit(cache=False)
def _run_kernel(
    u_pick: np.ndarray,
    exp_unit: np.ndarray,
    lam1: float,
    lam2: float,
    mu: float,
    self_preemptive: bool,
    s_probes: np.ndarray,
    initial_age: float,
    warmup_events: int,
    batch_events: int,
    batch_count: int,
):
    # server_src/wait_src: 0 means empty, otherwise the source id
    t = 0.0
    u1 = -initial_age
    server_src = 0
    server_gen = 0.0
    wait_src = 0
    wait_gen = 0.0
    n_probes = s_probes.shape[0]
    batch_time = np.zeros(batch_count)
    batch_age = np.zeros(batch_count)
    batch_age2 = np.zeros(batch_count)
    batch_emgf = np.zeros((batch_count, n_probes))
    batch_state = np.zeros((batch_count, 5))
    probe_ok = np.ones(n_probes, dtype=np.bool_)
    n_events = warmup_events + batch_events * batch_count
    for i in range(n_events):
        busy = server_src != 0
        total = lam1 + lam2 + (mu if busy else 0.0)
        dt = exp_unit[i] / total
        if i >= warmup_events:
            bi = (i - warmup_events) // batch_events
            age0 = t - u1
            batch_time[bi] += dt
            # age is piecewise linear with unit slope: integrate exactly
            batch_age[bi] += dt * (age0 + 0.5 * dt)
            batch_age2[bi] += dt * (age0 * age0 + age0 * dt + dt * dt / 3.0)
            if server_src == 0:
                si = 0
            elif server_src == 1:
                si = 1 if wait_src == 0 else 3
            else:
                si = 2 if wait_src == 0 else 4
            batch_state[bi, si] += dt
            for k in range(n_probes):
                if probe_ok[k]:
                    s = s_probes[k]
                    if s == 0.0:
                        batch_emgf[bi, k] += dt
                    else:
                        x0 = s * age0
                        if x0 > _EXP_GUARD or x0 + s * dt > _EXP_GUARD:
                            probe_ok[k] = False
                        else:
                            batch_emgf[bi, k] += math.exp(x0) * math.expm1(s * dt) / s
        t += dt
        u = u_pick[i] * total
        if u < lam1:
            arrival = 1
        elif u < lam1 + lam2:
            arrival = 2
        else:
            arrival = 0  # service completion
        if arrival == 0:
            if server_src == 1:
                u1 = server_gen
            server_src = wait_src
            server_gen = wait_gen
            wait_src = 0
        elif server_src == 0:
            server_src = arrival
            server_gen = t
        elif server_src == arrival:
            # same source already in service: replace it or discard the
            # new packet, depending on the policy
            if self_preemptive:
                server_gen = t
        else:
            # other source in service: the single waiting slot keeps only
            # the freshest packet of the arriving source
            wait_src = arrival
            wait_gen = t
    return batch_time, batch_age, batch_age2, batch_emgf, batch_state, probe_ok


@dataclass(frozen=True, eq=False)
class SimResult:
    """Point estimates with batch-means standard errors.

    mgf_estimates holds (s, estimate, standard error) per surviving
    probe; probes whose exponent guard tripped appear in failed_probes
    with a note instead.  Batch-level arrays are exposed for pooling and
    diagnostics.  measured_time is simulated (model) time after warmup.
    """

    config: SimConfig
    mean_aoi: float
    mean_se: float
    second_moment_aoi: float
    second_se: float
    mgf_estimates: tuple[tuple[float, float, float], ...]
    failed_probes: tuple[tuple[float, str], ...]
    state_occupancy: np.ndarray
    state_occupancy_se: np.ndarray
    measured_time: float
    events_processed: int
    batch_time: np.ndarray
    batch_mean: np.ndarray
    batch_second: np.ndarray
    batch_mgf: np.ndarray
    meta: dict = field(repr=False)

    def __post_init__(self) -> None:
        for name in (
            "state_occupancy",
            "state_occupancy_se",
            "batch_time",
            "batch_mean",
            "batch_second",
            "batch_mgf",
        ):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def to_dict(self) -> dict:
        """JSON-ready dict; deterministic for a fixed config and seed."""
        cfg = self.config
        return {
            "config": {
                "lambda1": cfg.params.lambda1,
                "lambda2": cfg.params.lambda2,
                "mu": cfg.params.mu,
                "policy": cfg.policy.value,
                "seed": cfg.seed,
                "horizon_events": cfg.horizon_events,
                "warmup_fraction": cfg.warmup_fraction,
                "batch_count": cfg.batch_count,
                "s_probes": list(cfg.s_probes),
            },
            "mean_aoi": self.mean_aoi,
            "mean_se": self.mean_se,
            "second_moment_aoi": self.second_moment_aoi,
            "second_se": self.second_se,
            "mgf_estimates": [list(row) for row in self.mgf_estimates],
            "failed_probes": [list(row) for row in self.failed_probes],
            "state_occupancy": self.state_occupancy.tolist(),
            "state_occupancy_se": self.state_occupancy_se.tolist(),
            "measured_time": self.measured_time,
            "events_processed": self.events_processed,
            "meta": self.meta,
        }


def _batch_se(batch_values: np.ndarray) -> float:
    return float(np.std(batch_values, ddof=1) / math.sqrt(len(batch_values)))


def _column_se(batch_matrix: np.ndarray) -> np.ndarray:
    return np.std(batch_matrix, ddof=1, axis=0) / math.sqrt(batch_matrix.shape[0])


def _assemble(
    config: SimConfig,
    batch_time: np.ndarray,
    batch_age: np.ndarray,
    batch_age2: np.ndarray,
    batch_emgf: np.ndarray,
    batch_state: np.ndarray,
    probe_ok: np.ndarray,
    probes: tuple[float, ...],
    events_processed: int,
    meta: dict,
) -> SimResult:
    total_time = float(batch_time.sum())
    batch_mean = batch_age / batch_time
    batch_second = batch_age2 / batch_time
    batch_mgf = batch_emgf / batch_time[:, None]
    mgf_rows = []
    failed = []
    for k, s in enumerate(probes):
        if probe_ok[k]:
            est = float(batch_emgf[:, k].sum() / total_time)
            mgf_rows.append((s, est, _batch_se(batch_mgf[:, k])))
        else:
            failed.append(
                (s, f"exponent overflow guard tripped (s * age > {_EXP_GUARD:.0f})")
            )
    occupancy = batch_state.sum(axis=0) / total_time
    occupancy_se = _column_se(batch_state / batch_time[:, None])
    return SimResult(
        config=config,
        mean_aoi=float(batch_age.sum() / total_time),
        mean_se=_batch_se(batch_mean),
        second_moment_aoi=float(batch_age2.sum() / total_time),
        second_se=_batch_se(batch_second),
        mgf_estimates=tuple(mgf_rows),
        failed_probes=tuple(failed),
        state_occupancy=occupancy,
        state_occupancy_se=occupancy_se,
        measured_time=total_time,
        events_processed=events_processed,
        batch_time=batch_time,
        batch_mean=batch_mean,
        batch_second=batch_second,
        batch_mgf=batch_mgf,
        meta=meta,
    )


def _draw_and_run(config: SimConfig, seed_key) -> tuple:
    rng = np.random.default_rng(seed_key)
    n = config.events_processed
    # fixed draw order: event-type uniforms first, then holding times
    u_pick = rng.random(n)
    exp_unit = rng.standard_exponential(n, method="inv")
    p = config.params
    return _run_kernel(
        u_pick,
        exp_unit,
        p.lambda1,
        p.lambda2,
        p.mu,
        config.policy is Policy.SELF_PREEMPTIVE,
        np.asarray(config.s_probes, dtype=float),
        1.0 / p.lambda1 + 1.0 / p.mu,
        config.warmup_events,
        config.batch_events,
        config.batch_count,
    )


def _base_meta(config: SimConfig) -> dict:
    import numba

    return {
        "generator": "PCG64",
        "exponential_sampling": "inverse-CDF",
        "numpy_version": np.__version__,
        "numba_version": numba.__version__,
        "warmup_events": config.warmup_events,
        "batch_events": config.batch_events,
    }


def simulate(config: SimConfig) -> SimResult:
    """One simulation run seeded directly from config.seed."""
    out = _draw_and_run(config, config.seed)
    meta = _base_meta(config)
    meta["replications"] = 1
    meta["streams"] = [config.seed]
    return _assemble(
        config, *out, config.s_probes, config.events_processed, meta
    )


def simulate_replications(config: SimConfig, count: int) -> SimResult:
    """Pooled estimate over independent replications of the same config.

    Replication 0 uses config.seed itself, so count=1 reproduces
    simulate(config) exactly; replication i >= 1 seeds the generator
    with the key (config.seed, i).  Estimates pool the grand totals and
    the standard errors pool all count * batch_count batch means.
    """
    if not isinstance(count, int) or isinstance(count, bool) or count < 1:
        raise ParameterError(f"replication count must be a positive integer, got {count!r}")
    if count == 1:
        return simulate(config)
    times, ages, ages2, emgfs, states = [], [], [], [], []
    ok = np.ones(len(config.s_probes), dtype=bool)
    streams: list = []
    for i in range(count):
        key = config.seed if i == 0 else (config.seed, i)
        streams.append(key if i == 0 else list(key))
        bt, ba, ba2, be, bs, pok = _draw_and_run(config, key)
        times.append(bt)
        ages.append(ba)
        ages2.append(ba2)
        emgfs.append(be)
        states.append(bs)
        ok &= pok
    meta = _base_meta(config)
    meta["replications"] = count
    meta["streams"] = streams
    return _assemble(
        config,
        np.concatenate(times),
        np.concatenate(ages),
        np.concatenate(ages2),
        np.concatenate(emgfs),
        np.concatenate(states),
        ok,
        config.s_probes,
        count * config.events_processed,
        meta,
    )
