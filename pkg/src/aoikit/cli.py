"""Command-line interface.

Subcommands: analyze (MGF curve, oracle vs printed closed form), moments
(mean/second moment/variance/std), sweep (rate split sweep at a fixed
total rate), simulate (Monte Carlo), validate (cross-engine audit).

Conventions: delimited output carries a '# config:' echo line with every
effective input; reals are formatted with 17 significant digits; --out -
or omitting --out writes to stdout.  analyze and sweep render a PNG
figure next to a file output unless --no-plot is given.  Identical
invocations produce byte-identical outputs.

Exit codes: 0 success, 1 usage or parameter error, 2 admissible-domain
error, 3 solver or internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .closedform import EvalPoint, printed_mgf
from .errors import AoikitError, DomainError, ParameterError
from .model import Policy, SystemParams, build_chain
from .moments import summarize
from .simulate import SimConfig, simulate_replications
from .solver import admissible_bound, default_s_grid, mgf_curve
from .validate import run_validation

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; this toolkit reserves 2
    # for domain errors, so route usage problems through exit code 1
    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(f"{self.prog}: error: {message}")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _echo_line(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True)


def _write_text(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _figure_path(out: str) -> str:
    return str(Path(out).with_suffix(".png"))


def _add_system_args(p: argparse.ArgumentParser, with_policy: bool = True) -> None:
    p.add_argument("--lambda1", type=float, required=True, help="source-1 arrival rate")
    p.add_argument(
        "--lambda2", type=float, required=True, help="source-2 arrival rate (0 allowed)"
    )
    p.add_argument("--mu", type=float, required=True, help="service rate")
    if with_policy:
        p.add_argument(
            "--policy",
            required=True,
            help="packet management policy: self-preemptive or non-preemptive",
        )


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="aoikit",
        description="Age-of-information analysis of a two-source status-update queue",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "analyze", parents=[], help="MGF curve: numeric oracle vs printed closed form"
    )
    _add_system_args(p)
    p.add_argument("--s-min", type=float, default=None, help="lowest s (default -2*mu)")
    p.add_argument(
        "--s-max",
        type=float,
        default=None,
        help="highest s (default 0.9*s0; must stay below s0)",
    )
    p.add_argument("--s-steps", type=int, default=101, help="number of grid points")
    p.add_argument("--out", default=None, help="CSV path, or - for stdout")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    p = sub.add_parser("moments", help="mean, second moment, variance, std of the age")
    _add_system_args(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output path, or - for stdout")

    p = sub.add_parser(
        "sweep", help="sweep the rate split at a fixed total arrival rate"
    )
    p.add_argument("--mu", type=float, default=1.0, help="service rate")
    p.add_argument(
        "--lambda-total", type=float, default=5.0, help="total arrival rate to split"
    )
    p.add_argument("--steps", type=int, default=49, help="number of interior split points")
    p.add_argument(
        "--policy",
        default="both",
        help="self-preemptive, non-preemptive, or both (default both)",
    )
    p.add_argument("--out", default=None, help="CSV path, or - for stdout")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    p = sub.add_parser("simulate", help="Monte Carlo simulation of the physical queue")
    _add_system_args(p)
    p.add_argument("--seed", type=int, default=12345)
    p.add_argument("--events", type=int, default=1_000_000, help="events per replication")
    p.add_argument("--batches", type=int, default=20, help="batch count for error bars")
    p.add_argument("--warmup-fraction", type=float, default=0.1)
    p.add_argument(
        "--s-probe",
        type=float,
        action="append",
        default=None,
        help="MGF argument to sample (repeatable)",
    )
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None, help="output path, or - for stdout")

    p = sub.add_parser("validate", help="cross-engine audit with a discrepancy report")
    p.add_argument(
        "--sim-events",
        type=int,
        default=1_000_000,
        help="simulation events per grid point (0 skips simulation checks)",
    )
    p.add_argument("--seed", type=int, default=20260817)
    p.add_argument("--out", default=None, help="JSON report path (table prints to stdout)")

    return parser


def _parse_params(args: argparse.Namespace) -> SystemParams:
    return SystemParams(lambda1=args.lambda1, lambda2=args.lambda2, mu=args.mu)


def _cmd_analyze(args: argparse.Namespace) -> int:
    params = _parse_params(args)
    policy = Policy.parse(args.policy)
    s0 = admissible_bound(params)
    grid_default = default_s_grid(params, 2)
    s_min = args.s_min if args.s_min is not None else float(grid_default[0])
    s_max = args.s_max if args.s_max is not None else float(grid_default[-1])
    if args.s_steps < 2:
        raise _UsageError(f"--s-steps must be at least 2, got {args.s_steps}")
    if not (np.isfinite(s_min) and np.isfinite(s_max)) or s_min > s_max:
        raise _UsageError(f"invalid s range [{_fmt(s_min)}, {_fmt(s_max)}]")
    if s_max >= s0:
        raise _UsageError(
            f"inadmissible s range: --s-max={_fmt(s_max)} must stay below s0={_fmt(s0)}"
        )
    s_values = np.linspace(s_min, s_max, args.s_steps)
    chain = build_chain(policy, params)
    oracle = mgf_curve(chain, s_values)
    printed = np.array(
        [printed_mgf(policy, EvalPoint.from_s(params, float(s))) for s in s_values]
    )
    rel = np.abs(printed - oracle) / np.abs(oracle)
    config = {
        "command": "analyze",
        "policy": policy.value,
        "lambda1": params.lambda1,
        "lambda2": params.lambda2,
        "mu": params.mu,
        "s_min": s_min,
        "s_max": s_max,
        "s_steps": args.s_steps,
        "s0": s0,
    }
    lines = [_echo_line(config), "s,sBar,mgf_oracle,mgf_printed,relError"]
    for s, o, pr, r in zip(s_values, oracle, printed, rel):
        lines.append(
            ",".join((_fmt(s), _fmt(s / params.mu), _fmt(o), _fmt(pr), _fmt(r)))
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out not in (None, "-") and not args.no_plot:
        from .plots import save_mgf_curve_figure

        save_mgf_curve_figure(
            _figure_path(args.out),
            s_values,
            oracle,
            printed,
            f"{policy.value}: lambda1={params.lambda1:g}, "
            f"lambda2={params.lambda2:g}, mu={params.mu:g}",
        )
    return 0


def _cmd_moments(args: argparse.Namespace) -> int:
    params = _parse_params(args)
    policy = Policy.parse(args.policy)
    ms = summarize(build_chain(policy, params))
    config = {
        "command": "moments",
        "policy": policy.value,
        "lambda1": params.lambda1,
        "lambda2": params.lambda2,
        "mu": params.mu,
    }
    if args.format == "json":
        payload = {
            "config": config,
            "result": {
                "mean": ms.mean,
                "second_moment": ms.second_moment,
                "variance": ms.variance,
                "std_dev": ms.std_dev,
                "source_of_truth": ms.source_of_truth,
            },
        }
        _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        lines = [
            _echo_line(config),
            "mean,second_moment,variance,std_dev",
            ",".join(
                (_fmt(ms.mean), _fmt(ms.second_moment), _fmt(ms.variance), _fmt(ms.std_dev))
            ),
        ]
        _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _sweep_policies(raw: str) -> tuple[Policy, ...]:
    if raw.strip().lower() == "both":
        return (Policy.SELF_PREEMPTIVE, Policy.NON_PREEMPTIVE)
    return (Policy.parse(raw),)


def _cmd_sweep(args: argparse.Namespace) -> int:
    if args.steps < 1:
        raise _UsageError(f"--steps must be at least 1, got {args.steps}")
    if not args.lambda_total > 0:
        raise _UsageError(f"--lambda-total must be positive, got {args.lambda_total}")
    policies = _sweep_policies(args.policy)
    total = float(args.lambda_total)
    splits = [total * i / (args.steps + 1) for i in range(1, args.steps + 1)]
    config = {
        "command": "sweep",
        "mu": args.mu,
        "lambda_total": total,
        "steps": args.steps,
        "policy": args.policy if len(policies) > 1 else policies[0].value,
    }
    lines = [
        _echo_line(config),
        "lambda1,policy,mean_oracle,second_oracle,std_oracle,mean_plus_std,mean_minus_std",
    ]
    groups = {}
    for policy in policies:
        lam1_arr, mean_arr, std_arr = [], [], []
        for lam1 in splits:
            params = SystemParams(lambda1=lam1, lambda2=total - lam1, mu=args.mu)
            ms = summarize(build_chain(policy, params))
            lines.append(
                ",".join(
                    (
                        _fmt(lam1),
                        policy.value,
                        _fmt(ms.mean),
                        _fmt(ms.second_moment),
                        _fmt(ms.std_dev),
                        _fmt(ms.mean + ms.std_dev),
                        _fmt(ms.mean - ms.std_dev),
                    )
                )
            )
            lam1_arr.append(lam1)
            mean_arr.append(ms.mean)
            std_arr.append(ms.std_dev)
        groups[policy.value] = (
            np.array(lam1_arr),
            np.array(mean_arr),
            np.array(std_arr),
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if args.out not in (None, "-") and not args.no_plot:
        from .plots import save_sweep_figure

        save_sweep_figure(
            _figure_path(args.out),
            groups,
            f"age vs rate split at lambda1+lambda2={total:g}, mu={args.mu:g}",
        )
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    params = _parse_params(args)
    policy = Policy.parse(args.policy)
    probes = tuple(args.s_probe) if args.s_probe else ()
    config = SimConfig(
        params=params,
        policy=policy,
        seed=args.seed,
        horizon_events=args.events,
        warmup_fraction=args.warmup_fraction,
        batch_count=args.batches,
        s_probes=probes,
    )
    if not isinstance(args.replications, int) or args.replications < 1:
        raise _UsageError(f"--replications must be a positive integer, got {args.replications}")
    result = simulate_replications(config, args.replications)
    if args.format == "json":
        payload = {"schema": "aoikit.simulate/1", **result.to_dict()}
        payload["config"]["replications"] = args.replications
        _write_text(args.out, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    else:
        echo = dict(result.to_dict()["config"])
        echo["command"] = "simulate"
        echo["replications"] = args.replications
        echo["s_probes"] = list(probes)
        lines = [_echo_line(echo), "metric,s,estimate,standard_error"]
        lines.append(",".join(("mean_aoi", "", _fmt(result.mean_aoi), _fmt(result.mean_se))))
        lines.append(
            ",".join(
                (
                    "second_moment_aoi",
                    "",
                    _fmt(result.second_moment_aoi),
                    _fmt(result.second_se),
                )
            )
        )
        for s, est, se in result.mgf_estimates:
            lines.append(",".join(("mgf", _fmt(s), _fmt(est), _fmt(se))))
        for s, _note in result.failed_probes:
            lines.append(",".join(("mgf_probe_failed", _fmt(s), "nan", "nan")))
        _write_text(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    if args.sim_events < 0:
        raise _UsageError(f"--sim-events must be >= 0, got {args.sim_events}")
    report = run_validation(sim_events=args.sim_events, seed=args.seed)
    sys.stdout.write(report.to_table() + "\n")
    if args.out not in (None, "-"):
        Path(args.out).write_text(report.to_json() + "\n")
    return 0


_COMMANDS = {
    "analyze": _cmd_analyze,
    "moments": _cmd_moments,
    "sweep": _cmd_sweep,
    "simulate": _cmd_simulate,
    "validate": _cmd_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 1
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return 2
    except AoikitError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
