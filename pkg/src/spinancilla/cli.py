"""Command-line entry point.

Subcommands: quench, sweep, gs-quench, oracle, fit, q-check.  Every run
writes one CSV per parameter point (12 significant digits, fixed column
order) plus a JSON sidecar carrying the config hash and versions, so no
output exists without provenance.  Exit code 0 means every requested point
completed with all hard invariants intact.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, RunConfig, config_hash, load_config, serialize_config
from .entanglement import METRIC_FIELDS, InvariantViolation
from .experiments import (
    SweepSpec,
    finite_size_from_results,
    q_convergence,
    run_sweep,
)
from .hilbert import ConfigurationError, ModelParams
from .oracles import dispersion, displaced_occupation, max_group_velocity, tfic_ground_energy

WORKERS_ENV = "SPINANCILLA_WORKERS"
DENSE_THRESHOLD_ENV = "SPINANCILLA_DENSE_THRESHOLD"


def _format(value: float) -> str:
    """Fixed 12-significant-digit decimal formatting, locale independent."""
    if value == 0.0:
        value = 0.0  # normalize -0.0
    return format(value, ".12g")


def write_metric_csv(path: str, samples) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(METRIC_FIELDS) + "\n")
        for sample in samples:
            fh.write(",".join(_format(getattr(sample, name)) for name in METRIC_FIELDS) + "\n")


def write_sidecar(path: str, config: RunConfig, record, wall_time: float) -> None:
    payload = {
        "config_hash": config_hash(config),
        "code_version": __version__,
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "wall_time_s": wall_time,
        "params": asdict(record.params),
        "provenance": record.provenance,
        "conventions": {
            "entropy_log_base": "e",
            "mi_convention": config.mi_convention,
            "time_unit": "1/|J|",
            "ground_state_tie_break": "most z-polarized configuration",
        },
        "config": serialize_config(config),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def point_basename(L: int, q: int, J: float, h: float, knob: float) -> str:
    return f"point_L{L}_q{q}_J{_format(J)}_h{_format(h)}_l2w{_format(knob)}"


AGGREGATE_FIELDS = (
    ("L", "q", "J", "h", "lambda2_over_omega")
    + tuple(name for name in METRIC_FIELDS if name != "t")
    + ("alpha_x", "r2_x", "alpha_z", "r2_z")
)


def write_aggregate_csv(path: str, results) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(AGGREGATE_FIELDS) + "\n")
        for res in results:
            row = {
                "L": res.L,
                "q": res.record.params.q,
                "J": res.record.params.J,
                "h": res.h,
                "lambda2_over_omega": res.lambda2_over_omega,
                "alpha_x": res.fits["x"].alpha,
                "r2_x": res.fits["x"].r_squared,
                "alpha_z": res.fits["z"].alpha,
                "r2_z": res.fits["z"].r_squared,
            }
            for name in METRIC_FIELDS:
                if name != "t":
                    row[name] = getattr(res.averages, name)
            fh.write(
                ",".join(
                    str(row[k]) if isinstance(row[k], int) else _format(row[k])
                    for k in AGGREGATE_FIELDS
                )
                + "\n"
            )


FINITE_SIZE_FIELDS = (
    "L",
    "S_vN_A",
    "MI_half",
    "alpha_x",
    "alpha_z",
    "s_logL_slope",
    "s_logL_intercept",
    "s_logL_r2",
    "mi_L_slope",
    "mi_L_intercept",
    "mi_L_r2",
)


def write_finite_size_csv(path: str, scan) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(FINITE_SIZE_FIELDS) + "\n")
        for row in scan.rows:
            cells = [str(row["L"])]
            cells += [_format(row[k]) for k in ("S_vN_A", "MI_half", "alpha_x", "alpha_z")]
            cells += [
                _format(getattr(scan, k))
                for k in (
                    "s_logL_slope",
                    "s_logL_intercept",
                    "s_logL_r2",
                    "mi_L_slope",
                    "mi_L_intercept",
                    "mi_L_r2",
                )
            ]
            fh.write(",".join(cells) + "\n")


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="INI config file; flags override its values")
    parser.add_argument("--L", type=int)
    parser.add_argument("--q", type=int)
    parser.add_argument("--J", type=float)
    parser.add_argument("--omega-c", dest="omega_c", type=float)
    parser.add_argument("--t-start", dest="t_start", type=float)
    parser.add_argument("--t-end", dest="t_end", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--avg-from", dest="avg_from", type=float)
    parser.add_argument("--avg-to", dest="avg_to", type=float)
    parser.add_argument("--mi-convention", dest="mi_convention", choices=("eq2", "half"))
    parser.add_argument("--out", dest="out_dir")
    parser.add_argument("--workers", type=int)


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.split(",") if tok.strip())


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in raw.split(",") if tok.strip())


def _config_from_args(args) -> RunConfig:
    config = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    for name in (
        "L",
        "q",
        "J",
        "omega_c",
        "t_start",
        "t_end",
        "dt",
        "avg_from",
        "avg_to",
        "mi_convention",
        "out_dir",
        "workers",
    ):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "h", None) is not None:
        overrides["h_values"] = _float_list(args.h)
    if getattr(args, "lambda2_over_omega", None) is not None:
        overrides["lambda2_over_omega_values"] = _float_list(args.lambda2_over_omega)
    if getattr(args, "L_list", None) is not None:
        overrides["L_values"] = _int_list(args.L_list)
    if getattr(args, "initial_state", None) is not None:
        overrides["initial_state"] = args.initial_state
    if getattr(args, "pre_J", None) is not None:
        overrides["pre_J"] = args.pre_J
    if getattr(args, "pre_h", None) is not None:
        overrides["pre_h"] = args.pre_h
    config = replace(config, **overrides)
    if WORKERS_ENV in os.environ and getattr(args, "workers", None) is None:
        config = replace(config, workers=int(os.environ[WORKERS_ENV]))
    if DENSE_THRESHOLD_ENV in os.environ:
        config = replace(config, dense_threshold=int(os.environ[DENSE_THRESHOLD_ENV]))
    return config


def _sweep_spec(config: RunConfig) -> SweepSpec:
    return SweepSpec(
        h_values=config.h_values,
        lambda2_over_omega_values=config.lambda2_over_omega_values,
        L_values=config.effective_L_values(),
        q=config.q,
        J=config.J,
        omega_c=config.omega_c,
        grid=config.grid(),
        average_window=(config.avg_from, config.avg_to),
        initial_state=config.initial_state,
        pre_J=config.pre_J,
        pre_h=config.pre_h,
    )


def _run_and_write(config: RunConfig):
    spec = _sweep_spec(config)
    os.makedirs(config.out_dir, exist_ok=True)
    started = time.time()
    results = run_sweep(
        spec,
        workers=max(1, config.workers),
        mi_convention=config.mi_convention,
        dense_threshold=config.dense_threshold,
    )
    wall = time.time() - started
    for res in results:
        base = point_basename(res.L, config.q, config.J, res.h, res.lambda2_over_omega)
        write_metric_csv(os.path.join(config.out_dir, base + ".csv"), res.record.samples)
        write_sidecar(os.path.join(config.out_dir, base + ".json"), config, res.record, wall)
    if len(results) > 1:
        write_aggregate_csv(os.path.join(config.out_dir, "sweep_summary.csv"), results)
    for res in results:
        print(
            f"L={res.L} h={_format(res.h)} l2w={_format(res.lambda2_over_omega)}: "
            f"S_A={_format(res.averages.S_vN_A)} MI={_format(res.averages.MI_half)} "
            f"alpha_x={_format(res.fits['x'].alpha)} alpha_z={_format(res.fits['z'].alpha)}"
        )
    return 0, results


def cmd_quench(args) -> int:
    config = _config_from_args(args)
    if len(config.h_values) != 1 or len(config.lambda2_over_omega_values) != 1:
        raise ConfigError("quench runs a single point; use sweep for grids")
    return _run_and_write(config)[0]


def cmd_gs_quench(args) -> int:
    config = _config_from_args(args)
    config = replace(config, initial_state="spin_ground_state")
    if len(config.h_values) != 1 or len(config.lambda2_over_omega_values) != 1:
        raise ConfigError("gs-quench runs a single point; use sweep for grids")
    return _run_and_write(config)[0]


def cmd_sweep(args) -> int:
    config = _config_from_args(args)
    code, results = _run_and_write(config)
    if (
        len({res.L for res in results}) >= 3
        and len(config.h_values) == 1
        and len(config.lambda2_over_omega_values) == 1
    ):
        scan = finite_size_from_results(results)
        write_finite_size_csv(os.path.join(config.out_dir, "finite_size.csv"), scan)
        print(
            f"finite-size: S~lnL slope={_format(scan.s_logL_slope)} r2={_format(scan.s_logL_r2)}; "
            f"MI~L slope={_format(scan.mi_L_slope)} r2={_format(scan.mi_L_r2)}"
        )
    return code


def cmd_oracle(args) -> int:
    kind = args.kind
    if kind == "dispersion":
        ks = _float_list(args.k)
        print("k,epsilon")
        for k in ks:
            print(f"{_format(k)},{_format(dispersion(k, args.h, args.J))}")
    elif kind == "vmax":
        print(_format(max_group_velocity(args.h, args.J)))
    elif kind == "gs-energy":
        print("L,E0")
        for L in _int_list(args.L):
            print(f"{L},{_format(tfic_ground_energy(L, args.h, args.J))}")
    elif kind == "displaced-n":
        params = ModelParams(
            L=args.L_single, q=max(2, args.L_single + 1), omega_c=args.omega, lam=args.lam, J=0.0
        )
        print("t,n")
        for t in _float_list(args.t):
            print(f"{_format(t)},{_format(displaced_occupation(t, args.m, params))}")
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown oracle kind {kind!r}")
    return 0


def cmd_fit(args) -> int:
    data = np.genfromtxt(args.csv, delimiter=",", names=True)
    names = data.dtype.names
    needed = ("t", "S_vN_A", f"MEL_S{args.axis}")
    for name in needed:
        if name not in names:
            raise ConfigError(f"column {name!r} missing from {args.csv}")
    t = data["t"]
    lo = args.fit_from if args.fit_from is not None else float(t[0])
    hi = args.fit_to if args.fit_to is not None else float(t[-1])
    mask = (t >= lo - 1e-9) & (t <= hi + 1e-9)
    x = np.expm1(data["S_vN_A"][mask])
    y = data[f"MEL_S{args.axis}"][mask]
    sxx = float(x @ x)
    if sxx < 1e-20 or float(np.max(np.abs(x))) < 1e-10:
        print("fit undefined: entropy series is flat at zero")
        return 0
    alpha = float(x @ y) / sxx
    ss_res = float(np.sum((y - alpha * x) ** 2))
    ss_tot = float(np.sum(y**2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else float("nan")
    print(f"axis={args.axis} window=[{_format(lo)},{_format(hi)}]")
    print(f"alpha={_format(alpha)}")
    print(f"r2={_format(r2)}")
    return 0


def cmd_q_check(args) -> int:
    config = _config_from_args(args)
    if len(config.h_values) != 1 or len(config.lambda2_over_omega_values) != 1:
        raise ConfigError("q-check runs a single point")
    from .experiments import lambda_from_knob

    params = ModelParams(
        L=config.L,
        q=config.q,
        J=config.J,
        h=config.h_values[0],
        omega_c=config.omega_c,
        lam=lambda_from_knob(config.lambda2_over_omega_values[0], config.omega_c),
    )
    report = q_convergence(
        params,
        config.grid(),
        initial=config.initial_state,
        dense_threshold=config.dense_threshold,
    )
    print(f"q={report.q_low} vs q={report.q_high} (threshold {_format(report.threshold)})")
    for name, dev in sorted(report.deviations.items()):
        print(f"{name},{_format(dev)}")
    print(f"converged={'yes' if report.converged else 'no'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinancilla",
        description="Quench dynamics of an Ising chain coupled to a central bosonic ancilla",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    quench = sub.add_parser("quench", help="run one quench from the polarized state")
    _add_common_flags(quench)
    quench.add_argument("--h", help="transverse field (single value)")
    quench.add_argument(
        "--lambda2-over-omega", dest="lambda2_over_omega", help="coupling knob lam^2/omega_c"
    )
    quench.set_defaults(func=cmd_quench)

    gs = sub.add_parser("gs-quench", help="run one quench from the chain ground state")
    _add_common_flags(gs)
    gs.add_argument("--h", help="post-quench transverse field")
    gs.add_argument("--lambda2-over-omega", dest="lambda2_over_omega")
    gs.add_argument("--pre-J", dest="pre_J", type=float, help="pre-quench exchange (default: post J)")
    gs.add_argument("--pre-h", dest="pre_h", type=float, help="pre-quench field (default: post h)")
    gs.set_defaults(func=cmd_gs_quench)

    sweep = sub.add_parser("sweep", help="run a parameter grid and an aggregate table")
    _add_common_flags(sweep)
    sweep.add_argument("--h", help="comma list of fields")
    sweep.add_argument("--lambda2-over-omega", dest="lambda2_over_omega", help="comma list")
    sweep.add_argument("--L-list", dest="L_list", help="comma list of system sizes")
    sweep.add_argument("--initial-state", dest="initial_state", choices=("polarized", "spin_ground_state"))
    sweep.add_argument("--pre-J", dest="pre_J", type=float)
    sweep.add_argument("--pre-h", dest="pre_h", type=float)
    sweep.set_defaults(func=cmd_sweep)

    oracle = sub.add_parser("oracle", help="print closed-form reference values")
    oracle.add_argument("kind", choices=("dispersion", "vmax", "gs-energy", "displaced-n"))
    oracle.add_argument("--h", type=float, default=0.0)
    oracle.add_argument("--J", type=float, default=1.0)
    oracle.add_argument("--k", default="0.0", help="comma list of momenta (dispersion)")
    oracle.add_argument("--L", default="8", help="comma list of sizes (gs-energy)")
    oracle.add_argument("--L-single", dest="L_single", type=int, default=4)
    oracle.add_argument("--lambda", dest="lam", type=float, default=0.0)
    oracle.add_argument("--omega", type=float, default=0.5)
    oracle.add_argument("--m", type=float, default=0.0)
    oracle.add_argument("--t", default="0.0", help="comma list of times (displaced-n)")
    oracle.set_defaults(func=cmd_oracle)

    fit = sub.add_parser("fit", help="re-fit MEL against e^S - 1 from an existing CSV")
    fit.add_argument("csv")
    fit.add_argument("--axis", choices=("x", "z"), default="x")
    fit.add_argument("--from", dest="fit_from", type=float)
    fit.add_argument("--to", dest="fit_to", type=float)
    fit.set_defaults(func=cmd_fit)

    qcheck = sub.add_parser("q-check", help="compare metrics at q against 2q")
    _add_common_flags(qcheck)
    qcheck.add_argument("--h", help="transverse field (single value)")
    qcheck.add_argument("--lambda2-over-omega", dest="lambda2_over_omega")
    qcheck.set_defaults(func=cmd_q_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ConfigurationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
