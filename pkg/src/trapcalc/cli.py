"""Command-line surface: reproducible CSV/JSON artifacts.

Exit codes: 0 success, 2 usage error, 3 numeric failure, 4 nonconvergence,
5 truncation risk. CSV floats use 17-significant-digit scientific notation;
identical flags (and seed) reproduce identical bytes. JSON artifacts
validate against the schema files shipped under trapcalc/schemas/.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from ._kernels import BACKEND
from .coherent import HusimiGrid, husimi_q
from .crystal import CrystalPotentialSpec, find_equilibrium
from .dicke import (
    DickeConfig,
    dicke_initial_state,
    dicke_trajectory,
    driven_coherence_check,
)
from .errors import (
    FrameSingularityError,
    InvalidPolicyError,
    NonconvergenceError,
    NumericError,
    QuadratureError,
    ShapeMismatchError,
    TruncationRiskError,
    UnstableSystemError,
    UnsupportedConfigurationError,
)
from .fock import TruncationPolicy
from .floquet import (
    TrapConfig,
    mathieu_hill,
    mathieu_parameters,
    mathieu_stability_scan,
    monodromy,
    thread_budget,
)
from .squeeze import (
    GeneralizedSqueezedLabel,
    classical_moments,
    expectation_generators,
    generalized_squeezed_state,
    moment_comparison,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_NONCONVERGENCE = 4
EXIT_TRUNCATION = 5

_USAGE_ERRORS = (
    ValueError,
    InvalidPolicyError,
    ShapeMismatchError,
    UnsupportedConfigurationError,
)
_NUMERIC_ERRORS = (
    NumericError,
    QuadratureError,
    FrameSingularityError,
    UnstableSystemError,
)


def _sci(x) -> str:
    """Fixed 17-significant-digit scientific rendering; nan/None -> 'nan'."""
    if x is None:
        return "nan"
    xf = float(x)
    if math.isnan(xf):
        return "nan"
    return f"{xf:.16e}"


def _bool_str(b) -> str:
    return "true" if b else "false"


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _write_lines(path: str, lines) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def _write_json(path: str, payload: dict) -> None:
    with open(path, "w", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _complex_arg(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"expected 're,im', got {text!r}"
        )
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def parse_trap_config(path: str) -> TrapConfig:
    """Flat `key = value` file; keys match TrapConfig fields plus `kind`."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(
                    f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}"
                )
            key, _, val = line.partition("=")
            key = key.strip()
            val = val.strip()
            if key == "kind":
                values[key] = val
            elif key in ("U0", "V0", "Omega", "r0", "z0", "B0", "Q", "mass"):
                values[key] = float(val)
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    if "kind" not in values:
        raise ValueError(f"{path}: missing required key 'kind'")
    return TrapConfig(**values)


def _drive_arg(text: str):
    """Drive spec: 'zero' | 'const:re,im' | 'sin:amp,freq[,phase]'."""
    if text == "zero":
        return text, lambda t: 0.0 + 0.0j
    head, _, rest = text.partition(":")
    try:
        if head == "const":
            lam = _complex_arg(rest)
            return text, lambda t, _l=lam: _l
        if head == "sin":
            parts = [float(p) for p in rest.split(",")]
            if len(parts) == 2:
                amp, freq, phase = parts[0], parts[1], 0.0
            elif len(parts) == 3:
                amp, freq, phase = parts
            else:
                raise ValueError("sin drive takes amp,freq[,phase]")
            return text, lambda t, _a=amp, _f=freq, _p=phase: complex(
                _a * math.sin(_f * t + _p)
            )
    except (ValueError, argparse.ArgumentTypeError) as exc:
        raise argparse.ArgumentTypeError(f"bad drive spec {text!r}: {exc}")
    raise argparse.ArgumentTypeError(
        f"unknown drive kind {head!r} (want zero | const:re,im | sin:amp,freq[,phase])"
    )


# ---------------------------------------------------------------- commands


def cmd_stability_scan(args) -> int:
    if args.trap is not None:
        grid_flags = [args.a_min, args.a_max, args.q_min, args.q_max]
        if any(f is not None for f in grid_flags):
            raise ValueError("--trap and the a/q grid flags are mutually exclusive")
        cfg = parse_trap_config(args.trap)
        axes = ["axial", "radial"] if args.axis == "both" else [args.axis]
        lines = ["axis,a,q,trace,mu,stable"]
        axis_rows = []
        n_stable = n_marginal = 0
        for axis in axes:
            a, q = mathieu_parameters(cfg, axis, args.rotating_frame)
            res = monodromy(mathieu_hill(a, q), steps=args.steps)
            lines.append(
                f"{axis},{_sci(a)},{_sci(q)},{_sci(res.trace)},"
                f"{_sci(res.mu)},{_bool_str(res.stable)}"
            )
            axis_rows.append(
                {
                    "axis": axis,
                    "a": a,
                    "q": q,
                    "trace": res.trace,
                    "mu": res.mu,
                    "stable": bool(res.stable),
                    "marginal": bool(res.marginal),
                }
            )
            n_stable += int(res.stable)
            n_marginal += int(res.marginal)
        _write_lines(args.csv, lines)
        if args.json:
            _write_json(
                args.json,
                {
                    "schema": "stability_scan.schema.json",
                    "kind": "trap",
                    "steps": args.steps,
                    "rotating_frame": bool(args.rotating_frame),
                    "axes": axis_rows,
                    "n_points": len(axis_rows),
                    "n_stable": n_stable,
                    "n_marginal": n_marginal,
                    "n_unstable": len(axis_rows) - n_stable - n_marginal,
                    "backend": BACKEND,
                    "threads": thread_budget(),
                },
            )
        return EXIT_OK

    required = {
        "--a-min": args.a_min,
        "--a-max": args.a_max,
        "--q-min": args.q_min,
        "--q-max": args.q_max,
    }
    missing = [k for k, v in required.items() if v is None]
    if missing:
        raise ValueError(f"missing required flags: {' '.join(missing)}")
    if args.na < 1 or args.nq < 1:
        raise ValueError("--na and --nq must be >= 1")
    a_values = np.linspace(args.a_min, args.a_max, args.na)
    q_values = np.linspace(args.q_min, args.q_max, args.nq)
    scan = mathieu_stability_scan(
        a_values, q_values, steps=args.steps, axis_pair=args.axis_pair
    )
    lines = ["a,q,trace,mu,stable"]
    for i in range(args.na):
        for j in range(args.nq):
            lines.append(
                f"{_sci(a_values[i])},{_sci(q_values[j])},"
                f"{_sci(scan.trace[i, j])},{_sci(scan.mu[i, j])},"
                f"{_bool_str(scan.stable[i, j])}"
            )
    _write_lines(args.csv, lines)
    if args.json:
        n_stable = int(np.sum(scan.stable))
        n_marginal = int(np.sum(scan.marginal))
        _write_json(
            args.json,
            {
                "schema": "stability_scan.schema.json",
                "kind": "mathieu",
                "steps": args.steps,
                "axis_pair": bool(args.axis_pair),
                "a_range": [args.a_min, args.a_max],
                "q_range": [args.q_min, args.q_max],
                "na": args.na,
                "nq": args.nq,
                "n_points": args.na * args.nq,
                "n_stable": n_stable,
                "n_marginal": n_marginal,
                "n_unstable": args.na * args.nq - n_stable - n_marginal,
                "backend": BACKEND,
                "threads": thread_budget(),
            },
        )
    return EXIT_OK


def cmd_crystal(args) -> int:
    if args.n < 2:
        raise ValueError("need at least two ions (--n >= 2)")
    if args.preset == "coulomb":
        spec = CrystalPotentialSpec.coulomb(
            args.n, args.d, b=args.b, a=args.a, c=args.c
        )
        pair_weight = args.c
    else:
        if args.d != 1:
            raise ValueError("the calogero preset is one-dimensional (--d 1)")
        spec = CrystalPotentialSpec.calogero(args.n, g=args.g, b=args.b, a=args.a)
        pair_weight = args.g
    result = find_equilibrium(
        spec, seeds=args.seeds, rng_seed=args.seed, tol=args.tol
    )
    positions = result.configuration.y
    order = np.lexsort(tuple(positions[:, k] for k in reversed(range(spec.d))))
    positions = positions[order]

    header = "ion," + ",".join(f"x{k + 1}" for k in range(spec.d))
    lines = [header]
    for i in range(spec.n_ions):
        coords = ",".join(_sci(positions[i, k]) for k in range(spec.d))
        lines.append(f"{i},{coords}")
    _write_lines(args.csv, lines)
    _write_json(
        args.json,
        {
            "schema": "crystal_report.schema.json",
            "preset": args.preset,
            "n_ions": spec.n_ions,
            "d": spec.d,
            "b": spec.b,
            "a": spec.a,
            "pair_weight": pair_weight,
            "seed": args.seed,
            "seeds": args.seeds,
            "tol": args.tol,
            "energy": _json_safe(result.energy),
            "residual": _json_safe(result.residual),
            "hessian_min_eig": _json_safe(result.hessian_min_eig),
            "converged": bool(result.converged),
            "positions": [[float(x) for x in row] for row in positions],
        },
    )
    return EXIT_OK if result.converged else EXIT_NONCONVERGENCE


def cmd_state_report(args) -> int:
    policy = TruncationPolicy(dim=args.dim)
    label = GeneralizedSqueezedLabel(n=args.n, alpha=args.alpha, z=args.z)
    report = classical_moments(
        label, hbar=args.hbar, m=args.m, omega=args.omega, policy=policy
    )
    comparison = moment_comparison(
        label,
        hbar=args.hbar,
        m=args.m,
        omega=args.omega,
        policy=policy,
        flag_tol=args.flag_tol,
    )
    gens = expectation_generators(label)
    husimi_path = None
    if args.husimi_grid is not None:
        if args.husimi_csv is None:
            raise ValueError("--husimi-grid requires --husimi-csv")
        state = generalized_squeezed_state(label, policy)
        grid = HusimiGrid.from_spec(args.husimi_grid)
        values = husimi_q(state, grid)
        re_axis, im_axis = grid.axes
        lines = ["re_alpha,im_alpha,value"]
        for i in range(re_axis.size):
            for j in range(im_axis.size):
                lines.append(
                    f"{_sci(re_axis[i])},{_sci(im_axis[j])},{_sci(values[i, j])}"
                )
        _write_lines(args.husimi_csv, lines)
        husimi_path = args.husimi_csv

    table = {
        key: {
            "closed": _json_safe(row["closed"]),
            "oracle": _json_safe(row["oracle"]),
            "abs_diff": _json_safe(row["abs_diff"]),
            "flagged": bool(row["flagged"]),
        }
        for key, row in comparison.items()
    }
    payload = {
        "schema": "state_report.schema.json",
        "label": {
            "n": args.n,
            "alpha": [args.alpha.real, args.alpha.imag],
            "z": [args.z.real, args.z.imag],
        },
        "policy": {
            "dim": policy.dim,
            "tail_tol": policy.tail_tol,
            "unitary_tol": policy.unitary_tol,
        },
        "units": {"hbar": args.hbar, "m": args.m, "omega": args.omega},
        "report": {
            k: _json_safe(v) for k, v in report.to_dict().items()
        },
        "generator_expectations": {
            k: [v.real, v.imag] for k, v in gens.items()
        },
        "comparison": table,
        "flag_tol": args.flag_tol,
        "any_flagged": any(row["flagged"] for row in table.values()),
        "husimi_csv": husimi_path,
    }
    _write_json(args.json, payload)
    return EXIT_OK


def cmd_dicke_evolve(args) -> int:
    if args.semiclassical:
        if args.drive is None:
            raise ValueError("--semiclassical requires --drive")
        drive_text, drive = args.drive
        policy = TruncationPolicy(dim=args.dim)
        result = driven_coherence_check(
            omega=args.omega,
            drive=drive,
            alpha0=args.alpha0,
            t_final=args.tmax,
            steps=args.steps,
            policy=policy,
            n_report=min(args.steps + 1, 201),
        )
        lines = ["t,re_alpha,im_alpha,infidelity"]
        for t, alpha, infid in zip(result.t, result.alpha, result.infidelity):
            lines.append(
                f"{_sci(t)},{_sci(alpha.real)},{_sci(alpha.imag)},{_sci(infid)}"
            )
        _write_lines(args.csv, lines)
        if args.json:
            _write_json(
                args.json,
                {
                    "schema": "dicke_trajectory.schema.json",
                    "mode": "semiclassical",
                    "omega": args.omega,
                    "alpha0": [args.alpha0.real, args.alpha0.imag],
                    "drive": drive_text,
                    "dim": args.dim,
                    "t_final": args.tmax,
                    "steps": args.steps,
                    "n_rows": len(lines) - 1,
                    "max_infidelity": result.max_infidelity,
                },
            )
        return EXIT_OK

    config = DickeConfig(
        n_ions=args.n_ions,
        omega=args.omega,
        epsilon=args.epsilon,
        coupling=args.lam,
        field_dim=args.field_dim,
    )
    initial = dicke_initial_state(config, alpha=args.alpha0)
    traj = dicke_trajectory(config, initial, args.tmax, args.steps)
    lines = ["t,re_alpha,im_alpha,energy"]
    for k in range(traj["t"].size):
        lines.append(
            f"{_sci(traj['t'][k])},{_sci(traj['alpha'][k].real)},"
            f"{_sci(traj['alpha'][k].imag)},{_sci(traj['energy'][k])}"
        )
    _write_lines(args.csv, lines)
    if args.json:
        energy = traj["energy"]
        excitation = traj["excitation"]
        _write_json(
            args.json,
            {
                "schema": "dicke_trajectory.schema.json",
                "mode": "quantum",
                "omega": args.omega,
                "epsilon": args.epsilon,
                "coupling": [args.lam.real, args.lam.imag],
                "n_ions": args.n_ions,
                "field_dim": args.field_dim,
                "alpha0": [args.alpha0.real, args.alpha0.imag],
                "t_final": args.tmax,
                "steps": args.steps,
                "n_rows": len(lines) - 1,
                "energy_drift": float(np.max(np.abs(energy - energy[0]))),
                "excitation_drift": float(
                    np.max(np.abs(excitation - excitation[0]))
                ),
            },
        )
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trapcalc",
        description="Reproducible trapped-ion numerics: stability scans, "
        "crystal equilibria, state moment reports, field evolution.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser(
        "stability-scan",
        help="Mathieu/Hill stability over an (a, q) grid or a trap config",
        description="Writes CSV rows a,q,trace,mu,stable (grid mode) or "
        "axis,a,q,trace,mu,stable (trap mode). mu is 'nan' when unstable.",
    )
    ps.add_argument("--a-min", type=float, default=None)
    ps.add_argument("--a-max", type=float, default=None)
    ps.add_argument("--na", type=int, default=101, help="grid points along a")
    ps.add_argument("--q-min", type=float, default=None)
    ps.add_argument("--q-max", type=float, default=None)
    ps.add_argument("--nq", type=int, default=101, help="grid points along q")
    ps.add_argument(
        "--axis-pair",
        action="store_true",
        help="require the partner radial equation at (-a/2, -q/2) stable too",
    )
    ps.add_argument("--trap", metavar="FILE", default=None,
                    help="trap config file (key = value lines)")
    ps.add_argument("--axis", choices=["axial", "radial", "both"],
                    default="both", help="trap mode: which axis to report")
    ps.add_argument(
        "--rotating-frame",
        action="store_true",
        help="trap mode: reduce the magnetic cross-term at omega_c/2",
    )
    ps.add_argument("--steps", type=int, default=4096,
                    help="integrator steps per period")
    ps.add_argument("--csv", required=True, help="output CSV path")
    ps.add_argument("--json", default=None, help="optional JSON summary path")
    ps.set_defaults(func=cmd_stability_scan)

    pc = sub.add_parser(
        "crystal",
        help="ion crystal equilibrium search",
        description="Writes positions CSV (ion,x1[,x2[,x3]]) and a JSON "
        "report; exits 4 when the search does not certify a minimum.",
    )
    pc.add_argument("--preset", choices=["coulomb", "calogero"], required=True)
    pc.add_argument("--n", type=int, required=True, help="ion count (>= 2)")
    pc.add_argument("--d", type=int, default=1, choices=[1, 2, 3])
    pc.add_argument("--b", type=float, default=1.0, help="harmonic strength")
    pc.add_argument("--a", type=float, default=1.0, help="pair-term scale")
    pc.add_argument("--c", type=float, default=1.0,
                    help="coulomb pair weight (preset coulomb)")
    pc.add_argument("--g", type=float, default=1.0,
                    help="inverse-square coupling (preset calogero)")
    pc.add_argument("--seed", type=int, default=0, help="multi-start RNG seed")
    pc.add_argument("--seeds", type=int, default=8, help="number of starts")
    pc.add_argument("--tol", type=float, default=1e-10,
                    help="gradient residual target")
    pc.add_argument("--csv", required=True, help="positions CSV path")
    pc.add_argument("--json", required=True, help="JSON report path")
    pc.set_defaults(func=cmd_crystal)

    pr = sub.add_parser(
        "state-report",
        help="moment report for a displaced squeezed number state",
        description="Emits closed-form and matrix-oracle values side by "
        "side with discrepancy flags; optional Husimi CSV "
        "(re_alpha,im_alpha,value).",
    )
    pr.add_argument("--n", type=int, default=0, help="number-state index")
    pr.add_argument("--alpha", type=_complex_arg, default=0j,
                    metavar="RE,IM", help="displacement label")
    pr.add_argument("--z", type=_complex_arg, default=0j,
                    metavar="RE,IM", help="squeeze label, |z| < 1")
    pr.add_argument("--dim", type=int, default=128, help="truncation size")
    pr.add_argument("--hbar", type=float, default=1.0)
    pr.add_argument("--m", type=float, default=1.0)
    pr.add_argument("--omega", type=float, default=1.0)
    pr.add_argument("--flag-tol", type=float, default=1e-8,
                    help="discrepancy flag threshold")
    pr.add_argument(
        "--husimi-grid",
        default=None,
        metavar="SPEC",
        help="Husimi grid 'remin:remax:nre,immin:immax:nim'",
    )
    pr.add_argument("--husimi-csv", default=None,
                    help="Husimi CSV path (with --husimi-grid)")
    pr.add_argument("--json", required=True, help="JSON report path")
    pr.set_defaults(func=cmd_state_report)

    pd = sub.add_parser(
        "dicke-evolve",
        help="evolve the ion-field model or its semiclassical reduction",
        description="Quantum mode writes t,re_alpha,im_alpha,energy; "
        "--semiclassical writes t,re_alpha,im_alpha,infidelity against the "
        "classically propagated coherent label.",
    )
    pd.add_argument("--semiclassical", action="store_true")
    pd.add_argument("--n-ions", type=int, default=1)
    pd.add_argument("--omega", type=float, required=True,
                    help="field mode frequency")
    pd.add_argument("--epsilon", type=float, default=0.0,
                    help="ion level splitting")
    pd.add_argument("--lambda", dest="lam", type=_complex_arg, default=0j,
                    metavar="RE,IM", help="ion-field coupling")
    pd.add_argument("--field-dim", type=int, default=32)
    pd.add_argument("--alpha0", type=_complex_arg, default=0j,
                    metavar="RE,IM", help="initial coherent label")
    pd.add_argument("--drive", type=_drive_arg, default=None,
                    metavar="SPEC",
                    help="zero | const:re,im | sin:amp,freq[,phase]")
    pd.add_argument("--dim", type=int, default=64,
                    help="semiclassical truncation size")
    pd.add_argument("--tmax", type=float, required=True)
    pd.add_argument("--steps", type=int, required=True)
    pd.add_argument("--csv", required=True, help="trajectory CSV path")
    pd.add_argument("--json", default=None, help="optional JSON summary path")
    pd.set_defaults(func=cmd_dicke_evolve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TruncationRiskError as exc:
        print(f"trapcalc: truncation risk: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    except NonconvergenceError as exc:
        print(f"trapcalc: did not converge: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except _NUMERIC_ERRORS as exc:
        print(f"trapcalc: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _USAGE_ERRORS as exc:
        print(f"trapcalc: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"trapcalc: i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
