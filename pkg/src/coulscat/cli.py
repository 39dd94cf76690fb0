"""Command-line front end.

Commands reproduce the headline data sets (delta profiles, angular curves,
conservation checks, optical-theorem ratio, energy scans, per-l table dumps)
and emit CSV or JSON for external plotting.  CSV bodies are deterministic:
17 significant digits, no timestamps (the JSON envelope carries one).

Exit status: 0 success, 2 configuration error, 3 tolerance breach,
4 resource limit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import acceptance, observables, partialwave, scan
from .errors import ResourceLimitError
from .kinematics import (
    ALPHA_PARTICLE_MASS_MEV,
    DEFAULT_UNITS,
    build_scenario,
    build_scenario_from_eta,
)
from .partialwave import PhaseShiftModel

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_RESOURCE = 4

_MODEL_CHOICES = ("coulomb-exact", "coulomb-asym", "square-well")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(path, header: str, rows) -> None:
    out = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8")
    try:
        out.write(header + "\n")
        for row in rows:
            out.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row))
            out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _write_json(path, payload: dict) -> None:
    payload = dict(payload)
    payload["generated_unix"] = time.time()
    out = sys.stdout if path in (None, "-") else open(path, "w", encoding="utf-8")
    try:
        json.dump(payload, out)
        out.write("\n")
    finally:
        if out is not sys.stdout:
            out.close()


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key=value file; flags override it")
    parser.add_argument("--Z1", type=int, default=79)
    parser.add_argument("--Z2", type=int, default=2)
    parser.add_argument("--mass-mev", type=float, default=ALPHA_PARTICLE_MASS_MEV)
    energy = parser.add_mutually_exclusive_group()
    energy.add_argument("--energy-kev", type=float)
    energy.add_argument("--energy-mev", type=float)
    energy.add_argument("--eta", type=float)
    parser.add_argument("--eps", type=float, default=1e-3)
    parser.add_argument("--model", choices=_MODEL_CHOICES, default="coulomb-exact")
    parser.add_argument("--tail-tol", type=float)
    parser.add_argument("--l-max", type=int)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", help="output path ('-' or omitted = stdout)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--well-depth-mev", type=float, default=0.5)
    parser.add_argument("--well-radius-fm", type=float)


def _scenario_from_args(args):
    n_energy = sum(x is not None for x in (args.energy_kev, args.energy_mev, args.eta))
    if n_energy == 0:
        raise ValueError("specify one of --energy-kev, --energy-mev or --eta")
    if args.eta is not None:
        return build_scenario_from_eta(args.eta, args.eps, Z1=args.Z1, Z2=args.Z2,
                                       m0=args.mass_mev)
    e_mev = args.energy_mev if args.energy_mev is not None else args.energy_kev * 1e-3
    return build_scenario(args.Z1, args.Z2, args.mass_mev, e_mev, args.eps)


def _model_from_args(args, scenario) -> PhaseShiftModel:
    if args.model == "coulomb-exact":
        return PhaseShiftModel.coulomb_exact()
    if args.model == "coulomb-asym":
        return PhaseShiftModel.coulomb_asymptotic()
    if args.well_radius_fm is None:
        raise ValueError("square-well model requires --well-radius-fm")
    radius = DEFAULT_UNITS.fm_to_length(args.well_radius_fm)
    l_max = args.l_max if args.l_max is not None else partialwave.choose_l_max(
        scenario.eps, args.tail_tol)
    return partialwave.square_well_phase_shifts(args.well_depth_mev, radius,
                                                scenario, l_max)


def _table_from_args(args):
    scenario = _scenario_from_args(args)
    model = _model_from_args(args, scenario)
    table = partialwave.build_table(scenario, model, tail_tol=args.tail_tol,
                                    l_max=args.l_max)
    return scenario, table


def cmd_profile_delta(args) -> int:
    if args.theta is None:
        raise ValueError("profile-delta requires --theta (flag or config file)")
    scenario, table = _table_from_args(args)
    lo, hi = observables.default_delta_range(table)
    if args.delta_min is not None:
        lo = min(args.delta_min, -8.0)
    if args.delta_max is not None:
        hi = max(args.delta_max, 8.0)
    # honor the requested step exactly; stretch the upper bound to fit
    n = int(math.ceil((hi - lo) / args.delta_step))
    hi = lo + n * args.delta_step
    n += 1
    grid = scan.GridSpec(args.theta, args.theta, 1, lo, hi, n)
    field = scan.sweep(table, grid, scan.Quantity.PROBABILITY, workers=args.workers)
    deltas = grid.deltas
    probs = field.values[0]
    prof = observables.delta_profile(table, [args.theta], delta_range=(lo, hi),
                                     coarse_n=n)
    if args.format == "csv":
        _write_rows(args.out, "delta,probability",
                    [(float(d), float(p)) for d, p in zip(deltas, probs)])
    else:
        _write_json(args.out, {
            "command": "profile-delta", "theta": args.theta, "eta": scenario.eta,
            "eps": scenario.eps, "delta": [float(d) for d in deltas],
            "probability": [float(p) for p in probs],
            "delta_max": float(prof.delta_max[0]), "p_max": float(prof.p_max[0]),
        })
    summary_to = sys.stdout if args.out not in (None, "-") else sys.stderr
    print(f"theta={args.theta:g} eta={scenario.eta:g}: "
          f"delta_max={prof.delta_max[0]:+.4f} p_max={prof.p_max[0]:.6e}",
          file=summary_to)
    return EXIT_OK


def cmd_angular(args) -> int:
    scenario, table = _table_from_args(args)
    thetas = np.linspace(args.theta_min, args.theta_max, args.theta_n)
    if args.delta == "auto":
        prof = observables.delta_profile(table, thetas)
        deltas = np.asarray(prof.delta_max)
        probs = np.asarray(prof.p_max)
    else:
        dval = float(args.delta)
        grid = scan.GridSpec(args.theta_min, args.theta_max, args.theta_n,
                             dval, dval, 1)
        field = scan.sweep(table, grid, scan.Quantity.PROBABILITY,
                           workers=args.workers)
        deltas = np.full(thetas.size, dval)
        probs = field.values[:, 0]
    pref = 1.0 / (16.0 * scenario.eps ** 4 * scenario.p ** 2)
    rows = []
    for t, d, p in zip(thetas, deltas, probs):
        if t > 0.0:
            ruth_p = observables.rutherford_probability(scenario, float(t))
            ruth_d = observables.rutherford_dcs(scenario, float(t))
            ratio = float(p) / ruth_p if ruth_p > 0.0 else 0.0
        else:
            # the Rutherford reference diverges in the forward direction
            ruth_p = math.inf
            ruth_d = math.inf
            ratio = 0.0
        rows.append((float(t), float(p), ruth_p, float(p) * pref, ruth_d, ratio))
    if args.format == "csv":
        _write_rows(args.out, "theta,probability,rutherford_probability,dcs,"
                              "rutherford_dcs,ratio", rows)
    else:
        _write_json(args.out, {
            "command": "angular", "eta": scenario.eta, "eps": scenario.eps,
            "columns": ["theta", "probability", "rutherford_probability",
                        "dcs", "rutherford_dcs", "ratio"],
            "rows": [[float(v) for v in row] for row in rows],
        })
    return EXIT_OK


def cmd_conservation(args) -> int:
    scenario, table = _table_from_args(args)
    wsum = observables.conservation_weight_sum(table)
    thetas = observables.midpoint_thetas(args.sphere_n)
    prof = observables.delta_profile(table, thetas)
    sphere = observables.probability_sphere_integral(table, prof)
    # the sum rule holds to O(eps^2); 1e-5 is the eps = 1e-3 allowance
    wsum_tol = max(1e-5, scenario.eps ** 2)
    wsum_ok = abs(wsum - 1.0) <= wsum_tol
    sphere_ok = abs(sphere - 1.0) <= 0.01
    print(f"weight sum        = {wsum:.9f}  (|.-1| <= {wsum_tol:g}: "
          f"{'ok' if wsum_ok else 'BREACH'})")
    print(f"sphere integral   = {sphere:.6f}  ({args.sphere_n} midpoint intervals, "
          f"|.-1| <= 0.01: {'ok' if sphere_ok else 'BREACH'})")
    if args.out:
        _write_json(args.out, {
            "command": "conservation", "eta": scenario.eta, "eps": scenario.eps,
            "weight_sum": wsum, "sphere_integral": sphere,
            "sphere_intervals": args.sphere_n,
        })
    return EXIT_OK if (wsum_ok and sphere_ok) else EXIT_TOLERANCE


def cmd_optical(args) -> int:
    if args.model == "square-well":
        scenario = _scenario_from_args(args)
        model = _model_from_args(args, scenario)
        check = observables.optical_theorem_check_short_range(model, scenario)
        print(f"sigma             = {check.sigma:.10e}")
        print(f"(4 pi / p) Im f0  = {check.optical_sigma:.10e}")
        print(f"relative diff     = {check.rel_diff:.3e}")
        if args.out:
            _write_json(args.out, {
                "command": "optical", "model": "square-well",
                "sigma": check.sigma, "optical_sigma": check.optical_sigma,
                "rel_diff": check.rel_diff,
            })
        return EXIT_OK
    if args.eta_min is None or args.eta_max is None:
        raise ValueError("optical sweep requires --eta-min and --eta-max")
    if args.eta_n < 1:
        raise ValueError("--eta-n must be >= 1")
    if args.eta_min <= 0.0:
        raise ValueError("optical sweep requires positive --eta-min (gamma is "
                         "undefined in the free case)")
    etas = np.geomspace(args.eta_min, args.eta_max, args.eta_n)
    rows = []
    for eta in etas:
        scenario = build_scenario_from_eta(float(eta), args.eps, Z1=args.Z1,
                                           Z2=args.Z2, m0=args.mass_mev)
        model = PhaseShiftModel.coulomb_exact() if args.model == "coulomb-exact" \
            else PhaseShiftModel.coulomb_asymptotic()
        table = partialwave.build_table(scenario, model, tail_tol=args.tail_tol,
                                        l_max=args.l_max)
        gamma = observables.optical_ratio(table)
        sigma = observables.total_cross_section(table, scenario)
        f0 = observables.scattering_amplitude_f(table, scenario, 0.0)
        rows.append((float(eta), gamma, sigma, f0.imag))
    if args.format == "csv":
        _write_rows(args.out, "eta,gamma,sigma,im_f0", rows)
    else:
        _write_json(args.out, {
            "command": "optical", "eps": args.eps,
            "columns": ["eta", "gamma", "sigma", "im_f0"],
            "rows": [[float(v) for v in row] for row in rows],
        })
    return EXIT_OK


def cmd_energy_scan(args) -> int:
    family = observables.ScenarioFamily(args.Z1, args.Z2, args.mass_mev, args.eps)
    if args.energies_kev:
        energies = [float(x) for x in args.energies_kev.split(",")]
    else:
        energies = list(np.geomspace(args.e_min_kev, args.e_max_kev, args.e_n))
    rows = []
    for ek in energies:
        try:
            rho, eta, dmax = observables.energy_ratio_rho(
                family, ek * 1e-3, tail_tol=args.tail_tol)
        except Exception as exc:  # strength bound exceeded at this energy
            print(f"warning: skipping E={ek:g} keV: {exc}", file=sys.stderr)
            continue
        rows.append((float(ek), eta, dmax, rho))
    if args.format == "csv":
        _write_rows(args.out, "E_keV,eta,delta_max,rho", rows)
    else:
        _write_json(args.out, {
            "command": "energy-scan", "eps": args.eps,
            "columns": ["E_keV", "eta", "delta_max", "rho"],
            "rows": [[float(v) for v in row] for row in rows],
        })
    return EXIT_OK


def cmd_table_dump(args) -> int:
    _scenario, table = _table_from_args(args)
    if args.out in (None, "-"):
        raise ValueError("table-dump requires --out")
    partialwave.export_table_csv(table, args.out)
    print(f"wrote l_max={table.l_max} table to {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = acceptance.run_all(report=print)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed")
    return EXIT_OK if not failed else EXIT_TOLERANCE


def _apply_config_file(argv: list[str], parser: argparse.ArgumentParser) -> None:
    """Load key=value defaults from a --config file; flags still override."""
    path = argv[argv.index("--config") + 1]
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            values[key.strip().replace("-", "_")] = value.strip()
    known = {action.dest: action for action in parser._actions}
    coerced = {}
    for key, raw in values.items():
        action = known.get(key)
        if action is None:
            raise ValueError(f"unknown config key for this command: {key}")
        coerced[key] = action.type(raw) if action.type else raw
    parser.set_defaults(**coerced)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coulscat",
        description="Wavepacket Coulomb scattering by partial-wave summation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile-delta", help="P(theta, delta) profile at fixed theta")
    _add_common(p)
    p.add_argument("--theta", type=float, help="scattering angle (radians); "
                   "required here or in the config file")
    p.add_argument("--delta-min", type=float)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--delta-step", type=float, default=0.2)
    p.set_defaults(func=cmd_profile_delta)

    p = sub.add_parser("angular", help="angular curve at fixed or auto delta")
    _add_common(p)
    p.add_argument("--delta", default="auto",
                   help="fixed delta value or 'auto' (per-theta peak)")
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=math.pi)
    p.add_argument("--theta-n", type=int, default=200)
    p.set_defaults(func=cmd_angular)

    p = sub.add_parser("conservation", help="weight sum and sphere integral")
    _add_common(p)
    p.add_argument("--sphere-n", type=int, default=200)
    p.set_defaults(func=cmd_conservation)

    p = sub.add_parser("optical", help="optical-theorem ratio gamma(eta)")
    _add_common(p)
    p.add_argument("--eta-min", type=float)
    p.add_argument("--eta-max", type=float)
    p.add_argument("--eta-n", type=int, default=25)
    p.set_defaults(func=cmd_optical)

    p = sub.add_parser("energy-scan", help="rho(E) over an energy range")
    _add_common(p)
    p.add_argument("--energies-kev", help="comma-separated energies in keV")
    p.add_argument("--e-min-kev", type=float, default=3.8)
    p.add_argument("--e-max-kev", type=float, default=200.0)
    p.add_argument("--e-n", type=int, default=6)
    p.set_defaults(func=cmd_energy_scan)

    p = sub.add_parser("table-dump", help="per-l weights, phases and shifts")
    _add_common(p)
    p.set_defaults(func=cmd_table_dump)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.set_defaults(func=cmd_selftest)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    # config files provide defaults for the selected subcommand only
    if "--config" in argv and argv and not argv[0].startswith("-"):
        subparsers = parser._subparsers._group_actions[0]._name_parser_map
        sub = subparsers.get(argv[0])
        if sub is not None:
            try:
                _apply_config_file(argv, sub)
            except (OSError, ValueError) as exc:
                print(f"config error: {exc}", file=sys.stderr)
                return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
