"""Command-line front end.

Exit codes: 0 all requested checks pass, 1 a verification failed,
2 usage error, 3 numerical non-convergence.
"""

import argparse
import csv
import io
import json
import math
import sys
from fractions import Fraction

import numpy as np

from . import algebra, oscillator, poincare, uncertainty
from .errors import BadIndices, DegenerateWeight, NoConvergence, NonPhysical, NonPhysicalConfig, NoGroundNegative
from .special import QuadratureSpec, z_map

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NOCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(x):
    """Fixed 15-significant-digit text for floats."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, float):
        return x
    if isinstance(x, complex):
        return "%.15g%+.15gj" % (x.real, x.imag)
    x = float(x)
    if not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return float("%.15g" % (x + 0.0))


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (bool, str, int)) or obj is None:
        return obj
    return fmt(obj)


def dump_json(obj):
    return json.dumps(_clean(obj), indent=2, sort_keys=False) + "\n"


def dump_csv(columns, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow(["%.15g" % (v + 0.0) if isinstance(v, float) else v for v in (r[c] for c in columns)])
    return buf.getvalue()


# -- argument parsing ---------------------------------------------------------------


def _add_common(p):
    p.add_argument("--format", choices=("json", "csv"), default=None)
    p.add_argument("--output", default=None, help="artifact path (default: standard output)")
    p.add_argument("--tolerance", type=float, default=1e-10)


def _add_deformation(p, dim_default):
    p.add_argument("--dim", type=int, default=dim_default)
    p.add_argument("--beta", type=Fraction, default=None, help="numeric beta (default formal)")
    p.add_argument("--beta-prime", type=Fraction, default=None)
    p.add_argument("--gamma", type=Fraction, default=None)


def _add_oscillator(p):
    p.add_argument("--beta-tilde", type=float, default=None)
    p.add_argument("--omega-tilde", type=float, default=None)
    p.add_argument("--mass", type=float, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--omega", type=float, default=None)
    p.add_argument("--beta-physical", type=float, default=None)
    p.add_argument("--hbar", type=float, default=1.0)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="minlength",
        description="Deformed covariant algebra checks and Dirac oscillator tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", help="commutator relations, weight exponent, discrete symmetries")
    _add_deformation(p, 3)
    _add_common(p)

    p = sub.add_parser("verify-poincare", help="Lorentz and translation generators")
    _add_deformation(p, 2)
    p.add_argument("--skip-form-invariance", action="store_true")
    _add_common(p)

    p = sub.add_parser("spectrum", help="quantized levels")
    _add_oscillator(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--tau", type=int, choices=(1, -1), default=None)
    _add_common(p)

    p = sub.add_parser("wavefunction", help="sampled large and small components")
    _add_oscillator(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--tau", type=int, choices=(1, -1), default=1)
    p.add_argument("--samples", type=int, default=200)
    _add_common(p)

    p = sub.add_parser("residuals", help="coupled-equation residuals and normalization")
    _add_oscillator(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--tau", type=int, choices=(1, -1), default=None)
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--detune", type=float, default=None,
                   help="also report residuals with p0 shifted by this amount")
    _add_common(p)

    p = sub.add_parser("uncertainty", help="uncertainty relation and minimal lengths")
    _add_oscillator(p)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--tau", type=int, choices=(1, -1), default=1)
    _add_common(p)

    p = sub.add_parser("limits", help="small-deformation and nonrelativistic comparisons")
    _add_oscillator(p)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--tau", type=int, choices=(1, -1), default=1)
    _add_common(p)

    p = sub.add_parser("ortho-report", help="cross inner products between levels (report only)")
    _add_oscillator(p)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--tau", type=int, choices=(1, -1), default=None)
    p.add_argument("--weight", choices=("f0", "fm", "fn"), default="f0")
    _add_common(p)
    return parser


def oscillator_config(args, allow_zero_beta=True):
    physical = [args.mass, args.c, args.omega, args.beta_physical]
    if any(v is not None for v in physical):
        if not all(v is not None for v in physical):
            raise UsageError("--mass, --c, --omega and --beta-physical must be given together")
        if args.beta_tilde is not None or args.omega_tilde is not None:
            raise UsageError("give either tilded or physical parameters, not both")
        cfg = oscillator.OscillatorConfig.from_physical(
            args.mass, args.c, args.omega, args.beta_physical, hbar=args.hbar)
    else:
        if args.beta_tilde is None or args.omega_tilde is None:
            raise UsageError("--beta-tilde and --omega-tilde are required")
        cfg = oscillator.OscillatorConfig(args.beta_tilde, args.omega_tilde)
    if not allow_zero_beta and cfg.beta_tilde == 0:
        raise UsageError("this command needs beta_tilde > 0 (beta_tilde = 0 is the conventional oscillator)")
    return cfg


def _levels(n_max, tau):
    if n_max < 0:
        raise UsageError("--n-max must be >= 0")
    out = []
    for n in range(n_max + 1):
        for t in (1, -1):
            if (tau is None or t == tau) and not (n == 0 and t == -1):
                out.append((n, t))
    return out


def _params(args):
    return algebra.DeformationParams(beta=args.beta, beta_prime=args.beta_prime,
                                     gamma=args.gamma, dim=args.dim)


# -- commands ----------------------------------------------------------------------------


def cmd_verify_algebra(args):
    if not 1 <= args.dim <= 3:
        raise UsageError("--dim must be 1, 2 or 3")
    params = _params(args)
    reports = [
        algebra.verify_deformed_algebra(algebra.build_covariant_operators(params), "covariant"),
        algebra.verify_deformed_algebra(algebra.build_kempf_operators(params), "kempf"),
    ]
    fam = algebra.build_covariant_operators(params)
    for which in ("parity", "time-reversal"):
        reports.append(algebra.discrete_symmetry_check(fam, which))
    try:
        alpha = str(algebra.weight_exponent(params))
    except DegenerateWeight as exc:
        alpha = f"undefined: {exc}"
    ok = all(r.ok for r in reports)
    data = {"dim": args.dim, "status": "ok" if ok else "fail", "weight_exponent": alpha,
            "reports": [r.to_dict() for r in reports]}
    return ok, dump_json(data), f"verify-algebra D={args.dim}: {'ok' if ok else 'FAIL'}"


def cmd_verify_poincare(args):
    if not 1 <= args.dim <= 3:
        raise UsageError("--dim must be 1, 2 or 3")
    params = _params(args)
    reports = [poincare.verify_poincare_closure(params), poincare.verify_generator_action(params)]
    if not args.skip_form_invariance:
        reports.append(poincare.verify_lorentz_form_invariance(params))
    two = poincare.two_particle_translation_residual(params)
    nonzero = sum(1 for v in two.values() if not v.is_zero())
    ok = all(r.ok for r in reports)
    data = {"dim": args.dim, "status": "ok" if ok else "fail",
            "reports": [r.to_dict() for r in reports],
            "two_particle_difference": {"nonzero_components": nonzero, "components": len(two)}}
    return ok, dump_json(data), f"verify-poincare D={args.dim}: {'ok' if ok else 'FAIL'}"


SPECTRUM_COLUMNS = ("n", "tau", "p0_tilde", "e_n", "E_over_mc2", "upper_bound_ratio")


def cmd_spectrum(args):
    cfg = oscillator_config(args)
    rows = []
    for n, tau in _levels(args.n_max, args.tau):
        pt = oscillator.quantize_p0(cfg, n, tau)
        row = {"n": n, "tau": tau, "p0_tilde": pt.p0, "e_n": pt.e_n, "E_over_mc2": pt.p0,
               "upper_bound_ratio": pt.upper_bound_ratio}
        if cfg.physical:
            row["E"] = cfg.rest_energy * pt.p0
        rows.append(row)
    ok = all(r["upper_bound_ratio"] < 1 or cfg.beta_tilde == 0 for r in rows)
    if args.format == "json":
        text = dump_json({"cfg": cfg.to_dict(), "levels": rows})
    else:
        cols = SPECTRUM_COLUMNS + (("E",) if cfg.physical else ())
        text = dump_csv(cols, rows)
    return ok, text, f"spectrum: {len(rows)} levels"


def cmd_wavefunction(args):
    cfg = oscillator_config(args, allow_zero_beta=False)
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    pair = oscillator.wavefunctions(cfg, args.n, args.tau)
    p = oscillator.chebyshev_samples(pair, args.samples)
    z = z_map(p, pair.A, pair.beta_tilde)
    psi1 = pair.psi1(p)
    psi2 = pair.psi2(p)
    rows = [{"p_tilde": float(a), "z": float(b), "psi1": float(c), "psi2": float(d)}
            for a, b, c, d in zip(p, z, psi1, np.broadcast_to(psi2, p.shape))]
    meta = {"cfg": cfg.to_dict(), **pair.metadata()}
    if args.format == "json":
        text = dump_json({"metadata": meta, "samples": rows})
        summary = f"wavefunction n={args.n} tau={args.tau}: {len(rows)} samples"
    else:
        text = dump_csv(("p_tilde", "z", "psi1", "psi2"), rows)
        summary = dump_json(meta).rstrip()
    return True, text, summary


def cmd_residuals(args):
    cfg = oscillator_config(args, allow_zero_beta=False)
    spec = QuadratureSpec()
    rows = []
    ok = True
    for n, tau in _levels(args.n_max, args.tau):
        pair = oscillator.wavefunctions(cfg, n, tau)
        res = oscillator.dirac_residual(cfg, pair, args.samples)
        norm = oscillator.normalization_integral(pair, spec)
        row = {"n": n, "tau": tau, "p0_tilde": pair.p0, "residual": res,
               "norm": norm.value, "norm_error": norm.error}
        passed = res < args.tolerance and abs(norm.value - 1) < args.tolerance
        if args.detune is not None:
            try:
                det = oscillator.wavefunctions(cfg, n, tau, p0=pair.p0 + args.detune)
                row["detuned_residual"] = oscillator.dirac_residual(cfg, det, args.samples)
            except NonPhysical:
                row["detuned_residual"] = math.inf
        row["status"] = "ok" if passed else "fail"
        ok = ok and passed
        rows.append(row)
    if args.format == "csv":
        cols = ("n", "tau", "p0_tilde", "residual", "norm", "norm_error") + (
            ("detuned_residual",) if args.detune is not None else ()) + ("status",)
        text = dump_csv(cols, rows)
    else:
        text = dump_json({"cfg": cfg.to_dict(), "tolerance": args.tolerance, "levels": rows})
    return ok, text, f"residuals: {sum(r['status'] == 'ok' for r in rows)}/{len(rows)} ok"


def cmd_uncertainty(args):
    cfg = oscillator_config(args, allow_zero_beta=False)
    rep = uncertainty.uncertainty_report(cfg, args.n, args.tau)
    ok = rep["holds"] and rep["hermiticity_defect"] < args.tolerance
    rep = {"cfg": cfg.to_dict(), **rep}
    if args.format == "csv":
        cols = ("lhs", "rhs", "holds", "dx_min", "dx_abs_min", "hermiticity_defect")
        text = dump_csv(cols, [rep])
    else:
        text = dump_json(rep)
    return ok, text, f"uncertainty: {'ok' if ok else 'FAIL'}"


def cmd_limits(args):
    cfg = oscillator_config(args)
    rows = []
    for n, tau in _levels(args.n_max, args.tau):
        small = oscillator.energy_expansions(cfg, n, tau, "small-deformation")
        nonrel = oscillator.energy_expansions(cfg, n, tau, "nonrelativistic")
        rows.append({
            "n": n, "tau": tau, "exact": small.exact,
            "small_deformation": small.approximation,
            "small_deformation_first_order": small.terms["first_order"],
            "omitted_term": small.terms["omitted_term"],
            "nonrelativistic": nonrel.approximation,
            "nonrelativistic_rel_error": abs(nonrel.approximation - nonrel.exact) / abs(nonrel.exact),
        })
    if args.format == "csv":
        text = dump_csv(tuple(rows[0]) if rows else ("n",), rows)
    else:
        text = dump_json({"cfg": cfg.to_dict(), "levels": rows})
    return True, text, f"limits: {len(rows)} levels"


def cmd_ortho_report(args):
    cfg = oscillator_config(args, allow_zero_beta=False)
    rows = oscillator.cross_inner_products(cfg, _levels(args.n_max, args.tau), args.weight)
    note = "bound states of the energy-dependent problem are not orthogonal; values are reported only"
    if args.format == "csv":
        text = dump_csv(("m", "tau_m", "n", "tau_n", "weight", "value", "error"), rows)
    else:
        text = dump_json({"cfg": cfg.to_dict(), "note": note, "products": rows})
    return True, text, f"ortho-report: {len(rows)} products ({note})"


COMMANDS = {
    "verify-algebra": cmd_verify_algebra,
    "verify-poincare": cmd_verify_poincare,
    "spectrum": cmd_spectrum,
    "wavefunction": cmd_wavefunction,
    "residuals": cmd_residuals,
    "uncertainty": cmd_uncertainty,
    "limits": cmd_limits,
    "ortho-report": cmd_ortho_report,
}

DEFAULT_FORMAT = {"spectrum": "csv", "wavefunction": "csv"}


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.command, "json")
    try:
        ok, text, summary = COMMANDS[args.command](args)
    except (UsageError, NonPhysicalConfig, NoGroundNegative, BadIndices, NonPhysical, ValueError) as exc:
        print(f"minlength {args.command}: usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except NoConvergence as exc:
        detail = {"command": args.command, "error": "no convergence", "detail": str(exc),
                  "estimate": exc.value, "error_estimate": exc.error}
        print(dump_json(detail), file=stderr, end="")
        return EXIT_NOCONV
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
        print(summary, file=stdout)
    else:
        stdout.write(text)
        if args.format == "csv" and args.command == "wavefunction":
            print(summary, file=stderr)
    if not ok:
        print(f"minlength {args.command}: verification failed", file=stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
