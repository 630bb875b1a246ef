"""Command-line interface: sample zeros, predict limits, compare, demo.

Outputs are deterministic byte for byte: JSON is sorted and indented,
CSV floats carry 17 significant digits, and all randomness is
counter-based on the --seed argument.

Exit codes: 0 success, 2 invalid arguments or configuration, 3 numeric
failure (nonconvergence, contour through a zero, and the like).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np
from scipy.special import gammaln

from .ensembles import LO_VARIANTS, EnsembleSpec, log_coeff, scaling, u_profile
from .errors import NumericError, RootConvergenceError, ValidationError
from .fenchel import LimitMeasure, construct_ensemble, limit_measure
from .measures import (compare_ensemble, score_measure, szego_curve_distance,
                       szego_partial_sum_zeros)
from .piecewise import PiecewiseFn
from .polyzero import LogPoly, ZeroMeasure, find_zeros, newton_polygon_rings
from .sampling import LAW_NAMES, CoeffLaw, sample_series

KINDS = ("kac", "elliptic", "flat", "hyperbolic", "lo_poly", "lo_entire",
         "theta", "three_circles", "custom")


def _add_ensemble_args(p):
    p.add_argument("--ensemble", required=True, choices=KINDS,
                   help="coefficient family")
    p.add_argument("--alpha", type=float, help="shape exponent of the family")
    p.add_argument("--beta", type=float, default=0.0,
                   help="extra linear drift (lo families)")
    p.add_argument("--variant", choices=LO_VARIANTS,
                   help="which lo coefficient core to use")
    p.add_argument("--u-json", metavar="PATH",
                   help="decay profile JSON for --ensemble custom")


def _add_law_args(p):
    p.add_argument("--dist", default="complex_gaussian", choices=LAW_NAMES,
                   help="coefficient distribution")
    p.add_argument("--dist-param", type=float, default=2.0,
                   help="tail exponent for log_pareto")


def _build_spec(args) -> EnsembleSpec:
    kind = args.ensemble
    if kind == "custom":
        if not args.u_json:
            raise ValidationError("--ensemble custom requires --u-json")
        with open(args.u_json) as f:
            payload = json.load(f)
        if isinstance(payload, dict) and "u" in payload:
            payload = payload["u"]
        return EnsembleSpec.custom(PiecewiseFn.from_json_dict(payload))
    if kind in ("kac", "three_circles"):
        return EnsembleSpec(kind)
    if args.alpha is None:
        raise ValidationError(f"--ensemble {kind} requires --alpha")
    if kind in ("lo_poly", "lo_entire"):
        if not args.variant:
            raise ValidationError(f"--ensemble {kind} requires --variant")
        return EnsembleSpec(kind, alpha=args.alpha, beta=args.beta,
                            variant=args.variant)
    return EnsembleSpec(kind, alpha=args.alpha)


def _build_law(args) -> CoeffLaw:
    if args.dist == "log_pareto":
        return CoeffLaw.log_pareto(args.dist_param)
    return CoeffLaw(args.dist)


def _dump_json(obj, out):
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as f:
            f.write(text)


def _meta_path(out):
    stem = out[:-4] if out.endswith(".csv") else out
    return stem + ".meta.json"


def cmd_sample(args):
    spec = _build_spec(args)
    law = _build_law(args)
    poly = sample_series(spec, args.n, law, args.seed,
                         radius=args.radius, tol=args.tol)
    zm = find_zeros(poly, tol=args.root_tol)
    factor = scaling(spec, args.n).factor
    if factor != 1.0:
        zm = zm.scaled(factor)
    lines = ["# randzeros sample",
             f"# ensemble = {spec.label()}",
             f"# law = {law.label()}",
             f"# n = {args.n}",
             f"# seed = {args.seed}",
             f"# degree = {poly.degree}",
             f"# scale_factor = {factor:.17g}",
             f"# trust_radius = {zm.trust_radius:.17g}",
             "re,im,multiplicity"]
    order = np.lexsort((zm.zeros.imag, zm.zeros.real))
    for i in order:
        z = zm.zeros[i]
        lines.append(f"{z.real:.17g},{z.imag:.17g},{int(zm.mults[i])}")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
        return 0
    with open(args.out, "w") as f:
        f.write(text)
    meta = {
        "ensemble": spec.label(), "law": law.label(), "n": args.n,
        "seed": args.seed, "degree": poly.degree,
        "scale_factor": factor,
        "trust_radius": ("inf" if math.isinf(zm.trust_radius)
                         else zm.trust_radius),
        "zeros": int(zm.total),
        "max_certificate": (float(np.max(zm.certificates))
                            if zm.certificates.size else None),
        "radius": args.radius, "truncation_tol": args.tol,
    }
    _dump_json(meta, _meta_path(args.out))
    return 0


def cmd_predict(args):
    spec = _build_spec(args)
    mu = limit_measure(u_profile(spec, t_max=args.t_max))
    out = mu.to_json_dict()
    out["ensemble"] = spec.label()
    if args.radius:
        radii = [float(r) for r in args.radius.split(",")]
        masses = {}
        for r in radii:
            m = float(mu.radial_mass_at(r, closed=True))
            masses[f"{r:g}"] = "inf" if math.isinf(m) else m
        out["mass_at"] = masses
    _dump_json(out, args.out)
    return 0


def _read_zero_csv(path):
    zeros, mults = [], []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#") or line.startswith("re,"):
                continue
            re_s, im_s, m_s = line.split(",")
            zeros.append(complex(float(re_s), float(im_s)))
            mults.append(int(m_s))
    if not zeros:
        raise ValidationError(f"no zeros found in {path}")
    return np.array(zeros), np.array(mults, dtype=np.int64)


def cmd_compare(args):
    spec = _build_spec(args)
    if args.zeros:
        z, m = _read_zero_csv(args.zeros)
        trust = math.inf
        try:
            with open(_meta_path(args.zeros)) as f:
                t = json.load(f).get("trust_radius", "inf")
            trust = math.inf if t == "inf" else float(t)
        except OSError:
            pass
        zm = ZeroMeasure(z, m, n=args.n, trust_radius=trust)
        rep = score_measure(zm, spec, args.radius, law=f"file:{args.zeros}")
    else:
        law = _build_law(args)
        seeds = list(range(args.seed, args.seed + args.seeds))
        rep = compare_ensemble(spec, args.n, law, seeds, r_max=args.radius,
                               tol=args.root_tol, trunc_tol=args.tol)
    _dump_json(rep.to_json_dict(), args.out)
    return 0


def cmd_construct(args):
    with open(args.target) as f:
        mu = LimitMeasure.from_json_dict(json.load(f))
    spec = construct_ensemble(mu, args.n)
    got = limit_measure(spec.u)
    # verify the dual round trip on the target's own support; evaluate
    # just above each node so atoms land on the same side of both CDFs
    xs = mu.radial_mass.x
    radii = np.exp(np.unique(np.concatenate((xs, 0.5 * (xs[1:] + xs[:-1])))))
    radii = np.unique(np.concatenate((radii, [r for r, _ in mu.atoms])))
    radii = radii * (1.0 + 1e-9)
    err = float(np.max(np.abs(got.radial_mass_at(radii, closed=True) -
                              mu.radial_mass_at(radii, closed=True))))
    out = {"u": spec.u.to_json_dict(), "n": args.n,
           "roundtrip_mass_error": err,
           "degree": spec.degree(args.n) if spec.is_polynomial else None,
           "kind": "custom"}
    _dump_json(out, args.out)
    return 0


def cmd_demo(args):
    if args.which == "szego":
        return _demo_szego(args)
    if args.which == "converse":
        return _demo_converse(args)
    return _demo_universality(args)


def _demo_szego(args):
    n = args.n or 200
    # deterministic side: the zeros of sum (nz)^k / k! hug the curve
    # |z e^(1-z)| = 1 ever tighter as n grows
    det = szego_partial_sum_zeros(n)
    # randomized side: the same coefficient schedule times iid Gaussian
    # factors; its zeros fill the whole unit disk instead
    ks = np.arange(n + 1)
    lg, ar = CoeffLaw.complex_gaussian().sample_log(args.seed, ks)
    rand_poly = LogPoly(ks * math.log(n) - gammaln(ks + 1.0) + lg, ar, n=n,
                        label=f"randomized partial sum, n={n}")
    rnd = find_zeros(rand_poly)
    _dump_json({"demo": "szego", "n": n, "seed": args.seed,
                "deterministic": {
                    "mean_curve_distance": szego_curve_distance(det),
                    "zeros": [[z.real, z.imag] for z in det.zeros]},
                "randomized": {
                    "mean_curve_distance": szego_curve_distance(rnd),
                    "zeros": [[z.real, z.imag] for z in rnd.zeros]}},
               args.out)
    return 0


def _demo_converse(args):
    # without a finite log-moment the zero radii obey no law of large
    # numbers: along a sparse set of n one giant coefficient dominates
    # and every scaled zero collapses toward the origin
    big_n = args.n or 200
    spec = EnsembleSpec.lo_poly("factorial", 0.5)
    law = CoeffLaw.heavy_no_logmoment()
    rows = []
    collapsed = []
    for n in range(1, big_n + 1):
        factor = scaling(spec, n).factor
        ks = np.arange(n + 1)
        lg, ar = law.sample_log(args.seed, ks)
        lm = log_coeff(spec, ks, n) + lg + ks * math.log(factor)
        poly = LogPoly(lm, ar, n=n, label=f"scaled lo_poly n={n}")
        rings = newton_polygon_rings(poly)
        outer = max(math.log(rad) for rad, _ in rings) if rings else -math.inf
        estimated = outer > 600.0
        if estimated:
            # a zero beyond float range: report the tropical estimate
            max_log = outer
        else:
            try:
                zm = find_zeros(poly)
                with np.errstate(divide="ignore"):
                    max_log = float(np.max(np.log(zm.radii)))
            except RootConvergenceError:
                max_log, estimated = outer, True
        row = {"n": n, "max_modulus_log10": max_log / math.log(10.0),
               "estimated": estimated}
        rows.append(row)
        if max_log < math.log(0.5):
            collapsed.append(n)
    _dump_json({"demo": "converse", "N": big_n, "seed": args.seed,
                "ensemble": spec.label(), "law": law.label(),
                "per_n": rows, "n_all_inside_half": collapsed,
                "note": "max modulus of the scaled zeros keeps dipping: "
                        "infinitely many n see every zero deep inside "
                        "the disk, so no deterministic limit exists"},
               args.out)
    return 0


def _demo_universality(args):
    n = args.n or 2000
    seeds = list(range(args.seed, args.seed + (args.seeds or 1)))
    spec = EnsembleSpec.lo_poly("factorial", 0.5)
    reports = {}
    for tag, law in (("gaussian", CoeffLaw.complex_gaussian()),
                     ("pareto4", CoeffLaw.log_pareto(4.0))):
        rep = compare_ensemble(spec, n, law, seeds, r_max=1.0)
        reports[tag] = rep.to_json_dict()
        if args.out != "-":
            stem = args.out[:-5] if args.out.endswith(".json") else args.out
            _write_zero_scatter(f"{stem}.{tag}.csv", spec, n, law, seeds[0])
    _dump_json({"demo": "universality", "ensemble": spec.label(), "n": n,
                "reports": reports,
                "note": "the limit zero measure does not depend on the "
                        "coefficient law"}, args.out)
    return 0


def _write_zero_scatter(path, spec, n, law, seed):
    poly = sample_series(spec, n, law, seed)
    zm = find_zeros(poly).scaled(scaling(spec, n).factor)
    lines = ["# randzeros demo universality",
             f"# ensemble = {spec.label()}", f"# law = {law.label()}",
             f"# n = {n}", f"# seed = {seed}", "re,im,multiplicity"]
    order = np.lexsort((zm.zeros.imag, zm.zeros.real))
    for i in order:
        z = zm.zeros[i]
        lines.append(f"{z.real:.17g},{z.imag:.17g},{int(zm.mults[i])}")
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="randzeros",
        description="zeros of random analytic functions and their limit laws")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample one series and write its zeros")
    _add_ensemble_args(p)
    _add_law_args(p)
    p.add_argument("--n", type=int, required=True, help="degree parameter")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--radius", type=float,
                   help="truncation radius (entire families)")
    p.add_argument("--tol", type=float, default=1e-12,
                   help="relative truncation tolerance")
    p.add_argument("--root-tol", type=float, default=1e-10)
    p.add_argument("--out", default="-", metavar="PATH",
                   help="CSV path ('-' for stdout); a .meta.json sidecar "
                        "is written next to a file")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("predict", help="limit zero measure of an ensemble")
    _add_ensemble_args(p)
    p.add_argument("--t-max", type=float, help="extend the profile grid")
    p.add_argument("--radius", metavar="R1,R2,...",
                   help="also report closed-disk masses at these radii")
    p.add_argument("--out", default="-", metavar="PATH")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("compare",
                       help="empirical zeros against the predicted limit")
    _add_ensemble_args(p)
    _add_law_args(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--zeros", metavar="PATH",
                   help="score this zeros CSV instead of sampling afresh")
    p.add_argument("--seed", type=int, default=0, help="first seed")
    p.add_argument("--seeds", type=int, default=1, help="number of samples")
    p.add_argument("--radius", type=float, required=True,
                   help="compare on the disk of this radius")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--root-tol", type=float, default=1e-10)
    p.add_argument("--out", default="-", metavar="PATH")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("construct",
                       help="coefficient schedule realizing a target measure")
    p.add_argument("--target", required=True, metavar="PATH",
                   help="limit measure JSON (as written by predict)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", default="-", metavar="PATH")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("demo", help="showcase computations")
    p.add_argument("which", choices=("szego", "converse", "universality"))
    p.add_argument("--n", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int)
    p.add_argument("--out", default="-", metavar="PATH")
    p.set_defaults(func=cmd_demo)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericError as e:
        print(f"numeric failure: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
