"""Command-line front end.

Exit status: 0 when every check passes, 1 when a residual exceeds its
tolerance, 2 for invalid input or a domain error.
"""

import argparse
import sys
import time

import numpy as np

from .catalog import PARAMS, catalog, names
from .deform import (
    DeformationFactors,
    build_model,
    factor_odes,
    verify_stage1,
    verify_stage2,
    verify_stage3,
)
from .errors import AbflatError, InputError
from .fields import ModelParams, closed_conformal, constant_curvature, random_polynomial_data
from .finsler import GeneralABMetric, dual_flat_residual, projective_flat_residual, sample_admissible
from .phifunc import (
    CheckPhiFunction,
    checkp_residual,
    finsler_positivity,
    grid,
    pde1_residual,
    psi22_residual,
    projective_from_dual,
    dual_from_projective,
    varphi_residual,
)
from .report import VerificationReport, merge, summarize, to_json
from .sampling import sample_xy

TASKS = ("phi-residual", "dual-flat", "projective-flat", "deform-verify", "roundtrip", "positivity", "catalog")

DEFAULT_TOL = {
    "phi-residual": 1e-9,
    "dual-flat": 1e-9,
    "projective-flat": 1e-9,
    "deform-verify": 1e-8,
    "roundtrip": 1e-8,
    "positivity": 0.0,
    "catalog": 0.0,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(2)


def _grid_shape(text):
    try:
        r, c = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like RxC, got {text!r}")
    if r < 1 or c < 1:
        raise argparse.ArgumentTypeError("grid sizes must be positive")
    return r, c


def _vector(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _param(text):
    if "=" not in text:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    key, val = text.split("=", 1)
    try:
        return key.strip(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"parameter {key!r} needs a number")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--phi", default="example3", help="catalog name (see the catalog subcommand)")
    common.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                        help="catalog parameter, repeatable")
    common.add_argument("--mu", type=float, default=0.0)
    common.add_argument("--sigma", type=float, default=1.0)
    common.add_argument("--lambda", dest="lam", type=float, default=1.0)
    common.add_argument("--avec", type=_vector, default=None, help="constant vector a, e.g. 0.1,-0.2,0")
    common.add_argument("--dim", type=int, default=None, help="dimension n (default 3, or the length of --avec)")
    common.add_argument("--samples", type=int, default=200)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--tol", type=float, default=None)
    common.add_argument("--grid", type=_grid_shape, default=(50, 50), metavar="RxC")
    common.add_argument("--inset", type=float, default=1e-3)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="accepted for compatibility; runs serially")
    common.add_argument("--timing", action="store_true", help="include wall time in JSON output")

    parser = _Parser(prog="abflat", description="Residual checks for dually and projectively flat metrics.")
    sub = parser.add_subparsers(dest="task", required=True, parser_class=_Parser)
    p = sub.add_parser("phi-residual", parents=[common], help="PDE residual of φ on a grid")
    p.add_argument("--pde", choices=("pde1", "psi22", "varphi", "checkp"), default=None)
    p.add_argument("--raw", action="store_true", help="unnormalized residual")
    sub.add_parser("dual-flat", parents=[common], help="dual-flatness residual on model data")
    sub.add_parser("projective-flat", parents=[common], help="Hamel residual of the forward map")
    sub.add_parser("deform-verify", parents=[common], help="deformation formulas and factor ODEs")
    sub.add_parser("roundtrip", parents=[common], help="forward map then integral inversion")
    p = sub.add_parser("positivity", parents=[common], help="Finsler positivity scan")
    p.add_argument("--b2max", type=float, default=None)
    sub.add_parser("catalog", parents=[common], help="list built-in φ functions")
    return parser


# ------------------------------------------------------------------- tasks
def _phi(args):
    return catalog(args.phi, **dict(args.param))


def _resolve_dim(args):
    if args.avec is not None and args.dim is not None and len(args.avec) != args.dim:
        raise InputError(f"--avec has {len(args.avec)} entries but --dim is {args.dim}")
    if args.dim is None:
        args.dim = 3 if args.avec is None else len(args.avec)
    if not 2 <= args.dim <= 16:
        raise InputError("--dim must be between 2 and 16")
    if args.samples < 1:
        raise InputError("--samples must be positive")


def _avec(args):
    return (0.0,) * args.dim if args.avec is None else args.avec


def _phi_grid(phi, args):
    if phi.domain is None:
        raise InputError(f"{phi.name} declares no grid domain")
    return grid(phi.domain, args.grid, args.inset, phi.b_o)


def run_phi_residual(args, tol):
    phi = _phi(args)
    pde = args.pde or ("varphi" if isinstance(phi, CheckPhiFunction) else "pde1")
    if pde in ("pde1", "psi22") and isinstance(phi, CheckPhiFunction):
        raise InputError(f"{pde} applies to φ, not to {phi.name}")
    fn = {"pde1": pde1_residual, "psi22": psi22_residual, "varphi": varphi_residual, "checkp": checkp_residual}[pde]
    b2, s = _phi_grid(phi, args)
    b2, s = b2.ravel(), s.ravel()
    res = fn(phi, b2, s, normalized=not args.raw)
    return summarize(f"phi-residual[{pde}]", res, tol, np.stack([b2, s], -1),
                     details={"phi": phi.name, "normalized": not args.raw})


def run_dual_flat(args, tol):
    phi = _phi(args)
    model = build_model(ModelParams(args.mu, args.lam, args.sigma, _avec(args)))
    metric = GeneralABMetric(model.alpha, model.beta, phi)
    x, y = sample_admissible(metric, args.seed, args.samples, model.sample_radius())
    res = dual_flat_residual(metric, x, y, normalized=True)
    return summarize("dual-flat", res, tol, np.concatenate([x, y], -1), details={"phi": phi.name})


def run_projective_flat(args, tol):
    phi = _phi(args)
    vphi = phi if isinstance(phi, CheckPhiFunction) else projective_from_dual(phi)
    if getattr(vphi, "degenerate", False):
        raise InputError(f"{vphi.name} vanishes identically and is not a Finsler metric")
    if vphi.domain is not None and not np.any(vphi.valid(*grid(vphi.domain, (7, 7), 1e-2, vphi.b_o), positive=True)):
        raise InputError(f"{vphi.name} is negative on its domain; α·φ̌ is not a Finsler metric")
    a = _avec(args)
    alpha, beta = constant_curvature(args.mu, len(a)), closed_conformal(args.mu, args.lam, a)
    metric = GeneralABMetric(alpha, beta, vphi)
    radius = min(1.0, 0.8 / np.sqrt(-args.mu)) if args.mu < 0 else 1.0
    x, y = sample_admissible(metric, args.seed, args.samples, radius)
    res = projective_flat_residual(metric, x, y, normalized=True)
    return summarize("projective-flat", res, tol, np.concatenate([x, y], -1), details={"phi": vphi.name})


def run_deform_verify(args, tol):
    n = args.dim
    reports = []
    alpha, beta = random_polynomial_data(args.seed, n)
    x, y = sample_xy(args.seed, args.samples, n, 0.5)
    f = DeformationFactors.polynomial()
    for k, fn in ((1, verify_stage1), (2, verify_stage2), (3, verify_stage3)):
        r = fn(alpha, beta, f, x, y)
        reports.append(summarize(f"stage{k}[random]", np.maximum(r.spray, r.covariant), tol,
                                 np.concatenate([x, y], -1)))
    model = build_model(ModelParams(args.mu, args.lam, args.sigma, _avec(args)))
    x, y = sample_xy(args.seed, args.samples, model.params.dim, model.sample_radius(), channel=1)
    for k, fn in ((1, verify_stage1), (2, verify_stage2), (3, verify_stage3)):
        r = fn(model.base_alpha, model.base_beta, model.factors, x, y)
        reports.append(summarize(f"stage{k}[model]", np.maximum(r.spray, r.covariant), tol,
                                 np.concatenate([x, y], -1)))
    odes = factor_odes(args.mu, args.sigma)
    reports.append(summarize("factor-odes", [odes.max], tol))
    out = merge("deform-verify", reports, tol)
    if odes.trivial:
        out.details["note"] = "kappa = 0: the deformation is a scaling"
    return out


def run_roundtrip(args, tol):
    phi = _phi(args)
    if isinstance(phi, CheckPhiFunction):
        raise InputError("roundtrip starts from φ, not φ̌")
    vphi = projective_from_dual(phi)
    c_star = float(phi(0.0, 0.0)) ** 2
    back = dual_from_projective(vphi, c_star)
    b2, s = _phi_grid(phi, args)
    b2, s = b2.ravel(), s.ravel()
    res = back(b2, s) - phi(b2, s)
    return summarize("roundtrip", res, tol, np.stack([b2, s], -1), details={"phi": phi.name, "C": c_star})


def run_positivity(args, tol):
    phi = _phi(args)
    b2max = args.b2max if args.b2max is not None else (phi.domain[1] if phi.domain else 1.0)
    rep = finsler_positivity(phi, b2max, args.grid, args.inset)
    worst = -rep.min_second if args.dim == 2 else -min(rep.min_first, rep.min_second)
    violation = rep.violation_n2 if args.dim == 2 else rep.violation_n3
    return VerificationReport(
        task="positivity",
        samples=rep.evaluated,
        max_residual=float(worst),
        mean_residual=float(worst),
        tolerance=tol,
        first_violation=None if violation is None else {"point": list(violation[:2]), "value": violation[2]},
        details={"phi": phi.name, "min_first": rep.min_first, "min_second": rep.min_second,
                 "skipped": rep.skipped, "b2_max": b2max},
    )


def run_catalog(args, tol):
    entries = names()
    return VerificationReport("catalog", len(entries), 0.0, 0.0, tol,
                              details={"entries": entries, "params": {k: list(v) for k, v in PARAMS.items()}})


RUNNERS = {
    "phi-residual": run_phi_residual,
    "dual-flat": run_dual_flat,
    "projective-flat": run_projective_flat,
    "deform-verify": run_deform_verify,
    "roundtrip": run_roundtrip,
    "positivity": run_positivity,
    "catalog": run_catalog,
}


def _config(args, tol):
    cfg = {k: v for k, v in vars(args).items() if k not in ("out", "format", "timing", "threads")}
    cfg["tol"] = tol
    cfg["param"] = {k: v for k, v in args.param}
    cfg["grid"] = list(args.grid)
    if args.avec is not None:
        cfg["avec"] = list(args.avec)
    return cfg


def run(argv=None):
    """Run one subcommand; returns the exit status."""
    args = build_parser().parse_args(argv)
    tol = DEFAULT_TOL[args.task] if args.tol is None else args.tol
    start = time.perf_counter()
    try:
        _resolve_dim(args)
        with np.errstate(all="ignore"):
            report = RUNNERS[args.task](args, tol)
    except AbflatError as exc:
        print(f"abflat {args.task}: {exc}", file=sys.stderr)
        return 2
    report.wall_time_ms = 1000 * (time.perf_counter() - start)
    if args.format == "json":
        text = to_json(args.task, _config(args, tol), report, timing=args.timing)
    else:
        text = report.text() + "\n"
        if args.timing:
            text += f"  wall time: {report.wall_time_ms:.1f} ms\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if report.passed else 1


def main():
    raise SystemExit(run())


if __name__ == "__main__":
    main()
