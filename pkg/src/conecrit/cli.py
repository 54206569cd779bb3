"""Command-line front end: ``conecrit <subcommand> [flags]``.

Every subcommand prints one JSON report (sorted keys, ``"schema": 1``) that
embeds the resolved configuration.  Exit codes: 0 pass, 1 certificate
fail, 2 usage or precondition error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import certificates as cert
from .cone import Identity, RadialAngular, harnack_exponent
from .errors import (ConeCritError, ConvergenceError, GapFailure, NeverEllipticError,
                     OrderingViolation, PreconditionError, SearchExhausted, SpectralFloorError,
                     SubcriticalError)
from .exponents import (characteristic_roots, critical_exponent, critical_exponent_from_alpha,
                        supersolution_amplitude)
from .geometry import AngularDomain, inner_domain
from .minimal import (build_series, cross_gradient, gradient_norm_check, lower_bound_check,
                      tail_bound_check)
from .radial import (Constant, LogCorrected, Oscillating, closed_form_residual, integrate_radial,
                     local_exponent)
from .solver import exhaustion_solve
from .spectral import assemble, default_bump, eigen_basis, extrapolated_principal

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


# ----------------------------------------------------------------------------
# argument handling


def _common(p: argparse.ArgumentParser):
    p.add_argument("--dim", type=int, default=3)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--cap-deg", type=float)
    g.add_argument("--band-deg", type=str, help="lower:upper polar angles in degrees")
    g.add_argument("--full-sphere", action="store_true")
    p.add_argument("--matrix", choices=["id", "const-d", "log-d", "osc-d"], default="id")
    p.add_argument("--alpha", type=float, default=-3.0)
    p.add_argument("--gamma", type=float, default=-3.0)
    p.add_argument("--delta", type=float, default=0.2)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--p", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--nodes", type=int)
    p.add_argument("--K", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=str)
    p.add_argument("--csv", type=str)
    p.add_argument("--tol", type=float)


COMMANDS = ["eigen", "pstar", "radial", "series", "certify-super", "certify-nonexist",
            "certify-critical", "solve", "harnack", "gbnorm", "sweep"]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="conecrit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _common(sp)
        if name == "sweep":
            sp.add_argument("--cap-deg-range", type=str, default="30:180:10",
                            help="start:stop:step in degrees, stop included")
        if name == "solve":
            sp.add_argument("--radii", type=str, default="10,30,90")
        if name == "gbnorm":
            sp.add_argument("--eps", type=float, default=1.0)
        if name == "certify-critical":
            sp.add_argument("--eps", type=float, help="perturbation size; default min(0.5, gap/2)")
        if name == "radial":
            sp.add_argument("--r0", type=float, default=10.0)
            sp.add_argument("--r1", type=float,
                            help="outer radius; 1e4, or 1e25 for osc-d so both extremes are reached")
    return parser


def _domain(a) -> AngularDomain:
    if a.dim < 3:
        raise UsageError("--dim must be at least 3")
    if a.full_sphere:
        return AngularDomain.full(a.dim)
    if a.band_deg is not None:
        try:
            lo, hi = (float(x) for x in a.band_deg.split(":"))
        except ValueError:
            raise UsageError("--band-deg expects lower:upper") from None
        return AngularDomain.band(a.dim, math.radians(lo), math.radians(hi))
    deg = 90.0 if a.cap_deg is None else a.cap_deg
    if deg >= 180.0:
        return AngularDomain.full(a.dim) if deg == 180.0 else _bad("cap angle above 180 degrees")
    return AngularDomain.cap(a.dim, math.radians(deg))


def _bad(msg):
    raise UsageError(msg)


def _coefficient(a):
    if a.matrix == "const-d":
        return Constant(a.alpha, a.dim)
    if a.matrix == "log-d":
        return LogCorrected(a.alpha, a.dim)
    if a.matrix == "osc-d":
        return Oscillating(a.gamma, a.delta, a.k, a.dim)
    return None


def _matrix(a, lam1: float):
    coeff = _coefficient(a)
    return Identity() if coeff is None else RadialAngular(coeff, lam1)


def _config(a) -> dict:
    return dict(sorted(vars(a).items()))


def _need_p(a):
    if a.p is None:
        raise UsageError("--p is required")
    return a.p


# ----------------------------------------------------------------------------
# subcommands; each returns (report, exit code, csv text or None)


def cmd_eigen(a):
    dom = _domain(a)
    n = a.nodes or 2000
    est = extrapolated_principal(dom, n)
    dec = eigen_basis(assemble(dom, n), a.K)
    rep = {"lambda1": est.to_json(), "lambdas": dec.lambdas.tolist(), "theta_nodes": n}
    return rep, EXIT_PASS, dec.to_csv()


def cmd_pstar(a):
    dom = _domain(a)
    n = a.nodes or 2000
    est = extrapolated_principal(dom, n)
    coeff = _coefficient(a)
    if coeff is None:
        roots = characteristic_roots(est.value, dom.N)
        rep = critical_exponent(roots, dom.to_json(), {"lambda1": est.to_json()}).to_json()
    elif isinstance(coeff, Oscillating):
        lo = critical_exponent_from_alpha(coeff.gamma - coeff.delta)
        hi = critical_exponent_from_alpha(coeff.gamma + coeff.delta)
        rep = {"p_star_lower": lo, "p_star_upper": hi, "domain": dom.to_json(),
               "coefficient": coeff.to_json(), "lambda1": est.to_json(),
               "note": "bounds from the envelope r^(gamma -+ delta) of the minimal solution"}
    else:
        d = coeff.d(math.inf) if isinstance(coeff, Constant) else coeff.limit
        roots = characteristic_roots(float(d), dom.N)
        rep = critical_exponent(roots, dom.to_json(),
                                {"coefficient": coeff.to_json(), "lambda1": est.to_json()}).to_json()
    return rep, EXIT_PASS, None


def cmd_radial(a):
    coeff = _coefficient(a)
    if coeff is None:
        raise UsageError("radial needs --matrix const-d, log-d or osc-d")
    r0 = a.r0
    r1 = a.r1 or (1e25 if isinstance(coeff, Oscillating) else 1e4)
    logR, e0 = coeff.closed_form(math.log(r0))
    R0 = math.exp(float(logR))
    prof = integrate_radial(coeff, a.dim, r0, r1, (R0, R0 * float(e0) / r0))
    e = local_exponent(prof)
    _, exact = coeff.closed_form(prof.t)
    rep = {"coefficient": coeff.to_json(), "r0": r0, "r1_used": r1,
           "local_exponent_min": float(e.min()), "local_exponent_max": float(e.max()),
           "max_deviation_from_closed_form": float(np.max(np.abs(e - exact))),
           "closed_form_residual": closed_form_residual(coeff, a.dim, prof.r),
           "diagnostics": prof.diagnostics}
    if isinstance(coeff, Oscillating):
        rep["expected_range"] = [coeff.gamma - coeff.swing, coeff.gamma + coeff.swing]
    return rep, EXIT_PASS, prof.to_csv()


def cmd_series(a):
    dom = _domain(a)
    n = a.nodes or 800
    dec = eigen_basis(assemble(dom, n), a.K)
    bump = default_bump(dom)
    s = build_series(dec, bump(dec.mesh.theta), a.K, psi_tag="default-bump")
    grads = [gradient_norm_check(s, k) for k in range(1, s.K + 1)]
    cross = max((abs(cross_gradient(s, k, m)) for k in range(1, s.K + 1)
                 for m in range(k + 1, s.K + 1)), default=0.0)
    rep = {"series": s.to_json(),
           "gradient_norms": [{"norm2": g, "abs_alpha": al} for g, al in grads],
           "max_cross_gradient": cross}
    if dom.has_boundary:
        dp = inner_domain(dom)
        rep["lower_bound"] = lower_bound_check(s, dp, 2.0).to_json()
        rep["tail_bound"] = tail_bound_check(s, dp, 10.0).to_json()
    return rep, EXIT_PASS, None


def cmd_certify_super(a):
    dom = _domain(a)
    p = _need_p(a)
    n = a.nodes or 2000
    lam = extrapolated_principal(dom, n).value
    matrix = _matrix(a, lam)
    c = a.c
    if c is None:
        lam_used, _ = cert.effective_lambda(dom, matrix, n)
        try:
            c = 0.5 * supersolution_amplitude(p, lam_used, dom.N, 1.0)
        except SubcriticalError as exc:
            return {"kind": "supersolution", "verdict": "fail", "error": str(exc)}, EXIT_FAIL, None
    res = cert.verify_supersolution_strong(dom, dom.N, p, c, matrix, n)
    return res.to_json(), EXIT_PASS if res.passed else EXIT_FAIL, None


def cmd_certify_nonexist(a):
    dom = _domain(a)
    p = _need_p(a)
    n = a.nodes or 2000
    est = extrapolated_principal(dom, n)
    coeff = _coefficient(a)
    if coeff is None:
        alpha = characteristic_roots(est.value, dom.N).alpha_minus
    elif isinstance(coeff, Constant):
        alpha = coeff.alpha
    else:
        raise UsageError("nonexistence search supports --matrix id or const-d")
    res = cert.nonexistence_certificate(dom, dom.N, p, alpha, a.c or 1.0, _matrix(a, est.value))
    return res.to_json(), EXIT_PASS if res.passed else EXIT_FAIL, None


def cmd_certify_critical(a):
    if a.matrix != "id":
        raise UsageError("certify-critical supports --matrix id only")
    dom = _domain(a)
    res = cert.critical_case_certificate(dom, dom.N, eps=a.eps, n=a.nodes or 2000, c=a.c or 1.0)
    return res.to_json(), EXIT_PASS if res.passed else EXIT_FAIL, None


def cmd_solve(a):
    if a.matrix != "id":
        raise UsageError("solve supports --matrix id only")
    dom = _domain(a)
    p = _need_p(a)
    try:
        radii = [float(x) for x in a.radii.split(",")]
    except ValueError:
        raise UsageError("--radii expects a comma separated list") from None
    kw = {"n_theta": a.nodes} if a.nodes else {}
    rep = exhaustion_solve(dom, dom.N, p, radii, a.tol or 1e-8, K=a.K, **kw)
    out = rep.to_json()
    out["verdict"] = "pass" if rep.stabilizing else "fail"
    return out, EXIT_PASS if rep.stabilizing else EXIT_FAIL, rep.results[-1].w.to_csv()


def cmd_harnack(a):
    dom = _domain(a)
    dp = inner_domain(dom)
    est = harnack_exponent(dom, dp, seed=a.seed, **({"n_theta": a.nodes} if a.nodes else {}))
    ok = est.alpha <= 2 - dom.N
    return est.to_json() | {"2-N": 2 - dom.N, "verdict": "pass" if ok else "fail"}, \
        EXIT_PASS if ok else EXIT_FAIL, None


def cmd_gbnorm(a):
    rep = cert.gb_norm_estimate(a.eps, a.dim)
    ok = rep.norm_at(rep.epsilon_star) < 1.0
    return rep.to_json() | {"verdict": "pass" if ok else "fail"}, \
        EXIT_PASS if ok else EXIT_FAIL, None


def _degree_range(text: str):
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError("--cap-deg-range expects start:stop:step") from None
    if not (0 < start <= stop <= 180 and step > 0):
        raise UsageError("cap angles must satisfy 0 < start <= stop <= 180 and step > 0")
    n = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + i * step for i in range(n)]


def cmd_sweep(a):
    n = a.nodes or 2000
    rows = []
    for deg in _degree_range(a.cap_deg_range):
        dom = AngularDomain.full(a.dim) if deg == 180.0 else \
            AngularDomain.cap(a.dim, math.radians(deg))
        est = extrapolated_principal(dom, n)
        roots = characteristic_roots(est.value, a.dim)
        rows.append({"theta1_deg": deg, "lambda1": est.value,
                     "alpha_minus": roots.alpha_minus,
                     "p_star": critical_exponent_from_alpha(roots.alpha_minus)})
    ps = [r["p_star"] for r in rows]
    mono = all(b >= q for q, b in zip(ps, ps[1:]))
    lines = ["theta1_deg,lambda1,alpha_minus,p_star"]
    lines += [f"{r['theta1_deg']!r},{r['lambda1']!r},{r['alpha_minus']!r},{r['p_star']!r}"
              for r in rows]
    rep = {"rows": rows, "p_star_nondecreasing": mono, "theta_nodes": n,
           "verdict": "pass" if mono else "fail"}
    return rep, EXIT_PASS if mono else EXIT_FAIL, "\n".join(lines) + "\n"


HANDLERS = {"eigen": cmd_eigen, "pstar": cmd_pstar, "radial": cmd_radial, "series": cmd_series,
            "certify-super": cmd_certify_super, "certify-nonexist": cmd_certify_nonexist,
            "certify-critical": cmd_certify_critical, "solve": cmd_solve,
            "harnack": cmd_harnack, "gbnorm": cmd_gbnorm, "sweep": cmd_sweep}


def _code_for(exc: BaseException) -> int:
    if isinstance(exc, (UsageError, PreconditionError, SpectralFloorError, NeverEllipticError)):
        return EXIT_USAGE
    if isinstance(exc, (ConvergenceError, OrderingViolation)):
        return EXIT_NONCONV
    if isinstance(exc, (GapFailure, SearchExhausted, SubcriticalError, ConeCritError)):
        return EXIT_FAIL
    return EXIT_USAGE


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    config = None
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError(f"a subcommand is required: {', '.join(COMMANDS)}")
        if not 0 <= args.seed < 2**64:
            raise UsageError("--seed must be a 64-bit unsigned integer")
        config = _config(args)
        report, code, csv_text = HANDLERS[args.command](args)
        report = {"schema": SCHEMA, "command": args.command, "config": config, "result": report}
        if args.csv and csv_text is not None:
            with open(args.csv, "w", encoding="utf-8") as fh:
                fh.write(csv_text)
    except (UsageError, ConeCritError, ValueError, ArithmeticError) as exc:
        code = _code_for(exc)
        report = {"schema": SCHEMA, "config": config,
                  "error": {"type": type(exc).__name__, "message": str(exc)}}
        args = None
    text = dumps(report)
    out_path = getattr(args, "out", None) if args is not None else None
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
