"""Command-line front end: density/score evaluation, Fisher information,
table reproduction, sampling, fitting, and Monte-Carlo validation.

CSV in (one observation per line, optional header, '#' comments), CSV or
JSON out.  Exit codes: 0 success, 2 validation/usage error, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from . import density, fisher, mle
from .params import PARAM_NAMES, StableParams, validate
from .quadrature import QuadratureConfig, QuadratureError
from .sampler import SampleSpec, sample
from .score import DensityFloorError, score_at

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _param_parent() -> argparse.ArgumentParser:
    par = argparse.ArgumentParser(add_help=False)
    par.add_argument("--mu", type=float, default=0.0)
    par.add_argument("--sigma", type=float, default=1.0)
    par.add_argument("--alpha", type=float, default=1.0)
    par.add_argument("--beta", type=float, default=0.0)
    par.add_argument("--quad-abs-tol", type=float, default=None)
    par.add_argument("--quad-rel-tol", type=float, default=None)
    par.add_argument("--json", action="store_true", help="emit JSON output")
    par.add_argument("--seed", type=int, default=0)
    return par


def _params_from(args) -> StableParams:
    p = StableParams(args.mu, args.sigma, args.alpha, args.beta)
    v = validate(p)
    if not v.valid:
        raise ValueError(f"invalid parameters mu={p.mu} sigma={p.sigma} "
                         f"alpha={p.alpha} beta={p.beta}")
    return p


def _quad_from(args) -> QuadratureConfig:
    kw = {}
    if args.quad_abs_tol is not None:
        kw["abs_tol"] = args.quad_abs_tol
    if args.quad_rel_tol is not None:
        kw["rel_tol"] = args.quad_rel_tol
    return QuadratureConfig(**kw)


def _parse_xs(spec: str) -> np.ndarray:
    if ":" in spec:
        a, b, step = (float(s) for s in spec.split(":"))
        if step <= 0:
            raise ValueError("x step must be positive")
        return np.arange(a, b + 0.5 * step, step)
    return np.array([float(s) for s in spec.split(",")])


def read_data_file(path: str) -> np.ndarray:
    """One real per line; '#' comments and one optional header line allowed."""
    values: List[float] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh):
            s = line.split("#", 1)[0].strip().rstrip(",")
            if not s:
                continue
            try:
                values.append(float(s))
            except ValueError:
                if lineno == 0 and not values:
                    continue            # header line
                raise ValueError(f"{path}:{lineno + 1}: not a number: {s!r}")
    if not values:
        raise ValueError(f"{path}: no observations found")
    return np.array(values)


def _cmd_pdf(args) -> int:
    p = _params_from(args)
    cfg = _quad_from(args)
    xs = _parse_xs(args.x)
    names = ("f", "f_x", "f_mu", "f_sigma", "f_alpha", "f_beta")
    cols = density.pdf_many(xs, p, cfg, names=names)
    rows = [{"x": float(x), "f": cols["f"][i], "f_x": cols["f_x"][i],
             "f_mu": cols["f_mu"][i], "f_sigma": cols["f_sigma"][i],
             "f_alpha": cols["f_alpha"][i], "f_beta": cols["f_beta"][i]}
            for i, x in enumerate(xs)]
    if args.json:
        print(json.dumps(rows))
    else:
        print("x,f,f_x,f_mu,f_sigma,f_alpha,f_beta")
        for r in rows:
            print(",".join(_fmt(r[k]) for k in
                           ("x", "f", "f_x", "f_mu", "f_sigma", "f_alpha", "f_beta")))
    return EXIT_OK


def _cmd_score(args) -> int:
    p = _params_from(args)
    cfg = _quad_from(args)
    xs = _parse_xs(args.x)
    rows = []
    for x in xs:
        s = score_at(float(x), p, cfg)
        rows.append({"x": float(x), "loglik": s.loglik,
                     **{f"l_{name}": s.score[i]
                        for name, i in zip(PARAM_NAMES, s.score)}})
    if args.json:
        print(json.dumps(rows))
    else:
        print("x,loglik,l_mu,l_sigma,l_alpha,l_beta")
        for r in rows:
            print(",".join(_fmt(r[k]) for k in
                           ("x", "loglik", "l_mu", "l_sigma", "l_alpha", "l_beta")))
    return EXIT_OK


def _fisher_json(fm: fisher.FisherMatrix) -> dict:
    out = {"method": fm.method, "labels": list(PARAM_NAMES),
           "matrix": [[float(v) for v in row] for row in fm.matrix],
           "err_est": float(fm.err_est)}
    if fm.warning:
        out["warning"] = fm.warning
    return out


def _cmd_fisher(args) -> int:
    cfg = _quad_from(args)
    if args.method == "generic":
        p = _params_from(args)
        fm = fisher.fisher_generic(p, cfg)
    elif args.method == "cauchy-approx":
        fm = fisher.fisher_cauchy_approx(args.alpha, args.beta, cfg)
    else:
        fm = fisher.fisher_exact_cauchy()
    print(json.dumps(_fisher_json(fm)))
    return EXIT_OK


def _cmd_table1(args) -> int:
    cfg = _quad_from(args)
    fm = {
        "generic": lambda: fisher.fisher_generic(StableParams(0, 1, 1.0, 0.0), cfg),
        "cauchy-approx": lambda: fisher.fisher_cauchy_approx(1.0, 0.0, cfg),
        "exact": fisher.fisher_exact_cauchy,
    }[args.method]()
    rows = []
    for label, (i, j), ref in zip(fisher.TABLE1_LABELS, fisher.TABLE1_INDEX,
                                  fisher.TABLE1_VALUES):
        val = float(fm.matrix[i, j])
        rows.append({"entry": label, "value": val, "printed": ref,
                     "abs_dev": abs(val - ref)})
    max_dev = max(r["abs_dev"] for r in rows)
    if args.json:
        print(json.dumps({"method": fm.method, "rows": rows, "max_abs_dev": max_dev}))
    else:
        print("entry,value,printed,abs_dev")
        for r in rows:
            print(f"{r['entry']},{_fmt(r['value'])},{_fmt(r['printed'])},{_fmt(r['abs_dev'])}")
        print(f"# max_abs_dev,{_fmt(max_dev)}")
    return EXIT_OK


def _cmd_table2(args) -> int:
    cfg = _quad_from(args)
    rows = []
    for i, a in enumerate(fisher.TABLE2_ALPHAS):
        for j, b in enumerate(fisher.TABLE2_BETAS):
            fm = fisher.fisher_cauchy_approx(float(a), float(b), cfg)
            iaa = float(fm.matrix[2, 2])
            ibb = float(fm.matrix[3, 3])
            note = "KNOWN_ERRATUM" if (fisher.TABLE2_BB_ERRATUM[i, j]
                                       or fisher.TABLE2_AA_ERRATUM[i, j]) else ""
            rows.append({
                "alpha": a, "beta": b,
                "I_aa": iaa, "I_aa_printed": float(fisher.TABLE2_AA[i, j]),
                "I_aa_dev": abs(iaa - fisher.TABLE2_AA[i, j]),
                "I_bb": ibb, "I_bb_printed": float(fisher.TABLE2_BB[i, j]),
                "I_bb_dev": abs(ibb - fisher.TABLE2_BB[i, j]),
                "note": note,
            })
    if args.json:
        print(json.dumps(rows))
    else:
        print("alpha,beta,I_aa,I_aa_printed,I_aa_dev,I_bb,I_bb_printed,I_bb_dev,note")
        for r in rows:
            print(",".join([_fmt(r["alpha"]), _fmt(r["beta"]), _fmt(r["I_aa"]),
                            _fmt(r["I_aa_printed"]), _fmt(r["I_aa_dev"]),
                            _fmt(r["I_bb"]), _fmt(r["I_bb_printed"]),
                            _fmt(r["I_bb_dev"]), r["note"]]))
    return EXIT_OK


def _cmd_sample(args) -> int:
    p = _params_from(args)
    xs = sample(SampleSpec(n=args.n, seed=args.seed, params=p))
    if args.json:
        print(json.dumps([float(x) for x in xs]))
    else:
        for x in xs:
            print(_fmt(x))
    return EXIT_OK


def _cmd_fit(args) -> int:
    data = read_data_file(args.data)
    kw = {}
    if args.quad_abs_tol is not None or args.quad_rel_tol is not None:
        quad = QuadratureConfig(abs_tol=args.quad_abs_tol or 1e-11,
                                rel_tol=args.quad_rel_tol or 1e-9)
        kw["quad"] = quad
    res = mle.fit(data, mle.FitConfig(**kw))
    print(json.dumps(res.to_dict()))
    return EXIT_OK


def _cmd_mc(args) -> int:
    p = _params_from(args)
    rep = mle.mc_normality(p, n=args.n, replicates=args.replicates,
                           seed=args.seed)
    print(json.dumps(rep.to_dict()))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    par = _param_parent()
    ap = argparse.ArgumentParser(prog="stablem0",
                                 description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p_pdf = sub.add_parser("pdf", parents=[par], help="density and gradient rows")
    p_pdf.add_argument("--x", required=True, help="a:b:step range or comma list")
    p_pdf.set_defaults(func=_cmd_pdf)

    p_score = sub.add_parser("score", parents=[par], help="log-likelihood scores")
    p_score.add_argument("--x", required=True)
    p_score.set_defaults(func=_cmd_score)

    p_fis = sub.add_parser("fisher", parents=[par], help="Fisher information matrix")
    p_fis.add_argument("--method", choices=("generic", "cauchy-approx", "exact"),
                       default="generic")
    p_fis.set_defaults(func=_cmd_fisher)

    p_t1 = sub.add_parser("table1", parents=[par],
                          help="Cauchy-point information vs printed values")
    p_t1.add_argument("--method", choices=("generic", "cauchy-approx", "exact"),
                      default="cauchy-approx")
    p_t1.set_defaults(func=_cmd_table1)

    p_t2 = sub.add_parser("table2", parents=[par],
                          help="information approximation grid vs printed values")
    p_t2.set_defaults(func=_cmd_table2)

    p_sam = sub.add_parser("sample", parents=[par], help="draw i.i.d. variates")
    p_sam.add_argument("--n", type=int, required=True)
    p_sam.set_defaults(func=_cmd_sample)

    p_fit = sub.add_parser("fit", parents=[par], help="maximum-likelihood fit")
    p_fit.add_argument("data", help="file with one observation per line")
    p_fit.set_defaults(func=_cmd_fit)

    p_mc = sub.add_parser("mc-normality", parents=[par],
                          help="Monte-Carlo check of MLE asymptotics")
    p_mc.add_argument("--n", type=int, default=500)
    p_mc.add_argument("--replicates", type=int, default=200)
    p_mc.set_defaults(func=_cmd_mc)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return args.func(args)
    except (ValueError, OSError, mle.DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QuadratureError, DensityFloorError, mle.NonConvergenceError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
