"""Command-line driver: synth, solve, cluster, eval, exp, prox-check."""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import pipeline
from .experiment import ExperimentConfig, run_experiment
from .solver import SolverConfig, prox_l21, prox_tensor_nuclear, scaled_lambda, solve_ortlrr
from .solver_missing import (
    MissingSolverOptions,
    ObservationMask,
    Penalty,
    prox_l1_masked,
    prox_l21_masked,
    solve_ortlrr_ewzf,
)
from .synth import SynthParams, apply_missing_mask, generate_instance
from .tensor_io import read_tensor, write_tensor
from .transforms import build_transform


def _load_config_file(path):
    values = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _add_common(p):
    p.add_argument("--config", help="flat key=value config file; flags override")
    p.add_argument("--transform", default=None, choices=["dft", "dct", "rom"])
    p.add_argument("--transform-seed", type=int, default=None)
    p.add_argument("--out", default=None, help="output directory")


def _merge(args, defaults):
    """Config-file values fill in anything the CLI left unset."""
    if getattr(args, "config", None):
        fromfile = _load_config_file(args.config)
        for key, val in fromfile.items():
            if getattr(args, key, None) is None:
                setattr(args, key, val)
    for key, val in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def _spec(args, n3):
    return build_transform(args.transform, int(n3),
                           seed=int(args.transform_seed))


def _outdir(args):
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_labels(path, values):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "label"])
        for i, v in enumerate(values):
            writer.writerow([i, v])


def _read_labels(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return np.asarray([int(float(r[1])) for r in rows[1:]])


def cmd_synth(args):
    args = _merge(args, dict(transform="dft", transform_seed=7, n1=60, n3=100,
                             clusters=5, rho=0.2, seed=0))
    spec = _spec(args, args.n3)
    params = SynthParams(n1=int(args.n1), n3=int(args.n3), c=int(args.clusters),
                         rho=float(args.rho), seed=int(args.seed))
    inst = generate_instance(params, spec)
    out = _outdir(args)
    write_tensor(inst.X, f"{out}/X.t3b")
    write_tensor(inst.L0, f"{out}/L0.t3b")
    write_tensor(inst.E0, f"{out}/E0.t3b")
    _write_labels(f"{out}/labels.csv", inst.labels)
    _write_labels(f"{out}/theta0.csv", [1 if j in set(inst.theta0) else 0
                                        for j in range(inst.X.shape[1])])
    print(f"wrote instance ({inst.X.shape[0]}x{inst.X.shape[1]}x{inst.X.shape[2]}, "
          f"{len(inst.theta0)} outliers) to {out}")


def cmd_solve(args):
    args = _merge(args, dict(transform="dft", transform_seed=7, solver="ortlrr",
                             delta=0.0, eps=1e-5, max_iters=500))
    X = read_tensor(args.input)
    spec = _spec(args, X.shape[2])
    if args.mask:
        mask = ObservationMask(bits=read_tensor(args.mask))
        X = X * mask.bits
    elif float(args.delta) > 0:
        X, mask = apply_missing_mask(X, float(args.delta),
                                     seed=int(args.transform_seed))
    else:
        mask = None
    if getattr(args, "lam", None) is not None:
        lam = float(args.lam)
    else:
        lam = scaled_lambda(float(args.alpha or 4.0), X, spec)
    cfg = SolverConfig(lam=lam, eps=float(args.eps), max_iters=int(args.max_iters))
    if args.solver == "ortlrr":
        if mask is not None:
            raise SystemExit("ortlrr solver does not take a mask; use ewzf-l21/l1")
        res = solve_ortlrr(X, spec, cfg)
    else:
        if mask is None:
            mask = ObservationMask(bits=np.ones(X.shape))
        penalty = Penalty.L21 if args.solver == "ewzf-l21" else Penalty.L1
        res = solve_ortlrr_ewzf(X, mask, spec,
                                MissingSolverOptions(base=cfg, penalty=penalty))
    out = _outdir(args)
    write_tensor(res.Z_star, f"{out}/Z.t3b")
    write_tensor(res.E_star, f"{out}/E.t3b")
    with open(f"{out}/trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"resid{i}" for i in range(res.trace.shape[1] if res.trace.size else 0)])
        writer.writerows(res.trace.tolist())
    print(f"solved in {res.iters} iterations "
          f"(converged={res.converged}, lambda={lam:.4e}); outputs in {out}")


def cmd_cluster(args):
    args = _merge(args, dict(seed=0, clusters=5))
    Z = read_tensor(args.z)
    E = read_tensor(args.e)
    scores = pipeline.outlier_scores(E)
    part = pipeline.detect_outliers(scores)
    affinity = pipeline.build_affinity(Z, part.inliers)
    labels = pipeline.spectral_cluster(affinity, int(args.clusters),
                                       seed=int(args.seed))
    out = _outdir(args)
    full = np.full(Z.shape[1], -1)
    full[list(part.inliers)] = labels
    _write_labels(f"{out}/pred_labels.csv", full)
    _write_labels(f"{out}/outliers.csv", [1 if j in set(part.outliers) else 0
                                          for j in range(Z.shape[1])])
    print(f"{len(part.outliers)} outliers detected; labels in {out}")


def cmd_eval(args):
    pred = _read_labels(args.pred)
    truth = _read_labels(args.truth)
    keep = pred >= 0
    m = pipeline.eval_clustering(pred[keep], truth[keep])
    line = f"acc={m['acc']:.4f} nmi={m['nmi']:.4f} pur={m['pur']:.4f}"
    if args.scores and args.truth_outliers:
        scores = np.asarray([float(r) for r in open(args.scores).read().split()])
        tout = _read_labels(args.truth_outliers).astype(bool)
        line += f" auc={pipeline.eval_outlier_auc(scores, tout):.4f}"
    print(line)


def cmd_exp(args):
    args = _merge(args, dict(transform="dft", transform_seed=7, n1=60, n3=100,
                             clusters=5, rho=0.2, solver="ortlrr", delta=0.0,
                             seeds="0", eps=1e-5, max_iters=500))
    seeds = tuple(int(s) for s in str(args.seeds).split(","))
    alpha = float(args.alpha) if args.alpha is not None else None
    lam = float(args.lam) if getattr(args, "lam", None) is not None else None
    if alpha is None and lam is None:
        alpha = 4.0
    cfg = ExperimentConfig(
        transform=args.transform, transform_seed=int(args.transform_seed),
        n1=int(args.n1), n3=int(args.n3), clusters=int(args.clusters),
        rho=float(args.rho), input_path=args.input, solver=args.solver,
        alpha=alpha, lam=lam, delta=float(args.delta), seeds=seeds,
        out_dir=_outdir(args), eps=float(args.eps),
        max_iters=int(args.max_iters))

    def progress(rec):
        print(f"seed {rec.seed}: dist={rec.support_dist} "
              f"rowspace_err={rec.rowspace_err:.3e} "
              f"recon_err={rec.inlier_recon_err:.3e} acc={rec.acc:.4f} "
              f"iters={rec.iters} ({rec.wall_time:.1f}s)")

    records = run_experiment(cfg, progress=progress)
    mean = records[-1]
    print(f"mean: rank_t={mean.rank_t:.1f} dist={mean.support_dist:.2f} "
          f"rowspace_err={mean.rowspace_err:.3e} "
          f"recon_err={mean.inlier_recon_err:.3e} acc={mean.acc:.4f}")
    print(f"metrics written to {cfg.out_dir}/metrics.csv")


def cmd_prox_check(args):
    """Randomized cross-checks of the proximal operators against
    independent numeric minimization."""
    from scipy.optimize import minimize_scalar

    rng = np.random.default_rng(int(args.seed or 0))
    worst = 0.0
    n = int(args.cases or 50)
    for _ in range(n):
        B = rng.standard_normal((3, 4, 2))
        thresh = float(rng.uniform(0.1, 2.0))
        E = prox_l21(B, thresh)
        for j in range(B.shape[1]):
            b = float(np.linalg.norm(B[:, j, :]))
            ref = minimize_scalar(
                lambda x: thresh * abs(x) + 0.5 * (x - b) ** 2,
                bounds=(0, b + 1), method="bounded",
                options={"xatol": 1e-10}).x
            got = float(np.linalg.norm(E[:, j, :]))
            worst = max(worst, abs(got - ref))
    print(f"prox_l21 vs scalar minimization over {n} cases: "
          f"max deviation {worst:.2e}")
    spec = build_transform("dct", 2)
    worst_nuc = 0.0
    for _ in range(n):
        B = rng.standard_normal((3, 3, 2))
        thresh = float(rng.uniform(0.1, 2.0))
        out = prox_tensor_nuclear(B, thresh, spec)
        # independent slice-wise oracle through the explicit matrix
        Bbar = B @ spec.matrix.T
        slices = []
        for k in range(2):
            U, s, Vh = np.linalg.svd(Bbar[:, :, k])
            slices.append(U @ np.diag(np.maximum(s - thresh, 0)) @ Vh)
        ref = np.stack(slices, axis=2) @ spec.matrix
        worst_nuc = max(worst_nuc, float(np.abs(out - ref).max()))
    print(f"prox_tensor_nuclear vs slice-wise SVT oracle over {n} cases: "
          f"max deviation {worst_nuc:.2e}")
    ok = worst < 1e-6 and worst_nuc < 1e-10
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="ortlrr",
                                     description="Tensor low-rank representation toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic instance")
    _add_common(p)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n3", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("solve", help="solve a tensor from a T3B file")
    _add_common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--mask", default=None, help="T3B 0/1 observation mask")
    p.add_argument("--solver", default=None, choices=["ortlrr", "ewzf-l21", "ewzf-l1"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("cluster", help="outlier detection + Ncut from Z and E")
    _add_common(p)
    p.add_argument("--z", required=True)
    p.add_argument("--e", required=True)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("eval", help="score predicted labels against truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--scores", default=None)
    p.add_argument("--truth-outliers", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("exp", help="end-to-end experiment over seeds")
    _add_common(p)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n3", type=int, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--clusters", type=int, default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--solver", default=None, choices=["ortlrr", "ewzf-l21", "ewzf-l1"])
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--seeds", default=None, help="comma-separated seed list")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.set_defaults(func=cmd_exp)

    p = sub.add_parser("prox-check", help="run the proximal-operator oracle suite")
    p.add_argument("--cases", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_prox_check)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    rc = args.func(args)
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())
