"""Command-line front end. Every command prints one JSON document on stdout.

Exit codes: 0 ok, 2 usage, 3 bad data or parameters, 4 randomized retries exhausted,
5 other internal failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import apps, oracle
from .dataset import MAGIC, BitPointSet, load_points
from .errors import DataError, RetryError, RNetError
from .rnet import EPS_FLOOR, approx_rnet, delfar
from .verify import EXACT_VERIFY_MAX_N

log = logging.getLogger("rnetkit")

EXIT_USAGE, EXIT_DATA, EXIT_RETRY, EXIT_INTERNAL = 2, 3, 4, 5


def _ints(a) -> list:
    return [int(v) for v in np.asarray(a).ravel()]


def _looks_packed(path) -> bool:
    if Path(path).suffix in (".bin", ".rnk"):
        return True
    with open(path, "rb") as f:
        return f.read(len(MAGIC)) == MAGIC


def _load(args):
    fmt = args.format
    try:
        if fmt == "auto":
            fmt = "packed" if _looks_packed(args.input) else "csv"
        return load_points(args.input, fmt, args.metric)
    except OSError as e:
        raise DataError(f"cannot read {args.input}: {e.strerror or e}") from None


def _exact(X) -> bool:
    return X.n <= EXACT_VERIFY_MAX_N


def _net_verification(X, net) -> dict:
    if _exact(X):
        rep = oracle.verify_rnet(X, net)
        return {"packing": not rep["packing"], "covering": not rep["covering"], "checked": "exact"}
    v = net.verification
    return {"packing": bool(v["packing"]), "covering": bool(v["covering"]), "checked": v["checked"]}


def _clustering_verification(X, cl, F=None) -> dict:
    """Centers distinct, and every point within the reported radius of its assigned center."""
    centers = np.asarray(cl.centers)
    out = {"packing": len(np.unique(centers)) == len(centers)}
    if _exact(X):
        out["covering"] = apps.assigned_radius(X, cl.assignment) <= cl.radius * (1 + 1e-12)
        out["checked"] = "exact"
    else:
        rows = np.random.default_rng(0).choice(X.n, max(1, X.n // 100), replace=False)
        d = np.array([X.distance(int(p), int(cl.assignment[p])) for p in rows])
        out["covering"] = bool((d <= cl.radius * (1 + 1e-12)).all())
        out["checked"] = "sampled"
    if F is not None:
        out["family"] = all(apps.member(F, np.flatnonzero(cl.assignment == c)) for c in centers)
    return out


def cmd_rnet(args, X) -> dict:
    net = approx_rnet(X, args.r, args.eps, args.seed, args.backend, args.alpha)
    return {"centers": _ints(net.centers), "assignment": _ints(net.assignment),
            "cover_radius": net.cover_radius, "repairs": net.repairs,
            "verification": _net_verification(X, net)}


def cmd_delfar(args, X) -> dict:
    kept = delfar(X, args.r, args.eps, args.seed, args.backend, args.alpha)
    out = {"kept": _ints(kept)}
    if X.n <= oracle.MAX_N and X.n > 1:
        nn = oracle.nn_distances(X)
        cover = args.r + args.eps * X.k if isinstance(X, BitPointSet) else (1 + args.eps) * args.r
        inF = np.isin(np.arange(X.n), kept)
        # packing: nothing beyond the relaxed radius survives; covering: everything within r survives
        out["verification"] = {"packing": bool(not (inF & (nn > cover)).any()),
                               "covering": bool(inF[nn <= args.r].all()), "checked": "exact"}
    return out


def cmd_knn(args, X) -> dict:
    value = apps.kth_nn_distance(X, args.k, args.eps, args.seed, args.search, args.backend)
    out = {"value": value}
    if X.n <= oracle.MAX_N:
        exact = oracle.exact_kth_nn(X, args.k)
        out["verification"] = {"exact": exact, "within": bool(exact <= value <= (1 + args.eps) * exact + 1e-12),
                               "checked": "exact"}
    return out


def _clustering(cl, X, F=None) -> dict:
    return {"centers": _ints(cl.centers), "radius": float(cl.radius), "assignment": _ints(cl.assignment),
            "verification": _clustering_verification(X, cl, F)}


def cmd_kcenter(args, X) -> dict:
    if args.mode == "decider":
        cl = apps.kcenter_4eps(X, args.k, args.eps, args.seed, args.search, args.backend)
    else:
        cl = apps.kcenter_2eps(X, args.k, args.eps, args.seed, args.backend)
    return _clustering(cl, X)


def cmd_minmax(args, X) -> dict:
    F = apps.parse_family(args.family)
    cl = apps.minmax_cluster(X, F, args.eps, args.seed, args.search, args.backend)
    return _clustering(cl, X, F)


def cmd_greedy(args, X) -> dict:
    perm = apps.greedy_permutation(X, args.eps, args.seed, args.backend)
    out = {"order": _ints(perm.order), "radii": [float(r) for r in perm.radii], "rounds": perm.rounds}
    if X.n <= oracle.MAX_N:
        rep = oracle.verify_greedy(X, perm, args.eps)
        out["verification"] = {"packing": not rep["packing"], "covering": not rep["covering"], "checked": "exact"}
    return out


def cmd_oracle(args, X) -> dict:
    name = args.name
    if name == "kth-nn":
        return {"value": oracle.exact_kth_nn(X, args.k)}
    if name == "kcenter":
        centers, opt = oracle.exact_kcenter(X, args.k)
        return {"centers": _ints(centers), "radius": opt}
    if name == "greedy-perm":
        order, radii = oracle.exact_greedy_perm(X, args.start)
        return {"order": _ints(order), "radii": [float(r) for r in radii]}
    if name == "minmax":
        return {"radius": oracle.exact_minmax(X, apps.parse_family(args.family))}
    if name == "spread":
        from .dataset import spread
        return {"value": spread(X)}
    raise AssertionError(name)


def cmd_bench(args) -> dict:
    """Runtime against n on seeded Gaussian data; timings go to the table and figure only."""
    from . import synth
    from .rnet import _nn_distances

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows, summary = [], []
    for n in args.sizes:
        X = synth.gaussian(n, args.dim, args.seed, args.metric)
        # a radius near the typical nearest-neighbor distance gives nets of moderate size
        r = float(np.median(_nn_distances(X, np.arange(n))))
        t0 = time.perf_counter()
        net = approx_rnet(X, r, args.eps, args.seed, args.backend)
        t1 = time.perf_counter()
        value = apps.kth_nn_distance(X, max(1, n // 2), args.eps, args.seed, backend=args.backend)
        t2 = time.perf_counter()
        rows.append((n, t1 - t0, t2 - t1))
        summary.append({"n": n, "r": r, "centers": len(net.centers), "kth_nn": value})
        log.info("n=%d rnet %.3fs knn %.3fs", n, t1 - t0, t2 - t1)
    table = out_dir / "bench.csv"
    with open(table, "w") as fh:
        fh.write("n,rnet_seconds,knn_seconds\n")
        for n, a, b in rows:
            fh.write(f"{n},{a:.6f},{b:.6f}\n")
    figure = out_dir / "bench.png"
    _plot(rows, figure, args.metric, args.dim, args.eps)
    return {"sizes": list(args.sizes), "results": summary, "table": str(table), "figure": str(figure)}


def _plot(rows, path, metric, dim, eps):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = np.array([r[0] for r in rows], dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.loglog(n, [r[1] for r in rows], "o-", label="approximate r-net")
    ax.loglog(n, [r[2] for r in rows], "s-", label="k-th NN distance")
    ax.set_xlabel("n")
    ax.set_ylabel("seconds")
    ax.set_title(f"{metric}, d={dim}, eps={eps}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _eps(v: str) -> float:
    e = float(v)
    if not 0 < e < 1:
        raise argparse.ArgumentTypeError("eps must lie in (0, 1)")
    return e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="worker threads for compiled kernels")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("input", help="CSV or packed binary point file")
    data.add_argument("--metric", choices=["l1", "l2", "hamming"], default="l2", help="metric for CSV input")
    data.add_argument("--format", choices=["auto", "csv", "packed"], default="auto")

    rand = argparse.ArgumentParser(add_help=False)
    rand.add_argument("--seed", type=int, required=True)
    rand.add_argument("--eps", type=_eps, default=0.2)
    rand.add_argument("--backend", choices=["exact", "sampled", "ptf"], default="sampled")

    search = argparse.ArgumentParser(add_help=False)
    search.add_argument("--search", choices=["driver", "doubling"], default="driver",
                        help="interval search strategy")

    p = argparse.ArgumentParser(prog="rnetkit", description="Approximate r-nets and their clustering applications.")
    sub = p.add_subparsers(dest="command", required=True)

    rn = sub.add_parser("rnet", help="approximate r-nets")
    rsub = rn.add_subparsers(dest="action", required=True)
    b = rsub.add_parser("build", parents=[common, data, rand], help="build an approximate r-net")
    b.add_argument("--r", type=float, required=True)
    b.add_argument("--alpha", type=float, default=0.5)
    b.set_defaults(func=cmd_rnet)

    d = sub.add_parser("delfar", parents=[common, data, rand], help="drop points without a close neighbor")
    d.add_argument("--r", type=float, required=True)
    d.add_argument("--alpha", type=float, default=0.5)
    d.set_defaults(func=cmd_delfar)

    k = sub.add_parser("knn-dist", parents=[common, data, rand, search], help="k-th nearest-neighbor distance")
    k.add_argument("--k", type=int, required=True)
    k.set_defaults(func=cmd_knn)

    kc = sub.add_parser("kcenter", parents=[common, data, rand, search], help="k-center clustering")
    kc.add_argument("--k", type=int, required=True)
    kc.add_argument("--mode", choices=["decider", "greedy"], default="greedy")
    kc.set_defaults(func=cmd_kcenter)

    mm = sub.add_parser("minmax", parents=[common, data, rand, search], help="Min-Max clustering")
    mm.add_argument("--family", required=True, help="family such as minsize:M or all")
    mm.set_defaults(func=cmd_minmax)

    g = sub.add_parser("greedy-perm", parents=[common, data, rand], help="approximate greedy permutation")
    g.set_defaults(func=cmd_greedy)

    o = sub.add_parser("oracle", parents=[common], help="exhaustive reference computations")
    o.add_argument("name", choices=["kth-nn", "kcenter", "greedy-perm", "minmax", "spread"])
    o.add_argument("input", help="CSV or packed binary point file")
    o.add_argument("--metric", choices=["l1", "l2", "hamming"], default="l2", help="metric for CSV input")
    o.add_argument("--format", choices=["auto", "csv", "packed"], default="auto")
    o.add_argument("--k", type=int, default=1)
    o.add_argument("--start", type=int, default=0)
    o.add_argument("--family", default="minsize:2")
    o.set_defaults(func=cmd_oracle)

    be = sub.add_parser("bench", parents=[common], help="runtime against n, written as a table and a figure")
    be.add_argument("--sizes", type=int, nargs="+", required=True)
    be.add_argument("--seed", type=int, required=True)
    be.add_argument("--dim", type=int, default=32)
    be.add_argument("--metric", choices=["l1", "l2"], default="l2")
    be.add_argument("--eps", type=_eps, default=0.2)
    be.add_argument("--backend", choices=["exact", "sampled", "ptf"], default="sampled")
    be.add_argument("--out", default="bench_out")
    be.set_defaults(func=None)
    return p


def _params(args) -> dict:
    skip = {"func", "command", "action", "seed", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _set_threads(t):
    if t is None:
        return
    import numba
    numba.set_num_threads(max(1, min(t, numba.config.NUMBA_NUM_THREADS)))


def run(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RNET_LOG", "error").upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    command = args.command + (" " + args.action if getattr(args, "action", None) else "")
    try:
        _set_threads(args.threads)
        if args.command == "bench":
            result = cmd_bench(args)
        else:
            X = _load(args)
            if getattr(args, "eps", None) is not None and args.command in ("rnet", "delfar") \
                    and args.eps < EPS_FLOOR:
                raise DataError(f"eps must be at least {EPS_FLOOR} for this command")
            result = args.func(args, X)
    except RetryError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RETRY
    except (DataError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DATA
    except RNetError as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    doc = {"command": command, "params": _params(args), "seed": getattr(args, "seed", None)}
    doc.update(result)
    json.dump(doc, sys.stdout, separators=(",", ":"))
    sys.stdout.write("\n")
    return 0


def main() -> None:
    sys.exit(run())
