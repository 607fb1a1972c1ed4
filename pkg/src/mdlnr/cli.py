"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 non-convergence.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .graph_state import DataError, Dataset, WeightCategories

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NOCONV = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _model(name: str, data: Dataset | None = None):
    """CLI model name -> (model kind, zero_valued)."""
    table = {"kinetic": ("kinetic", False), "kinetic-z": ("kinetic", True),
             "equilibrium": ("equilibrium", False), "equilibrium-z": ("equilibrium", True)}
    kind, zv = table[name]
    if data is not None and data.alphabet == "zero_valued":
        zv = True
    return kind, zv


def _load_data(args, model_kind):
    from .io import parse_data_matrix
    data = parse_data_matrix(args.data, map01=args.map01)
    if model_kind == "kinetic":
        data = Dataset(data.states, "markov", data.alphabet, data.labels)
    return data


def _emit(text: str, path=None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _net_json(net, theta=None) -> dict:
    d = {"n_nodes": net.n_nodes,
         "edges": [[i, j, w] for (i, j), w in sorted(net.edges())]}
    if theta is not None:
        d["theta"] = [float(t) for t in theta]
    return d


# -- subcommands ------------------------------------------------------------------


def cmd_reconstruct(args) -> int:
    from .inference import OptimizerConfig, reconstruct_mdl
    from .io import write_network
    from .prior import PriorHyper
    kind, zv = _model(args.model)
    data = _load_data(args, kind)
    kind, zv = _model(args.model, data)
    hyper = PriorHyper(args.delta, args.lam, args.delta_theta, args.lambda_theta)
    cfg = OptimizerConfig(kappa=args.kappa, seed=args.seed, tol_nats=args.tol,
                          max_sweeps=args.max_sweeps,
                          candidate_mode="exact" if args.candidates == "exact" else "nnd",
                          optimize_lambda=args.optimize_lambda)
    net, fields, report = reconstruct_mdl(data, kind, zv, hyper, cfg)
    rep = report.to_dict()
    if args.out:
        cats = WeightCategories(report.delta, report.lam)
        for z, m in report.categories:
            cats.add(cats.create(z), m)
        write_network(args.out, net, cats, fields, {"method": "mdl"})
        _emit(json.dumps(rep, indent=1) + "\n", args.out + ".report.json")
    else:
        rep["network"] = _net_json(net, fields.theta)
        _emit(json.dumps(rep, indent=1) + "\n")
    return EXIT_OK if report.converged else EXIT_NOCONV


def cmd_reconstruct_l1(args) -> int:
    from .baselines import cross_validate_l1, reconstruct_l1
    from .io import write_network
    kind, _ = _model(args.model)
    data = _load_data(args, kind)
    kind, zv = _model(args.model, data)
    if (args.lam is None) == (args.cv is None):
        raise UsageError("give exactly one of --lambda and --cv")
    if args.lam is not None:
        fit = reconstruct_l1(data, kind, args.lam, zero_valued=zv)
        out = {"lambda": args.lam, "E": fit.n_edges, "loglik": fit.loglik,
               "objective": fit.objective}
    else:
        cv = cross_validate_l1(data, kind, args.cv, args.grid, zero_valued=zv, rng=args.seed)
        fit = cv.fit
        out = cv.to_dict()
    if args.out:
        write_network(args.out, fit.net, None, fit.theta, {"method": "l1"})
        _emit(json.dumps(out, indent=1) + "\n", args.out + ".report.json")
    else:
        out["network"] = _net_json(fit.net, fit.theta)
        _emit(json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_decimate(args) -> int:
    from .baselines import decimate
    kind, _ = _model(args.model)
    data = _load_data(args, kind)
    kind, zv = _model(args.model, data)
    traj = decimate(data, kind, args.step, target_E=args.target_E, zero_valued=zv,
                    keep_nets=False)
    lines = [f"# stop: {traj.stopped_by}; {traj.label}", "E\tloglik\traw_loglik"]
    lines += [f"{e}\t{a:.17g}\t{b:.17g}" for e, a, b in
              zip(traj.n_edges, traj.loglik, traj.raw_loglik)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    from .io import parse_data_matrix, read_network, write_data_matrix
    from .simulate import sample_equilibrium, sample_kinetic
    nf = read_network(args.net)
    theta = nf.fields.theta if nf.fields is not None else None
    if (args.kinetic is None) == (args.equilibrium is None):
        raise UsageError("give exactly one of --kinetic and --equilibrium")
    code = EXIT_OK
    if args.kinetic is not None:
        x0 = "random"
        if args.x0 != "random":
            x0 = parse_data_matrix(args.x0).states[:, 0]
        data = sample_kinetic(nf.net, theta, args.kinetic, x0, args.seed, args.zero_valued)
    else:
        data, diag = sample_equilibrium(nf.net, theta, args.equilibrium, args.chains,
                                        args.seed, args.zero_valued)
        print(json.dumps(diag.to_dict()), file=sys.stderr)
        if not diag.converged and not diag.insufficient:
            code = EXIT_NOCONV
    if args.out:
        write_data_matrix(args.out, data)
    else:
        for row in data.states:
            sys.stdout.write("\t".join(str(int(v)) for v in row) + "\n")
    return code


def cmd_plant(args) -> int:
    from .datasets import football_like_edges, karate_edges
    from .io import read_edge_list, write_network
    from .simulate import INV_MEAN_DEGREE, plant_weights
    if args.edges == "karate":
        n, edges = karate_edges()
    elif args.edges == "football":
        n, edges = football_like_edges()
    else:
        n, edges = read_edge_list(args.edges)
    if (args.mean is None) == (not args.mean_invk):
        raise UsageError("give exactly one of --mean and --mean-invk")
    mean = INV_MEAN_DEGREE if args.mean_invk else args.mean
    net = plant_weights(edges, mean, args.sigma, args.seed, n_nodes=n)
    out = args.out
    if out:
        write_network(out, net, None, np.zeros(n))
    else:
        for (i, j), w in sorted(net.edges()):
            sys.stdout.write(f"{i}\t{j}\t{w:.17g}\n")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .io import read_network
    from .metrics import jaccard_binary, jaccard_weighted
    a = read_network(args.true)
    b = read_network(args.hat)
    n = max(a.net.n_nodes, b.net.n_nodes)
    A = read_network(args.true, n).net
    B = read_network(args.hat, n).net
    out = {"jaccard_weighted": jaccard_weighted(A, B), "jaccard_binary": jaccard_binary(A, B),
           "E_true": A.n_edges, "E_hat": B.n_edges}
    _emit(json.dumps(out) + "\n")
    return EXIT_OK


def cmd_perturb(args) -> int:
    from .io import read_network
    from .simulate import MCSpec, keystone_scan, perturb_keystone
    nf = read_network(args.net)
    theta = nf.fields.theta if nf.fields is not None else None
    if (args.node is None) == (args.scan is None):
        raise UsageError("give exactly one of --node and --scan")
    mc = MCSpec(relax_sweeps=args.relax, measure_sweeps=args.measure, n_blocks=args.blocks,
                x0=args.x0)
    if args.node is not None:
        if not 0 <= args.node < nf.net.n_nodes:
            raise DataError(f"node {args.node} out of range")
        results = [perturb_keystone(nf.net, theta, args.node, mc, args.seed)]
    else:
        results, _ = keystone_scan(nf.net, theta, args.scan, mc, args.seed)
    lines = ["node\tz\tstderr\tequilibrated"]
    lines += [f"{r.node_j}\t{r.z_value:.17g}\t{r.mc_stderr:.17g}\t{int(r.equilibrated)}"
              for r in results]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


# -- parser -----------------------------------------------------------------------------


MODELS = ["kinetic", "kinetic-z", "equilibrium", "equilibrium-z"]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mdlnr", description="Sparse network reconstruction from node-state data")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def data_args(q):
        q.add_argument("--data", required=True, help="node-state matrix (rows = nodes)")
        q.add_argument("--model", choices=MODELS, default="kinetic")
        q.add_argument("--map01", action="store_true", help="read a 0/1 file, 0 -> -1")
        q.add_argument("--out", help="output path (default: stdout)")

    q = sub.add_parser("reconstruct", help="MDL reconstruction")
    data_args(q)
    q.add_argument("--delta", type=float, default=1e-8)
    q.add_argument("--lambda", dest="lam", type=float, default=1.0)
    q.add_argument("--delta-theta", type=float, default=1e-8)
    q.add_argument("--lambda-theta", type=float, default=1.0)
    q.add_argument("--optimize-lambda", action="store_true")
    q.add_argument("--kappa", type=float, default=1.0)
    q.add_argument("--candidates", choices=["exact", "nnd"], default="exact")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--max-sweeps", type=int, default=200)
    q.set_defaults(func=cmd_reconstruct)

    q = sub.add_parser("reconstruct-l1", help="L1-penalised reconstruction")
    data_args(q)
    q.add_argument("--lambda", dest="lam", type=float)
    q.add_argument("--cv", type=int, help="number of cross-validation folds")
    q.add_argument("--grid", default="0:3:13", help="log10 grid lo:hi:n")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_reconstruct_l1)

    q = sub.add_parser("decimate", help="decimation trajectory")
    data_args(q)
    q.add_argument("--step", type=float, default=0.02)
    q.add_argument("--target-E", type=int, dest="target_E")
    q.set_defaults(func=cmd_decimate)

    q = sub.add_parser("sample", help="simulate data from a network")
    q.add_argument("--net", required=True)
    q.add_argument("--kinetic", type=int, metavar="M")
    q.add_argument("--x0", default="random", help="'random' or a data file (first column)")
    q.add_argument("--equilibrium", type=int, metavar="M")
    q.add_argument("--chains", type=int, default=4)
    q.add_argument("--zero-valued", action="store_true")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_sample)

    q = sub.add_parser("plant", help="normal weights on an edge list")
    q.add_argument("--edges", required=True, help="edge list file, or 'karate' / 'football'")
    q.add_argument("--mean", type=float)
    q.add_argument("--mean-invk", action="store_true", help="mean = N / (2E)")
    q.add_argument("--sigma", type=float, default=0.01)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_plant)

    q = sub.add_parser("eval", help="compare two networks")
    q.add_argument("--true", required=True)
    q.add_argument("--hat", required=True)
    q.set_defaults(func=cmd_eval)

    q = sub.add_parser("perturb", help="clamping perturbation")
    q.add_argument("--net", required=True)
    q.add_argument("--node", type=int)
    q.add_argument("--scan", type=int)
    q.add_argument("--relax", type=int, default=1000)
    q.add_argument("--measure", type=int, default=2000)
    q.add_argument("--blocks", type=int, default=20)
    q.add_argument("--x0", default="random", choices=["random", "ones"])
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=cmd_perturb)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"mdlnr {args.command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, FileNotFoundError, ValueError) as e:
        print(f"mdlnr {args.command}: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
