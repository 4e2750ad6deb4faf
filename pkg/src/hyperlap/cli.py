"""Command-line interface: ``hyperlap {laplacian,eig,balance,simulate,repro}``.

Exit codes: 0 success, 1 verdict or solver failure, 2 input/config error.
The environment variable ``HYPERLAP_SEED`` overrides ``--seed``.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path


from .balance import detect_balance_layers
from .errors import (
    ConvergenceError,
    FormatError,
    HyperlapError,
    IntegrationError,
    InvalidArgument,
    ReducibleError,
)
from .hypergraph import LaplacianKind, laplacian
from .scenarios import (
    BUILTIN_EXPERIMENTS,
    ExperimentConfig,
    check_builtin,
    resolve_graph,
    run_experiment,
    summary_json,
)
from .spectral import PowerIterationConfig, perron_metzler, spectral_radius_nonnegative
from .tensor import CubicalTensor, is_metzler

log = logging.getLogger("hyperlap")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SPECS = [k.value for k in LaplacianKind]


def _print_json(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _seed(args) -> int:
    env = os.environ.get("HYPERLAP_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise InvalidArgument(f"HYPERLAP_SEED must be an integer, got {env!r}") from None
    return args.seed


def _layer_orders(H, order):
    if order is None:
        return H.orders
    if order not in H.orders:
        raise InvalidArgument(f"no layer of order {order} (orders present: {H.orders})")
    return [order]


def cmd_laplacian(args) -> int:
    H = resolve_graph(args.graph)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report = []
    for m in _layer_orders(H, args.order):
        L = laplacian(H, m, args.spec)
        path = out / f"laplacian_{args.spec}_k{m}.json"
        path.write_text(L.dumps() + "\n", encoding="utf-8")
        report.append({"order": m, "dim": L.dim, "nnz": L.nnz, "diagonal": [float(v) for v in L.diagonal()], "path": str(path)})
    _print_json({"spec": args.spec, "layers": report})
    return EXIT_OK


def _load_tensor(args) -> CubicalTensor:
    if args.tensor:
        path = Path(args.tensor)
        if not path.exists():
            raise FormatError(f"tensor file {args.tensor!r} not found")
        return CubicalTensor.loads(path.read_text(encoding="utf-8"))
    if not args.graph:
        raise InvalidArgument("eig needs --tensor PATH or --graph with --spec")
    H = resolve_graph(args.graph)
    orders = _layer_orders(H, args.order)
    if len(orders) != 1:
        raise InvalidArgument(f"graph has layers {orders}; pick one with --order")
    return laplacian(H, orders[0], args.spec)


def cmd_eig(args) -> int:
    T = _load_tensor(args)
    if args.negate:
        T = -T
    cfg = PowerIterationConfig(tol=args.eig_tol, max_iter=args.max_iter)
    if T.is_nonnegative():
        pair, method = spectral_radius_nonnegative(T, cfg), "spectral_radius"
    elif is_metzler(T):
        pair, method = perron_metzler(T, cfg), "perron_metzler"
    else:
        raise InvalidArgument("tensor is neither nonnegative nor Metzler (try --negate for a Laplacian)")
    obj = pair.to_json_obj()
    obj["method"] = method
    _print_json(obj)
    return EXIT_OK


def cmd_balance(args) -> int:
    H = resolve_graph(args.graph)
    cert = detect_balance_layers(H)
    _print_json(cert.to_json_obj())
    return EXIT_OK


def _config_from_args(args) -> ExperimentConfig:
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FormatError(f"config file {args.config!r} not found")
        cfg = ExperimentConfig.loads(path.read_text(encoding="utf-8"))
    else:
        if not args.graph:
            raise InvalidArgument("simulate needs --graph or --config")
        name = args.name or Path(args.graph).stem
        cfg = ExperimentConfig(name=name, graph=args.graph)
    overrides = {
        "spec": args.spec,
        "f": args.f,
        "dt": args.dt,
        "t_end": args.t_end,
        "consensus_tol": args.tol,
        "method": args.method,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.seed is not None or os.environ.get("HYPERLAP_SEED") is not None:
        overrides["seed"] = _seed(args)
    return dataclasses.replace(cfg, **overrides)


def cmd_simulate(args) -> int:
    cfg = _config_from_args(args)
    result = run_experiment(cfg, out_dir=args.out, plot=not args.no_plot)
    sys.stdout.write(summary_json(result.summary))
    return EXIT_FAIL if result.overall == "fail" else EXIT_OK


def cmd_repro(args) -> int:
    names = list(BUILTIN_EXPERIMENTS) if args.target == "all" else [args.target]
    results, failures = [], []
    for name in names:
        cfg = BUILTIN_EXPERIMENTS[name]
        overrides = {}
        if args.seed is not None or os.environ.get("HYPERLAP_SEED") is not None:
            overrides["seed"] = _seed(args)
        if args.t_end is not None:
            overrides["t_end"] = args.t_end
        if args.dt is not None:
            overrides["dt"] = args.dt
        cfg = dataclasses.replace(cfg, **overrides)
        res = run_experiment(cfg, out_dir=args.out, plot=not args.no_plot)
        problems = check_builtin(res)
        failures.extend(problems)
        results.append(res)
        line = {"experiment": name, "overall": res.overall, "alpha": res.summary["consensus"]["alpha"],
                "t_hit": res.summary["consensus"]["t_hit"], "sigma": res.summary["sigma"], "ok": not problems}
        sys.stdout.write(json.dumps(line, sort_keys=True) + "\n")
    if len(results) > 1 and not args.no_plot:
        from .plotting import plot_overview

        plot_overview(results, Path(args.out) / "overview.png")
    for p in failures:
        log.error(p)
    return EXIT_FAIL if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hyperlap", description="Higher-order Laplacian dynamics on hypergraphs.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("laplacian", help="build Laplacian tensors and write them as JSON")
    p.add_argument("--graph", required=True, help="hypergraph JSON path or builtin name")
    p.add_argument("--spec", choices=SPECS, default="def3")
    p.add_argument("--order", type=int, default=None, help="layer order (default: every layer)")
    p.add_argument("--out", default="hyperlap-out")
    p.set_defaults(func=cmd_laplacian)

    p = sub.add_parser("eig", help="Perron eigenpair of a nonnegative or Metzler tensor")
    p.add_argument("--tensor", help="tensor JSON path")
    p.add_argument("--graph", help="build the Laplacian of this graph instead")
    p.add_argument("--spec", choices=SPECS, default="def3")
    p.add_argument("--order", type=int, default=None)
    p.add_argument("--negate", action="store_true", help="use -T (e.g. -L for a Laplacian)")
    p.add_argument("--tol", dest="eig_tol", type=float, default=1e-12, help="Collatz-Wielandt gap tolerance")
    p.add_argument("--max-iter", type=int, default=100_000)
    p.set_defaults(func=cmd_eig)

    p = sub.add_parser("balance", help="structural balance test")
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_balance)

    def sim_flags(p, with_graph=True):
        if with_graph:
            p.add_argument("--graph")
            p.add_argument("--config", help="experiment config JSON")
            p.add_argument("--name")
            p.add_argument("--spec", choices=SPECS)
            p.add_argument("--f", choices=["identity", "arctan"])
            p.add_argument("--tol", type=float, help="consensus tolerance")
            p.add_argument("--method", choices=["rk4", "rk45"])
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--dt", type=float)
        p.add_argument("--t-end", type=float)
        p.add_argument("--out", default="hyperlap-out")
        p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    p = sub.add_parser("simulate", help="run one experiment")
    sim_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("repro", help="reproduce the builtin examples")
    p.add_argument("target", choices=list(BUILTIN_EXPERIMENTS) + ["all"])
    sim_flags(p, with_graph=False)
    p.set_defaults(func=cmd_repro)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ReducibleError, ConvergenceError, IntegrationError) as exc:
        log.error("%s", exc)
        return EXIT_FAIL
    except (HyperlapError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
