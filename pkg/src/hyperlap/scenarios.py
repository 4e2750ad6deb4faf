"""Builtin example hypergraphs and the experiment runner behind the CLI.

The five builtins are four-node networks:

``fig-a``  all-ones 4th-order adjacency tensor (consensus)
``fig-b``  3rd-order all-ones tensor with A[2,3,*] = 2, A[2,4,*] = 3,
           plus an all-ones adjacency matrix (non-uniform consensus)
``fig-c``  signed 4th-order tensor, sgn A[i1..i4] = s_i1 s_i2 s_i3 s_i4
           with s = (1, 1, -1, -1) (bipartite consensus)
``fig-d``  fig-c plus a signed graph layer with sgn B[i, j] = s_i s_j
``fig-np`` as fig-d with s = (1, 1, -1, 1) and f = arctan
"""
from __future__ import annotations

import itertools
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .balance import as_faction_vector, detect_balance_layers, is_even_order_guard, satisfies_balance, signed_edges
from .dynamics import (
    IDENTITY,
    detect_consensus,
    get_interaction,
    integrate,
    nonpolynomial_field,
    nonuniform_field,
    positivity_guard,
    random_initial_state,
    sign_preservation,
    vm_nonincreasing,
    write_gnuplot_script,
)
from .errors import FormatError, SpecViolation
from .hypergraph import (
    Hyperedge,
    Hypergraph,
    LaplacianKind,
    laplacian_layers,
    layer_strong_connectivity,
    load_hypergraph,
)

SUMMARY_SCHEMA = "hyperlap.summary/1"
CONFIG_SCHEMA = "hyperlap.experiment/1"


def _full_layer(k: int, n: int, weight) -> list:
    """One directed edge per index tuple in ``{0..n-1}^k``."""
    return [Hyperedge(t[1:], weight(t), t[0]) for t in itertools.product(range(n), repeat=k)]


def _signed_weight(sigma, magnitude=1.0):
    sigma = np.asarray(sigma)
    return lambda t: magnitude * float(np.prod(sigma[list(t)]))


def graph_fig_a() -> Hypergraph:
    return Hypergraph(4, _full_layer(4, 4, lambda t: 1.0))


def graph_fig_b() -> Hypergraph:
    def w(t):
        # 1-based A[2,3,j] = 2 and A[2,4,j] = 3
        if t[0] == 1 and t[1] == 2:
            return 2.0
        if t[0] == 1 and t[1] == 3:
            return 3.0
        return 1.0

    return Hypergraph(4, _full_layer(3, 4, w) + _full_layer(2, 4, lambda t: 1.0))


FIG_CD_SIGMA = (1, 1, -1, -1)
FIG_NP_SIGMA = (1, 1, -1, 1)


def graph_fig_c() -> Hypergraph:
    return Hypergraph(4, _full_layer(4, 4, _signed_weight(FIG_CD_SIGMA)))


def graph_fig_d() -> Hypergraph:
    w = _signed_weight(FIG_CD_SIGMA)
    return Hypergraph(4, _full_layer(4, 4, w) + _full_layer(2, 4, w))


def graph_fig_np() -> Hypergraph:
    w = _signed_weight(FIG_NP_SIGMA)
    return Hypergraph(4, _full_layer(4, 4, w) + _full_layer(2, 4, w))


BUILTIN_GRAPHS = {
    "fig-a": graph_fig_a,
    "fig-b": graph_fig_b,
    "fig-c": graph_fig_c,
    "fig-d": graph_fig_d,
    "fig-np": graph_fig_np,
}

EXPECTED_SIGMA = {
    "fig-a": (1, 1, 1, 1),
    "fig-b": (1, 1, 1, 1),
    "fig-c": FIG_CD_SIGMA,
    "fig-d": FIG_CD_SIGMA,
    "fig-np": FIG_NP_SIGMA,
}


def resolve_graph(source: str) -> Hypergraph:
    """A builtin name (``fig-a`` ...) or a path to a hypergraph JSON file."""
    if source in BUILTIN_GRAPHS:
        return BUILTIN_GRAPHS[source]()
    path = Path(source)
    if not path.exists():
        raise FormatError(f"graph {source!r} is neither a builtin ({', '.join(BUILTIN_GRAPHS)}) nor an existing file")
    return load_hypergraph(path)


@dataclass
class ExperimentConfig:
    name: str
    graph: str
    spec: str = "def3"
    f: str = "identity"
    method: str = "rk4"
    dt: float = 1e-3
    rtol: float = 1e-9
    atol: float = 1e-9
    t_end: float = 1.0
    seed: int = 0
    consensus_tol: float = 1e-6
    window: int = 100
    sigma: Optional[list] = None
    csv_every: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d["schema"] = CONFIG_SCHEMA
        return d

    @classmethod
    def from_dict(cls, obj) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise FormatError("experiment config must be a JSON object")
        obj = dict(obj)
        schema = obj.pop("schema", CONFIG_SCHEMA)
        if schema != CONFIG_SCHEMA:
            raise FormatError(f"schema: expected {CONFIG_SCHEMA!r}, got {schema!r}")
        known = {f.name for f in fields(cls)}
        unknown = set(obj) - known
        if unknown:
            raise FormatError(f"unknown config field(s) {sorted(unknown)}")
        for key in ("name", "graph"):
            if key not in obj:
                raise FormatError(f"{key}: required")
        return cls(**obj)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ExperimentConfig":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc


BUILTIN_EXPERIMENTS = {
    "fig-a": ExperimentConfig("fig-a", "fig-a", "def3", seed=11),
    "fig-b": ExperimentConfig("fig-b", "fig-b", "def3", seed=12),
    "fig-c": ExperimentConfig("fig-c", "fig-c", "def4", seed=13),
    "fig-d": ExperimentConfig("fig-d", "fig-d", "def4", seed=14),
    "fig-np": ExperimentConfig("fig-np", "fig-np", "def4", f="arctan", seed=15),
}


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    graph: Hypergraph
    summary: dict
    trajectory: object
    sigma: np.ndarray
    files: dict = field(default_factory=dict)

    @property
    def overall(self) -> str:
        return self.summary["overall"]


def _degree_groups(H: Hypergraph, m: int) -> list:
    d = H.degrees(m)
    groups: dict = {}
    for i, v in enumerate(d):
        groups.setdefault(float(v), []).append(i)
    return [groups[v] for v in sorted(groups)]


def _verdict(ok: bool, guaranteed: bool) -> str:
    if ok:
        return "pass"
    return "fail" if guaranteed else "flagged"


def run_experiment(cfg: ExperimentConfig, out_dir=None, plot: bool = True) -> ExperimentResult:
    """Simulate one configured experiment and evaluate its verdicts."""
    H = resolve_graph(cfg.graph)
    kind = LaplacianKind.parse(cfg.spec)
    f = get_interaction(cfg.f)
    warnings_out = []
    guaranteed = True

    if cfg.sigma is not None:
        sigma = as_faction_vector(cfg.sigma, H.n)
        balanced = all(satisfies_balance(signed_edges(H, m), sigma) for m in H.orders)
        if not balanced:
            warnings_out.append("supplied sigma does not satisfy the sign constraints of every layer")
    else:
        cert = detect_balance_layers(H)
        balanced = cert.balanced
        sigma = cert.sigma if balanced else np.ones(H.n, dtype=int)
        if not balanced:
            nodes = ", ".join(str(i + 1) for i in cert.conflict_nodes)
            warnings_out.append(f"hypergraph is structurally unbalanced (conflict among nodes {nodes})")
    if not balanced:
        guaranteed = False
    signed = bool(np.any(sigma < 0)) or not balanced
    for m in H.orders:
        adv = is_even_order_guard(m, signed=signed)
        if not adv.ok:
            warnings_out.append(adv.message)
            guaranteed = False
        if not layer_strong_connectivity(H, m):
            warnings_out.append(f"layer of order {m} is not strongly connected")
            guaranteed = False
    if f is not IDENTITY and kind in (LaplacianKind.UNWEIGHTED, LaplacianKind.NORMALIZED):
        warnings_out.append("non-polynomial interactions are only covered for def3/def4 Laplacians")
        guaranteed = False

    layers = laplacian_layers(H, kind)
    Ls = [layers[m] for m in sorted(layers, reverse=True)]
    if f is IDENTITY:
        F = nonuniform_field(Ls)
    else:
        F = nonpolynomial_field(Ls, f, signed=signed)

    xstar = None
    mode, groups = ("bipartite" if signed else "identical"), None
    if kind is LaplacianKind.NORMALIZED:
        if not H.is_uniform:
            raise SpecViolation("def2 experiments need a uniform hypergraph")
        m = H.orders[0]
        xstar = H.degrees(m) ** (1.0 / m)
        mode, groups = "cluster", _degree_groups(H, m)

    rng = np.random.default_rng(cfg.seed)
    x0 = random_initial_state(H.n, rng, sigma)
    traj = integrate(
        F,
        x0,
        cfg.t_end,
        method=cfg.method,
        dt=cfg.dt,
        rtol=cfg.rtol,
        atol=cfg.atol,
        sigma=sigma,
        xstar=xstar,
        consensus_tol=cfg.consensus_tol,
        window=cfg.window,
    )
    if mode == "cluster":
        hit = detect_consensus(traj, "cluster", groups=groups, tol=cfg.consensus_tol, window=cfg.window)
        alpha_ok = hit is not None and bool(np.all(np.asarray(hit.alpha) > 0))
    else:
        hit = detect_consensus(traj, mode, sigma=sigma, tol=cfg.consensus_tol, window=cfg.window)
        alpha_ok = hit is not None and hit.alpha > 0

    positivity = positivity_guard(traj)
    signs = sign_preservation(traj)
    consensus_verdict = _verdict(alpha_ok, guaranteed)
    vm_verdict = _verdict(vm_nonincreasing(traj), guaranteed)
    sign_verdict = signs.verdict if (guaranteed or signs.verdict == "pass") else "flagged"
    pos_verdict = _verdict(positivity.clean, guaranteed)
    verdicts = [consensus_verdict, vm_verdict, sign_verdict, pos_verdict]
    if "fail" in verdicts:
        overall = "fail"
    elif "flagged" in verdicts:
        overall = "flagged"
    else:
        overall = "pass"

    alpha = None
    if hit is not None:
        alpha = [float(a) for a in hit.alpha] if mode == "cluster" else float(hit.alpha)
    summary = {
        "schema": SUMMARY_SCHEMA,
        "experiment": cfg.name,
        "config": cfg.to_dict(),
        "n": H.n,
        "orders": H.orders,
        "sigma": [int(s) for s in sigma],
        "balanced": bool(balanced),
        "within_guarantees": guaranteed,
        "initial_state": [float(v) for v in x0],
        "consensus": {
            "mode": mode,
            "verdict": consensus_verdict,
            "alpha": alpha,
            "t_hit": None if hit is None else hit.t_hit,
        },
        "vm_monotone": vm_verdict,
        "sign_preservation": sign_verdict,
        "positivity": pos_verdict,
        "stop_reason": traj.stop_reason,
        "t_final": float(traj.times[-1]),
        "final_state": [float(v) for v in traj.final],
        "final_spread": float(traj.monitors["spread"][-1]),
        "warnings": warnings_out,
        "overall": overall,
    }
    result = ExperimentResult(cfg, H, summary, traj, sigma)
    if out_dir is not None:
        write_outputs(result, out_dir, plot=plot)
    return result


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2, sort_keys=True) + "\n"


def write_outputs(result: ExperimentResult, out_dir, plot: bool = True) -> dict:
    """CSV, summary JSON, gnuplot script and (optionally) a PNG figure."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    name = result.config.name
    files = {
        "csv": out / f"{name}.csv",
        "summary": out / f"{name}.summary.json",
        "gnuplot": out / f"{name}.gp",
    }
    result.trajectory.write_csv(files["csv"], every=result.config.csv_every)
    files["summary"].write_text(summary_json(result.summary), encoding="utf-8")
    write_gnuplot_script(files["csv"], result.graph.n, files["gnuplot"], title=name)
    if plot:
        from .plotting import plot_trajectory

        files["figure"] = out / f"{name}.png"
        plot_trajectory(result.trajectory, files["figure"], title=name)
    result.files = {k: str(v) for k, v in files.items()}
    return result.files


def check_builtin(result: ExperimentResult) -> list:
    """Extra repro checks: the faction vector must match the builtin's."""
    name = result.config.graph
    problems = []
    expected = EXPECTED_SIGMA.get(name)
    if expected is not None:
        got = tuple(int(s) for s in result.sigma)
        flipped = tuple(-s for s in expected)
        if not result.summary["balanced"] or got not in (tuple(expected), flipped):
            problems.append(f"{name}: faction vector {got} does not match expected {tuple(expected)}")
    if result.overall != "pass":
        problems.append(f"{name}: overall verdict {result.overall}")
    return problems
