"""Simulation of Metzler and higher-order Laplacian dynamics.

Supported right-hand sides:

* ``metzler``:       x' = A x^{k-1}
* ``laplacian``:     x' = -L x^{k-1}
* ``nonuniform``:    x' = -sum_m L_m x^{m-1}
* ``nonpolynomial``: x'_i = -sum_m sum L_m[i, i2..im] f(x_i2) ... f(x_im)

Integration is fixed-step RK4 or adaptive Dormand-Prince (scipy's
``RK45`` stepper). Monitors are recorded at every accepted step.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import RK45

from .errors import IntegrationError, InvalidArgument
from .tensor import CubicalTensor, apply

DIVERGENCE_LIMIT = 1e12
SIGN_DEADBAND = 1e-12


@dataclass(frozen=True)
class InteractionFunction:
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    odd: bool = True

    def __call__(self, x):
        return self.fn(x)


IDENTITY = InteractionFunction("identity", lambda x: np.asarray(x, dtype=float))
ARCTAN = InteractionFunction("arctan", np.arctan)
INTERACTIONS = {f.name: f for f in (IDENTITY, ARCTAN)}


def get_interaction(name: str) -> InteractionFunction:
    try:
        return INTERACTIONS[name]
    except KeyError:
        raise InvalidArgument(f"unknown interaction function {name!r}; choose from {sorted(INTERACTIONS)}") from None


def check_interaction(f: InteractionFunction, need_odd: bool = False, lo=-10.0, hi=10.0, samples=10_000) -> list:
    """Sampled check of monotonicity, positivity and (optionally) oddness.

    Returns a list of human-readable problems; empty when all checks pass.
    """
    grid = np.linspace(lo, hi, samples)
    vals = np.asarray(f(grid), dtype=float)
    problems = []
    if not np.all(np.diff(vals) > 0):
        problems.append(f"{f.name}: not strictly increasing on [{lo}, {hi}]")
    if not np.all(vals[grid > 0] > 0):
        problems.append(f"{f.name}: not positive for positive arguments")
    if need_odd and not np.allclose(np.asarray(f(-grid)), -vals, rtol=0, atol=1e-12):
        problems.append(f"{f.name}: not an odd function")
    return problems


@dataclass(frozen=True)
class VectorField:
    kind: str
    tensors: tuple
    f: Optional[InteractionFunction] = None

    def __post_init__(self):
        if not self.tensors:
            raise InvalidArgument("vector field needs at least one tensor")
        dims = {T.dim for T in self.tensors}
        if len(dims) != 1:
            raise InvalidArgument(f"tensors have different dimensions {sorted(dims)}")

    @property
    def n(self) -> int:
        return self.tensors[0].dim

    @property
    def leading_order(self) -> int:
        return max(T.order for T in self.tensors)

    def __call__(self, x) -> np.ndarray:
        return eval_field(self, x)


def metzler_field(A: CubicalTensor) -> VectorField:
    return VectorField("metzler", (A,))


def laplacian_field(L: CubicalTensor) -> VectorField:
    return VectorField("laplacian", (L,))


def nonuniform_field(laplacians: Sequence[CubicalTensor]) -> VectorField:
    return VectorField("nonuniform", tuple(laplacians))


def nonpolynomial_field(laplacians, f: InteractionFunction, signed: bool = False) -> VectorField:
    if isinstance(laplacians, CubicalTensor):
        laplacians = (laplacians,)
    for problem in check_interaction(f, need_odd=signed):
        warnings.warn(f"interaction function assumption violated: {problem}", stacklevel=2)
    return VectorField("nonpolynomial", tuple(laplacians), f)


def eval_field(F: VectorField, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if F.kind == "metzler":
        return apply(F.tensors[0], x)
    if F.kind in ("laplacian", "nonuniform"):
        out = -apply(F.tensors[0], x)
        for L in F.tensors[1:]:
            out -= apply(L, x)
        return out
    if F.kind == "nonpolynomial":
        fx = np.asarray(F.f(x), dtype=float)
        out = -apply(F.tensors[0], fx)
        for L in F.tensors[1:]:
            out -= apply(L, fx)
        return out
    raise InvalidArgument(f"unknown vector field kind {F.kind!r}")


def monitor_vm(x, xstar, k: int) -> float:
    """Lyapunov-like monitor ``max_i (x_i / x*_i)^{k-1}``."""
    xstar = np.asarray(xstar, dtype=float)
    if np.any(xstar <= 0):
        raise InvalidArgument("reference vector x* must be strictly positive")
    return float(np.max((np.asarray(x, dtype=float) / xstar) ** (k - 1)))


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    monitors: dict = field(default_factory=dict)
    sigma: Optional[np.ndarray] = None
    stop_reason: str = "horizon"

    @property
    def diverged(self) -> bool:
        return self.stop_reason in ("diverged", "non-finite")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self):
        return self.times.shape[0]

    def gauged(self) -> np.ndarray:
        """States mapped into the positive orthant frame, ``sigma * x``."""
        return self.states if self.sigma is None else self.states * self.sigma

    def write_csv(self, path, every: int = 1) -> None:
        """Write ``t,x1..xn,Vm,spread`` with 17 significant digits."""
        n = self.states.shape[1]
        header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)] + ["Vm", "spread"])
        rows = [header]
        last = len(self) - 1
        for j in range(len(self)):
            if j % every and j != last:
                continue
            vals = [self.times[j], *self.states[j], self.monitors["Vm"][j], self.monitors["spread"][j]]
            rows.append(",".join(format(float(v), ".17g") for v in vals))
        Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def _rk4_step(F, x, h):
    k1 = eval_field(F, x)
    k2 = eval_field(F, x + 0.5 * h * k1)
    k3 = eval_field(F, x + 0.5 * h * k2)
    k4 = eval_field(F, x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


class _Recorder:
    def __init__(self, sigma, xstar, k, consensus_tol, window, stop_on_consensus):
        self.sigma = sigma
        self.xstar = xstar
        self.k = k
        self.tol = consensus_tol
        self.window = window
        self.stop_on_consensus = stop_on_consensus
        self.times, self.states, self.vm, self.spread, self.abs_spread = [], [], [], [], []
        self.run = 0

    def add(self, t, x) -> bool:
        """Record a state; True when the run should stop on consensus."""
        z = x if self.sigma is None else self.sigma * x
        self.times.append(float(t))
        self.states.append(np.array(x, dtype=float))
        self.vm.append(monitor_vm(z, self.xstar, self.k))
        s = float(z.max() - z.min())
        self.spread.append(s)
        ax = np.abs(x)
        self.abs_spread.append(float(ax.max() - ax.min()))
        self.run = self.run + 1 if s < self.tol else 0
        return self.stop_on_consensus and self.run >= self.window

    def build(self, reason) -> Trajectory:
        states = np.array(self.states)
        signs = np.where(np.abs(states) <= SIGN_DEADBAND, 0, np.sign(states)).astype(int)
        z = states if self.sigma is None else states * self.sigma
        monitors = {
            "Vm": np.array(self.vm),
            "spread": np.array(self.spread),
            "abs_spread": np.array(self.abs_spread),
            "sign": signs,
            "positive": np.all(z > 0, axis=1),
        }
        return Trajectory(np.array(self.times), states, monitors, self.sigma, reason)


def integrate(
    F: VectorField,
    x0,
    t_end: float,
    method: str = "rk4",
    dt: float = 1e-3,
    rtol: float = 1e-9,
    atol: float = 1e-9,
    sigma=None,
    xstar=None,
    stop_on_consensus: bool = False,
    consensus_tol: float = 1e-6,
    window: int = 100,
) -> Trajectory:
    """Integrate ``x' = F(x)`` from ``x0`` over ``[0, t_end]``.

    ``sigma`` (a faction vector) switches the spread and ``Vm`` monitors
    to the gauged state ``sigma * x``. ``xstar`` is the ``Vm`` reference
    (default all ones). The run ends early on divergence
    (``||x||_inf > 1e12`` or non-finite values) and, if requested, once
    the spread stays below ``consensus_tol`` for ``window`` accepted steps.
    """
    x = np.array(x0, dtype=float)
    if x.shape != (F.n,):
        raise InvalidArgument(f"initial state must have length {F.n}")
    if not np.all(np.isfinite(x)):
        raise InvalidArgument("initial state must be finite")
    if t_end <= 0:
        raise InvalidArgument("t_end must be positive")
    if sigma is not None:
        sigma = np.asarray(sigma, dtype=float)
    xstar = np.ones(F.n) if xstar is None else np.asarray(xstar, dtype=float)
    rec = _Recorder(sigma, xstar, F.leading_order, consensus_tol, window, stop_on_consensus)
    if rec.add(0.0, x):
        return rec.build("consensus")

    def check(xn):
        if not np.all(np.isfinite(xn)):
            return "non-finite"
        if np.abs(xn).max() > DIVERGENCE_LIMIT:
            return "diverged"
        return None

    if method == "rk4":
        if dt <= 0:
            raise InvalidArgument("dt must be positive")
        steps = max(1, int(math.ceil(t_end / dt - 1e-9)))
        h = t_end / steps
        for i in range(1, steps + 1):
            xn = _rk4_step(F, x, h)
            bad = check(xn)
            if bad == "non-finite":
                return rec.build(bad)
            x = xn
            if rec.add(i * h, x):
                return rec.build("consensus")
            if bad:
                return rec.build(bad)
        return rec.build("horizon")

    if method == "rk45":
        solver = RK45(lambda t, y: eval_field(F, y), 0.0, x, t_end, rtol=rtol, atol=atol)
        while solver.status == "running":
            msg = solver.step()
            if solver.status == "failed":
                raise IntegrationError(f"adaptive step failed at t={solver.t:.6g}: {msg}", solver.t, np.array(solver.y))
            xn = np.array(solver.y)
            bad = check(xn)
            if bad == "non-finite":
                return rec.build(bad)
            if rec.add(solver.t, xn):
                return rec.build("consensus")
            if bad:
                return rec.build(bad)
        return rec.build("horizon")

    raise InvalidArgument(f"unknown integration method {method!r}; use 'rk4' or 'rk45'")


@dataclass(frozen=True)
class ConsensusHit:
    t_hit: float
    alpha: object  # float, or an array of per-group values in cluster mode
    index: int


def detect_consensus(
    traj: Trajectory,
    mode: str = "identical",
    sigma=None,
    groups=None,
    tol: float = 1e-6,
    window: int = 100,
) -> Optional[ConsensusHit]:
    """First time the spread stays below ``tol`` for ``window`` samples.

    ``identical`` tests ``max x - min x``; ``bipartite`` tests the same on
    ``sigma * x``; ``cluster`` tests the spread inside each index group.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    states = traj.states
    if mode == "identical":
        z = states
        spread = z.max(axis=1) - z.min(axis=1)
    elif mode == "bipartite":
        if sigma is None:
            raise InvalidArgument("bipartite mode needs sigma")
        z = states * np.asarray(sigma, dtype=float)
        spread = z.max(axis=1) - z.min(axis=1)
    elif mode == "cluster":
        if not groups:
            raise InvalidArgument("cluster mode needs groups")
        z = states
        spread = np.max([z[:, list(g)].max(axis=1) - z[:, list(g)].min(axis=1) for g in groups], axis=0)
    else:
        raise InvalidArgument(f"unknown consensus mode {mode!r}")
    ok = np.isfinite(spread) & (spread < tol)
    if ok.shape[0] < window:
        return None
    run = np.convolve(ok.astype(int), np.ones(window, dtype=int), mode="valid")
    hits = np.flatnonzero(run == window)
    if hits.size == 0:
        return None
    i = int(hits[0])
    block = z[i : i + window]
    if mode == "cluster":
        alpha = np.array([block[:, list(g)].mean() for g in groups])
    else:
        alpha = float(block.mean())
    return ConsensusHit(float(traj.times[i]), alpha, i)


@dataclass(frozen=True)
class PositivityReport:
    applicable: bool
    clean: bool
    first_violation_time: Optional[float] = None
    min_component: float = 0.0
    recommendation: str = ""


def positivity_guard(traj: Trajectory, tol_neg: float = 1e-9, sigma=None) -> PositivityReport:
    """Flag states leaving the (gauged) nonnegative orthant.

    The flow keeps the orthant invariant, so a violation means the
    integrator step was too large.
    """
    sigma = traj.sigma if sigma is None else np.asarray(sigma, dtype=float)
    z = traj.states if sigma is None else traj.states * sigma
    if np.any(z[0] < 0):
        return PositivityReport(False, True, None, float(z.min()), "initial state outside the orthant")
    mins = z.min(axis=1)
    bad = np.flatnonzero(mins < -tol_neg)
    if bad.size == 0:
        return PositivityReport(True, True, None, float(mins.min()))
    return PositivityReport(
        True,
        False,
        float(traj.times[bad[0]]),
        float(mins.min()),
        "state left the invariant orthant: integrator error, reduce the step size",
    )


def vm_nonincreasing(traj: Trajectory, tol: float = 1e-9) -> bool:
    """``Vm`` never grows by more than ``tol`` between consecutive samples."""
    vm = traj.monitors["Vm"]
    return bool(np.all(np.diff(vm) <= tol))


@dataclass(frozen=True)
class SignReport:
    verdict: str  # "pass", "fail" or "flagged"
    first_change_time: Optional[float] = None


def sign_preservation(traj: Trajectory) -> SignReport:
    """Compare every recorded sign vector with the initial one.

    Components inside the dead-band around zero count as integrator noise:
    the run is flagged, not failed.
    """
    signs = traj.monitors["sign"]
    ref = signs[0]
    changed = np.any((signs != ref) & (signs != 0), axis=1)
    if changed.any():
        return SignReport("fail", float(traj.times[np.flatnonzero(changed)[0]]))
    if np.any(signs == 0):
        return SignReport("flagged", float(traj.times[np.flatnonzero(np.any(signs == 0, axis=1))[0]]))
    return SignReport("pass")


def distance_to_ray(x, xstar) -> float:
    """Euclidean distance from ``x`` to ``{a * xstar : a >= 0}``."""
    x = np.asarray(x, dtype=float)
    xstar = np.asarray(xstar, dtype=float)
    a = max(0.0, float(x @ xstar) / float(xstar @ xstar))
    return float(np.linalg.norm(x - a * xstar))


def random_initial_state(n: int, rng: np.random.Generator, sigma=None, low: float = 0.5, high: float = 1.5) -> np.ndarray:
    """Uniform draw on ``[low, high]^n``, optionally multiplied by ``sigma``."""
    x = rng.uniform(low, high, size=n)
    return x if sigma is None else np.asarray(sigma, dtype=float) * x


def write_gnuplot_script(csv_path, n: int, script_path, title: str = "", png_name: Optional[str] = None) -> None:
    """Emit a gnuplot script plotting every state column against time."""
    csv_name = Path(csv_path).name
    png_name = png_name or Path(csv_path).with_suffix(".gnuplot.png").name
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set terminal pngcairo size 800,500",
        f"set output '{png_name}'",
        f"set title '{title}'",
        "set xlabel 't'",
        "set ylabel 'x_i(t)'",
        "plot " + ", \\\n     ".join(f"'{csv_name}' using 1:{i + 2} with lines" for i in range(n)),
    ]
    Path(script_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
