"""H-eigenpairs of nonnegative and Metzler tensors by power iteration.

The iteration is the Collatz-Wielandt min/max-ratio scheme: from a
positive ``x`` it forms ``y = B x^{k-1}`` and brackets the spectral radius
between ``min_i y_i / x_i^{k-1}`` and ``max_i y_i / x_i^{k-1}``. The next
iterate is ``y^{[1/(k-1)]}`` scaled to unit max-norm. For a nonnegative,
weakly irreducible tensor with positive diagonal the bracket shrinks
monotonically to ``rho(B)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConvergenceError, InvalidArgument, ReducibleError
from .tensor import (
    NONNEG_TOL,
    CubicalTensor,
    EigenPair,
    apply,
    decompose_metzler,
    hadamard_power,
    identity_tensor,
    weak_irreducibility,
)

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class PowerIterationConfig:
    """Settings for :func:`spectral_radius_nonnegative`.

    ``tol`` bounds the absolute Collatz-Wielandt gap at termination. It
    is floored at ``16 * eps * upper_bound`` so very large spectral radii
    do not stall on rounding noise.
    """

    tol: float = 1e-12
    max_iter: int = 100_000
    start: Optional[np.ndarray] = None
    track_bounds: bool = False

    def __post_init__(self):
        if not self.tol > 0:
            raise InvalidArgument(f"tol must be positive, got {self.tol!r}")
        if self.max_iter < 1:
            raise InvalidArgument(f"max_iter must be >= 1, got {self.max_iter!r}")
        if self.start is not None:
            start = np.asarray(self.start, dtype=float)
            if start.ndim != 1 or np.any(start <= 0):
                raise InvalidArgument("start vector must be strictly positive")


DEFAULT_CONFIG = PowerIterationConfig()


def spectral_radius_nonnegative(B: CubicalTensor, cfg: PowerIterationConfig = DEFAULT_CONFIG) -> EigenPair:
    """Spectral radius and positive eigenvector of a nonnegative tensor.

    A unit diagonal shift is applied internally when some diagonal entry
    of ``B`` is zero, which rules out cycling on imprimitive tensors; it is
    removed from the reported eigenvalue and bounds.
    """
    if not B.is_nonnegative():
        bad = np.flatnonzero(B.values < -NONNEG_TOL)[0]
        raise InvalidArgument(f"tensor has negative entry at {tuple(int(i) + 1 for i in B.index[bad])}")
    k = B.order
    shift = 1.0 if B.diagonal().min() <= 0.0 else 0.0
    Bs = B + shift * identity_tensor(k, B.dim) if shift else B

    if cfg.start is None:
        x = np.ones(B.dim)
    else:
        x = np.array(cfg.start, dtype=float)
        if x.shape != (B.dim,):
            raise InvalidArgument(f"start vector must have length {B.dim}")
    x = x / x.max()
    history = [] if cfg.track_bounds else None
    gap = np.inf
    for it in range(cfg.max_iter + 1):
        y = apply(Bs, x)
        if np.any(y <= 0.0):
            zero = [int(i) + 1 for i in np.flatnonzero(y <= 0.0)]
            raise ReducibleError(
                f"B x^(k-1) vanishes at components {zero} after {it} iterations; "
                "the tensor is likely reducible"
            )
        ratios = y / hadamard_power(x, k - 1)
        lo, hi = float(ratios.min()), float(ratios.max())
        if history is not None:
            history.append((lo - shift, hi - shift))
        gap = hi - lo
        if gap <= max(cfg.tol, 16 * _EPS * hi):
            lam = 0.5 * (lo + hi) - shift
            return EigenPair.of(B, lam, x, iterations=it, gap=gap, history=history)
        x = y ** (1.0 / (k - 1))
        x /= x.max()
    hint = "" if weak_irreducibility(B) else "; the tensor is weakly reducible"
    raise ConvergenceError(
        f"power iteration did not converge in {cfg.max_iter} iterations (last gap {gap:.3e}){hint}",
        gap=gap,
        iterations=cfg.max_iter,
    )


def perron_metzler(
    A: CubicalTensor, cfg: PowerIterationConfig = DEFAULT_CONFIG, extra_shift: float = 0.0
) -> EigenPair:
    """Perron eigenpair of a Metzler tensor via ``A = B - s I``.

    ``extra_shift`` enlarges ``s`` beyond the minimal admissible value; the
    result is independent of it up to rounding.
    """
    if extra_shift < 0:
        raise InvalidArgument("extra_shift must be nonnegative")
    B, s = decompose_metzler(A)
    if extra_shift:
        B = B + extra_shift * identity_tensor(A.order, A.dim)
        s += extra_shift
    inner = spectral_radius_nonnegative(B, cfg)
    history = None
    if inner.history is not None:
        history = [(lo - s, hi - s) for lo, hi in inner.history]
    return EigenPair.of(A, inner.lam - s, inner.x, iterations=inner.iterations, gap=inner.gap, history=history)


@dataclass(frozen=True)
class ZeroPerronReport:
    residual: float
    passed: bool
    tol: float


def verify_zero_perron(L: CubicalTensor, candidate, tol: float = 1e-10) -> ZeroPerronReport:
    """Check that a positive ``candidate`` satisfies ``L candidate^{k-1} = 0``.

    The residual is ``||L c^{k-1}||_inf / ||c||_inf^{k-1}``.
    """
    c = np.asarray(candidate, dtype=float)
    if c.shape != (L.dim,):
        raise InvalidArgument(f"candidate must have length {L.dim}")
    if np.any(c <= 0):
        raise InvalidArgument("candidate eigenvector must be strictly positive")
    r = float(np.abs(apply(L, c)).max() / c.max() ** (L.order - 1))
    return ZeroPerronReport(r, r <= tol, tol)


@dataclass
class CommonPerronResult:
    vector: Optional[np.ndarray]
    pairs: list = field(default_factory=list)
    failed: Optional[int] = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.vector is not None


def common_perron_check(
    tensors: Sequence[CubicalTensor],
    cfg: PowerIterationConfig = DEFAULT_CONFIG,
    lam_tol: float = 1e-8,
    vec_tol: float = 1e-8,
) -> CommonPerronResult:
    """Test whether Metzler tensors share a zero-eigenvalue Perron vector.

    Orders may differ; the dimension must be shared.
    """
    if not tensors:
        raise InvalidArgument("need at least one tensor")
    n = tensors[0].dim
    if any(T.dim != n for T in tensors):
        raise InvalidArgument("all tensors must share one dimension")
    result = CommonPerronResult(None)
    ref = None
    for pos, T in enumerate(tensors):
        pair = perron_metzler(T, cfg)
        result.pairs.append(pair)
        if abs(pair.lam) > lam_tol:
            result.failed, result.reason = pos, f"tensor {pos}: Perron eigenvalue {pair.lam:.3e} is not zero"
            return result
        if ref is None:
            ref = pair.x
        elif np.abs(pair.x - ref).max() > vec_tol:
            result.failed, result.reason = pos, f"tensor {pos}: Perron vector differs from tensor 0"
            return result
    result.vector = np.array(ref)
    return result
