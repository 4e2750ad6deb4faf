"""Cubical tensors and the algebraic kernels built on them.

A :class:`CubicalTensor` of order ``k`` and dimension ``n`` is stored in
coordinate form: an ``(nnz, k)`` integer array of 0-based index tuples,
sorted lexicographically with no duplicates, and a matching value array.
The first index of every tuple is the tail (the row the entry contributes
to in ``T x^{k-1}``).

The JSON interchange form uses 1-based indices::

    {"order": k, "dim": n, "entries": [[i1, ..., ik, weight], ...]}
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import FormatError, InvalidArgument, NotMetzler, UnsupportedSize

# "nonnegative" means >= -NONNEG_TOL after construction arithmetic
NONNEG_TOL = 1e-14
DENSE_LIMIT = 10**7
EXACT_REDUCIBILITY_MAX_DIM = 24


class CubicalTensor:
    """Order-``k``, dimension-``n`` real tensor in sorted coordinate form.

    Instances are treated as immutable; the index and value arrays are
    marked read-only.
    """

    __slots__ = ("order", "dim", "index", "values", "_dense")

    def __init__(self, order: int, dim: int, index, values):
        order = int(order)
        dim = int(dim)
        if order < 2:
            raise InvalidArgument(f"order must be >= 2, got {order}")
        if dim < 1:
            raise InvalidArgument(f"dim must be >= 1, got {dim}")
        index = np.asarray(index, dtype=np.int64).reshape(-1, order)
        values = np.asarray(values, dtype=float).reshape(-1)
        if index.shape[0] != values.shape[0]:
            raise InvalidArgument("index and values have different lengths")
        if index.size and (index.min() < 0 or index.max() >= dim):
            bad = index[np.any((index < 0) | (index >= dim), axis=1)][0]
            raise InvalidArgument(f"index tuple {tuple(bad)} outside 0..{dim - 1}")
        if index.shape[0]:
            index, inverse = np.unique(index, axis=0, return_inverse=True)
            values = np.bincount(inverse.reshape(-1), weights=values, minlength=index.shape[0])
            keep = values != 0.0
            index, values = index[keep], values[keep]
        index.setflags(write=False)
        values.setflags(write=False)
        self.order = order
        self.dim = dim
        self.index = index
        self.values = values
        self._dense = None

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_entries(cls, order: int, dim: int, entries) -> "CubicalTensor":
        """Build from a mapping or iterable of ``(index_tuple, weight)``.

        Repeated tuples are summed.
        """
        if isinstance(entries, Mapping):
            entries = entries.items()
        entries = list(entries)
        if not entries:
            return cls.zeros(order, dim)
        idx = [tuple(e[0]) for e in entries]
        if any(len(t) != order for t in idx):
            raise InvalidArgument(f"every index tuple must have length {order}")
        return cls(order, dim, idx, [e[1] for e in entries])

    @classmethod
    def from_dense(cls, array) -> "CubicalTensor":
        array = np.asarray(array, dtype=float)
        if array.ndim < 2 or len(set(array.shape)) != 1:
            raise InvalidArgument(f"dense array must be cubical, got shape {array.shape}")
        nz = np.nonzero(array)
        index = np.stack(nz, axis=1)
        return cls(array.ndim, array.shape[0], index, array[nz])

    @classmethod
    def zeros(cls, order: int, dim: int) -> "CubicalTensor":
        return cls(order, dim, np.zeros((0, order), dtype=np.int64), np.zeros(0))

    # -- basic accessors --------------------------------------------------

    @property
    def nnz(self) -> int:
        return int(self.values.shape[0])

    @property
    def shape(self) -> tuple:
        return (self.dim,) * self.order

    def __repr__(self):
        return f"CubicalTensor(order={self.order}, dim={self.dim}, nnz={self.nnz})"

    def entries(self):
        """Iterate ``(index_tuple, value)`` pairs in lexicographic order."""
        for row, v in zip(self.index, self.values):
            yield tuple(int(i) for i in row), float(v)

    def __getitem__(self, idx) -> float:
        idx = tuple(int(i) for i in idx)
        if len(idx) != self.order:
            raise InvalidArgument(f"expected an index tuple of length {self.order}")
        hit = np.all(self.index == np.asarray(idx), axis=1)
        pos = np.flatnonzero(hit)
        return float(self.values[pos[0]]) if pos.size else 0.0

    def diagonal_mask(self) -> np.ndarray:
        """Boolean mask over stored entries: True where all indices coincide."""
        return np.all(self.index == self.index[:, :1], axis=1)

    def diagonal(self) -> np.ndarray:
        """The ``n`` diagonal entries ``T_{i...i}`` (zeros included)."""
        diag = np.zeros(self.dim)
        mask = self.diagonal_mask()
        diag[self.index[mask, 0]] = self.values[mask]
        return diag

    def to_dense(self) -> np.ndarray:
        if self.dim**self.order > DENSE_LIMIT:
            raise UnsupportedSize(f"dense form would hold {self.dim}^{self.order} entries")
        if self._dense is None:
            arr = np.zeros(self.shape)
            if self.nnz:
                arr[tuple(self.index.T)] = self.values
            arr.setflags(write=False)
            self._dense = arr
        return self._dense

    # -- arithmetic -------------------------------------------------------

    def _check_same(self, other: "CubicalTensor"):
        if not isinstance(other, CubicalTensor):
            return NotImplemented
        if (self.order, self.dim) != (other.order, other.dim):
            raise InvalidArgument(
                f"shape mismatch: ({self.order}, {self.dim}) vs ({other.order}, {other.dim})"
            )
        return None

    def __add__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return CubicalTensor(
            self.order,
            self.dim,
            np.concatenate([self.index, other.index]),
            np.concatenate([self.values, other.values]),
        )

    def __neg__(self):
        return CubicalTensor(self.order, self.dim, self.index, -self.values)

    def __sub__(self, other):
        if self._check_same(other) is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return CubicalTensor(self.order, self.dim, self.index, self.values * float(scalar))

    __rmul__ = __mul__

    def map_values(self, fn) -> "CubicalTensor":
        """Apply ``fn`` to the value array (e.g. ``np.abs``)."""
        return CubicalTensor(self.order, self.dim, self.index, fn(np.array(self.values)))

    def allclose(self, other: "CubicalTensor", rtol: float = 1e-12, atol: float = 1e-12) -> bool:
        if (self.order, self.dim) != (other.order, other.dim):
            return False
        diff = self - other
        scale = max(np.abs(self.values).max(initial=0.0), np.abs(other.values).max(initial=0.0))
        return bool(np.all(np.abs(diff.values) <= atol + rtol * scale))

    def __eq__(self, other):
        if not isinstance(other, CubicalTensor):
            return NotImplemented
        return (
            self.order == other.order
            and self.dim == other.dim
            and np.array_equal(self.index, other.index)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def is_nonnegative(self, tol: float = NONNEG_TOL) -> bool:
        return bool(np.all(self.values >= -tol))

    # -- products ---------------------------------------------------------

    def apply(self, x, dense: bool = False) -> np.ndarray:
        return apply(self, x, dense=dense)

    # -- JSON -------------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "order": self.order,
            "dim": self.dim,
            "entries": [[i + 1 for i in idx] + [w] for idx, w in self.entries()],
        }

    @classmethod
    def from_json_obj(cls, obj) -> "CubicalTensor":
        if not isinstance(obj, dict):
            raise FormatError("tensor document must be a JSON object")
        for key in ("order", "dim", "entries"):
            if key not in obj:
                raise FormatError(f"tensor document: missing field {key!r}")
        k, n = obj["order"], obj["dim"]
        if not isinstance(k, int) or isinstance(k, bool) or k < 2:
            raise FormatError(f"order: expected integer >= 2, got {k!r}")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise FormatError(f"dim: expected integer >= 1, got {n!r}")
        if not isinstance(obj["entries"], list):
            raise FormatError("entries: expected a list")
        index, values = [], []
        for pos, row in enumerate(obj["entries"]):
            where = f"entries[{pos}]"
            if not isinstance(row, list) or len(row) != k + 1:
                raise FormatError(f"{where}: expected {k} indices followed by a weight")
            for j, i in enumerate(row[:k]):
                if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= n:
                    raise FormatError(f"{where}[{j}]: index {i!r} outside 1..{n}")
            w = row[k]
            if not isinstance(w, (int, float)) or isinstance(w, bool) or not np.isfinite(w):
                raise FormatError(f"{where}[{k}]: weight must be a finite number, got {w!r}")
            index.append([i - 1 for i in row[:k]])
            values.append(float(w))
        if not index:
            return cls.zeros(k, n)
        return cls(k, n, index, values)

    def dumps(self) -> str:
        return json.dumps(self.to_json_obj())

    @classmethod
    def loads(cls, text: str) -> "CubicalTensor":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
        return cls.from_json_obj(obj)


def _as_vector(T: CubicalTensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != T.dim:
        raise InvalidArgument(f"vector of length {T.dim} expected, got shape {x.shape}")
    return x


def apply(T: CubicalTensor, x, dense: bool = False) -> np.ndarray:
    """Return ``T x^{k-1}``, i.e. ``v_i = sum T_{i,i2..ik} x_{i2} ... x_{ik}``."""
    x = _as_vector(T, x)
    if dense:
        out = T.to_dense()
        for _ in range(T.order - 1):
            out = out @ x
        return np.asarray(out, dtype=float)
    prod = np.array(T.values)
    for j in range(1, T.order):
        prod *= x[T.index[:, j]]
    return np.bincount(T.index[:, 0], weights=prod, minlength=T.dim)


def hadamard_power(x, p: int) -> np.ndarray:
    """Componentwise power ``x^{[p]}``."""
    if int(p) != p or p < 1:
        raise InvalidArgument(f"power must be a positive integer, got {p!r}")
    return np.asarray(x, dtype=float) ** int(p)


def identity_tensor(k: int, n: int) -> CubicalTensor:
    diag = np.repeat(np.arange(n, dtype=np.int64)[:, None], k, axis=1)
    return CubicalTensor(k, n, diag, np.ones(n))


def ones_tensor(k: int, n: int) -> CubicalTensor:
    """All-ones tensor of order ``k`` and dimension ``n``."""
    index = np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64)
    return CubicalTensor(k, n, index, np.ones(index.shape[0]))


def diagonal_similarity(A: CubicalTensor, d) -> CubicalTensor:
    """``B = D^{1-k} A D`` entrywise: ``B_{i1..ik} = A_{i1..ik} d_{i1}^{1-k} d_{i2}...d_{ik}``."""
    d = _as_vector(A, d)
    if np.any(d == 0):
        raise InvalidArgument(f"diagonal entry {int(np.flatnonzero(d == 0)[0]) + 1} is zero")
    k = A.order
    factor = d[A.index[:, 0]] ** (1 - k)
    for j in range(1, k):
        factor = factor * d[A.index[:, j]]
    return CubicalTensor(k, A.dim, A.index, A.values * factor)


def check_metzler(A: CubicalTensor, tol: float = NONNEG_TOL) -> None:
    """Raise :class:`NotMetzler` naming the first negative off-diagonal entry."""
    off = ~A.diagonal_mask()
    bad = np.flatnonzero(off & (A.values < -tol))
    if bad.size:
        raise NotMetzler(A.index[bad[0]], A.values[bad[0]])


def is_metzler(A: CubicalTensor, tol: float = NONNEG_TOL) -> bool:
    off = ~A.diagonal_mask()
    return bool(np.all(A.values[off] >= -tol))


def decompose_metzler(A: CubicalTensor) -> tuple:
    """Split a Metzler tensor as ``A = B - s*I`` with the smallest ``s >= 0``.

    Returns ``(B, s)`` with ``B`` entrywise nonnegative.
    """
    check_metzler(A)
    s = max(0.0, -float(A.diagonal().min()))
    if s == 0.0:
        return A, 0.0
    return A + s * identity_tensor(A.order, A.dim), s


def _arc_graph(T: CubicalTensor) -> csr_matrix:
    off = ~T.diagonal_mask()
    idx = T.index[off]
    k = T.order
    tails = np.repeat(idx[:, 0], k - 1)
    heads = idx[:, 1:].reshape(-1)
    data = np.ones(tails.shape[0])
    return csr_matrix((data, (tails, heads)), shape=(T.dim, T.dim))


def weak_irreducibility(T: CubicalTensor) -> bool:
    """Strong connectivity of the tail->head digraph of the nonzero entries.

    Fully diagonal entries are ignored. This is a necessary condition for
    irreducibility in the subset sense (see :func:`exact_reducibility`):
    a weakly reducible tensor is always reducible, but not conversely.
    """
    if T.dim == 1:
        return True
    ncomp, _ = connected_components(_arc_graph(T), directed=True, connection="strong")
    return ncomp == 1


def exact_reducibility(T: CubicalTensor) -> Optional[frozenset]:
    """Search for a witness of reducibility by subset enumeration.

    Returns a nonempty proper 0-based index set ``I`` such that every entry
    with tail in ``I`` and all other indices outside ``I`` vanishes, or
    ``None`` when ``T`` is irreducible.
    """
    n = T.dim
    if n > EXACT_REDUCIBILITY_MAX_DIM:
        raise UnsupportedSize(f"exact reducibility enumerates 2^n subsets; n={n} exceeds {EXACT_REDUCIBILITY_MAX_DIM}")
    if n == 1:
        return None
    # each nonzero entry forbids subsets containing its tail and none of its heads
    pairs = set()
    for row in T.index:
        headmask = 0
        for h in row[1:]:
            headmask |= 1 << int(h)
        pairs.add((int(row[0]), headmask))
    full = (1 << n) - 1
    chunk = 1 << 16
    for start in range(1, full, chunk):
        masks = np.arange(start, min(start + chunk, full), dtype=np.int64)
        ok = np.ones(masks.shape[0], dtype=bool)
        for tail, headmask in pairs:
            ok &= ~((((masks >> tail) & 1) == 1) & ((masks & headmask) == 0))
            if not ok.any():
                break
        hit = np.flatnonzero(ok)
        if hit.size:
            m = int(masks[hit[0]])
            return frozenset(i for i in range(n) if (m >> i) & 1)
    return None


def reducibility_witness_holds(T: CubicalTensor, subset) -> bool:
    """Re-evaluate the reducibility quantifier for a given index subset."""
    subset = set(subset)
    if not subset or len(subset) >= T.dim:
        return False
    for idx, _ in T.entries():
        if idx[0] in subset and all(i not in subset for i in idx[1:]):
            return False
    return True


@dataclass(frozen=True)
class EigenPair:
    """Candidate solution of ``A x^{k-1} = lam x^{[k-1]}``.

    ``residual`` is the max-norm of ``A x^{k-1} - lam x^{[k-1]}`` and is
    always recomputed by :meth:`of`.
    """

    lam: float
    x: np.ndarray
    residual: float
    iterations: int = 0
    gap: float = 0.0
    history: Optional[list] = field(default=None, repr=False, compare=False)

    @classmethod
    def of(cls, A: CubicalTensor, lam: float, x, **extra) -> "EigenPair":
        x = np.array(_as_vector(A, x), dtype=float)
        x.setflags(write=False)
        r = float(np.max(np.abs(apply(A, x) - lam * hadamard_power(x, A.order - 1)), initial=0.0))
        return cls(float(lam), x, r, **extra)

    @property
    def positive(self) -> bool:
        """True for an H++ pair (strictly positive eigenvector)."""
        return bool(np.all(self.x > 0))

    def accepted(self, tol: float) -> bool:
        return self.residual <= tol

    def to_json_obj(self) -> dict:
        return {
            "lambda": self.lam,
            "x": [float(v) for v in self.x],
            "residual": self.residual,
            "iterations": self.iterations,
            "gap": self.gap,
            "positive": self.positive,
        }
