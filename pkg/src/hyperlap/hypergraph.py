"""Weighted, signed, possibly non-uniform hypergraphs and their tensors.

Node ids are 0-based in Python and 1-based in the JSON file format::

    {"n": 4, "directed": true,
     "edges": [{"tail": 2, "members": [3, 1], "weight": 2.0}, ...]}

A directed edge contributes the tensor entry ``(tail, *members)``; an
undirected edge is the vertex tuple ``members``. The order of an edge is
the total number of indices it occupies, so a hypergraph splits into
uniform layers keyed by order.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
import warnings
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import FormatError, InvalidArgument, SpecViolation
from .tensor import CubicalTensor, weak_irreducibility


class LaplacianKind(str, enum.Enum):
    """The four Laplacian tensor constructions."""

    UNWEIGHTED = "def1"  # undirected, unweighted: 1/(k-1)! entries, D = degrees
    NORMALIZED = "def2"  # undirected, unweighted, degree-normalized
    DIRECTED = "def3"  # directed, nonnegative weights, D = row sums
    SIGNED = "def4"  # directed, signed weights, D = absolute row sums

    @classmethod
    def parse(cls, value) -> "LaplacianKind":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown Laplacian definition {value!r}; use def1..def4") from None


@dataclass(frozen=True)
class Hyperedge:
    members: tuple
    weight: float = 1.0
    tail: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(int(i) for i in self.members))
        object.__setattr__(self, "weight", float(self.weight))
        if self.tail is not None:
            object.__setattr__(self, "tail", int(self.tail))
        if not self.members:
            raise InvalidArgument("hyperedge members must be nonempty")
        if self.weight == 0.0 or not math.isfinite(self.weight):
            raise InvalidArgument(f"hyperedge weight must be finite and nonzero, got {self.weight!r}")

    @property
    def directed(self) -> bool:
        return self.tail is not None

    @property
    def order(self) -> int:
        return len(self.members) + (1 if self.directed else 0)

    @property
    def index_tuple(self) -> tuple:
        """Tensor index tuple: ``(tail, *heads)`` or the member tuple."""
        return ((self.tail,) + self.members) if self.directed else self.members

    def key(self):
        if self.directed:
            return (self.tail, self.members)
        return (None, tuple(sorted(self.members)))

    def describe(self) -> str:
        if self.directed:
            heads = ",".join(str(i + 1) for i in self.members)
            return f"{self.tail + 1}->({heads}) w={self.weight:g}"
        return "{" + ",".join(str(i + 1) for i in self.members) + f"}} w={self.weight:g}"


class Hypergraph:
    """Immutable hypergraph on nodes ``0..n-1``.

    Duplicate edges (same tail and head tuple, or same vertex set for
    undirected edges) are merged by summing weights, with a warning.
    """

    def __init__(self, n: int, edges, directed: bool = True):
        n = int(n)
        if n < 1:
            raise InvalidArgument(f"node count must be >= 1, got {n}")
        merged: "OrderedDict[tuple, Hyperedge]" = OrderedDict()
        for e in edges:
            if e.directed != bool(directed):
                kind = "directed" if directed else "undirected"
                raise InvalidArgument(f"edge {e.describe()} does not match a {kind} hypergraph")
            for i in e.index_tuple:
                if not 0 <= i < n:
                    raise InvalidArgument(f"edge {e.describe()}: node {i + 1} outside 1..{n}")
            key = e.key()
            if key not in merged:
                merged[key] = e
                continue
            prev = merged[key]
            total = prev.weight + e.weight
            if total == 0.0:
                del merged[key]
                warnings.warn(f"duplicate edge {e.describe()} cancels to zero weight: dropped", stacklevel=2)
            else:
                warnings.warn(f"duplicate edge {e.describe()}: weights summed", stacklevel=2)
                merged[key] = Hyperedge(prev.members, total, prev.tail)
        self.n = n
        self.directed = bool(directed)
        self.edges = tuple(merged.values())

    def __repr__(self):
        return f"Hypergraph(n={self.n}, directed={self.directed}, edges={len(self.edges)}, orders={self.orders})"

    def __eq__(self, other):
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return (self.n, self.directed, self.edges) == (other.n, other.directed, other.edges)

    __hash__ = None

    @property
    def orders(self) -> list:
        return sorted({e.order for e in self.edges})

    @property
    def is_uniform(self) -> bool:
        return len(self.orders) == 1

    @property
    def signed(self) -> bool:
        return any(e.weight < 0 for e in self.edges)

    def layers(self) -> dict:
        out: dict = {}
        for e in self.edges:
            out.setdefault(e.order, []).append(e)
        return {m: out[m] for m in sorted(out)}

    def layer(self, m: int) -> list:
        edges = [e for e in self.edges if e.order == m]
        if not edges:
            raise SpecViolation(f"layer of order {m} is empty (orders present: {self.orders})")
        return edges

    def sub_hypergraph(self, m: int) -> "Hypergraph":
        return Hypergraph(self.n, self.layer(m), self.directed)

    def degrees(self, m: int) -> np.ndarray:
        """Number of order-``m`` edges containing each node."""
        d = np.zeros(self.n)
        for e in self.layer(m):
            for i in set(e.index_tuple):
                d[i] += 1
        return d

    # -- JSON -------------------------------------------------------------

    def to_json_obj(self) -> dict:
        edges = []
        for e in self.edges:
            item = {}
            if e.directed:
                item["tail"] = e.tail + 1
            item["members"] = [i + 1 for i in e.members]
            item["weight"] = e.weight
            edges.append(item)
        return {"n": self.n, "directed": self.directed, "edges": edges}

    def dumps(self, indent: Optional[int] = None) -> str:
        return json.dumps(self.to_json_obj(), indent=indent)

    @classmethod
    def from_json_obj(cls, obj) -> "Hypergraph":
        return parse_hypergraph(obj)

    @classmethod
    def loads(cls, text: str) -> "Hypergraph":
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        return parse_hypergraph(obj)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def parse_hypergraph(obj) -> Hypergraph:
    """Validate a decoded hypergraph JSON document and build the graph."""
    if not isinstance(obj, dict):
        raise FormatError("hypergraph document must be a JSON object")
    n = obj.get("n")
    if not _is_int(n) or n < 1:
        raise FormatError(f"n: expected integer >= 1, got {n!r}")
    directed = obj.get("directed", False)
    if not isinstance(directed, bool):
        raise FormatError(f"directed: expected boolean, got {directed!r}")
    raw = obj.get("edges")
    if not isinstance(raw, list):
        raise FormatError("edges: expected a list")

    def node(value, where):
        if not _is_int(value) or not 1 <= value <= n:
            raise FormatError(f"{where}: node id {value!r} outside 1..{n}")
        return value - 1

    edges = []
    for pos, item in enumerate(raw):
        where = f"edges[{pos}]"
        if not isinstance(item, dict):
            raise FormatError(f"{where}: expected an object")
        unknown = set(item) - {"tail", "members", "weight"}
        if unknown:
            raise FormatError(f"{where}: unknown field(s) {sorted(unknown)}")
        members = item.get("members")
        if not isinstance(members, list) or not members:
            raise FormatError(f"{where}.members: expected a nonempty list")
        members = [node(v, f"{where}.members[{j}]") for j, v in enumerate(members)]
        tail = None
        if directed:
            if "tail" not in item:
                raise FormatError(f"{where}.tail: required for directed hypergraphs")
            tail = node(item["tail"], f"{where}.tail")
        elif "tail" in item:
            raise FormatError(f"{where}.tail: not allowed in an undirected hypergraph")
        weight = item.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool) or not math.isfinite(weight):
            raise FormatError(f"{where}.weight: expected a finite number, got {weight!r}")
        if weight == 0:
            raise FormatError(f"{where}.weight: zero-weight edges are not stored")
        edges.append(Hyperedge(tuple(members), float(weight), tail))
    return Hypergraph(n, edges, directed)


def load_hypergraph(path) -> Hypergraph:
    return Hypergraph.loads(Path(path).read_text(encoding="utf-8"))


def save_hypergraph(H: Hypergraph, path) -> None:
    Path(path).write_text(H.dumps(indent=1) + "\n", encoding="utf-8")


# -- tensor constructions ---------------------------------------------------


def _require_unweighted_undirected(H: Hypergraph, m: int, what: str) -> list:
    if H.directed:
        raise SpecViolation(f"{what} requires an undirected hypergraph")
    edges = H.layer(m)
    for e in edges:
        if e.weight != 1.0:
            raise SpecViolation(f"{what} requires unit weights; edge {e.describe()} is weighted")
        if len(set(e.members)) != len(e.members):
            raise SpecViolation(f"{what} requires distinct vertices; edge {e.describe()} repeats one")
    return edges


def _symmetric_entries(edges, value_of):
    index, values = [], []
    for e in edges:
        w = value_of(e)
        for perm in set(itertools.permutations(e.members)):
            index.append(perm)
            values.append(w)
    return index, values


def adjacency_unweighted(H: Hypergraph, m: int) -> CubicalTensor:
    """Supersymmetric adjacency tensor with entries ``1/(m-1)!``."""
    edges = _require_unweighted_undirected(H, m, "unweighted adjacency (def1)")
    c = 1.0 / math.factorial(m - 1)
    index, values = _symmetric_entries(edges, lambda e: c)
    return CubicalTensor(m, H.n, index, values)


def adjacency_normalized(H: Hypergraph, m: int) -> CubicalTensor:
    """Degree-normalized adjacency: ``1/(m-1)! * prod_j d_{i_j}^{-1/m}``."""
    edges = _require_unweighted_undirected(H, m, "normalized adjacency (def2)")
    d = H.degrees(m)
    for e in edges:
        for i in e.members:
            if d[i] <= 0:
                raise SpecViolation(f"normalized adjacency (def2): node {i + 1} has zero degree")
    c = 1.0 / math.factorial(m - 1)
    scale = d ** (-1.0 / m)

    def value(e):
        return c * float(np.prod(scale[list(e.members)]))

    index, values = _symmetric_entries(edges, value)
    return CubicalTensor(m, H.n, index, values)


def adjacency_directed(H: Hypergraph, m: int, allow_signed: bool = False) -> CubicalTensor:
    """Weighted adjacency tensor: ``A[tail, heads...] = weight``.

    Undirected edges contribute their weight to every ordering of their
    vertex tuple (no ``1/(m-1)!`` factor).
    """
    edges = H.layer(m)
    if not allow_signed:
        for e in edges:
            if e.weight < 0:
                raise SpecViolation(f"negative weight on edge {e.describe()} requires a signed Laplacian (def4)")
    if H.directed:
        return CubicalTensor(m, H.n, [e.index_tuple for e in edges], [e.weight for e in edges])
    index, values = _symmetric_entries(edges, lambda e: e.weight)
    return CubicalTensor(m, H.n, index, values)


def adjacency(H: Hypergraph, m: int, kind) -> CubicalTensor:
    kind = LaplacianKind.parse(kind)
    if kind is LaplacianKind.UNWEIGHTED:
        return adjacency_unweighted(H, m)
    if kind is LaplacianKind.NORMALIZED:
        return adjacency_normalized(H, m)
    return adjacency_directed(H, m, allow_signed=kind is LaplacianKind.SIGNED)


def _diagonal_tensor(m: int, diag) -> CubicalTensor:
    n = len(diag)
    idx = np.repeat(np.arange(n, dtype=np.int64)[:, None], m, axis=1)
    return CubicalTensor(m, n, idx, diag)


def _row_sums(A: CubicalTensor) -> np.ndarray:
    return np.bincount(A.index[:, 0], weights=A.values, minlength=A.dim)


def degree_tensor(H: Hypergraph, m: int, kind) -> CubicalTensor:
    kind = LaplacianKind.parse(kind)
    if kind is LaplacianKind.UNWEIGHTED:
        _require_unweighted_undirected(H, m, "degree tensor (def1)")
        return _diagonal_tensor(m, H.degrees(m))
    if kind is LaplacianKind.NORMALIZED:
        _require_unweighted_undirected(H, m, "degree tensor (def2)")
        return _diagonal_tensor(m, (H.degrees(m) > 0).astype(float))
    A = adjacency_directed(H, m, allow_signed=kind is LaplacianKind.SIGNED)
    return _diagonal_tensor(m, _row_sums(A.map_values(np.abs)))


def laplacian(H: Hypergraph, m: int, kind) -> CubicalTensor:
    """``L = D - A`` for the order-``m`` layer under definition ``kind``."""
    kind = LaplacianKind.parse(kind)
    return degree_tensor(H, m, kind) - adjacency(H, m, kind)


def laplacian_layers(H: Hypergraph, kind) -> dict:
    """Laplacian of every nonempty layer, keyed by order."""
    return {m: laplacian(H, m, kind) for m in H.orders}


def layer_strong_connectivity(H: Hypergraph, m: int) -> bool:
    if m not in H.orders:
        return False
    return weak_irreducibility(adjacency_directed(H, m, allow_signed=True))


def hypergraph_from_tensor(A: CubicalTensor) -> Hypergraph:
    """Directed hypergraph with one edge per nonzero entry of ``A``."""
    edges = [Hyperedge(idx[1:], w, idx[0]) for idx, w in A.entries()]
    return Hypergraph(A.dim, edges, directed=True)


def merge_hypergraphs(*graphs: Hypergraph) -> Hypergraph:
    """Union of hypergraphs on the same node set (layers side by side)."""
    if not graphs:
        raise InvalidArgument("nothing to merge")
    n = graphs[0].n
    directed = graphs[0].directed
    if any(g.n != n or g.directed != directed for g in graphs):
        raise InvalidArgument("merged hypergraphs must share node count and directedness")
    return Hypergraph(n, [e for g in graphs for e in g.edges], directed)
