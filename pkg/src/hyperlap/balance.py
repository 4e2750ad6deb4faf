"""Structural balance of signed hypergraphs and the gauge transformation.

A hypergraph is balanced when some ``sigma`` in ``{+1, -1}^n`` gives
``sgn(w_e) = prod_{i in e} sigma_i`` for every edge (index multiplicity
counted). Writing ``sigma_i = (-1)^{b_i}`` turns each edge into a linear
equation over GF(2),

    sum_{i in e} b_i = [w_e < 0]   (mod 2),

and the system is solved by Gaussian elimination on Python-int bitsets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np

from .errors import InvalidArgument
from .hypergraph import Hypergraph
from .tensor import CubicalTensor


def as_faction_vector(sigma, n: Optional[int] = None) -> np.ndarray:
    """Validate and return ``sigma`` as an int array of +1/-1 entries."""
    arr = np.asarray(sigma)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgument("faction vector must be a nonempty 1-d sequence")
    if not np.all((arr == 1) | (arr == -1)):
        raise InvalidArgument(f"faction vector entries must be +1 or -1, got {arr.tolist()}")
    if n is not None and arr.shape[0] != n:
        raise InvalidArgument(f"faction vector must have length {n}, got {arr.shape[0]}")
    return arr.astype(int)


class SignedEdge(NamedTuple):
    """A signed index tuple; ``source`` tags the layer/certificate it came from."""

    index: tuple
    weight: float
    source: Optional[int] = None

    def to_json_obj(self) -> dict:
        obj = {"index": [i + 1 for i in self.index], "weight": self.weight}
        if self.source is not None:
            obj["source"] = self.source
        return obj


class _Equation(NamedTuple):
    mask: int
    rhs: int
    edge: SignedEdge


def _equation(edge: SignedEdge) -> _Equation:
    if edge.weight == 0 or not np.isfinite(edge.weight):
        raise InvalidArgument(f"edge {tuple(i + 1 for i in edge.index)} has zero or non-finite weight")
    mask = 0
    for i in edge.index:
        mask ^= 1 << int(i)
    return _Equation(mask, 1 if edge.weight < 0 else 0, edge)


def _eliminate(equations: Sequence[_Equation], n: int):
    """Return ``(bits, None)`` for a feasible system or ``(None, origin_set)``.

    Each pivot row is keyed by its highest variable, so back-substitution
    with free variables at zero yields the lexicographically smallest
    solution (lowest-indexed nodes prefer ``sigma = +1``).
    """
    pivots: dict = {}
    for j, eq in enumerate(equations):
        mask, rhs, origin = eq.mask, eq.rhs, 1 << j
        while mask:
            h = mask.bit_length() - 1
            if h not in pivots:
                pivots[h] = (mask, rhs, origin)
                break
            pm, pr, po = pivots[h]
            mask ^= pm
            rhs ^= pr
            origin ^= po
        if mask == 0 and rhs == 1:
            return None, origin
    bits = 0
    for h in sorted(pivots):
        pm, pr, _ = pivots[h]
        rest = pm & ~(1 << h)
        if (pr ^ bin(rest & bits).count("1")) & 1:
            bits |= 1 << h
    return bits, None


def _minimize_conflict(equations: Sequence[_Equation], origin: int, n: int) -> list:
    """Shrink an infeasible subset by greedy deletion to an irreducible one."""
    chosen = [j for j in range(len(equations)) if (origin >> j) & 1]
    for j in list(chosen):
        trial = [i for i in chosen if i != j]
        bits, _ = _eliminate([equations[i] for i in trial], n)
        if bits is None:
            chosen = trial
    return chosen


def _bits_to_sigma(bits: int, n: int) -> np.ndarray:
    return np.array([-1 if (bits >> i) & 1 else 1 for i in range(n)], dtype=int)


@dataclass
class BalanceCertificate:
    """Outcome of a balance test.

    Balanced certificates carry ``sigma``; unbalanced ones carry
    ``conflict``, a set of edges whose sign constraints cannot hold
    simultaneously and from which no edge can be dropped without
    restoring feasibility (minimal by inclusion, not minimum).
    """

    n: int
    balanced: bool
    sigma: Optional[np.ndarray] = None
    conflict: tuple = ()
    edges: tuple = field(default=(), repr=False)

    @classmethod
    def from_sigma(cls, sigma) -> "BalanceCertificate":
        """Certificate for a bare faction vector, up to a global flip."""
        sigma = as_faction_vector(sigma)
        edges = tuple(
            SignedEdge((0, i), float(sigma[0] * sigma[i])) for i in range(1, sigma.shape[0])
        )
        return solve_balance(edges, sigma.shape[0])

    @property
    def conflict_nodes(self) -> list:
        return sorted({i for e in self.conflict for i in e.index})

    def to_json_obj(self) -> dict:
        if self.balanced:
            return {"balanced": True, "sigma": [int(s) for s in self.sigma]}
        return {
            "balanced": False,
            "conflict": [e.to_json_obj() for e in self.conflict],
            "conflict_nodes": [i + 1 for i in self.conflict_nodes],
        }


def solve_balance(edges: Iterable[SignedEdge], n: int) -> BalanceCertificate:
    edges = tuple(edges)
    equations = [_equation(e) for e in edges]
    bits, origin = _eliminate(equations, n)
    if bits is not None:
        return BalanceCertificate(n, True, _bits_to_sigma(bits, n), (), edges)
    keep = _minimize_conflict(equations, origin, n)
    return BalanceCertificate(n, False, None, tuple(equations[j].edge for j in keep), edges)


def signed_edges(source, order: Optional[int] = None) -> tuple:
    """Signed index tuples of a hypergraph layer or of a tensor's entries."""
    if isinstance(source, CubicalTensor):
        return tuple(SignedEdge(idx, w) for idx, w in source.entries())
    if isinstance(source, Hypergraph):
        if order is None:
            if not source.is_uniform:
                raise InvalidArgument(
                    f"hypergraph has layers {source.orders}; test each layer and combine_factions"
                )
            order = source.orders[0]
        return tuple(SignedEdge(e.index_tuple, e.weight) for e in source.layer(order))
    raise InvalidArgument(f"cannot read signed edges from {type(source).__name__}")


def detect_balance(source, order: Optional[int] = None) -> BalanceCertificate:
    """Decide structural balance of a uniform hypergraph (or one layer).

    ``sigma`` is canonical: among all valid faction vectors it is the
    lexicographically largest, so each independent group's lowest node
    gets ``+1``.
    """
    n = source.dim if isinstance(source, CubicalTensor) else source.n
    return solve_balance(signed_edges(source, order), n)


def combine_factions(certs: Sequence[BalanceCertificate]) -> BalanceCertificate:
    """Find one faction vector valid for every certificate at once."""
    if not certs:
        raise InvalidArgument("need at least one certificate")
    n = certs[0].n
    if any(c.n != n for c in certs):
        raise InvalidArgument("certificates cover different node counts")
    for pos, c in enumerate(certs):
        if not c.balanced:
            raise InvalidArgument(f"certificate {pos} is unbalanced")
    edges = [SignedEdge(e.index, e.weight, pos) for pos, c in enumerate(certs) for e in c.edges]
    return solve_balance(edges, n)


def detect_balance_layers(H: Hypergraph) -> BalanceCertificate:
    """Balance of a possibly non-uniform hypergraph with one shared ``sigma``.

    An unbalanced layer is reported as is (``source`` = its order);
    otherwise the layers are combined.
    """
    certs = []
    for m in H.orders:
        cert = detect_balance(H, m)
        if not cert.balanced:
            cert.conflict = tuple(SignedEdge(e.index, e.weight, m) for e in cert.conflict)
            return cert
        certs.append(cert)
    if len(certs) == 1:
        return certs[0]
    combined = combine_factions(certs)
    if not combined.balanced:
        orders = H.orders
        combined.conflict = tuple(SignedEdge(e.index, e.weight, orders[e.source]) for e in combined.conflict)
    return combined


def satisfies_balance(edges: Iterable[SignedEdge], sigma) -> bool:
    """Direct check of ``sgn(w_e) = prod sigma`` over every edge."""
    sigma = as_faction_vector(sigma)
    for e in edges:
        prod = int(np.prod(sigma[list(e.index)]))
        if prod != (1 if e.weight > 0 else -1):
            return False
    return True


def gauge_transform(L: CubicalTensor, sigma) -> CubicalTensor:
    """``(L_D)_{i1..ik} = sigma_{i1}^{-1} L_{i1..ik} sigma_{i2} ... sigma_{ik}``."""
    sigma = as_faction_vector(sigma, L.dim)
    factor = np.prod(sigma[L.index], axis=1)
    return CubicalTensor(L.order, L.dim, L.index, L.values * factor)


@dataclass(frozen=True)
class OrderAdvisory:
    ok: bool
    message: str = ""


def is_even_order_guard(k: int, signed: bool = True) -> OrderAdvisory:
    """Signed dynamics are only covered by the theory for even order.

    For even ``k`` the gauge transform is a diagonal similarity; for odd
    ``k`` it is not, and results fall outside the known guarantees.
    """
    if not signed or k % 2 == 0:
        return OrderAdvisory(True)
    return OrderAdvisory(
        False,
        f"signed dynamics with odd order k={k}: gauge transform is not a diagonal similarity; "
        "bipartite consensus is not guaranteed",
    )
