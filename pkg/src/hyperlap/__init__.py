"""Higher-order Laplacian dynamics on signless and signed hypergraphs."""
from .balance import (
    BalanceCertificate,
    combine_factions,
    detect_balance,
    detect_balance_layers,
    gauge_transform,
    is_even_order_guard,
)
from .dynamics import (
    Trajectory,
    VectorField,
    detect_consensus,
    eval_field,
    integrate,
    laplacian_field,
    metzler_field,
    monitor_vm,
    nonpolynomial_field,
    nonuniform_field,
    positivity_guard,
)
from .hypergraph import Hyperedge, Hypergraph, LaplacianKind, laplacian, laplacian_layers
from .spectral import PowerIterationConfig, common_perron_check, perron_metzler, spectral_radius_nonnegative, verify_zero_perron
from .tensor import (
    CubicalTensor,
    EigenPair,
    apply,
    decompose_metzler,
    diagonal_similarity,
    exact_reducibility,
    hadamard_power,
    identity_tensor,
    weak_irreducibility,
)

__version__ = "0.1.0"
