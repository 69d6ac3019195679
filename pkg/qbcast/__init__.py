"""
qbcast: capacity regions and broadcast CVQKD key rates of pure-loss bosonic broadcast channels

This package computes the LOCC-assisted entanglement-plus-key capacity region of a
pure-loss broadcast channel (one sender, m receivers, an environment), the
finite-energy rates a two-mode squeezed vacuum achieves, one-shot converse
bounds, time-sharing baselines, and the key-rate regions of Gaussian-modulated
CVQKD with two receivers. A truncated Fock-space oracle and a named check suite
verify the Gaussian formulas independently.

Classes:
    Qbcast: Client running each command and writing CSV/JSON result files.
    BroadcastChannel: Receiver transmittances eta_B1..eta_Bm.
    LinearOpticalNetwork: Interferometer unitary with one input and m receiver outputs.
    RateRegion, TimeSharingRegion: Subset-constraint regions and the time-sharing hull.
    QkdScenario: (eta_B, eta_C, mu) broadcast CVQKD instance.

Functions:
    capacity_region(ch) -> RateRegion:
        All 2^m - 1 subset constraints log2((1 - eta_Tbar)/(1 - eta_B)).

    achievable_rate(ch, T, n_s) -> float:
        g((1 - eta_Tbar) N_S) - g((1 - eta_B) N_S).

    reck_decompose(net), prune_to_cascade(net):
        Decompose a network and reduce it to its beam-splitter cascade.

    key_rates_simultaneous(s), key_rates_charlie_first(s), key_rates_bob_first(s) -> KeyRatePair:
        Broadcast CVQKD rate pairs.

    run_checks(quick=False) -> VerificationReport:
        Gaussian formulas against the Fock oracle and other second routes.

Notes:
    - Quadratures are ordered xxpp with vacuum variance 1.
    - Environment variables and `.env` files set defaults
        - QBCAST_OUTPUT_DIR=results
        - QBCAST_WORKERS=4

Example Usage:
    ```python
    from qbcast import BroadcastChannel, Qbcast, capacity_region

    region = capacity_region(BroadcastChannel((0.2, 0.3)))
    print(region.constraints())

    client = Qbcast(output_dir="results")
    client.qkd(eta_b=0.3, eta_c=0.3, mu=[1, 5, 20])
    ```
"""

from .utility import *
from .gaussian_core import (
    g_function, tmsv_covariance, beam_splitter, apply_symplectic, partial_trace,
    symplectic_eigenvalues, von_neumann_entropy, homodyne_condition, heterodyne_as_loss,
    gaussian_differential_entropy, mutual_information, ClassicalGaussian,
)
from .channel_model import (
    BroadcastChannel, LinearOpticalNetwork, Cascade, BeamSplitterElement, reck_decompose,
    prune_to_cascade, cascade_from_ordering, channel_apply, network_apply,
)
from .capacity import (
    RateRegion, RatePoint, ConverseParams, TimeSharingRegion, capacity_bound, capacity_region, contains,
    achievable_rate, achievable_rate_via_entropy, converse_bound, time_sharing_region,
    symmetric_rate_sums, symmetric_constraint, region_boundary_1to2,
)
from .qkd import (
    QkdScenario, InfoReport, KeyRatePair, build_joint_covariance, classical_entropies,
    holevo_leakage_B, holevo_leakage_C, key_rates_simultaneous, key_rates_charlie_first,
    key_rates_bob_first, bc_rate_region,
)
from .fock_oracle import FockState, tmsv_fock, beam_splitter_fock, oracle_conditional_entropy
from .verify import run_checks
from .main import Qbcast
from .cli import function
