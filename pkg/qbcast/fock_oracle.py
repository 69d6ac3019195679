"""
Brute-force entropies in a truncated Fock basis.

A `FockState` is a pure multimode ket stored as a dense tensor with one axis
of length cutoff + 1 per mode. Truncated states are not renormalised: the
missing probability `tail` stays on the state and callers fold it into their
tolerances. Reduced entropies come from the Schmidt spectrum of the ket.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import entr

from .channel_model import BroadcastChannel, cascade_from_ordering
from .gaussian_core import thermal_weights
from .utility import InsufficientCutoffError, ParameterError

logger = logging.getLogger(__name__)

DEFAULT_MAX_TAIL = 1e-10
MAX_AMPLITUDES = 5_000_000


@dataclass(frozen=True)
class FockState:
    ket: np.ndarray
    cutoff: int
    tail: float = 0.0

    @property
    def n_modes(self) -> int:
        return self.ket.ndim

    @property
    def norm(self) -> float:
        """Trace of the density matrix, 1 - tail up to rounding."""
        return float(np.sum(np.abs(self.ket) ** 2))

    def density_matrix(self, modes: Optional[Sequence[int]] = None) -> np.ndarray:
        modes = list(range(self.n_modes)) if modes is None else list(modes)
        M = _bipartition(self, modes)
        return M @ M.conj().T


def tail_mass(n_s: float, cutoff: int) -> float:
    """Probability sum_{k > cutoff} lambda_k(N_S) = (N_S / (N_S + 1))^(cutoff + 1)."""
    if n_s < 0:
        raise ParameterError(f"Mean photon number must be nonnegative, got {n_s}")
    if n_s == 0:
        return 0.0
    return math.exp((cutoff + 1) * (math.log(n_s) - math.log1p(n_s)))


def choose_cutoff(n_s: float, max_tail: float = DEFAULT_MAX_TAIL) -> int:
    if n_s == 0:
        return 0
    if not 0 < max_tail < 1:
        raise ParameterError(f"Tail threshold must lie in (0, 1), got {max_tail}")
    cutoff = max(0, math.ceil(math.log(max_tail) / (math.log(n_s) - math.log1p(n_s))) - 1)
    while tail_mass(n_s, cutoff) > max_tail:
        cutoff += 1
    return cutoff


def fock_state(occupations: Sequence[int], cutoff: int) -> FockState:
    if any(not 0 <= n <= cutoff for n in occupations):
        raise ParameterError(f"Occupations {list(occupations)} exceed cutoff {cutoff}")
    ket = np.zeros((cutoff + 1,) * len(occupations))
    ket[tuple(occupations)] = 1.0
    return FockState(ket, cutoff)


def tmsv_fock(n_s: float, cutoff: Optional[int] = None, max_tail: float = DEFAULT_MAX_TAIL) -> FockState:
    """
    Truncated TMSV: sum_{k <= cutoff} sqrt(lambda_k) |k>|k>.

    Raises:
        InsufficientCutoffError: If the dropped tail exceeds `max_tail`.
    """
    cutoff = choose_cutoff(n_s, max_tail) if cutoff is None else int(cutoff)
    tail = tail_mass(n_s, cutoff)
    if tail > max_tail:
        raise InsufficientCutoffError(f"Cutoff {cutoff} leaves tail mass {tail:.3g} > {max_tail:.3g} at N_S = {n_s}")
    ket = np.diag(np.sqrt(thermal_weights(n_s, cutoff + 1)))
    return FockState(ket, cutoff, tail)


def append_vacuum_modes(state: FockState, count: int) -> FockState:
    size = state.ket.size * (state.cutoff + 1) ** count
    if size > MAX_AMPLITUDES:
        raise ParameterError(f"{state.n_modes + count} modes at cutoff {state.cutoff} need {size} amplitudes; limit is {MAX_AMPLITUDES}")
    ket = np.zeros(state.ket.shape + (state.cutoff + 1,) * count, dtype=state.ket.dtype)
    ket[(Ellipsis,) + (0,) * count] = state.ket
    return FockState(ket, state.cutoff, state.tail)


def beam_splitter_fock(state: FockState, transmittance: float, modes: Sequence[int]) -> FockState:
    """
    Beam splitter on two modes of `state`, in the quadrature convention of
    `gaussian_core.beam_splitter`. Each total-photon-number block is rotated by
    expm(theta (H - H^T)) with H[k + 1, k] = sqrt(k + 1) sqrt(N - k), k counting
    photons in the first mode and cos(theta) = sqrt(transmittance).
    """
    if not 0 <= transmittance <= 1:
        raise ParameterError(f"Transmittance must lie in [0, 1], got {transmittance}")
    i, j = modes
    if i == j or not (0 <= i < state.n_modes and 0 <= j < state.n_modes):
        raise ParameterError(f"Beam splitter needs two distinct modes below {state.n_modes}, got {list(modes)}")
    if transmittance == 1:
        return state
    d = state.cutoff
    theta = math.acos(math.sqrt(transmittance))
    psi = np.moveaxis(state.ket, (i, j), (-2, -1))
    out = np.zeros_like(psi)
    for total in range(2 * d + 1):
        k = np.arange(max(0, total - d), min(d, total) + 1)
        block = _block_unitary(total, theta)[np.ix_(k, k)]
        out[..., k, total - k] = psi[..., k, total - k] @ block.T
    return FockState(np.moveaxis(out, (-2, -1), (i, j)), d, state.tail)


def broadcast_fock(transmittances: Sequence[float], n_s: float, cutoff: Optional[int] = None,
                   max_tail: float = DEFAULT_MAX_TAIL) -> FockState:
    """TMSV(N_S) sent through the broadcast channel; axes are (A, B1..Bm, E)."""
    ch = BroadcastChannel(tuple(transmittances))
    cascade = cascade_from_ordering(ch)
    state = append_vacuum_modes(tmsv_fock(n_s, cutoff, max_tail), ch.m)
    carrier = 1
    axis_of = {}
    for step, (label, t) in enumerate(cascade.stages):
        state = beam_splitter_fock(state, t, (2 + step, carrier))
        axis_of[label] = 2 + step
    axis_of[cascade.ordering[-1]] = carrier
    order = [0] + [axis_of[label] for label in ch.labels]
    logger.debug("broadcast_fock: m=%d, cutoff=%d, tail=%.3g", ch.m, state.cutoff, state.tail)
    return FockState(np.transpose(state.ket, order), state.cutoff, state.tail)


def mean_photons(state: FockState, mode: int) -> float:
    probs = np.abs(state.ket) ** 2
    other = tuple(k for k in range(state.n_modes) if k != mode)
    return float(np.arange(state.cutoff + 1) @ probs.sum(axis=other))


def reduced_entropy(state: FockState, modes: Sequence[int]) -> float:
    """Von Neumann entropy in bits of the reduced state on `modes`, from the Schmidt spectrum."""
    modes = sorted(set(int(k) for k in modes))
    if len(modes) == state.n_modes:
        return float(entr(state.norm) / math.log(2))
    singular = np.linalg.svd(_bipartition(state, modes), compute_uv=False)
    return float(np.sum(entr(singular ** 2)) / math.log(2))


def oracle_conditional_entropy(transmittances: Sequence[float], n_s: float, subset: Sequence[int],
                               cutoff: Optional[int] = None, max_tail: float = DEFAULT_MAX_TAIL) -> float:
    """
    -H(T | A Tbar) = H(A Tbar) - H(A B1..Bm) computed in the Fock basis.

    Args:
        subset: 0-based receiver indices forming T.

    Raises:
        InsufficientCutoffError: If the cutoff leaves more than `max_tail` behind.
    """
    m = len(transmittances)
    members = sorted(set(int(i) for i in subset))
    if not members or any(not 0 <= i < m for i in members):
        raise ParameterError(f"Subset must be a nonempty set of receivers below {m}, got {list(subset)}")
    state = broadcast_fock(transmittances, n_s, cutoff, max_tail)
    tbar = [i + 1 for i in range(m) if i not in members]
    return reduced_entropy(state, [0] + tbar) - reduced_entropy(state, list(range(m + 1)))


def _block_unitary(total: int, theta: float) -> np.ndarray:
    k = np.arange(total)
    H = np.zeros((total + 1, total + 1))
    H[k + 1, k] = np.sqrt(k + 1) * np.sqrt(total - k)
    return expm(theta * (H - H.T))


def _bipartition(state: FockState, modes: Sequence[int]) -> np.ndarray:
    if any(not 0 <= k < state.n_modes for k in modes):
        raise ParameterError(f"Modes {list(modes)} out of range for {state.n_modes} modes")
    rest = [k for k in range(state.n_modes) if k not in modes]
    dim = (state.cutoff + 1) ** len(modes)
    return np.transpose(state.ket, list(modes) + rest).reshape(dim, -1)
