"""
Passive linear-optical broadcast channels.

A `LinearOpticalNetwork` is an l-mode interferometer with one lit input A'
and m receiver outputs; every other output belongs to the environment E.
`reck_decompose` factors its unitary into two-mode elements,
`prune_to_cascade` drops the elements that only ever see vacuum and returns
the equivalent `BroadcastChannel` with its canonical beam-splitter `Cascade`,
and `channel_apply` pushes a Gaussian input through that cascade.

Output labels are 'B1' ... 'Bm' for receivers and 'E' for the environment.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.stats import unitary_group

from .gaussian_core import (
    append_vacuum, apply_symplectic, beam_splitter, n_modes_of, partial_trace,
    passive_transform, phase_rotation, validate_covariance, vacuum, direct_sum,
)
from .utility import CascadeError, InputFileError, NonUnitaryError, ParameterError, as_labels

logger = logging.getLogger(__name__)

UNITARY_TOL = 1e-10
POWER_TOL = 1e-12
ZERO_TOL = 1e-14
ENVIRONMENT = "E"

Label = Union[str, int]


@dataclass(frozen=True)
class BroadcastChannel:
    """
    | Field          | Type            | Description                                         |
    |----------------|-----------------|-----------------------------------------------------|
    | transmittances | tuple of float  | Power reaching each receiver B1..Bm from the sender. |

    The environment receives eta_E = 1 - sum(transmittances).
    """
    transmittances: Tuple[float, ...]

    def __post_init__(self):
        etas = tuple(float(x) for x in np.atleast_1d(self.transmittances))
        if not etas:
            raise ParameterError("A broadcast channel needs at least one receiver")
        if any(not np.isfinite(x) or x < 0 or x > 1 for x in etas):
            raise ParameterError(f"Transmittances must lie in [0, 1], got {list(etas)}")
        if sum(etas) > 1 + POWER_TOL:
            raise ParameterError(f"Transmittances must sum to at most 1, got {sum(etas)}")
        object.__setattr__(self, 'transmittances', etas)

    @property
    def m(self) -> int:
        return len(self.transmittances)

    @property
    def eta_b(self) -> float:
        return min(1.0, sum(self.transmittances))

    @property
    def eta_e(self) -> float:
        return max(0.0, 1.0 - sum(self.transmittances))

    @property
    def labels(self) -> List[str]:
        return as_labels(self.m) + [ENVIRONMENT]

    def powers(self) -> Dict[str, float]:
        return dict(zip(self.labels, list(self.transmittances) + [self.eta_e]))

    def to_dict(self) -> dict:
        return {'transmittances': list(self.transmittances), 'eta_B': self.eta_b, 'eta_E': self.eta_e}


@dataclass(frozen=True)
class BeamSplitterElement:
    """Two-mode element T(theta, phi) = [[e^{i phi} cos, -sin], [e^{i phi} sin, cos]] on (i, j)."""
    modes: Tuple[int, int]
    theta: float
    phi: float = 0.0

    @property
    def transmittance(self) -> float:
        return float(np.cos(self.theta) ** 2)

    def block(self) -> np.ndarray:
        c, s, e = np.cos(self.theta), np.sin(self.theta), np.exp(1j * self.phi)
        return np.array([[e * c, -s], [e * s, c]])

    def matrix(self, l: int) -> np.ndarray:
        i, j = self.modes
        T = np.eye(l, dtype=complex)
        T[np.ix_([i, j], [i, j])] = self.block()
        return T

    def to_dict(self) -> dict:
        return {'modes': list(self.modes), 'theta': self.theta, 'phi': self.phi, 'transmittance': self.transmittance}


@dataclass(frozen=True)
class ReckDecomposition:
    """U = diag(exp(i phases)) T_K ... T_1; `elements` is in light order (T_1 first)."""
    elements: Tuple[BeamSplitterElement, ...]
    phases: np.ndarray

    def reconstruct(self, l: Optional[int] = None) -> np.ndarray:
        l = l or len(self.phases)
        U = np.eye(l, dtype=complex)
        for element in self.elements:
            U = element.matrix(l) @ U
        return np.diag(np.exp(1j * np.asarray(self.phases))) @ U

    def __len__(self):
        return len(self.elements)


@dataclass(frozen=True)
class LinearOpticalNetwork:
    """
    | Field          | Type           | Description                                  |
    |----------------|----------------|----------------------------------------------|
    | unitary        | complex array  | l x l interferometer acting on annihilation operators. |
    | input_mode     | int            | Mode carrying the sender's A'.               |
    | receiver_modes | tuple of int   | Output modes of B1..Bm, in that order.        |
    """
    unitary: np.ndarray
    input_mode: int
    receiver_modes: Tuple[int, ...]

    def __post_init__(self):
        U = np.asarray(self.unitary, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1] or U.shape[0] == 0:
            raise InputFileError(f"Network unitary must be a non-empty square matrix, got shape {U.shape}")
        l = U.shape[0]
        if not np.allclose(U.conj().T @ U, np.eye(l), atol=UNITARY_TOL, rtol=0):
            residual = np.linalg.norm(U.conj().T @ U - np.eye(l))
            raise NonUnitaryError(f"Network matrix is not unitary: |U^dag U - I| = {residual:.3g}")
        receivers = tuple(int(k) for k in self.receiver_modes)
        if not receivers:
            raise InputFileError("At least one receiver mode is required")
        if len(set(receivers)) != len(receivers) or any(not 0 <= k < l for k in receivers):
            raise InputFileError(f"Receiver modes must be distinct indices below {l}, got {list(receivers)}")
        if not 0 <= int(self.input_mode) < l:
            raise InputFileError(f"Input mode must be below {l}, got {self.input_mode}")
        object.__setattr__(self, 'unitary', U)
        object.__setattr__(self, 'input_mode', int(self.input_mode))
        object.__setattr__(self, 'receiver_modes', receivers)

    @property
    def l(self) -> int:
        return self.unitary.shape[0]

    @property
    def environment_modes(self) -> List[int]:
        return [k for k in range(self.l) if k not in self.receiver_modes]

    @classmethod
    def from_dict(cls, data: dict) -> "LinearOpticalNetwork":
        """
        Builds a network from {"l", "unitary", "input_mode", "receiver_modes"},
        where "unitary" is a row-major list of rows of [re, im] pairs.

        Raises:
            InputFileError: If a key is missing or the matrix is malformed.
            NonUnitaryError: If the matrix is not unitary.
        """
        missing = [key for key in ('unitary', 'input_mode', 'receiver_modes') if key not in data]
        if missing:
            raise InputFileError(f"Network file is missing keys: {', '.join(missing)}")
        try:
            pairs = np.asarray(data['unitary'], dtype=float)
        except (TypeError, ValueError):
            raise InputFileError("Network unitary must be a list of rows of [re, im] pairs")
        if pairs.ndim != 3 or pairs.shape[-1] != 2:
            raise InputFileError(f"Network unitary must have shape (l, l, 2), got {pairs.shape}")
        if 'l' in data and int(data['l']) != pairs.shape[0]:
            raise InputFileError(f"Declared l = {data['l']} does not match a {pairs.shape[0]}-row unitary")
        return cls(pairs[..., 0] + 1j * pairs[..., 1], data['input_mode'], tuple(data['receiver_modes']))

    @classmethod
    def load(cls, path: str) -> "LinearOpticalNetwork":
        try:
            with open(path, 'r') as file:
                data = json.load(file)
        except FileNotFoundError:
            raise InputFileError(f"Network file '{path}' not found.")
        except json.JSONDecodeError as e:
            raise InputFileError(f"Network file '{path}' is not valid JSON: {e}")
        if not isinstance(data, dict):
            raise InputFileError(f"Network file '{path}' must hold a JSON object.")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return {
            'l': self.l,
            'unitary': [[[z.real, z.imag] for z in row] for row in self.unitary],
            'input_mode': self.input_mode,
            'receiver_modes': list(self.receiver_modes),
        }


@dataclass(frozen=True)
class Cascade:
    """
    Beam-splitter chain tapping one output per splitter off a carrier.

    Splitter j taps `ordering[j]` and passes the fraction `transmittances[j]`
    of the remaining power on; the last label in `ordering` is the carrier itself.
    `phases` rotates individual outputs after the chain.
    """
    ordering: Tuple[str, ...]
    transmittances: Tuple[float, ...]
    phases: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.transmittances) != len(self.ordering) - 1:
            raise CascadeError(f"{len(self.ordering)} outputs need {len(self.ordering) - 1} splitters, got {len(self.transmittances)}")
        if any(not 0 <= t <= 1 for t in self.transmittances):
            raise CascadeError(f"Cascade transmittances must lie in [0, 1], got {list(self.transmittances)}")

    @property
    def stages(self) -> List[Tuple[str, float]]:
        return list(zip(self.ordering[:-1], self.transmittances))

    def tapped_powers(self) -> Dict[str, float]:
        powers, carried = {}, 1.0
        for label, t in self.stages:
            powers[label] = carried * (1 - t)
            carried *= t
        powers[self.ordering[-1]] = carried
        return powers

    def to_dict(self) -> dict:
        return {
            'ordering': list(self.ordering),
            'transmittances': list(self.transmittances),
            'phases': {label: self.phases.get(label, 0.0) for label in self.ordering},
        }


def reck_decompose(net: Union[LinearOpticalNetwork, np.ndarray], tol: float = 1e-13) -> ReckDecomposition:
    """
    Triangular decomposition into at most l(l-1)/2 two-mode elements.

    Nulls the lower triangle of V = U^dag column by column, bottom row first,
    with T(theta, phi) on rows (row - 1, row); whatever phase is left on the
    diagonal becomes the output phase layer.
    """
    U = net.unitary if isinstance(net, LinearOpticalNetwork) else LinearOpticalNetwork(net, 0, (0,)).unitary
    l = U.shape[0]
    V = U.conj().T.copy()
    elements = []
    for col in range(l - 1):
        for row in range(l - 1, col, -1):
            if abs(V[row, col]) < tol:
                continue
            if abs(V[row - 1, col]) < tol:
                theta, phi = np.pi / 2, 0.0
            else:
                r = -V[row, col] / V[row - 1, col]
                theta, phi = float(np.arctan(abs(r))), float(np.angle(r))
            element = BeamSplitterElement((row - 1, row), theta, phi)
            V = element.matrix(l) @ V
            elements.append(element)
    phases = -np.angle(np.diag(V))
    logger.debug("reck_decompose: l=%d, %d elements", l, len(elements))
    return ReckDecomposition(tuple(elements), phases)


def prune_to_cascade(net: LinearOpticalNetwork, decomposition: Optional[ReckDecomposition] = None) -> Tuple[BroadcastChannel, Cascade]:
    """
    Reduces a network with a single lit input to its broadcast channel.

    Elements whose two input modes both carry vacuum are removed. The remaining
    elements fix the sender's amplitude u_k on every output; receiver B_i gets
    power |u_{B_i}|^2 and output phase arg(u_{B_i}), the environment the rest.
    """
    decomposition = decomposition or reck_decompose(net)
    l = net.l
    lit = {net.input_mode}
    amplitude = np.zeros(l, dtype=complex)
    amplitude[net.input_mode] = 1
    kept = 0
    for element in decomposition.elements:
        i, j = element.modes
        if i not in lit and j not in lit:
            continue
        lit.update(element.modes)
        amplitude[[i, j]] = element.block() @ amplitude[[i, j]]
        kept += 1
    amplitude = np.exp(1j * np.asarray(decomposition.phases)) * amplitude
    if not np.allclose(amplitude, net.unitary[:, net.input_mode], atol=UNITARY_TOL, rtol=0):
        raise NonUnitaryError("Pruned network does not reproduce the input column of the unitary")
    logger.debug("prune_to_cascade: kept %d of %d elements", kept, len(decomposition))

    receiver_amplitudes = amplitude[list(net.receiver_modes)]
    powers = np.abs(receiver_amplitudes) ** 2
    total = powers.sum()
    if total > 1:
        powers = powers / total
    channel = BroadcastChannel(tuple(powers))
    phases = {
        label: float(np.angle(z)) if abs(z) > ZERO_TOL else 0.0
        for label, z in zip(as_labels(channel.m), receiver_amplitudes)
    }
    return channel, cascade_from_ordering(channel, default_ordering(channel), phases)


def default_ordering(ch: BroadcastChannel) -> List[str]:
    """Zero-power outputs first, then the receivers in index order, then E."""
    powers = ch.powers()
    empty = [label for label in ch.labels if powers[label] <= ZERO_TOL]
    return empty + [label for label in ch.labels if label not in empty]


def cascade_from_ordering(ch: BroadcastChannel, ordering: Optional[Sequence[Label]] = None, phases: Optional[Dict[str, float]] = None) -> Cascade:
    """
    Cascade that taps the outputs of `ch` in `ordering` (labels or indices, index m meaning E).

    The j-th splitter transmits (1 - S_j)/(1 - S_{j-1}), S_j being the power of
    the first j outputs.

    Raises:
        CascadeError: If the ordering is not a permutation of the outputs, or a
            prefix already holds all the power before the last output.
    """
    labels = ch.labels
    ordering = [labels[k] if isinstance(k, (int, np.integer)) else str(k) for k in (ordering or default_ordering(ch))]
    if sorted(ordering) != sorted(labels):
        raise CascadeError(f"Ordering {ordering} is not a permutation of {labels}")
    powers = ch.powers()
    transmittances, spent = [], 0.0
    for label in ordering[:-1]:
        remaining = 1.0 - spent
        if remaining <= POWER_TOL:
            raise CascadeError(f"Outputs before '{label}' already carry all the power; put zero-power outputs first")
        spent += powers[label]
        transmittances.append(float(np.clip((1.0 - spent) / remaining, 0.0, 1.0)))
    return Cascade(tuple(ordering), tuple(transmittances), dict(phases or {}))


def channel_apply(ch: BroadcastChannel, gamma_in, cascade: Optional[Cascade] = None) -> np.ndarray:
    """
    Joint covariance over (other input modes, B1..Bm, E) with A' the last input mode.

    Raises:
        ParameterError: If the cascade does not belong to this channel.
    """
    gamma_in = validate_covariance(gamma_in)
    cascade = cascade or cascade_from_ordering(ch)
    if sorted(cascade.ordering) != sorted(ch.labels):
        raise ParameterError(f"Cascade outputs {list(cascade.ordering)} do not match channel outputs {ch.labels}")
    k = n_modes_of(gamma_in)
    carrier = k - 1
    n = k + ch.m
    gamma = append_vacuum(gamma_in, ch.m)
    mode_of = {}
    for j, (label, t) in enumerate(cascade.stages):
        gamma = apply_symplectic(beam_splitter(t, k + j, carrier, n), gamma)
        mode_of[label] = k + j
    mode_of[cascade.ordering[-1]] = carrier
    for label, phi in cascade.phases.items():
        if phi:
            gamma = apply_symplectic(phase_rotation(phi, mode_of[label], n), gamma)
    return partial_trace(gamma, list(range(carrier)) + [mode_of[label] for label in ch.labels])


def network_apply(net: LinearOpticalNetwork, gamma_in) -> np.ndarray:
    """
    Full simulation of the whole interferometer with A' on `input_mode` and
    vacuum elsewhere; returns the (other input modes, B1..Bm) marginal.
    """
    gamma_in = validate_covariance(gamma_in)
    k = n_modes_of(gamma_in)
    a = k - 1
    l = net.l
    gamma = direct_sum(gamma_in, vacuum(l - 1)) if l > 1 else gamma_in
    # modes: A (0..a-1), A' (a), vacua (a+1..); move A' onto the input mode
    order = list(range(a)) + [a + 1 + i for i in range(l - 1)]
    order.insert(a + net.input_mode, a)
    gamma = partial_trace(gamma, order)
    U = np.eye(a + l, dtype=complex)
    U[a:, a:] = net.unitary
    gamma = apply_symplectic(passive_transform(U), gamma)
    return partial_trace(gamma, list(range(a)) + [a + r for r in net.receiver_modes])


def random_network(l: int, m: int, seed: Optional[int] = None) -> LinearOpticalNetwork:
    """Haar-random l-mode network with input mode 0 and m randomly chosen receiver outputs."""
    if not 1 <= m <= l:
        raise ParameterError(f"Need 1 <= m <= l, got m={m}, l={l}")
    rng = np.random.default_rng(seed)
    U = unitary_group.rvs(l, random_state=rng) if l > 1 else np.exp(2j * np.pi * rng.random()) * np.eye(1)
    receivers = tuple(int(k) for k in rng.choice(l, size=m, replace=False))
    return LinearOpticalNetwork(U, 0, receivers)
