"""
Capacity regions of pure-loss broadcast channels under LOCC assistance.

For a channel with receiver transmittances eta_{B_i}, every nonempty receiver
subset T constrains the combined entanglement-plus-key rates:

    sum_{i in T} r_i <= log2((1 - eta_Tbar) / (1 - eta_B))

where eta_Tbar is the power reaching receivers outside T. Rates are in bits
per channel use and r_i = E_i + K_i is stored as one number.

The same subset structure carries the finite-energy achievable rates
g((1 - eta_Tbar) N_S) - g((1 - eta_B) N_S), the one-shot converse
bound(T) + C(eps)/n, the time-sharing baseline and the symmetric-channel
rate sums.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel_model import BroadcastChannel, channel_apply
from .gaussian_core import g_function, partial_trace, tmsv_covariance, von_neumann_entropy
from .utility import MAX_RECEIVERS, ParameterError, RegionSizeError, as_labels

logger = logging.getLogger(__name__)

CONTAINS_TOL = 1e-12

Subset = Union[int, str, Iterable[Union[int, str]]]


@dataclass(frozen=True)
class SubsetSpec:
    """Receiver subset T (0-based indices) of a channel with its eta_T and eta_Tbar."""
    channel: BroadcastChannel
    members: FrozenSet[int]

    def __post_init__(self):
        if not self.members:
            raise ParameterError("Receiver subset T must be nonempty")
        if any(not 0 <= i < self.channel.m for i in self.members):
            raise ParameterError(f"Subset {sorted(self.members)} has receivers outside 0..{self.channel.m - 1}")

    @classmethod
    def of(cls, channel: BroadcastChannel, subset: Subset) -> "SubsetSpec":
        if isinstance(subset, SubsetSpec):
            return subset
        if isinstance(subset, (int, np.integer, str)):
            subset = [subset]
        labels = as_labels(channel.m)
        members = []
        for item in subset:
            if isinstance(item, str):
                if item not in labels:
                    raise ParameterError(f"Unknown receiver '{item}', expected one of {labels}")
                members.append(labels.index(item))
            else:
                members.append(int(item))
        return cls(channel, frozenset(members))

    @classmethod
    def from_mask(cls, channel: BroadcastChannel, mask: int) -> "SubsetSpec":
        return cls(channel, frozenset(i for i in range(channel.m) if mask >> i & 1))

    @property
    def mask(self) -> int:
        return sum(1 << i for i in self.members)

    @property
    def label(self) -> str:
        return "+".join(f"B{i + 1}" for i in sorted(self.members))

    @property
    def eta_t(self) -> float:
        return sum(self.channel.transmittances[i] for i in self.members)

    @property
    def eta_tbar(self) -> float:
        return sum(eta for i, eta in enumerate(self.channel.transmittances) if i not in self.members)


@dataclass(frozen=True)
class RatePoint:
    rates: Tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in np.atleast_1d(self.rates))
        if any(r < 0 for r in rates):
            raise ParameterError(f"Rates must be nonnegative, got {list(rates)}")
        object.__setattr__(self, 'rates', rates)


@dataclass(frozen=True)
class ConverseParams:
    epsilon: float
    n: int

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ParameterError(f"Error tolerance epsilon must lie in (0, 1), got {self.epsilon}")
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"Channel uses n must be a positive integer, got {self.n}")


@dataclass(frozen=True)
class RateRegion:
    """
    Polytope {r >= 0 : sum_{i in T} r_i <= bounds[mask(T)] for every nonempty T}.

    `kind` names where the bounds came from ('capacity', 'achievable', ...).
    """
    channel: BroadcastChannel
    bounds: Dict[int, float]
    kind: str = "capacity"

    def bound(self, subset: Subset) -> float:
        return self.bounds[SubsetSpec.of(self.channel, subset).mask]

    def constraints(self) -> List[Tuple[str, int, float]]:
        return [(SubsetSpec.from_mask(self.channel, mask).label, mask, self.bounds[mask]) for mask in sorted(self.bounds)]

    def contains(self, point: Union[RatePoint, Sequence[float]], tol: float = CONTAINS_TOL) -> bool:
        return contains(self, point, tol)

    def to_dict(self) -> dict:
        return {'kind': self.kind, 'transmittances': list(self.channel.transmittances),
                'bounds': {str(mask): value for mask, value in sorted(self.bounds.items())}}


@dataclass(frozen=True)
class TimeSharingRegion:
    """Convex hull of the origin and the point-to-point capacities -log2(1 - eta_{B_i}) on each axis."""
    channel: BroadcastChannel
    single_user: Tuple[float, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, 'single_user', tuple(_minus_log2_one_minus(eta) for eta in self.channel.transmittances))

    def vertices(self) -> List[Tuple[float, ...]]:
        m = self.channel.m
        points = [tuple(0.0 for _ in range(m))]
        for i, c in enumerate(self.single_user):
            points.append(tuple(c if k == i else 0.0 for k in range(m)))
        return points

    def contains(self, point: Union[RatePoint, Sequence[float]], tol: float = CONTAINS_TOL) -> bool:
        rates = _rates(self.channel, point)
        load = 0.0
        for r, c in zip(rates, self.single_user):
            if c == 0:
                if r > tol:
                    return False
            elif not math.isinf(c):
                load += r / c
        return load <= 1 + tol


def capacity_bound(ch: BroadcastChannel, subset: Subset) -> float:
    """
    Capacity-region constraint for receiver subset T.

    Returns:
        float: log2((1 - eta_Tbar) / (1 - eta_B)); 0 when eta_T = 0 and
        math.inf when eta_B reaches 1.
    """
    spec = SubsetSpec.of(ch, subset)
    if spec.eta_t <= 0:
        return 0.0
    if ch.eta_b >= 1:
        return math.inf
    return max(0.0, math.log2((1 - spec.eta_tbar) / (1 - ch.eta_b)))


def capacity_region(ch: BroadcastChannel) -> RateRegion:
    """
    All 2^m - 1 subset constraints.

    Raises:
        RegionSizeError: If m exceeds MAX_RECEIVERS.
    """
    _check_size(ch)
    bounds = {mask: capacity_bound(ch, SubsetSpec.from_mask(ch, mask)) for mask in range(1, 1 << ch.m)}
    logger.debug("capacity_region: m=%d, %d constraints", ch.m, len(bounds))
    return RateRegion(ch, bounds, "capacity")


def contains(region: RateRegion, point: Union[RatePoint, Sequence[float]], tol: float = CONTAINS_TOL) -> bool:
    rates = _rates(region.channel, point)
    for mask, bound in region.bounds.items():
        total = sum(r for i, r in enumerate(rates) if mask >> i & 1)
        if total > bound + tol:
            return False
    return True


def achievable_rate(ch: BroadcastChannel, subset: Subset, n_s: float, g: Callable[[float], float] = g_function) -> float:
    """g((1 - eta_Tbar) N_S) - g((1 - eta_B) N_S), the state-merging rate with a TMSV input."""
    if n_s < 0:
        raise ParameterError(f"Mean photon number must be nonnegative, got {n_s}")
    spec = SubsetSpec.of(ch, subset)
    return g((1 - spec.eta_tbar) * n_s) - g((1 - ch.eta_b) * n_s)


def conditional_entropy_terms(ch: BroadcastChannel, subset: Subset, n_s: float) -> Dict[str, float]:
    """
    Entropies of the channel output with a TMSV(N_S) input, from the covariance pipeline.

    Returns:
        dict: 'H(A Tbar)', 'H(A T Tbar)', 'H(T E)' and 'H(E)' in bits.
    """
    if n_s < 0:
        raise ParameterError(f"Mean photon number must be nonnegative, got {n_s}")
    spec = SubsetSpec.of(ch, subset)
    gamma = channel_apply(ch, tmsv_covariance(n_s))
    # modes: A = 0, B_i = i + 1, E = m + 1
    t = [i + 1 for i in sorted(spec.members)]
    tbar = [i + 1 for i in range(ch.m) if i not in spec.members]
    e = ch.m + 1

    def h(modes):
        return von_neumann_entropy(partial_trace(gamma, modes))

    return {
        'H(A Tbar)': h([0] + tbar),
        'H(A T Tbar)': h([0] + list(range(1, ch.m + 1))),
        'H(T E)': h(t + [e]),
        'H(E)': h([e]),
    }


def achievable_rate_via_entropy(ch: BroadcastChannel, subset: Subset, n_s: float) -> float:
    """-H(T | A Tbar) = H(A Tbar) - H(A T Tbar) evaluated on the Gaussian output state."""
    terms = conditional_entropy_terms(ch, subset, n_s)
    return terms['H(A Tbar)'] - terms['H(A T Tbar)']


def achievable_region(ch: BroadcastChannel, n_s: float) -> RateRegion:
    _check_size(ch)
    bounds = {mask: achievable_rate(ch, SubsetSpec.from_mask(ch, mask), n_s) for mask in range(1, 1 << ch.m)}
    return RateRegion(ch, bounds, "achievable")


def converse_constant(epsilon: float) -> float:
    """C(eps) = log2(6) + 2 log2((1 + eps) / (1 - eps))."""
    if not 0 < epsilon < 1:
        raise ParameterError(f"Error tolerance epsilon must lie in (0, 1), got {epsilon}")
    return math.log2(6) + 2 * math.log2((1 + epsilon) / (1 - epsilon))


def converse_bound(ch: BroadcastChannel, subset: Subset, params: ConverseParams) -> float:
    return capacity_bound(ch, subset) + converse_constant(params.epsilon) / params.n


def time_sharing_region(ch: BroadcastChannel) -> TimeSharingRegion:
    return TimeSharingRegion(ch)


def symmetric_rate_sums(eta: float, m: int) -> Tuple[float, float]:
    """
    Best rate sum and time-sharing rate sum for m receivers each getting eta/m.

    Returns:
        tuple: (-log2(1 - eta), -log2(1 - eta/m)).
    """
    _check_symmetric(eta, m)
    return _minus_log2_one_minus(eta), _minus_log2_one_minus(eta / m)


def symmetric_constraint(eta: float, m: int, l: int) -> float:
    """Rate-sum bound obtained from the constraints on l-receiver subsets: (m/l) log2((1 - (m-l) eta/m) / (1 - eta))."""
    _check_symmetric(eta, m)
    if not 1 <= l <= m:
        raise ParameterError(f"Subset size l must lie in 1..{m}, got {l}")
    if eta >= 1:
        return math.inf
    return (m / l) * math.log2((1 - (m - l) * eta / m) / (1 - eta))


def symmetric_region(eta: float, m: int) -> RateRegion:
    """Capacity region of the channel splitting eta evenly over m receivers."""
    _check_symmetric(eta, m)
    return capacity_region(BroadcastChannel(tuple([eta / m] * m)))


def region_boundary_1to2(ch: BroadcastChannel, resolution: int = 1, n_s: Optional[float] = None) -> List[Tuple[float, float]]:
    """
    Pentagon boundary of a two-receiver region, from the r_C axis to the r_B axis.

    Args:
        ch: A channel with exactly two receivers.
        resolution: Points per edge; 1 returns the corners only.
        n_s: When given, draws the finite-energy achievable region instead.

    Raises:
        ParameterError: If m != 2, resolution < 1, or the region is unbounded.
    """
    if ch.m != 2:
        raise ParameterError(f"Boundary extraction needs exactly two receivers, got {ch.m}")
    if resolution < 1:
        raise ParameterError(f"Resolution must be at least 1, got {resolution}")
    bound = capacity_bound if n_s is None else (lambda c, t: achievable_rate(c, t, n_s))
    b_b, b_c, s = bound(ch, [0]), bound(ch, [1]), bound(ch, [0, 1])
    if math.isinf(s):
        raise ParameterError("Region is unbounded at eta_B = 1")
    corners = [(0.0, b_c), (max(0.0, s - b_c), b_c), (b_b, max(0.0, s - b_b)), (b_b, 0.0)]
    return polyline(corners, resolution)


def polyline(corners: Sequence[Tuple[float, float]], resolution: int = 1) -> List[Tuple[float, float]]:
    """Interpolates `resolution` points per edge and drops repeated points."""
    points = []
    for p, q in zip(corners[:-1], corners[1:]):
        for t in np.linspace(0, 1, resolution + 1)[:-1]:
            points.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    points.append(tuple(corners[-1]))
    out = []
    for point in points:
        point = (float(point[0]), float(point[1]))
        if not out or abs(point[0] - out[-1][0]) > 1e-15 or abs(point[1] - out[-1][1]) > 1e-15:
            out.append(point)
    return out


def _rates(ch: BroadcastChannel, point) -> Tuple[float, ...]:
    rates = point.rates if isinstance(point, RatePoint) else RatePoint(tuple(point)).rates
    if len(rates) != ch.m:
        raise ParameterError(f"Rate point has {len(rates)} entries for {ch.m} receivers")
    return rates


def _check_size(ch: BroadcastChannel):
    if ch.m > MAX_RECEIVERS:
        raise RegionSizeError(f"{ch.m} receivers need 2^{ch.m} - 1 constraints; at most {MAX_RECEIVERS} receivers are supported")


def _check_symmetric(eta: float, m: int):
    if not 0 <= eta <= 1:
        raise ParameterError(f"Total transmittance must lie in [0, 1], got {eta}")
    if int(m) != m or m < 1:
        raise ParameterError(f"Receiver count must be a positive integer, got {m}")


def _minus_log2_one_minus(eta: float) -> float:
    if eta >= 1:
        return math.inf
    return -math.log1p(-eta) / math.log(2) if eta > 0 else 0.0
