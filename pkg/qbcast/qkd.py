"""
Broadcast continuous-variable QKD with reverse reconciliation.

Alice keeps one arm of a TMSV with mu mean photons and sends the other
through a two-receiver pure-loss broadcast channel (eta_B to Bob, eta_C to
Charlie, the rest to the environment). Bob and Charlie heterodyne, modelled
as 50% loss followed by an x homodyne. X, Y and Z are the x outcomes of
Alice, Bob and Charlie.

Each receiver's key is attacked by everyone else: Bob's Holevo leakage is
I(Y; C'E) and Charlie's is I(Z; B'E). Reconciling with Charlie first lets
Alice use Z as side information for Bob's key (and vice versa), which gains
I(Y; Z | X) over running two independent point-to-point protocols.
"""

import math
import logging
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .capacity import polyline
from .channel_model import BroadcastChannel, channel_apply
from .gaussian_core import (
    ClassicalGaussian, PI_E, g_function, gaussian_differential_entropy, heterodyne_as_loss,
    homodyne_condition, homodyne_outcomes, mutual_information, partial_trace, tmsv_covariance,
    von_neumann_entropy,
)
from .utility import ParameterError

logger = logging.getLogger(__name__)

RECEIVERS = ('B', 'C')


@dataclass(frozen=True)
class QkdScenario:
    eta_b: float
    eta_c: float
    mu: float

    def __post_init__(self):
        for name, eta in (('eta_b', self.eta_b), ('eta_c', self.eta_c)):
            if not 0 <= eta <= 1:
                raise ParameterError(f"{name} must lie in [0, 1], got {eta}")
        if self.eta_b + self.eta_c > 1 + 1e-12:
            raise ParameterError(f"eta_b + eta_c must be at most 1, got {self.eta_b + self.eta_c}")
        if not (self.mu >= 0 and math.isfinite(self.mu)):
            raise ParameterError(f"Modulation mu must be a finite nonnegative number, got {self.mu}")

    @property
    def v(self) -> float:
        return 2 * self.mu + 1

    @property
    def channel(self) -> BroadcastChannel:
        return BroadcastChannel((self.eta_b, self.eta_c))

    def swapped(self) -> "QkdScenario":
        return QkdScenario(self.eta_c, self.eta_b, self.mu)

    def eta(self, receiver: str) -> float:
        return {'B': self.eta_b, 'C': self.eta_c}[_receiver(receiver)]


@dataclass(frozen=True)
class InfoReport:
    """Differential entropies and mutual informations of X, Y, Z in bits, plus both Holevo leakages."""
    h_x: float
    h_y: float
    h_z: float
    h_xy: float
    h_xz: float
    h_xyz: float
    i_xy: float
    i_xz: float
    i_xz_y: float
    i_xy_z: float
    i_yz_given_x: float
    holevo_b: Optional[float] = None
    holevo_c: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class KeyRatePair:
    k_ab: float
    k_ac: float

    def clamped(self) -> "KeyRatePair":
        return KeyRatePair(max(0.0, self.k_ab), max(0.0, self.k_ac))

    def swapped(self) -> "KeyRatePair":
        return KeyRatePair(self.k_ac, self.k_ab)

    def as_tuple(self) -> Tuple[float, float]:
        return self.k_ab, self.k_ac


def output_state(s: QkdScenario) -> np.ndarray:
    """Covariance over (A, B', C', E) before the receivers measure."""
    return channel_apply(s.channel, tmsv_covariance(s.mu))


def build_joint_covariance(s: QkdScenario) -> np.ndarray:
    """
    Covariance over (A, B, C) after both heterodyne losses.

    Entries, with v = 2 mu + 1: a = v, b = eta_B (v - 1)/2 + 1,
    d = sqrt(eta_B (v^2 - 1)/2), e = sqrt(eta_B eta_C) (v - 1)/2 and their C
    mirrors; d and the A-C entry flip sign in the p block, e does not.
    """
    gamma = output_state(s)
    gamma = heterodyne_as_loss(gamma, 1)
    gamma = heterodyne_as_loss(gamma, 2)
    return partial_trace(gamma, [0, 1, 2])


def classical_outcomes(s: QkdScenario, quadrature: str = 'x') -> ClassicalGaussian:
    return homodyne_outcomes(build_joint_covariance(s), [0, 1, 2], quadrature, labels=('X', 'Y', 'Z'))


def classical_entropies(s: QkdScenario, outcomes: Optional[ClassicalGaussian] = None) -> InfoReport:
    """Entropies and mutual informations of the homodyne outcomes; Holevo fields are left empty."""
    c = outcomes or classical_outcomes(s)

    def h(names):
        return gaussian_differential_entropy(c.marginal(names))

    return InfoReport(
        h_x=h(['X']), h_y=h(['Y']), h_z=h(['Z']),
        h_xy=h(['X', 'Y']), h_xz=h(['X', 'Z']), h_xyz=h(['X', 'Y', 'Z']),
        i_xy=mutual_information(c, 'X', 'Y'),
        i_xz=mutual_information(c, 'X', 'Z'),
        i_xz_y=mutual_information(c, ['X', 'Z'], 'Y'),
        i_xy_z=mutual_information(c, ['X', 'Y'], 'Z'),
        i_yz_given_x=mutual_information(c, 'Y', 'Z', given='X'),
    )


def classical_entropies_closed_form(s: QkdScenario) -> Dict[str, float]:
    """The textbook determinants of the outcome covariances, for cross-checking the pipeline."""
    v, eb, ec = s.v, s.eta_b, s.eta_c
    dets = {
        'h_x': v,
        'h_y': eb * (v - 1) / 2 + 1,
        'h_z': ec * (v - 1) / 2 + 1,
        'h_xy': (1 - eb / 2) * (v - 1) + 1,
        'h_xz': (1 - ec / 2) * (v - 1) + 1,
        'h_xyz': (1 - (eb + ec) / 2) * (v - 1) + 1,
    }
    sizes = {'h_x': 1, 'h_y': 1, 'h_z': 1, 'h_xy': 2, 'h_xz': 2, 'h_xyz': 3}
    return {key: 0.5 * math.log2(PI_E ** sizes[key] * det) for key, det in dets.items()}


def holevo_leakage(s: QkdScenario, receiver: str = 'B') -> float:
    """
    I(Y; C'E) for receiver 'B' or I(Z; B'E) for 'C', from the covariance pipeline.

    The eavesdropper entropy is that of the other receiver's mode plus the
    environment; the conditional entropy follows Bob's heterodyne (50% loss
    then x homodyne) with the discarded half traced out.
    """
    receiver = _receiver(receiver)
    gamma = output_state(s)
    mine, other = (1, 2) if receiver == 'B' else (2, 1)
    h_eve = von_neumann_entropy(partial_trace(gamma, [other, 3]))
    measured = heterodyne_as_loss(gamma, mine)
    # keep (receiver, other, E) and condition on the receiver's x outcome
    keep = [mine] + [k for k in (1, 2, 3) if k != mine]
    conditioned = homodyne_condition(partial_trace(measured, keep), 0, 'x')
    h_eve_given = von_neumann_entropy(conditioned)
    return h_eve - h_eve_given


def holevo_leakage_B(s: QkdScenario) -> float:
    return holevo_leakage(s, 'B')


def holevo_leakage_C(s: QkdScenario) -> float:
    return holevo_leakage(s, 'C')


def holevo_leakage_closed_form(s: QkdScenario, receiver: str = 'B') -> float:
    """
    The same leakage from H(CE) = g((1 - eta)(v - 1)/2) and the conditional
    covariance diag(alpha, beta), H(CE|Y) = g((sqrt(alpha beta) - 1)/2).
    """
    eta, v = s.eta(receiver), s.v
    b = eta * (v - 1) / 2 + 1
    alpha = (1 - eta) * (v - 1) / b + 1
    beta = (1 - eta) * (v - 1) + 1
    return g_function((1 - eta) * (v - 1) / 2) - g_function((math.sqrt(alpha * beta) - 1) / 2)


def information_report(s: QkdScenario) -> InfoReport:
    report = classical_entropies(s)
    return InfoReport(**{**report.to_dict(), 'holevo_b': holevo_leakage_B(s), 'holevo_c': holevo_leakage_C(s)})


def key_rates_simultaneous(s: QkdScenario, report: Optional[InfoReport] = None) -> KeyRatePair:
    r = _full_report(s, report)
    return KeyRatePair(r.i_xy - r.holevo_b, r.i_xz - r.holevo_c)


def key_rates_charlie_first(s: QkdScenario, report: Optional[InfoReport] = None) -> KeyRatePair:
    """Charlie's data is reconciled first and helps Bob: K_AB = I(XZ;Y) - I(Y;CE)."""
    r = _full_report(s, report)
    return KeyRatePair(r.i_xz_y - r.holevo_b, r.i_xz - r.holevo_c)


def key_rates_bob_first(s: QkdScenario, report: Optional[InfoReport] = None) -> KeyRatePair:
    r = _full_report(s, report)
    return KeyRatePair(r.i_xy - r.holevo_b, r.i_xy_z - r.holevo_c)


def gc09_key_rate(eta: float, mu: float) -> float:
    """Point-to-point no-switching rate I(X;Y) - I(Y;E) over a single pure-loss channel."""
    return key_rates_simultaneous(QkdScenario(eta, 0.0, mu)).k_ab


def bc_rate_region(s: QkdScenario, resolution: int = 1, clamp: bool = False) -> Dict[str, List[Tuple[float, float]]]:
    """
    Frontiers of the three key-rate regions as (K_AB, K_AC) polylines.

    Returns:
        dict: 'bc' (time sharing of the two ordered reconciliations),
        'simultaneous' (independent point-to-point rectangle) and
        'time_sharing' (point-to-point triangle), each from the K_AC axis to the K_AB axis.
    """
    report = information_report(s)
    simultaneous = key_rates_simultaneous(s, report)
    charlie = key_rates_charlie_first(s, report)
    bob = key_rates_bob_first(s, report)
    if clamp:
        simultaneous, charlie, bob = simultaneous.clamped(), charlie.clamped(), bob.clamped()
    logger.debug("bc_rate_region: gain I(Y;Z|X) = %.3g at %s", report.i_yz_given_x, s)
    return {
        'bc': polyline([(0.0, bob.k_ac), bob.as_tuple(), charlie.as_tuple(), (charlie.k_ab, 0.0)], resolution),
        'simultaneous': polyline([(0.0, simultaneous.k_ac), simultaneous.as_tuple(), (simultaneous.k_ab, 0.0)], resolution),
        'time_sharing': polyline([(0.0, simultaneous.k_ac), (simultaneous.k_ab, 0.0)], resolution),
    }


def frontier_height(curve: Sequence[Tuple[float, float]], x: float) -> float:
    """Largest K_AC on the frontier at K_AB = x, or -inf outside its span."""
    best = -math.inf
    for (x0, y0), (x1, y1) in zip(curve[:-1], curve[1:]):
        lo, hi = min(x0, x1), max(x0, x1)
        if not lo - 1e-15 <= x <= hi + 1e-15:
            continue
        y = max(y0, y1) if hi - lo < 1e-15 else y0 + (x - x0) * (y1 - y0) / (x1 - x0)
        best = max(best, y)
    return best


def region_contains(curve: Sequence[Tuple[float, float]], point: Tuple[float, float], tol: float = 1e-12) -> bool:
    """Membership in the region below a frontier drawn by `bc_rate_region`."""
    x, y = point
    if x < -tol or y < -tol:
        return False
    return y <= frontier_height(curve, max(0.0, x)) + tol


def strictly_contains(outer: Sequence[Tuple[float, float]], inner: Sequence[Tuple[float, float]], tol: float = 1e-12) -> bool:
    """True when every vertex of `inner` lies in `outer` and some vertex of `outer` lies outside `inner`."""
    if not all(region_contains(outer, p, tol) for p in inner):
        return False
    return any(not region_contains(inner, p, tol) for p in outer)


def _full_report(s: QkdScenario, report: Optional[InfoReport]) -> InfoReport:
    if report is None or report.holevo_b is None or report.holevo_c is None:
        return information_report(s)
    return report


def _receiver(receiver: str) -> str:
    receiver = str(receiver).upper()
    if receiver not in RECEIVERS:
        raise ParameterError(f"Receiver must be 'B' or 'C', got '{receiver}'")
    return receiver
