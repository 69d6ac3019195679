"""
Named numerical cross-checks.

Every check compares two independent routes to the same quantity and reports
the worst deviation against a tolerance. `run_checks` runs the full suite or
the quick subset; passing a different `g` swaps the closed-form entropy
function used by the closed-form routes, which is how a broken g is caught.
"""

import math
import logging
import itertools
from dataclasses import asdict, dataclass, field
from typing import Callable, List

import numpy as np
from joblib import Parallel, delayed

from . import capacity, qkd
from .channel_model import (
    BroadcastChannel, cascade_from_ordering, channel_apply, network_apply, prune_to_cascade,
    random_network, reck_decompose,
)
from .fock_oracle import broadcast_fock, choose_cutoff, oracle_conditional_entropy, reduced_entropy, tail_mass
from .gaussian_core import estimate_mutual_information, g_function, partial_trace, tmsv_covariance, von_neumann_entropy

logger = logging.getLogger(__name__)

G_REFERENCE = {1.0: 2.0, 0.5: 1.5 * math.log2(1.5) + 0.5}


@dataclass
class CheckResult:
    name: str
    deviation: float
    tolerance: float
    passed: bool
    detail: str = ""


@dataclass
class VerificationReport:
    quick: bool
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed(self) -> List[str]:
        return [check.name for check in self.checks if not check.passed]

    def to_dict(self) -> dict:
        return {'passed': self.passed, 'quick': self.quick, 'failed': self.failed,
                'checks': [asdict(check) for check in self.checks]}


def _result(name: str, deviation: float, tolerance: float, detail: str = "", extra_ok: bool = True) -> CheckResult:
    passed = bool(np.isfinite(deviation) and deviation <= tolerance and extra_ok)
    return CheckResult(name, float(deviation), tolerance, passed, detail)


def check_g_values(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    deviation = max(abs(g(x) - expected) for x, expected in G_REFERENCE.items())
    return _result("g_values", deviation, 1e-12, "g(1) = 2 and g(0.5) = 1.5 log2 1.5 + 0.5")


def check_achievable_dual_path(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    rng = np.random.default_rng(2024)
    trials = 10 if quick else 100
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, 5))
        etas = rng.dirichlet(np.ones(m + 1))[:m]
        ch = BroadcastChannel(tuple(etas))
        mask = int(rng.integers(1, 1 << m))
        n_s = float(rng.uniform(0.01, 10))
        subset = capacity.SubsetSpec.from_mask(ch, mask)
        closed = capacity.achievable_rate(ch, subset, n_s, g=g)
        pipeline = capacity.achievable_rate_via_entropy(ch, subset, n_s)
        worst = max(worst, abs(closed - pipeline))
    return _result("achievable_dual_path", worst, 1e-8, f"{trials} random (channel, subset, N_S) triples")


def check_fock_oracle(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    cases = [(0.1, (0.3,)), (0.1, (0.2, 0.3))]
    if not quick:
        cases += [(0.5, (0.3,)), (0.5, (0.2, 0.3)), (0.5, (0.2, 0.3, 0.1))]
    worst, ok = 0.0, True
    for n_s, etas in cases:
        ch = BroadcastChannel(etas)
        tolerance = max(1e-6, 10 * tail_mass(n_s, choose_cutoff(n_s)))
        for mask in range(1, 1 << ch.m):
            subset = capacity.SubsetSpec.from_mask(ch, mask)
            oracle = oracle_conditional_entropy(etas, n_s, sorted(subset.members))
            deviation = abs(oracle - capacity.achievable_rate(ch, subset, n_s, g=g))
            worst = max(worst, deviation)
            ok = ok and deviation <= tolerance
    return _result("fock_oracle", worst, 1e-6, f"{len(cases)} channels against the Fock-basis oracle", ok)


def check_ordering_invariance(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    ch = BroadcastChannel((0.2, 0.3, 0.15))
    gamma_in = tmsv_covariance(1.0)
    reference = channel_apply(ch, gamma_in)
    worst = 0.0
    for ordering in itertools.permutations(ch.labels):
        out = channel_apply(ch, gamma_in, cascade_from_ordering(ch, ordering))
        worst = max(worst, float(np.abs(out - reference).max()))
    return _result("ordering_invariance", worst, 1e-10, "all 24 output orderings of a three-receiver channel")


def check_decomposition_round_trip(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    worst = 0.0
    sizes = range(2, 5) if quick else range(2, 7)
    gamma_in = tmsv_covariance(1.0)
    for seed, l in enumerate(sizes):
        net = random_network(l, min(2, l), seed=seed)
        decomposition = reck_decompose(net)
        worst = max(worst, float(np.linalg.norm(decomposition.reconstruct(l) - net.unitary)))
        ch, cascade = prune_to_cascade(net, decomposition)
        direct = network_apply(net, gamma_in)
        reduced = channel_apply(ch, gamma_in, cascade)
        keep = list(range(ch.m + 1))
        worst = max(worst, float(np.abs(partial_trace(reduced, keep) - direct).max()))
    return _result("decomposition_round_trip", worst, 1e-10, f"Haar-random networks with l in {list(sizes)}")


def check_holevo_dual_path(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    scenarios = [qkd.QkdScenario(0.3, 0.3, 5), qkd.QkdScenario(0.2, 0.5, 1)]
    if not quick:
        scenarios += [qkd.QkdScenario(0.6, 0.1, 20), qkd.QkdScenario(0.45, 0.45, 0.5)]
    worst = 0.0
    for s in scenarios:
        for receiver in qkd.RECEIVERS:
            worst = max(worst, abs(qkd.holevo_leakage(s, receiver) - qkd.holevo_leakage_closed_form(s, receiver)))
    return _result("holevo_dual_path", worst, 1e-8, f"{len(scenarios)} scenarios, both receivers")


def check_qkd_gain_identity(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    worst, positive = 0.0, True
    for mu in (1, 5, 20):
        s = qkd.QkdScenario(0.3, 0.3, mu)
        report = qkd.information_report(s)
        gain = qkd.key_rates_charlie_first(s, report).k_ab - qkd.key_rates_simultaneous(s, report).k_ab
        worst = max(worst, abs(gain - report.i_yz_given_x))
        positive = positive and report.i_yz_given_x > 0
    return _result("qkd_gain_identity", worst, 1e-10, "K_AB gain equals I(Y;Z|X) > 0 at mu = 1, 5, 20", positive)


def check_converse_arithmetic(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    ch = BroadcastChannel((0.2, 0.3))
    deviation = abs(capacity.converse_constant(1 / 3) - (math.log2(6) + 2))
    limit = capacity.converse_bound(ch, [0, 1], capacity.ConverseParams(0.01, 10 ** 8)) - capacity.capacity_bound(ch, [0, 1])
    return _result("converse_arithmetic", max(deviation, 0.0), 1e-12, "C(1/3) = log2 6 + 2", limit < 1e-7)


def check_monte_carlo_mutual_information(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    s = qkd.QkdScenario(0.3, 0.3, 5)
    outcomes = qkd.classical_outcomes(s)
    exact = qkd.classical_entropies(s, outcomes).i_xy
    estimate = estimate_mutual_information(outcomes, 'X', 'Y', n_samples=1_000_000, seed=7)
    return _result("monte_carlo_mutual_information", abs(exact - estimate), 5e-3, "10^6-sample plug-in estimate of I(X;Y)")


def check_fock_eavesdropper_entropy(g: Callable[[float], float] = g_function, quick: bool = True) -> CheckResult:
    s = qkd.QkdScenario(0.3, 0.3, 0.5)
    state = broadcast_fock((s.eta_b, s.eta_c), s.mu)
    gamma = qkd.output_state(s)
    worst = 0.0
    # axes (A, B, C, E) in both representations
    for eve in ([2, 3], [1, 3]):
        worst = max(worst, abs(reduced_entropy(state, eve) - von_neumann_entropy(partial_trace(gamma, eve))))
    tolerance = max(1e-6, 10 * state.tail)
    return _result("fock_eavesdropper_entropy", worst, tolerance, "H(C'E) and H(B'E) at (0.3, 0.3, mu = 0.5) in the Fock basis")


QUICK_CHECKS = [
    check_g_values, check_achievable_dual_path, check_fock_oracle, check_ordering_invariance,
    check_decomposition_round_trip, check_holevo_dual_path, check_qkd_gain_identity, check_converse_arithmetic,
]
FULL_CHECKS = QUICK_CHECKS + [check_monte_carlo_mutual_information, check_fock_eavesdropper_entropy]


def run_checks(quick: bool = False, g: Callable[[float], float] = g_function, workers: int = 1) -> VerificationReport:
    """
    Runs the suite and returns the report; it never raises on a failed check.

    Args:
        quick (bool): Run the cheaper subset with smaller grids.
        g (callable): Entropy function used on the closed-form side.
        workers (int): Number of joblib workers.
    """
    checks = QUICK_CHECKS if quick else FULL_CHECKS
    results = Parallel(n_jobs=workers)(delayed(check)(g=g, quick=quick) for check in checks)
    report = VerificationReport(quick, list(results))
    for check in report.checks:
        logger.debug("%s: deviation %.3g (tol %.1g) %s", check.name, check.deviation, check.tolerance,
                     "ok" if check.passed else "FAILED")
    return report
