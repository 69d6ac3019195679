import math

import numpy as np
import pytest

from qbcast.fock_oracle import broadcast_fock, reduced_entropy
from qbcast.gaussian_core import estimate_mutual_information, g_function, partial_trace, von_neumann_entropy
from qbcast.qkd import (
    KeyRatePair, QkdScenario, bc_rate_region, build_joint_covariance, classical_entropies,
    classical_entropies_closed_form, classical_outcomes, gc09_key_rate, holevo_leakage,
    holevo_leakage_B, holevo_leakage_C, holevo_leakage_closed_form, information_report,
    key_rates_bob_first, key_rates_charlie_first, key_rates_simultaneous, output_state, region_contains,
    strictly_contains,
)
from qbcast.utility import ParameterError

SCENARIOS = [
    QkdScenario(0.3, 0.3, 1),
    QkdScenario(0.3, 0.3, 5),
    QkdScenario(0.3, 0.3, 20),
    QkdScenario(0.2, 0.5, 2),
    QkdScenario(0.6, 0.1, 10),
    QkdScenario(0.45, 0.45, 0.5),
]


def test_scenario_validation():
    with pytest.raises(ParameterError):
        QkdScenario(0.7, 0.4, 1)
    with pytest.raises(ParameterError):
        QkdScenario(-0.1, 0.4, 1)
    with pytest.raises(ParameterError):
        QkdScenario(0.3, 0.3, -1)
    with pytest.raises(ParameterError):
        QkdScenario(0.3, 0.3, math.inf)
    with pytest.raises(ParameterError):
        QkdScenario(0.3, 0.3, 1).eta('D')


def test_joint_covariance_entries():
    s = QkdScenario(0.3, 0.2, 5)
    v = s.v
    gamma = build_joint_covariance(s)
    assert gamma.shape == (6, 6)
    assert np.allclose(np.diag(gamma), [v, 0.3 * (v - 1) / 2 + 1, 0.2 * (v - 1) / 2 + 1] * 2)
    d = math.sqrt(0.3 * (v ** 2 - 1) / 2)
    e = math.sqrt(0.3 * 0.2) * (v - 1) / 2
    assert np.isclose(abs(gamma[0, 1]), d)
    assert np.isclose(gamma[3, 4], -gamma[0, 1])
    assert np.isclose(abs(gamma[1, 2]), e)
    assert np.isclose(gamma[4, 5], gamma[1, 2])
    assert np.allclose(gamma[:3, 3:], 0)


def test_classical_outcomes_labels():
    c = classical_outcomes(QkdScenario(0.3, 0.3, 1))
    assert c.labels == ('X', 'Y', 'Z')
    assert c.covariance.shape == (3, 3)


@pytest.mark.parametrize("s", SCENARIOS)
def test_classical_entropies_match_determinants(s):
    report = classical_entropies(s)
    closed = classical_entropies_closed_form(s)
    for key, value in closed.items():
        assert abs(getattr(report, key) - value) < 1e-10


def test_p_quadrature_gives_same_information():
    s = QkdScenario(0.3, 0.2, 5)
    x, p = classical_entropies(s), classical_entropies(s, classical_outcomes(s, 'p'))
    assert np.isclose(x.i_xy, p.i_xy)
    assert np.isclose(x.i_yz_given_x, p.i_yz_given_x)


@pytest.mark.parametrize("s", SCENARIOS)
def test_holevo_dual_path(s):
    for receiver in ('B', 'C'):
        assert abs(holevo_leakage(s, receiver) - holevo_leakage_closed_form(s, receiver)) < 1e-8
    assert holevo_leakage_B(s) == holevo_leakage(s, 'B')
    assert holevo_leakage_C(s) == holevo_leakage(s, 'C')


def test_holevo_leakage_vanishes_without_eavesdropper_power():
    s = QkdScenario(1.0, 0.0, 3)
    assert abs(holevo_leakage_B(s)) < 1e-8
    assert abs(holevo_leakage_closed_form(s, 'B')) < 1e-12


def test_zero_modulation_gives_zero_everything():
    s = QkdScenario(0.3, 0.3, 0)
    report = information_report(s)
    assert abs(report.i_xy) < 1e-12
    assert abs(report.i_yz_given_x) < 1e-12
    assert abs(report.holevo_b) < 1e-8
    assert np.allclose(key_rates_simultaneous(s, report).as_tuple(), (0, 0), atol=1e-8)


@pytest.mark.parametrize("mu,expected", [(1, 0.1536), (5, 0.2256), (20, 0.2484)])
def test_simultaneous_rates_symmetric_channel(mu, expected):
    rates = key_rates_simultaneous(QkdScenario(0.3, 0.3, mu))
    assert abs(rates.k_ab - expected) < 5e-4
    assert abs(rates.k_ab - rates.k_ac) < 1e-10


def test_simultaneous_matches_point_to_point():
    for mu in (1, 5, 20):
        rates = key_rates_simultaneous(QkdScenario(0.3, 0.3, mu))
        assert abs(rates.k_ab - gc09_key_rate(0.3, mu)) < 1e-10


@pytest.mark.parametrize("s", SCENARIOS)
def test_ordered_reconciliation_gain(s):
    report = information_report(s)
    simultaneous = key_rates_simultaneous(s, report)
    charlie = key_rates_charlie_first(s, report)
    bob = key_rates_bob_first(s, report)
    assert report.i_yz_given_x > 0
    assert abs(charlie.k_ab - simultaneous.k_ab - report.i_yz_given_x) < 1e-10
    assert abs(bob.k_ac - simultaneous.k_ac - report.i_yz_given_x) < 1e-10
    assert charlie.k_ac == simultaneous.k_ac
    assert bob.k_ab == simultaneous.k_ab


def test_gain_vanishes_when_one_receiver_is_dark():
    s = QkdScenario(0.4, 0.0, 5)
    report = information_report(s)
    assert abs(report.i_yz_given_x) < 1e-10
    assert abs(key_rates_simultaneous(s, report).k_ac) < 1e-8
    assert abs(key_rates_charlie_first(s, report).k_ab - key_rates_simultaneous(s, report).k_ab) < 1e-10


def test_swapping_receivers_swaps_rates():
    s = QkdScenario(0.2, 0.5, 2)
    assert np.allclose(key_rates_charlie_first(s).swapped().as_tuple(), key_rates_bob_first(s.swapped()).as_tuple())
    assert np.allclose(key_rates_simultaneous(s).swapped().as_tuple(), key_rates_simultaneous(s.swapped()).as_tuple())


def test_key_rate_pair_clamped():
    assert KeyRatePair(-0.2, 0.3).clamped().as_tuple() == (0.0, 0.3)


def test_clamped_region_is_nonnegative():
    curves = bc_rate_region(QkdScenario(0.1, 0.6, 5), clamp=True)
    assert all(x >= 0 and y >= 0 for curve in curves.values() for x, y in curve)


def test_bc_rate_region_shapes():
    curves = bc_rate_region(QkdScenario(0.3, 0.3, 5))
    assert set(curves) == {'bc', 'simultaneous', 'time_sharing'}
    assert len(curves['bc']) == 4
    assert len(curves['simultaneous']) == 3
    assert len(curves['time_sharing']) == 2
    finer = bc_rate_region(QkdScenario(0.3, 0.3, 5), resolution=5)
    assert len(finer['bc']) == 16


@pytest.mark.parametrize("mu", [1, 5, 20])
def test_bc_region_strictly_contains_simultaneous(mu):
    curves = bc_rate_region(QkdScenario(0.3, 0.3, mu))
    assert strictly_contains(curves['bc'], curves['simultaneous'])
    assert strictly_contains(curves['simultaneous'], curves['time_sharing'])
    assert not strictly_contains(curves['simultaneous'], curves['bc'])


def test_region_contains():
    curve = [(0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]
    assert region_contains(curve, (0.5, 0.5))
    assert region_contains(curve, (1.0, 1.0))
    assert not region_contains(curve, (1.1, 0.5))
    assert not region_contains(curve, (0.5, -0.1))


def test_leakage_closed_form_matches_g_terms():
    s = QkdScenario(0.3, 0.3, 5)
    v = s.v
    expected = g_function(0.7 * (v - 1) / 2) - g_function((math.sqrt(3.8 * 8) - 1) / 2)
    assert abs(holevo_leakage_closed_form(s, 'B') - expected) < 1e-12


def test_simultaneous_key_rate_grows_with_bob_transmittance():
    rates = [key_rates_simultaneous(QkdScenario(eta_b, 0.3, 5)).k_ab for eta_b in np.linspace(0.05, 0.7, 14)]
    assert all(later >= earlier - 1e-12 for earlier, later in zip(rates, rates[1:]))
    assert rates[-1] > rates[0]


def test_rates_stay_finite_at_huge_modulation():
    s = QkdScenario(0.3, 0.3, 1e6)
    report = information_report(s)
    for pair in (key_rates_simultaneous(s, report), key_rates_charlie_first(s, report), key_rates_bob_first(s, report)):
        assert all(math.isfinite(k) for k in pair.as_tuple())
    assert math.isfinite(report.i_yz_given_x)
    assert abs(holevo_leakage_B(s) - holevo_leakage_closed_form(s, 'B')) < 1e-6


@pytest.mark.parametrize("s", SCENARIOS)
def test_eavesdropper_entropy_is_purification_entropy(s):
    h_eve = von_neumann_entropy(partial_trace(output_state(s), [2, 3]))
    assert abs(h_eve - g_function((1 - s.eta_b) * (s.v - 1) / 2)) < 1e-8


def test_mutual_information_matches_sampling():
    outcomes = classical_outcomes(QkdScenario(0.3, 0.3, 5))
    exact = classical_entropies(QkdScenario(0.3, 0.3, 5), outcomes).i_xy
    assert abs(estimate_mutual_information(outcomes, 'X', 'Y', n_samples=1_000_000, seed=11) - exact) < 5e-3


def test_zero_modulation_region_collapses_to_origin():
    curves = bc_rate_region(QkdScenario(0.3, 0.3, 0), resolution=3)
    for curve in curves.values():
        assert np.allclose(curve, 0, atol=1e-8)


def test_symmetric_channel_gives_mirrored_frontiers():
    curves = bc_rate_region(QkdScenario(0.35, 0.35, 5), resolution=3)
    for curve in curves.values():
        assert np.allclose(sorted(curve), sorted((y, x) for x, y in curve), atol=1e-10)


def test_eavesdropper_entropy_matches_fock_basis():
    s = QkdScenario(0.3, 0.3, 0.5)
    state = broadcast_fock((s.eta_b, s.eta_c), s.mu)
    tolerance = max(1e-6, 10 * state.tail)
    for eve in ([2, 3], [1, 3]):
        gaussian = von_neumann_entropy(partial_trace(output_state(s), eve))
        assert abs(reduced_entropy(state, eve) - gaussian) < tolerance
