import itertools
import json
import math

import numpy as np
import pytest

from qbcast.channel_model import (
    BeamSplitterElement, BroadcastChannel, Cascade, LinearOpticalNetwork, cascade_from_ordering,
    channel_apply, default_ordering, network_apply, prune_to_cascade, random_network, reck_decompose,
)
from qbcast.gaussian_core import partial_trace, permute_modes, tmsv_covariance, von_neumann_entropy
from qbcast.utility import CascadeError, InputFileError, NonUnitaryError, ParameterError


def balanced():
    s = math.sqrt(0.5)
    return np.array([[s, s], [-s, s]])


def test_broadcast_channel_validation():
    ch = BroadcastChannel((0.2, 0.3))
    assert ch.m == 2
    assert np.isclose(ch.eta_b, 0.5)
    assert np.isclose(ch.eta_e, 0.5)
    assert ch.labels == ['B1', 'B2', 'E']
    with pytest.raises(ParameterError):
        BroadcastChannel((0.7, 0.4))
    with pytest.raises(ParameterError):
        BroadcastChannel((-0.1,))
    with pytest.raises(ParameterError):
        BroadcastChannel(())


def test_network_rejects_non_unitary():
    with pytest.raises(NonUnitaryError):
        LinearOpticalNetwork(np.array([[1, 0], [0, 0.9]]), 0, (1,))
    with pytest.raises(InputFileError):
        LinearOpticalNetwork(np.eye(2), 0, (1, 1))
    with pytest.raises(InputFileError):
        LinearOpticalNetwork(np.eye(2), 2, (1,))


def test_network_from_dict_round_trip():
    net = random_network(3, 2, seed=5)
    again = LinearOpticalNetwork.from_dict(json.loads(json.dumps(net.to_dict())))
    assert np.allclose(again.unitary, net.unitary)
    assert again.receiver_modes == net.receiver_modes
    with pytest.raises(InputFileError):
        LinearOpticalNetwork.from_dict({'unitary': [[[1, 0]]]})


def test_network_load_missing_file(tmp_path):
    with pytest.raises(InputFileError):
        LinearOpticalNetwork.load(str(tmp_path / "missing.json"))


def test_reck_identity_is_empty():
    decomposition = reck_decompose(LinearOpticalNetwork(np.eye(4), 0, (1,)))
    assert len(decomposition) == 0
    assert np.allclose(decomposition.reconstruct(4), np.eye(4))


def test_reck_balanced_splitter_single_element():
    decomposition = reck_decompose(LinearOpticalNetwork(balanced(), 0, (1,)))
    assert len(decomposition) == 1
    assert np.isclose(decomposition.elements[0].transmittance, 0.5)
    assert np.linalg.norm(decomposition.reconstruct(2) - balanced()) < 1e-10


@pytest.mark.parametrize("l", [2, 3, 4, 5, 6])
def test_reck_round_trip_random(l):
    net = random_network(l, 1, seed=l)
    decomposition = reck_decompose(net)
    assert len(decomposition) <= l * (l - 1) // 2
    assert np.linalg.norm(decomposition.reconstruct(l) - net.unitary) < 1e-10


def test_element_matrix_is_unitary():
    T = BeamSplitterElement((0, 2), 0.4, 1.3).matrix(3)
    assert np.allclose(T.conj().T @ T, np.eye(3))


def test_prune_identity_network():
    ch, cascade = prune_to_cascade(LinearOpticalNetwork(np.eye(3), 1, (1,)))
    assert np.isclose(ch.transmittances[0], 1)
    assert np.isclose(ch.eta_e, 0)
    assert cascade.tapped_powers()['B1'] == pytest.approx(1)


def test_prune_single_splitter():
    eta = 0.3
    t, r = math.sqrt(eta), math.sqrt(1 - eta)
    U = np.eye(3)
    U[np.ix_([0, 1], [0, 1])] = [[t, -r], [r, t]]
    ch, cascade = prune_to_cascade(LinearOpticalNetwork(U, 0, (0,)))
    assert np.isclose(ch.transmittances[0], eta)
    assert len(cascade.transmittances) == 1


@pytest.mark.parametrize("l,m,seed", [(4, 2, 0), (5, 3, 1), (6, 2, 2), (6, 4, 3)])
def test_prune_matches_full_simulation(l, m, seed):
    net = random_network(l, m, seed=seed)
    ch, cascade = prune_to_cascade(net)
    column = net.unitary[:, net.input_mode]
    assert np.allclose(ch.transmittances, np.abs(column[list(net.receiver_modes)]) ** 2, atol=1e-12)
    assert abs(sum(ch.transmittances) + ch.eta_e - 1) < 1e-12
    gamma_in = tmsv_covariance(1.0)
    reduced = partial_trace(channel_apply(ch, gamma_in, cascade), list(range(m + 1)))
    assert np.abs(reduced - network_apply(net, gamma_in)).max() < 1e-10


def test_cascade_from_ordering_example():
    ch = BroadcastChannel((0.2, 0.3))
    cascade = cascade_from_ordering(ch, ['B1', 'E', 'B2'])
    assert np.allclose(cascade.transmittances, [0.8, 0.375])
    powers = cascade.tapped_powers()
    assert np.isclose(powers['B1'], 0.2)
    assert np.isclose(powers['E'], 0.5)
    assert np.isclose(powers['B2'], 0.3)


def test_cascade_single_receiver():
    cascade = cascade_from_ordering(BroadcastChannel((0.4,)), ['B1', 'E'])
    assert np.isclose(cascade.transmittances[0], 0.6)


def test_cascade_indices_accepted():
    ch = BroadcastChannel((0.2, 0.3))
    assert cascade_from_ordering(ch, [0, 2, 1]).ordering == ('B1', 'E', 'B2')


def test_cascade_any_ordering_reproduces_powers():
    ch = BroadcastChannel((0.1, 0.25, 0.4))
    for ordering in itertools.permutations(ch.labels):
        powers = cascade_from_ordering(ch, ordering).tapped_powers()
        for label, eta in ch.powers().items():
            assert abs(powers[label] - eta) < 1e-12


def test_cascade_prefix_exhausting_power_raises():
    ch = BroadcastChannel((1.0, 0.0))
    with pytest.raises(CascadeError):
        cascade_from_ordering(ch, ['B1', 'B2', 'E'])
    assert default_ordering(ch) == ['B2', 'E', 'B1']
    cascade_from_ordering(ch)


def test_cascade_bad_ordering_raises():
    with pytest.raises(CascadeError):
        cascade_from_ordering(BroadcastChannel((0.2, 0.3)), ['B1', 'B2'])
    with pytest.raises(CascadeError):
        Cascade(('B1', 'E'), (0.5, 0.5))


def test_channel_apply_all_zero_sends_input_to_environment():
    gamma = channel_apply(BroadcastChannel((0.0, 0.0)), tmsv_covariance(1))
    assert np.allclose(partial_trace(gamma, [0, 3]), tmsv_covariance(1))
    assert np.allclose(partial_trace(gamma, [1, 2]), np.eye(4))


def test_channel_apply_marginal_loss():
    gamma = channel_apply(BroadcastChannel((0.2, 0.3)), tmsv_covariance(1))
    assert np.allclose(partial_trace(gamma, [1]), 1.4 * np.eye(2))
    assert np.allclose(partial_trace(gamma, [2]), 1.6 * np.eye(2))
    assert np.allclose(partial_trace(gamma, [3]), 2.0 * np.eye(2))


def test_channel_apply_is_pure():
    gamma = channel_apply(BroadcastChannel((0.2, 0.3, 0.1)), tmsv_covariance(2))
    assert von_neumann_entropy(gamma) < 1e-8


def test_channel_apply_ordering_invariance():
    ch = BroadcastChannel((0.2, 0.3, 0.15))
    gamma_in = tmsv_covariance(1.5)
    reference = channel_apply(ch, gamma_in)
    for ordering in itertools.permutations(ch.labels):
        out = channel_apply(ch, gamma_in, cascade_from_ordering(ch, ordering))
        assert np.abs(out - reference).max() < 1e-10


def test_channel_apply_mismatched_cascade():
    with pytest.raises(ParameterError):
        channel_apply(BroadcastChannel((0.2,)), tmsv_covariance(1), cascade_from_ordering(BroadcastChannel((0.2, 0.3))))


def test_random_network_is_reproducible():
    a, b = random_network(4, 2, seed=11), random_network(4, 2, seed=11)
    assert np.allclose(a.unitary, b.unitary)
    assert a.receiver_modes == b.receiver_modes
    with pytest.raises(ParameterError):
        random_network(2, 3)


def test_permuting_outputs_matches_relabelled_channel():
    ch = BroadcastChannel((0.2, 0.3))
    swapped = BroadcastChannel((0.3, 0.2))
    gamma = channel_apply(ch, tmsv_covariance(1))
    assert np.allclose(permute_modes(gamma, [0, 2, 1, 3]), channel_apply(swapped, tmsv_covariance(1)))
