import math

import numpy as np
import pytest

from qoptsim.circuit import CircuitError
from qoptsim.device import H, V, BellKind, QODevice


def test_hom_packets_and_dedup():
    dev = QODevice(2)
    dev.add_photons(1, 0, H, 0.0, 1.0, 1.0)
    dev.add_photons(1, 1, H, 0.5, 1.0, 1.0)
    assert dev.table.n_t == 2
    same = QODevice(2)
    same.add_photons(1, 0, H, 0.0, 1.0, 1.0)
    same.add_photons(1, 1, H, 0.0, 1.0, 1.0)
    assert same.table.n_t == 1


def test_zero_photons_create_packet_only():
    dev = QODevice(2)
    dev.add_photons(1, 0, H, 0.0, 1.0, 1.0)
    dev.add_photons(0, 1, H, 2.0, 1.0, 0.01)
    dev.detector(0)
    dev.detector(1)
    assert dev.table.n_t == 2
    assert dev.input_state.occupations == [(1, 0, 0, 0)]


def test_accumulation():
    dev = QODevice(1)
    dev.add_photons(2, 0, H, 0, 1, 1)
    dev.add_photons(2, 0, H, 0, 1, 1)
    dev.detector(0)
    assert dev.input_state.occupations == [(4,)]


def test_send_hom_input():
    dev = QODevice(2)
    dev.add_photons(1, 0, H, 0.0, 1.0, 1.0)
    dev.add_photons(1, 1, H, 1.0, 1.0, 1.0)
    dev.beamsplitter(0, 1, 45, 0)
    dev.detector(0)
    assert not dev.sent
    dev.detector(1)
    assert dev.sent
    lv = dev.builder.levels
    occ = [0] * lv.size
    occ[lv.level_of(0, 0, 0)] = 1
    occ[lv.level_of(1, 0, 1)] = 1
    assert dev.input_state.occupations == [tuple(occ)]
    assert dev.packet_level(1) == lv.level_of(1, 0, 1)
    with pytest.raises(CircuitError):
        dev.add_photons(1, 0, H, 0, 1, 1)


def test_single_photon_state():
    dev = QODevice(1)
    dev.add_photons(1, 0, H, 0, 1, 1)
    state = dev.send_to_circuit()
    assert state.as_dict() == {(1,): 1}


def test_bell_pair_phi_plus():
    dev = QODevice(2, 2)
    dev.add_bell_pair(0, 1, "p", 0.0, 0, 1, 1, 0, 1, 1)
    dev.detector(0)
    dev.detector(1)
    lv = dev.builder.levels
    assert dev.table.n_t == 1
    amps = {}
    for amp, occ in dev.input_state:
        pols = tuple(lv.tuple_of(i)[1] for i, n in enumerate(occ) if n)
        amps[pols] = amp
    assert amps == pytest.approx({(H, H): 1 / math.sqrt(2), (V, V): 1 / math.sqrt(2)})


def test_bell_phase_and_kinds():
    dev = QODevice(2, 2)
    dev.add_bell_pair(0, 1, "p", math.pi)
    state = dev.send_to_circuit()
    assert sorted(a.real for a in state.amplitudes) == pytest.approx([-1 / math.sqrt(2), 1 / math.sqrt(2)])
    assert BellKind.parse("psi-") is BellKind.PSI_MINUS
    psi = QODevice(2, 2)
    psi.add_bell_pair(0, 1, "a")
    lv = psi.send_to_circuit().levels
    for amp, occ in psi.input_state:
        pols = [lv.tuple_of(i)[1] for i, n in enumerate(occ) if n]
        assert pols[0] != pols[1]


def test_two_bell_pairs():
    dev = QODevice(4, 2)
    dev.add_bell_pair(0, 1, "p")
    dev.add_bell_pair(2, 3, "p")
    state = dev.send_to_circuit()
    assert len(state) == 4
    assert state.norm2() == pytest.approx(1, abs=1e-12)


def test_bell_errors():
    with pytest.raises(CircuitError):
        QODevice(2).add_bell_pair(0, 1)
    with pytest.raises(CircuitError):
        QODevice(2, 2).add_bell_pair(1, 1)
    with pytest.raises(ValueError):
        QODevice(2, 2).add_bell_pair(0, 1, "x")


def test_range_errors():
    dev = QODevice(2)
    with pytest.raises(IndexError):
        dev.add_photons(1, 2, H, 0, 1, 1)
    with pytest.raises(IndexError):
        dev.add_photons(1, 0, V, 0, 1, 1)
    with pytest.raises(ValueError):
        dev.add_photons(-1, 0, H, 0, 1, 1)
    with pytest.raises(CircuitError):
        dev.delay(0)
    with pytest.raises(CircuitError):
        QODevice(1).send_to_circuit()


def test_period_assignment_and_time_order():
    dev = QODevice(2, 1, "exponential", n_periods=3, period_length=2.0, order="time")
    dev.add_photons(1, 0, H, 2.5, 1, 0.3)
    dev.add_photons(1, 1, H, 0.1, 1, 0.3)
    assert [b.period for b in dev.bundles] == [1, 0]
    dev.delay(1)
    dev.detector(0)
    dev.detector(1)
    lv = dev.builder.levels
    assert dev.table.packets[0].t0 == pytest.approx(0.1)
    # photon 0 sits at packet 1 (t=0.5 within the period) of period 1
    assert lv.tuple_of(dev.packet_level(0)) == (0, 0, dev.table.global_index(1, 1))
    assert dev.input_state.norm2() == pytest.approx(1)


def test_device_unitary_without_delay(rng):
    dev = QODevice(3, 2)
    for ch in range(3):
        dev.add_photons(1, ch, ch % 2, rng.uniform(0, 1), 1.0, 1.0)
    dev.beamsplitter(0, 1, 40, 10)
    dev.phase_shifter(2, 33)
    dev.beamsplitter(1, 2, 45, 0)
    for ch in range(3):
        dev.detector(ch)
    from qoptsim.engine import run
    assert run(dev.builder, dev.input_state).norm2() == pytest.approx(1, abs=1e-10)
