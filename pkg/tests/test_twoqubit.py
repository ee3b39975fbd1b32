import warnings

import numpy as np
import pytest

from holonomy_lab import qmath, twoqubit
from holonomy_lab.model import DispersiveSystemParams
from holonomy_lab.pulses import GateSpec
from holonomy_lab.twoqubit import CNOT_GATE, state_index


def _quiet_gate(*args, **kwargs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return twoqubit.build_two_qubit_gate(*args, **kwargs)


def test_state_indexing():
    assert state_index(0, "g") == 0
    assert state_index(0, "f") == 2
    assert state_index(2, "g") == 6
    assert state_index(2, "f") == 8
    assert twoqubit.computational_indices() == [0, 2, 6, 8]
    assert twoqubit.state_label(7) == "2e"


def test_two_qubit_target_structure():
    tgt = twoqubit.two_qubit_target(CNOT_GATE)
    u1 = CNOT_GATE.target_unitary()
    assert np.allclose(tgt[:2, :2], u1)
    assert np.allclose(tgt[2:, 2:], np.eye(2))
    assert np.allclose(tgt[:2, 2:], 0)


def test_identity_loop_returns_identity_block():
    # gamma = 0 traverses the loop without imprinting a holonomy; the
    # corrected computational block is the identity up to the residual
    # photon-number-selectivity leakage of a few 1e-3.
    res = _quiet_gate(GateSpec(np.pi / 2, 0.0, 0.0))
    block = res.computational_block()
    assert qmath.unitary_fidelity(block, np.eye(4)) > 0.997
    assert np.max(np.abs(block - np.eye(4))) < 8e-3


def test_cnot_block_matches_target():
    res = _quiet_gate(CNOT_GATE)
    block = res.computational_block()
    fid = qmath.unitary_fidelity(block, twoqubit.two_qubit_target(CNOT_GATE))
    assert fid > 0.995
    assert res.leakage < 0.03


def test_leakage_warning_fires():
    with pytest.warns(RuntimeWarning, match="leakage"):
        twoqubit.build_two_qubit_gate(CNOT_GATE)


def test_cnot_population_transfer():
    res = _quiet_gate(CNOT_GATE)
    u = res.corrected
    # control |0>: transmon flips f -> g
    psi = np.zeros(12, dtype=complex)
    psi[state_index(0, "f")] = 1.0
    out = u @ psi
    assert abs(out[state_index(0, "g")]) ** 2 > 0.99
    # control |2>: spectator, transmon stays in g
    psi2 = np.zeros(12, dtype=complex)
    psi2[state_index(2, "g")] = 1.0
    out2 = u @ psi2
    assert abs(out2[state_index(2, "g")]) ** 2 > 0.99


def test_prepare_fock_states():
    for target in ("0", "2", "0+2"):
        psi = twoqubit.prepare_fock(target)
        goal = twoqubit.target_prepared_state(target)
        assert np.isclose(abs(np.vdot(goal, psi)) ** 2, 1.0, atol=1e-9), target


def test_transmon_populations_traces_out_cavity():
    psi = np.zeros(12, dtype=complex)
    psi[state_index(0, "f")] = np.sqrt(0.5)
    psi[state_index(2, "f")] = np.sqrt(0.5)
    pops = twoqubit.transmon_populations(psi)
    assert np.allclose(pops, [0.0, 0.0, 1.0])


def test_cnot_robustness_ordering():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sr = twoqubit.cnot_robustness([0.1], "sr-nhqc")
        nh = twoqubit.cnot_robustness([0.1], "nhqc")
    assert sr[0].p_g > nh[0].p_g
    assert sr[0].p_g > 0.99


def test_cavity_noise_operators():
    ops = twoqubit.CavityNoise().collapse_operators(4)
    assert len(ops) == 2
    for c in ops:
        assert c.shape == (12, 12)
    # lowering operator couples adjacent Fock blocks only
    low = ops[0]
    assert abs(low[state_index(0, "g"), state_index(1, "g")]) > 0
    assert abs(low[state_index(0, "g"), state_index(2, "g")]) == 0


def test_zz_frame_correction_is_diagonal_unitary():
    p = DispersiveSystemParams.from_mhz()
    corr = twoqubit.zz_frame_correction(p, 2760.0)
    assert np.allclose(corr, np.diag(np.diag(corr)))
    assert np.allclose(np.abs(np.diag(corr)), 1.0)


def test_outputs():
    rows = [twoqubit.RobustnessRow(0.0, 1.0, 0.0, 0.0)]
    text = twoqubit.robustness_to_csv(rows, header_lines=("cfg",))
    assert text.splitlines()[1] == "epsilon,P_g,P_e,P_f"
    psi = twoqubit.target_prepared_state("2")
    payload = twoqubit.state_to_json(psi)
    assert '"2g"' in payload
