import pytest
from hypothesis import given
from hypothesis import strategies as st

from tecsim.circuit import Circuit, statevector
from tecsim.errors import ValidationError
from tecsim.qsim import basis_state
from tecsim.tec import PauliFrame, apply_pauli_frame, frame_from_rules

bits4 = st.lists(st.integers(0, 1), min_size=4, max_size=4)


@given(bits4)
def test_zero_frame_is_identity(bits):
    assert apply_pauli_frame(PauliFrame.identity(4), bits) == tuple(bits)


def test_masks_on_z_basis():
    f = PauliFrame((1, 0, 1), (0, 1, 1))
    assert apply_pauli_frame(f, (0, 0, 0)) == (1, 0, 1)
    # in the X basis only the z mask matters
    assert apply_pauli_frame(f, (0, 0, 0), "XXX") == (0, 1, 1)
    assert apply_pauli_frame(f, (0, 0, 0), "ZXZ") == (1, 1, 1)


@given(bits4, bits4, bits4, bits4)
def test_composition_is_xor(x1, z1, x2, z2):
    f = PauliFrame(x1, z1) @ PauliFrame(x2, z2)
    assert f.x_mask == tuple(a ^ b for a, b in zip(x1, x2))
    assert f.z_mask == tuple(a ^ b for a, b in zip(z1, z2))


def test_size_mismatch():
    with pytest.raises(ValidationError):
        apply_pauli_frame(PauliFrame.identity(3), (0, 1))
    with pytest.raises(ValidationError):
        PauliFrame.identity(3) @ PauliFrame.identity(2)
    with pytest.raises(ValidationError):
        PauliFrame((0, 1), (0,))
    with pytest.raises(ValidationError):
        apply_pauli_frame(PauliFrame.identity(2), (0, 1), "ZY")


def test_frame_from_rules():
    rules = [[0, 0, "X"], [1, 0, "X"], [1, 2, "Z"]]
    assert frame_from_rules(rules, [1, 0], 3) == PauliFrame((1, 0, 0), (0, 0, 0))
    assert frame_from_rules(rules, [1, 1], 3) == PauliFrame((0, 0, 0), (0, 0, 1))
    with pytest.raises(ValidationError):
        frame_from_rules([[0, 0, "Y"]], [1], 1)


def test_frame_gates_act_like_masks():
    f = PauliFrame((1, 0), (0, 0))
    assert abs(statevector(f.gates())[basis_state("10").argmax()]) == pytest.approx(1)
    assert len(PauliFrame.identity(2).gates()) == 0
