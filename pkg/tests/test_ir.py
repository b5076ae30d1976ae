import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burstcomm.ir import (GATE_SPECS, Circuit, CircuitError, Gate, commutes, decompose_to_basis,
                          in_basis)
from burstcomm.verify import equivalent, unitary_of

NAMES = sorted(n for n in GATE_SPECS if n != "measure")
angles = st.floats(-math.pi, math.pi, allow_nan=False)


@st.composite
def gates(draw, n=3):
    name = draw(st.sampled_from(NAMES))
    arity, npar = GATE_SPECS[name]
    qs = tuple(draw(st.permutations(range(n)))[:arity])
    return Gate(name, qs, tuple(draw(angles) for _ in range(npar)))


def test_gate_validation():
    with pytest.raises(CircuitError):
        Gate("cx", (0,))
    with pytest.raises(CircuitError):
        Gate("rz", (0,))
    with pytest.raises(CircuitError):
        Gate("cx", (1, 1))
    with pytest.raises(CircuitError):
        Gate("ccx", (0, 1, 2))
    with pytest.raises(CircuitError):
        Gate("rz", (0,), (float("nan"),))


def test_circuit_validation():
    with pytest.raises(CircuitError):
        Circuit.build(2, [("cx", (0, 2))])
    with pytest.raises(CircuitError):
        Circuit(2, (Gate("h", (0,), id=3), Gate("h", (1,), id=3)))
    c = Circuit.build(3, [("h", (0,)), ("cx", (0, 1)), ("rz", (2,), (0.5,))])
    assert [g.id for g in c.gates] == [0, 1, 2]
    assert c.qubit_names == ("q[0]", "q[1]", "q[2]")
    assert len(c) == 3 and c.count("cx") == 1


@pytest.mark.parametrize("a, b, expected", [
    (("cx", (0, 1)), ("cx", (0, 2)), True),        # shared control
    (("cx", (0, 2)), ("cx", (1, 2)), True),        # shared target
    (("cx", (0, 1)), ("cx", (1, 2)), False),       # target feeds control
    (("t", (0,)), ("cx", (0, 1)), True),
    (("t", (1,)), ("cx", (0, 1)), False),
    (("rx", (1,), (0.4,)), ("cx", (0, 1)), True),
    (("h", (0,)), ("cx", (0, 1)), False),
    (("rz", (0,), (0.3,)), ("crz", (0, 1), (0.2,)), True),
    (("cz", (0, 1)), ("crz", (1, 2), (0.2,)), True),
    (("cz", (0, 1)), ("cx", (2, 1)), False),
    (("cz", (0, 1)), ("cx", (0, 2)), True),
    (("swap", (0, 1)), ("z", (0,)), False),
    (("h", (0,)), ("h", (0,)), True),
])
def test_rule_table(a, b, expected):
    ga = Circuit.build(3, [a]).gates[0]
    gb = Circuit.build(3, [b]).gates[0]
    assert commutes(ga, gb) is expected
    assert commutes(gb, ga) is expected


def test_measure_and_barrier_block():
    m = Gate("measure", (0,))
    assert not commutes(m, Gate("z", (0,)))
    assert commutes(m, Gate("z", (1,)))
    assert not commutes(Gate("barrier", (0, 1)), Gate("x", (2,)))


@settings(max_examples=300, deadline=None)
@given(gates(), gates())
def test_commutation_is_sound(a, b):
    if commutes(a, b):
        ua = unitary_of(Circuit.build(3, [a]))
        ub = unitary_of(Circuit.build(3, [b]))
        assert np.allclose(ua @ ub, ub @ ua, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(gates(), min_size=1, max_size=8))
def test_decomposition_preserves_unitary(gs):
    c = Circuit.build(3, gs)
    d = decompose_to_basis(c)
    assert in_basis(d)
    assert equivalent(c, d)


def test_decomposition_shapes():
    c = Circuit.build(2, [("crz", (0, 1), (0.4,)), ("cz", (0, 1)), ("swap", (0, 1))])
    d = decompose_to_basis(c)
    assert [g.name for g in d.gates] == ["rz", "cx", "rz", "cx", "h", "cx", "h", "cx", "cx", "cx"]
    assert d.gates[0].params == (0.2,) and d.gates[2].params == (-0.2,)
    plain = Circuit.build(2, [("h", (0,)), ("cx", (0, 1))])
    assert decompose_to_basis(plain) is plain
