import math
import random

import numpy as np
import pytest

from rotsynth.gf2 import BitVec, GF2Matrix
from rotsynth.ir import Circuit, Gate, PhaseRotation, RotationProgram
from rotsynth.compiler import expand_reference
from rotsynth.semantics import (
    NotDiagonalizableError,
    SimulationError,
    compose_polynomials,
    enumerate_branches,
    equal_up_to_global_phase,
    fidelity_pure,
    phase_polynomial_of,
    poly_equal,
    simulate,
    state_fidelity,
    unitary_of,
)

from oracles import (
    basis_bits,
    ccz_state,
    plus_prep,
    random_fragment_circuit,
    rotation_product_unitary,
)


class TestPhasePolynomial:
    def test_single_cnot(self):
        p = phase_polynomial_of(Circuit(2, (Gate("CNOT", (0, 1)),)))
        assert p.linear == GF2Matrix.from_rows([[1, 0], [1, 1]])
        assert not p.affine
        assert p.coeffs == {}
        assert p.global_phase == 0

    def test_single_t(self):
        p = phase_polynomial_of(Circuit(2, (Gate("T", (0,)),)))
        assert p.coeffs == {BitVec.from_string("10"): 1}
        assert p.global_phase == 0

    def test_t_t_equals_s(self):
        a = phase_polynomial_of(Circuit(1, (Gate("T", (0,)), Gate("T", (0,)))))
        b = phase_polynomial_of(Circuit(1, (Gate("S", (0,)),)))
        assert poly_equal(a, b, up_to_global=False)

    def test_rejects_measurement(self):
        with pytest.raises(NotDiagonalizableError):
            phase_polynomial_of(Circuit(1, (Gate("MeasZ", (0,), "m"),)))

    def test_composition(self):
        rng = random.Random(11)
        for _ in range(40):
            n = rng.randrange(2, 5)
            c1 = random_fragment_circuit(rng, n, 8)
            c2 = random_fragment_circuit(rng, n, 8)
            combined = phase_polynomial_of(c1.concat(c2))
            composed = compose_polynomials(
                phase_polynomial_of(c1), phase_polynomial_of(c2)
            )
            assert poly_equal(combined, composed, up_to_global=False)
            assert combined.global_phase == composed.global_phase

    def test_oracle_agreement_with_dense(self):
        # equal and unequal pairs must classify identically under both oracles
        rng = random.Random(12)
        identity_tail = lambda q: (  # noqa: E731
            Gate("T", (q,)), Gate("S", (q,)), Gate("T", (q,)), Gate("Z", (q,)),
        )
        for trial in range(500):
            n = rng.randrange(2, 6)
            c1 = random_fragment_circuit(rng, n, 10)
            if trial % 2 == 0:
                c2 = Circuit(n, c1.gates + identity_tail(rng.randrange(n)))
            else:
                c2 = Circuit(n, c1.gates + (Gate("T", (rng.randrange(n),)),))
            dense_eq = equal_up_to_global_phase(unitary_of(c1), unitary_of(c2), 1e-9)
            poly_eq = poly_equal(
                phase_polynomial_of(c1), phase_polynomial_of(c2), up_to_global=True
            )
            assert dense_eq == poly_eq

    def test_reference_expansion_matches_program_unitary(self):
        rng = random.Random(13)
        for _ in range(25):
            n = rng.randrange(1, 5)
            rotations = []
            for _ in range(rng.randrange(1, 6)):
                bits = 0
                while not bits:
                    bits = rng.getrandbits(n)
                rotations.append(PhaseRotation(BitVec(n, bits), rng.randrange(8)))
            program = RotationProgram(n, tuple(rotations))
            got = unitary_of(expand_reference(program))
            want = rotation_product_unitary(program)
            assert np.max(np.abs(got - want)) < 1e-10


class TestSimulate:
    def test_ccz_state_amplitudes(self):
        c = Circuit(3, plus_prep(3) + (Gate("CCZ", (0, 1, 2)),))
        res = simulate(c)
        assert np.allclose(res.state, ccz_state(), atol=1e-12)

    def test_cciz_equals_cs_times_ccz(self):
        # build the doubly controlled iZ from its 7 parity rotations and
        # enumerate all 8 basis phases
        rotations = (
            PhaseRotation(BitVec.from_string("100"), 2),
            PhaseRotation(BitVec.from_string("010"), 2),
            PhaseRotation(BitVec.from_string("001"), 1),
            PhaseRotation(BitVec.from_string("110"), 6),
            PhaseRotation(BitVec.from_string("101"), 7),
            PhaseRotation(BitVec.from_string("011"), 7),
            PhaseRotation(BitVec.from_string("111"), 1),
        )
        u = unitary_of(expand_reference(RotationProgram(3, rotations)))
        for e in range(8):
            bits = basis_bits(e, 3)
            a, b, c_ = bits[0], bits[1], bits[2]
            want = (1j ** (a * b)) * ((-1) ** (a * b * c_))
            assert abs(u[e, e] - want) < 1e-12

    def test_measurement_probabilities_sum_to_one(self):
        c = Circuit(
            2,
            plus_prep(2) + (Gate("CNOT", (0, 1)), Gate("MeasZ", (0,), "m")),
        )
        acc0 = simulate(c, postselect={"m": 0}).acceptance
        acc1 = simulate(c, postselect={"m": 1}).acceptance
        assert abs(acc0 + acc1 - 1.0) < 1e-9

    def test_zero_probability_postselection(self):
        c = Circuit(1, (Gate("PrepZero", (0,)), Gate("MeasZ", (0,), "m")))
        res = simulate(c, postselect={"m": 1})
        assert res.acceptance == 0.0
        assert not res.valid

    def test_conditional_correction_gives_deterministic_t(self):
        # teleported T: both measurement branches must produce T|+> exactly
        gates = (
            Gate("PrepPlus", (0,)),
            Gate("PrepT", (1,)),
            Gate("CNOT", (0, 1)),
            Gate("MeasZ", (1,), "m"),
            Gate("CondS", (0,), "m"),
        )
        c = Circuit(2, gates)
        t_plus = np.array([1, np.exp(1j * np.pi / 4)], dtype=complex) / math.sqrt(2)
        for outcome in (0, 1):
            res = simulate(c, postselect={"m": outcome})
            assert abs(res.acceptance - 0.5) < 1e-12
            assert state_fidelity(res.state, t_plus, [0], 2) > 1 - 1e-12

    def test_branch_enumeration_total_probability(self):
        gates = plus_prep(2) + (
            Gate("CNOT", (0, 1)),
            Gate("MeasZ", (1,), "a"),
            Gate("MeasX", (0,), "b"),
        )
        branches = enumerate_branches(Circuit(2, gates))
        assert abs(sum(b.acceptance for b in branches) - 1.0) < 1e-9

    def test_determinism(self):
        c = Circuit(2, plus_prep(2) + (Gate("MeasZ", (0,), "m"), Gate("MeasX", (1,), "x")))
        a = simulate(c, seed=5)
        b = simulate(c, seed=5)
        assert a.outcomes == b.outcomes

    def test_qubit_cap(self):
        with pytest.raises(SimulationError):
            simulate(Circuit(13))


class TestStateFidelity:
    def test_self(self):
        s = ccz_state()
        assert abs(state_fidelity(s, s, [0, 1, 2], 3) - 1.0) < 1e-12

    def test_orthogonal(self):
        a = np.zeros(4, dtype=complex)
        a[0] = 1.0
        b = np.zeros(4, dtype=complex)
        b[3] = 1.0
        assert state_fidelity(a, b, [0, 1], 2) < 1e-12

    def test_z_error_on_ccz_output(self):
        # oracle: overlap computed by direct enumeration over the 8 basis
        # states; a single Z anticommutes with the state's X-type stabilizers
        # so the overlap vanishes
        s = ccz_state().copy()
        for e in range(8):
            if basis_bits(e, 3)[0]:
                s[e] *= -1
        expected = abs(np.vdot(ccz_state(), s)) ** 2
        assert abs(expected) < 1e-12
        assert abs(state_fidelity(s, ccz_state(), [0, 1, 2], 3) - expected) < 1e-12

    def test_traced_ancilla(self):
        # |CCZ> on 0-2 with a |+> ancilla: fidelity on outputs unaffected
        c = Circuit(4, plus_prep(4) + (Gate("CCZ", (0, 1, 2)),))
        res = simulate(c)
        assert abs(state_fidelity(res.state, ccz_state(), [0, 1, 2], 4) - 1.0) < 1e-10

    def test_x_error_fidelity_value(self):
        # enumeration oracle: <CCZ|X0|CCZ> = 1/2, fidelity 1/4
        s = ccz_state().reshape(2, 2, 2)[::-1].reshape(8)
        assert abs(state_fidelity(s, ccz_state(), [0, 1, 2], 3) - 0.25) < 1e-12


def test_fidelity_pure_matches_subset_fidelity():
    rng = np.random.default_rng(3)
    a = rng.normal(size=8) + 1j * rng.normal(size=8)
    a /= np.linalg.norm(a)
    b = rng.normal(size=8) + 1j * rng.normal(size=8)
    b /= np.linalg.norm(b)
    assert abs(fidelity_pure(a, b) - state_fidelity(a, b, [0, 1, 2], 3)) < 1e-12
