import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctcsim.heisenberg_model import (
    HeisenbergCircuit,
    NotCliffordError,
    TimeDistribution,
    UnsupportedOverlapError,
    backpropagate_block,
    backpropagate_circuit,
    backpropagate_circuit_detailed,
    evaluate_expectation,
    heisenberg_bloch,
    letter_expectation,
    overlap,
    tableau_from_unitary,
    verify_block_result,
)
from ctcsim.qlinalg import CNOT, CZ, SWAP, I4, PureStateParams, state_prep_unitary, PAULI_BY_NAME
from ctcsim.timed_pauli import (
    CNOT_TABLEAU,
    CZ_TABLEAU,
    LOCAL_H,
    LOCAL_I,
    PauliLetter,
    SWAP_TABLEAU,
    TimedPauliWord,
    word_from_str,
)
from helpers import gaussian_overlap_quadrature, random_params

L = PauliLetter
W = TimedPauliWord
ORTHO = TimeDistribution.orthogonal()

FIG2_CIRCUIT = HeisenbergCircuit(blocks=(CNOT_TABLEAU, CNOT_TABLEAU),
                                 local_gates=(LOCAL_I, LOCAL_H, LOCAL_H))


class TestBackpropagateBlock:
    @pytest.mark.parametrize("measured,expect,status", [
        (L.Z, "Z'", "closed"),
        (L.X, "Z X' Z''", "closed"),
        (L.Y, "Z Y' Z''", "closed"),
    ])
    def test_cz_words(self, measured, expect, status):
        res = backpropagate_block(CZ_TABLEAU, W.single(0, measured))
        assert res.upper_in == word_from_str(expect)
        assert res.status == status

    @pytest.mark.parametrize("measured,expect,status", [
        (L.Z, "Z Z'", "closed"),
        (L.X, "X' X'' X'''...", "periodic_tail"),
        (L.Y, "Z Y' X'' X'''...", "periodic_tail"),
    ])
    def test_cnot_words(self, measured, expect, status):
        res = backpropagate_block(CNOT_TABLEAU, W.single(0, measured))
        assert res.upper_in == word_from_str(expect)
        assert res.status == status

    @pytest.mark.parametrize("measured", [L.X, L.Y, L.Z])
    def test_swap_block_is_free_passage(self, measured):
        # a bare swap means no interaction at all: same letter, same label
        res = backpropagate_block(SWAP_TABLEAU, W.single(0, measured))
        assert res.upper_in == W.single(0, measured)
        assert res.status == "closed"

    def test_measured_word_with_tail(self):
        # the balanced-population chain feeds a Z tail into the next block
        res = backpropagate_block(CNOT_TABLEAU, W.tail_word(1, L.Z))
        assert res.upper_in == W.single(1, L.Z)
        assert res.status == "closed"

    def test_negative_phase_measured_word(self):
        res = backpropagate_block(CNOT_TABLEAU, W.single(0, L.Z, ipow=2))
        assert res.upper_in == word_from_str("-Z Z'")

    def test_imaginary_phase_rejected(self):
        with pytest.raises(ValueError):
            backpropagate_block(CZ_TABLEAU, W.single(0, L.X, ipow=1))

    def test_negative_labels_rejected(self):
        with pytest.raises(ValueError):
            backpropagate_block(CZ_TABLEAU, W.single(-1, L.X))

    def test_empty_word_closes_immediately(self):
        res = backpropagate_block(CNOT_TABLEAU, W.identity())
        assert res.upper_in == W.identity()
        assert res.status == "closed"

    def test_consistency_of_all_paper_blocks(self):
        for tab in (CZ_TABLEAU, CNOT_TABLEAU, SWAP_TABLEAU):
            for letter in (L.X, L.Y, L.Z):
                res = backpropagate_block(tab, W.single(0, letter))
                assert verify_block_result(tab, res)

    def test_termination_bound(self, rng):
        # finite recurrence state: halts within 4*(positions) + 8 labels
        tabs = (CZ_TABLEAU, CNOT_TABLEAU, SWAP_TABLEAU)
        letters = (L.X, L.Y, L.Z)
        for _ in range(200):
            head = {int(k): letters[rng.integers(3)]
                    for k in rng.integers(0, 5, size=rng.integers(0, 4))}
            tail = None
            if rng.integers(2):
                start = int(max(head, default=-1)) + 1 + int(rng.integers(0, 3))
                tail = (start, letters[rng.integers(3)])
            measured = W.build(2 * int(rng.integers(2)), head, tail)
            positions = measured.support_stop() + 1
            try:
                res = backpropagate_block(tabs[rng.integers(3)], measured)
            except Exception:
                continue  # divergent phases are fine here; bound is about halting
            assert res.labels_resolved <= 4 * positions + 8


class TestBackpropagateCircuit:
    def test_single_cnot_no_locals(self):
        circuit = HeisenbergCircuit(blocks=(CNOT_TABLEAU,), local_gates=(LOCAL_I, LOCAL_I))
        assert backpropagate_circuit(circuit, L.Z) == word_from_str("Z Z'")

    def test_chained_circuit_reverses_to_one_traversal(self):
        # the second wormhole undoes the first: J -> J' with phase +1
        for letter, expect in ((L.Z, "Z'"), (L.X, "X'"), (L.Y, "Y'")):
            got = backpropagate_circuit(FIG2_CIRCUIT, letter)
            assert got == word_from_str(expect)
            assert got.ipow == 0

    def test_intermediate_words_between_blocks(self):
        # stop after the measurement-side block and the middle Hadamard
        from ctcsim.timed_pauli import apply_local
        expectations = {L.Z: "Z' Z'' Z'''...", L.X: "X X'", L.Y: "X Y' Z'' Z'''..."}
        for letter, expect in expectations.items():
            w = apply_local(LOCAL_H, W.single(0, letter))
            res = backpropagate_block(CNOT_TABLEAU, w)
            at_b = apply_local(LOCAL_H, res.upper_in)
            assert at_b == word_from_str(expect)

    def test_detailed_results_verify(self):
        for letter in (L.X, L.Y, L.Z):
            _, results = backpropagate_circuit_detailed(FIG2_CIRCUIT, letter)
            assert len(results) == 2
            for tab, res in zip(reversed(FIG2_CIRCUIT.blocks), results):
                assert verify_block_result(tab, res)

    def test_local_gate_count_validated(self):
        with pytest.raises(ValueError):
            HeisenbergCircuit(blocks=(CZ_TABLEAU,), local_gates=(LOCAL_I,))


class TestLetterExpectation:
    def test_prepared_zero_state(self):
        assert letter_expectation(L.Z, PureStateParams(1.0, 0.0)) == 1.0

    def test_x_value_frozen_oracle(self):
        # dense oracle <0| Us^dag X Us |0> at alpha^2 = 0.75, theta = 0
        # equals sqrt(3)/2 = 0.8660254037844386
        p = PureStateParams.from_alpha2(0.75, 0.0)
        assert abs(letter_expectation(L.X, p) - 0.8660254037844386) < 1e-12

    def test_y_vanishes_at_zero_phase(self, rng):
        for _ in range(20):
            p = PureStateParams.from_alpha2(rng.uniform(0, 1), 0.0)
            assert letter_expectation(L.Y, p) == 0.0

    def test_against_dense_conjugation(self, rng):
        ket0 = np.array([1, 0], dtype=complex)
        for _ in range(100):
            p = random_params(rng)
            u = state_prep_unitary(p)
            for letter in (L.X, L.Y, L.Z, L.I):
                dense = np.real(ket0 @ u.conj().T @ PAULI_BY_NAME[letter.value] @ u @ ket0)
                assert abs(letter_expectation(letter, p) - dense) < 1e-12


class TestEvaluateExpectation:
    def test_cz_x_word(self, rng):
        w = word_from_str("Z X' Z''")
        for _ in range(50):
            p = random_params(rng)
            value, status = evaluate_expectation(w, p, ORTHO)
            assert status == "ok"
            want = (p.alpha**2 - p.beta**2) ** 2 * 2 * p.alpha * p.beta * math.cos(2 * p.theta)
            assert abs(value - want) < 1e-12

    def test_tail_vanishes_off_balance(self):
        w = word_from_str("X' X'' X'''...")
        value, status = evaluate_expectation(w, PureStateParams.from_alpha2(0.75, 0.0), ORTHO)
        assert (value, status) == (0.0, "ok")

    def test_tail_singular_at_balance(self):
        w = word_from_str("X' X'' X'''...")
        value, status = evaluate_expectation(w, PureStateParams.from_alpha2(0.5, 0.0), ORTHO)
        assert value is None and status == "singular"

    def test_tail_singular_at_balance_alternating(self):
        # theta = pi/2 makes the per-label factor -1: no convergence either
        w = word_from_str("X' X'' X'''...")
        value, status = evaluate_expectation(
            w, PureStateParams.from_alpha2(0.5, math.pi / 2), ORTHO)
        assert value is None and status == "singular"

    def test_empty_word(self):
        assert evaluate_expectation(W.identity(), PureStateParams(1, 0), ORTHO) == (1.0, "ok")

    def test_gaussian_zero_shift_restores_unity(self):
        w = word_from_str("Z Z'")
        t = TimeDistribution.gaussian(d=0.5, tau=0.0)
        value, status = evaluate_expectation(w, PureStateParams.from_alpha2(0.3, 0.4), t)
        assert status == "ok"
        assert abs(value - 1.0) < 1e-12

    def test_gaussian_three_labels_unsupported(self):
        w = word_from_str("Z X' Z''")
        with pytest.raises(UnsupportedOverlapError):
            evaluate_expectation(w, PureStateParams(1, 0), TimeDistribution.gaussian(1, 1))

    def test_gaussian_tail_unsupported(self):
        w = word_from_str("X' X'' X'''...")
        with pytest.raises(UnsupportedOverlapError):
            evaluate_expectation(w, PureStateParams(1, 0), TimeDistribution.gaussian(1, 1))

    def test_gaussian_single_label_ignores_overlap(self):
        p = PureStateParams.from_alpha2(0.8, 0.3)
        t = TimeDistribution.gaussian(d=1.0, tau=0.5)
        assert evaluate_expectation(W.single(0, L.Z), p, t) == (
            evaluate_expectation(W.single(0, L.Z), p, ORTHO))

    def test_gaussian_anticommuting_cross_term_drops(self):
        # symmetrized same-time product of X and Z vanishes
        p = PureStateParams.from_alpha2(0.7, 0.2)
        t = TimeDistribution.gaussian(d=1.0, tau=1.0)
        w = W.build(0, {0: L.X, 1: L.Z})
        value, _ = evaluate_expectation(w, p, t)
        om = overlap(t)
        want = (1 - om) * letter_expectation(L.X, p) * letter_expectation(L.Z, p)
        assert abs(value - want) < 1e-12

    def test_imaginary_word_rejected(self):
        with pytest.raises(ValueError):
            evaluate_expectation(W.single(0, L.X, ipow=1), PureStateParams(1, 0), ORTHO)

    @given(st.integers(0, 1), st.floats(0.02, 0.98), st.floats(0, 6.28))
    @settings(max_examples=200)
    def test_values_bounded(self, sign, alpha2, theta):
        p = PureStateParams.from_alpha2(alpha2, theta)
        for text in ("Z X' Z''", "Z Z'", "Z Y' X'' X'''...", "X' X'' X'''...", "Y''"):
            w = word_from_str(text)
            w = TimedPauliWord(2 * sign, w.head, w.tail)
            value, status = evaluate_expectation(w, p, ORTHO)
            if status == "ok":
                assert -1.0 <= value <= 1.0


class TestOverlap:
    def test_unit_at_zero_shift(self):
        assert overlap(TimeDistribution.gaussian(d=2.0, tau=0.0)) == 1.0

    def test_negligible_at_ten_widths(self):
        assert overlap(TimeDistribution.gaussian(d=1.0, tau=10.0)) < 1e-9

    def test_two_widths_is_inverse_e(self):
        # frozen from the quadrature oracle: 0.36787944117144233
        assert abs(overlap(TimeDistribution.gaussian(d=1.0, tau=2.0))
                   - 0.36787944117144233) < 1e-6

    @pytest.mark.parametrize("ratio", [0.5, 1.0, 2.0, 4.0])
    def test_closed_form_matches_quadrature(self, ratio):
        d = 0.7
        got = overlap(TimeDistribution.gaussian(d=d, tau=ratio * d))
        want = gaussian_overlap_quadrature(d, ratio * d)
        assert abs(got - want) < 1e-6

    def test_monotone_decreasing(self):
        values = [overlap(TimeDistribution.gaussian(d=1.0, tau=t)) for t in
                  np.linspace(0, 6, 25)]
        assert all(a >= b for a, b in zip(values, values[1:]))

    def test_orthogonal_kind_rejected(self):
        with pytest.raises(ValueError):
            overlap(ORTHO)


class TestTimeDistribution:
    def test_gaussian_needs_positive_width(self):
        with pytest.raises(ValueError):
            TimeDistribution.gaussian(d=0.0, tau=1.0)

    def test_gaussian_needs_nonnegative_shift(self):
        with pytest.raises(ValueError):
            TimeDistribution.gaussian(d=1.0, tau=-0.5)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            TimeDistribution("lorentzian")


class TestHeisenbergBloch:
    def test_single_cz_block(self, rng):
        circuit = HeisenbergCircuit(blocks=(CZ_TABLEAU,), local_gates=(LOCAL_I, LOCAL_I))
        for _ in range(50):
            p = random_params(rng)
            res = heisenberg_bloch(circuit, p)
            assert res.all_ok
            a2b2 = p.alpha**2 - p.beta**2
            two_ab = 2 * p.alpha * p.beta
            want = (a2b2**2 * two_ab * math.cos(2 * p.theta),
                    -(a2b2**2) * two_ab * math.sin(2 * p.theta),
                    a2b2)
            got = res.bloch().as_tuple()
            assert np.max(np.abs(np.array(got) - want)) < 1e-12

    def test_single_cnot_block_off_balance(self):
        circuit = HeisenbergCircuit(blocks=(CNOT_TABLEAU,), local_gates=(LOCAL_I, LOCAL_I))
        p = PureStateParams.from_alpha2(0.9, 0.7)
        res = heisenberg_bloch(circuit, p)
        assert res.all_ok
        want = (0.0, 0.0, (p.alpha**2 - p.beta**2) ** 2)
        assert np.max(np.abs(np.array(res.bloch().as_tuple()) - want)) < 1e-12

    def test_single_cnot_block_balanced_is_singular(self):
        circuit = HeisenbergCircuit(blocks=(CNOT_TABLEAU,), local_gates=(LOCAL_I, LOCAL_I))
        res = heisenberg_bloch(circuit, PureStateParams.from_alpha2(0.5, 0.0))
        assert res.statuses["x"] == "singular"
        assert res.statuses["y"] == "singular"
        assert res.statuses["z"] == "ok"
        with pytest.raises(ValueError):
            res.bloch()

    def test_chained_circuit_returns_prepared_bloch(self, rng):
        for _ in range(30):
            p = random_params(rng)
            res = heisenberg_bloch(FIG2_CIRCUIT, p)
            assert res.all_ok
            assert np.max(np.abs(np.array(res.bloch().as_tuple())
                                 - np.array(p.bloch().as_tuple()))) < 1e-12

    def test_gaussian_on_tailed_words_reports_unsupported(self):
        circuit = HeisenbergCircuit(blocks=(CNOT_TABLEAU,), local_gates=(LOCAL_I, LOCAL_I))
        res = heisenberg_bloch(circuit, PureStateParams.from_alpha2(0.75),
                               TimeDistribution.gaussian(d=0.1, tau=1.0))
        assert res.statuses["x"] == "unsupported"
        assert res.statuses["z"] == "ok"  # two labels: the overlap formula applies


class TestTableauFromUnitary:
    def test_reproduces_hand_coded_tableaus(self):
        for gate, tab in ((CZ, CZ_TABLEAU), (CNOT, CNOT_TABLEAU), (SWAP, SWAP_TABLEAU)):
            got = tableau_from_unitary(gate)
            for key in ("xi", "zi", "ix", "iz"):
                assert getattr(got, key) == getattr(tab, key)

    def test_identity(self):
        got = tableau_from_unitary(I4)
        assert got.xi == (1, L.X, L.I)

    def test_non_clifford_rejected(self):
        t_gate = np.diag([1, 1, 1, np.exp(1j * np.pi / 4)])
        with pytest.raises(NotCliffordError):
            tableau_from_unitary(t_gate)

    def test_non_unitary_rejected(self):
        with pytest.raises(Exception):
            tableau_from_unitary(np.ones((4, 4)))
