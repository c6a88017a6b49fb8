"""Pauli-string algebra against dense-matrix references."""

import itertools
import math

import numpy as np
import pytest

from qccvqe import (
    PauliString,
    PhasedPauli,
    QubitHamiltonian,
    commutes,
    dress,
    dress_sequence,
    flip_index,
    multiply,
    partition_by_flip_index,
)

import reference

RNG_SEED = 20240817


def all_labels(n_qubits):
    return ["".join(s) for s in itertools.product("IXYZ", repeat=n_qubits)]


class TestPauliString:
    def test_label_round_trip_exhaustive(self):
        for label in all_labels(2):
            assert PauliString.from_label(label).to_label() == label

    def test_label_orientation(self):
        # leftmost label letter is qubit 0, the least significant bit
        p = PauliString.from_label("XIZ")
        assert p.x_mask == 0b001
        assert p.z_mask == 0b100
        assert p.letter(0) == "X"
        assert p.letter(2) == "Z"

    def test_from_label_rejects_garbage(self):
        with pytest.raises(ValueError):
            PauliString.from_label("")
        with pytest.raises(ValueError):
            PauliString.from_label("XQZ")

    def test_mask_bounds_checked(self):
        with pytest.raises(ValueError):
            PauliString(2, x_mask=0b100)
        with pytest.raises(ValueError):
            PauliString(0)

    def test_flags_and_support(self):
        p = PauliString.from_label("XIYZ")
        assert not p.is_identity
        assert not p.is_diagonal
        assert p.support == 0b1101
        assert p.weight == 3
        assert PauliString.identity(4).is_identity
        assert PauliString.from_label("ZIZI").is_diagonal

    def test_canonical_matrix_form(self):
        # stored form must equal the textbook tensor product for every letter
        for label in all_labels(1):
            p = PauliString.from_label(label)
            mat = reference.label_matrix(label)
            ours = reference.ham_matrix(QubitHamiltonian(1, {p: 1.0}))
            assert np.allclose(mat, ours, atol=1e-14)


class TestMultiply:
    def test_single_qubit_table(self):
        cases = {
            ("X", "Y"): (1j, "Z"),
            ("Y", "X"): (-1j, "Z"),
            ("Y", "Z"): (1j, "X"),
            ("Z", "Y"): (-1j, "X"),
            ("Z", "X"): (1j, "Y"),
            ("X", "Z"): (-1j, "Y"),
            ("X", "X"): (1, "I"),
            ("Y", "Y"): (1, "I"),
            ("Z", "Z"): (1, "I"),
            ("I", "Y"): (1, "Y"),
        }
        for (a, b), (phase, out) in cases.items():
            prod = multiply(PauliString.from_label(a), PauliString.from_label(b))
            assert prod.phase == phase
            assert prod.string.to_label() == out

    def test_matches_matrix_product(self):
        rng = np.random.default_rng(RNG_SEED)
        for _ in range(200):
            n = int(rng.integers(1, 6))
            a = reference.random_label(rng, n)
            b = reference.random_label(rng, n)
            prod = multiply(PauliString.from_label(a), PauliString.from_label(b))
            lhs = reference.label_matrix(a) @ reference.label_matrix(b)
            rhs = prod.phase * reference.label_matrix(prod.string.to_label())
            assert np.allclose(lhs, rhs, atol=1e-13)

    def test_phase_is_exact_fourth_root(self):
        rng = np.random.default_rng(RNG_SEED + 1)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            prod = multiply(
                PauliString.from_label(reference.random_label(rng, n)),
                PauliString.from_label(reference.random_label(rng, n)),
            )
            assert prod.phase in (1, 1j, -1, -1j)

    def test_size_mismatch_rejected(self):
        with pytest.raises(ValueError):
            multiply(PauliString.from_label("X"), PauliString.from_label("XX"))

    def test_phased_pauli_validates_phase(self):
        with pytest.raises(ValueError):
            PhasedPauli(0.5 + 0.5j, PauliString.from_label("X"))


class TestCommutesAndFlip:
    def test_commutes_matches_commutator_norm(self):
        rng = np.random.default_rng(RNG_SEED + 2)
        for _ in range(200):
            n = int(rng.integers(1, 5))
            a = reference.random_label(rng, n)
            b = reference.random_label(rng, n)
            ma, mb = reference.label_matrix(a), reference.label_matrix(b)
            exact = np.allclose(ma @ mb, mb @ ma, atol=1e-12)
            assert commutes(
                PauliString.from_label(a), PauliString.from_label(b)
            ) == exact

    def test_flip_index_is_xy_positions(self):
        rng = np.random.default_rng(RNG_SEED + 3)
        for _ in range(100):
            n = int(rng.integers(1, 8))
            label = reference.random_label(rng, n)
            expected = frozenset(i for i, ch in enumerate(label) if ch in "XY")
            assert flip_index(PauliString.from_label(label)) == expected


class TestQubitHamiltonian:
    def test_terms_sorted_canonically(self):
        h = QubitHamiltonian.from_labels({"ZZ": 1.0, "XI": 2.0, "II": 3.0, "YY": 4.0})
        keys = [p.key() for p, _ in h.items()]
        assert keys == sorted(keys)

    def test_pruning_threshold_is_inclusive(self):
        h = QubitHamiltonian.from_labels({"X": 1e-12, "Y": 9e-13, "Z": 1.0})
        assert h.coefficient(PauliString.from_label("X")) == 1e-12
        assert h.coefficient(PauliString.from_label("Y")) == 0.0
        assert len(h) == 2

    def test_rejects_mixed_sizes_and_nonfinite(self):
        with pytest.raises(ValueError):
            QubitHamiltonian(
                2, {PauliString.from_label("X"): 1.0}
            )
        with pytest.raises(ValueError):
            QubitHamiltonian.from_labels({"XX": math.inf})
        with pytest.raises(ValueError):
            QubitHamiltonian.from_labels({})

    def test_identity_coefficient_and_lookup(self):
        h = QubitHamiltonian.from_labels({"II": -0.5, "ZZ": 1.5})
        assert h.identity_coefficient == -0.5
        assert h.coefficient(PauliString.from_label("ZZ")) == 1.5
        assert h.coefficient(PauliString.from_label("XX")) == 0.0

    def test_json_round_trip_and_duplicate_merge(self):
        h = QubitHamiltonian.from_labels({"XZ": 0.25, "YI": -1.75, "II": 3.0})
        again = QubitHamiltonian.from_json_dict(h.to_json_dict())
        assert again == h
        merged = QubitHamiltonian.from_json_dict(
            {
                "n_qubits": 1,
                "terms": [
                    {"pauli": "Z", "coeff": 1.0},
                    {"pauli": "Z", "coeff": 0.5},
                ],
            }
        )
        assert merged.coefficient(PauliString.from_label("Z")) == 1.5

    def test_allclose(self):
        h = QubitHamiltonian.from_labels({"XZ": 0.25, "YI": -1.75})
        close = QubitHamiltonian.from_labels({"XZ": 0.25 + 1e-12, "YI": -1.75})
        far = QubitHamiltonian.from_labels({"XZ": 0.35, "YI": -1.75})
        assert h.allclose(close)
        assert not h.allclose(far)
        assert not h.allclose(QubitHamiltonian.from_labels({"X": 0.25}))

    def test_partition_covers_every_term_once(self):
        rng = np.random.default_rng(RNG_SEED + 4)
        h = reference.random_hamiltonian(rng, 5, 20)
        groups = partition_by_flip_index(h)
        seen = []
        for fset, members in groups.items():
            for p, c in members:
                assert flip_index(p) == fset
                assert h.coefficient(p) == c
                seen.append(p)
        assert sorted(p.key() for p in seen) == sorted(p.key() for p, _ in h.items())


class TestDress:
    def test_zero_angle_is_identity(self):
        rng = np.random.default_rng(RNG_SEED + 5)
        h = reference.random_hamiltonian(rng, 3, 10)
        assert dress(h, PauliString.from_label("XYZ"), 0.0).allclose(h, tol=0.0)

    def test_single_qubit_rotation_moves_z_to_y(self):
        h = QubitHamiltonian.from_labels({"Z": 1.0})
        rotated = dress(h, PauliString.from_label("X"), math.pi / 2.0)
        assert rotated.allclose(QubitHamiltonian.from_labels({"Y": 1.0}))

    def test_matches_expm_conjugation(self):
        rng = np.random.default_rng(RNG_SEED + 6)
        for _ in range(50):
            n = int(rng.integers(1, 5))
            h = reference.random_hamiltonian(rng, n, 8)
            label = reference.random_label(rng, n)
            if set(label) == {"I"}:
                continue
            tau = float(rng.uniform(-math.pi, math.pi))
            dressed = dress(h, PauliString.from_label(label), tau)
            expected = reference.dress_matrix(
                reference.ham_matrix(h), reference.label_matrix(label), tau
            )
            assert np.allclose(reference.ham_matrix(dressed), expected, atol=1e-10)
            assert len(dressed) <= 2 * len(h)

    def test_coefficients_stay_real_floats(self):
        rng = np.random.default_rng(RNG_SEED + 7)
        h = reference.random_hamiltonian(rng, 4, 12)
        dressed = dress(h, PauliString.from_label("XYIZ"), 0.7)
        assert all(type(c) is float for _, c in dressed.items())

    def test_sequence_folds_in_list_order(self):
        rng = np.random.default_rng(RNG_SEED + 8)
        h = reference.random_hamiltonian(rng, 3, 8)
        p1, p2 = PauliString.from_label("XYI"), PauliString.from_label("IZX")
        t1, t2 = 0.4, -1.1
        manual = dress(dress(h, p1, t1), p2, t2)
        assert dress_sequence(h, [(p1, t1), (p2, t2)]).allclose(manual, tol=0.0)
        u1 = reference.rotation_matrix(reference.label_matrix("XYI"), t1)
        u2 = reference.rotation_matrix(reference.label_matrix("IZX"), t2)
        u = u1 @ u2
        expected = u.conj().T @ reference.ham_matrix(h) @ u
        assert np.allclose(reference.ham_matrix(manual), expected, atol=1e-10)

    def test_empty_sequence_is_identity(self):
        h = QubitHamiltonian.from_labels({"ZZ": 1.0})
        assert dress_sequence(h, []) == h

    def test_rejects_bad_inputs(self):
        h = QubitHamiltonian.from_labels({"ZZ": 1.0})
        with pytest.raises(ValueError):
            dress(h, PauliString.from_label("X"), 0.3)
        with pytest.raises(ValueError):
            dress(h, PauliString.from_label("XX"), math.nan)
