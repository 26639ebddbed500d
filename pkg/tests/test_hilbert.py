#!/usr/bin/env python3

import unittest

import numpy as np

from .context import genent


H = genent.hilbert


def random_state(seed, dims, labels=None, rank=None):
    generator = genent.gen.rng(seed)
    structure = H.HilbertStructure(dims, labels)
    return H.StateMatrix(structure, genent.gen.gen_psd(generator, structure.total, rank))


class TestStructure(unittest.TestCase):
    def test_default_labels(self):
        s = H.HilbertStructure([2, 3, 4])
        self.assertEqual(s.labels, ("A", "B", "C"))
        self.assertEqual(s.total, 24)

    def test_duplicate_labels(self):
        with self.assertRaises(genent.errors.LabelError):
            H.HilbertStructure([2, 2], ["A", "A"])

    def test_mismatched_labels(self):
        with self.assertRaises(genent.errors.ArityError):
            H.HilbertStructure([2, 2], ["A"])

    def test_index_by_short_name(self):
        s = H.HilbertStructure([2, 4], ["A", "C=C1*C2"], {"C=C1*C2": {"dims": [2, 2], "labels": ["C1", "C2"]}})
        self.assertEqual(s.index("C"), 1)
        self.assertEqual(s.atoms("C").labels, ("C1", "C2"))
        with self.assertRaises(genent.errors.LabelError):
            s.index("D")

    def test_dump(self):
        s = H.HilbertStructure([2, 3], ["X", "Y"])
        self.assertEqual(s.dump(), {"dims": [2, 3], "labels": ["X", "Y"]})


class TestStateMatrix(unittest.TestCase):
    def test_not_hermitian(self):
        with self.assertRaises(genent.errors.IntegrityError):
            H.StateMatrix(H.HilbertStructure([2]), [[1, 1], [0, 1]])

    def test_not_psd(self):
        with self.assertRaises(genent.errors.IntegrityError):
            H.StateMatrix(H.HilbertStructure([2]), [[1, 0], [0, -0.5]])

    def test_shape(self):
        with self.assertRaises(genent.errors.ShapeError):
            H.StateMatrix(H.HilbertStructure([2, 2]), np.eye(3))

    def test_normalized_flag(self):
        rho = H.StateMatrix(H.HilbertStructure([2]), np.eye(2))
        self.assertFalse(rho.normalized)
        self.assertTrue(H.normalize(rho).normalized)

    def test_read_only(self):
        rho = random_state(1, [2, 2])
        with self.assertRaises(ValueError):
            rho.matrix[0, 0] = 5


class TestOperations(unittest.TestCase):
    def test_tensor_product(self):
        rho = random_state(1, [2], ["A"])
        sigma = random_state(2, [3], ["B"])
        joint = H.tensor_product(rho, sigma)
        self.assertEqual(joint.dims, (2, 3))
        self.assertTrue(np.allclose(joint.matrix, np.kron(rho.matrix, sigma.matrix)))

    def test_tensor_product_collision(self):
        rho = random_state(1, [2], ["A"])
        with self.assertRaises(genent.errors.LabelError):
            H.tensor_product(rho, rho)

    def test_partial_trace_of_product(self):
        rho = random_state(1, [2], ["A"])
        sigma = random_state(2, [3], ["B"])
        joint = H.tensor_product(rho, sigma)
        self.assertTrue(np.allclose(H.partial_trace(joint, ["A"]).matrix, rho.matrix))
        self.assertTrue(np.allclose(H.partial_trace(joint, ["B"]).matrix, sigma.matrix))

    def test_partial_trace_keeps_structure_order(self):
        rho = random_state(3, [2, 3, 2], ["A", "B", "C"])
        reduced = H.partial_trace(rho, ["C", "A"])
        self.assertEqual(reduced.labels, ("A", "C"))
        self.assertAlmostEqual(reduced.trace, rho.trace)

    def test_partial_trace_unknown(self):
        rho = random_state(3, [2, 2])
        with self.assertRaises(genent.errors.LabelError):
            H.partial_trace(rho, ["Z"])

    def test_partial_transpose_involution(self):
        rho = random_state(4, [2, 3, 2])
        pt = H.partial_transpose(rho, ["B"])
        back = H.partial_transpose_matrix(pt, rho.dims, [1])
        self.assertTrue(np.allclose(back, rho.matrix))
        self.assertTrue(np.allclose(pt, pt.conj().T))

    def test_partial_transpose_bell(self):
        bell = genent.constructions.bell_state()
        evals = np.linalg.eigvalsh(H.partial_transpose(bell, ["A"]))
        self.assertAlmostEqual(evals[0], -0.5)

    def test_apply_local_rectangular(self):
        rho = random_state(5, [3, 2])
        x = np.eye(2, 3)
        out = H.apply_local(rho, H.LocalOperator(rho.structure, [x, np.eye(2)]))
        self.assertEqual(out.dims, (2, 2))
        with self.assertRaises(genent.errors.ShapeError):
            H.LocalOperator(rho.structure, [np.eye(2), np.eye(2)])

    def test_numerical_rank_and_range(self):
        rho = random_state(6, [2, 3], rank=2)
        self.assertEqual(H.numerical_rank(rho), 2)
        basis = H.range_basis(rho)
        self.assertEqual(len(basis), 2)
        m = np.column_stack([v.vector for v in basis])
        self.assertTrue(np.allclose(m @ m.conj().T @ rho.matrix, rho.matrix))

    def test_min_eigenvalue(self):
        self.assertAlmostEqual(H.min_eigenvalue(np.diag([3.0, -1.0, 2.0])), -1.0)

    def test_kron_merge_matches_permutation(self):
        rho = random_state(7, [2, 2], ["A", "B"])
        sigma = random_state(8, [3], ["C"])
        merged = H.kron_merge(rho, sigma, [("A", "C")])
        self.assertEqual(merged.dims, (6, 2))
        joint = H.tensor_product(rho, sigma)
        p = H.permutation_matrix(joint.structure, ["A", "C", "B"])
        self.assertTrue(np.allclose(merged.matrix, p @ joint.matrix @ p.T))

    def test_kron_merge_arity(self):
        rho = random_state(7, [2], ["A"])
        sigma = random_state(8, [2, 2], ["B", "C"])
        with self.assertRaises(genent.errors.ArityError):
            H.kron_merge(rho, sigma)

    def test_tail_kron(self):
        alpha = random_state(9, [2, 2], ["A", "C1"])
        beta = random_state(10, [2, 3], ["B", "C2"])
        merged = H.tail_kron(alpha, beta)
        self.assertEqual(merged.dims, (2, 2, 6))
        self.assertEqual(merged.labels[2], "C=C1*C2")
        self.assertTrue(np.allclose(H.partial_trace(merged, ["A"]).matrix, H.partial_trace(alpha, ["A"]).matrix))

    def test_tail_kron_mismatch(self):
        alpha = random_state(9, [2, 2], ["A", "C1"])
        beta = random_state(10, [2, 2, 2], ["B", "C2", "C3"])
        with self.assertRaises(genent.errors.ArityError):
            H.tail_kron(alpha, beta)

    def test_unmerge(self):
        alpha = random_state(9, [2, 2], ["A", "C1"])
        beta = random_state(10, [2, 3], ["B", "C2"])
        merged = H.tail_kron(alpha, beta)
        split = H.unmerge(merged, "C")
        self.assertEqual(split.labels, ("A", "B", "C1", "C2"))
        self.assertEqual(split.dims, (2, 2, 2, 3))
        expected = H.permute_systems(H.tensor_product(alpha, beta), ["A", "B", "C1", "C2"])
        self.assertTrue(np.allclose(split.matrix, expected.matrix))

    def test_schmidt_decomposition(self):
        structure = H.HilbertStructure([2, 2])
        psi = H.PureVector(structure, [np.cos(0.3), 0, 0, np.sin(0.3)])
        s, u, v = H.schmidt_decomposition(psi, ["A"])
        self.assertAlmostEqual(s[0], np.cos(0.3))
        self.assertAlmostEqual(s[1], np.sin(0.3))

    def test_bipartition_empty(self):
        rho = random_state(11, [2, 2])
        with self.assertRaises(genent.errors.ArityError):
            H.bipartition(rho, ["A", "B"])

    def test_compress_to_support(self):
        generator = genent.gen.rng(12)
        structure = H.HilbertStructure([3, 3])
        # Support of both marginals is two dimensional
        small = genent.gen.gen_psd(generator, 4)
        iso = np.eye(3, 2)
        big = np.kron(iso, iso) @ small @ np.kron(iso, iso).T
        compressed, u_a, u_b = H.compress_to_support(H.StateMatrix(structure, big))
        self.assertEqual(compressed.dims, (2, 2))
        self.assertAlmostEqual(compressed.trace, 1.0)

    def test_basis_ket(self):
        ket = H.basis_ket([2, 3], [1, 2])
        self.assertEqual(np.argmax(np.abs(ket.vector)), 5)


class TestCodec(unittest.TestCase):
    def test_state_dict(self):
        rho = random_state(13, [2, 2], ["A", "B"])
        back = genent.codec.state_from_dict(genent.codec.state_to_dict(rho))
        self.assertEqual(back.structure, rho.structure)
        self.assertTrue(np.array_equal(back.matrix, rho.matrix))

    def test_malformed(self):
        with self.assertRaises(genent.errors.ValidityError):
            genent.codec.state_from_dict({"dims": [2]})
        with self.assertRaises(genent.errors.ValidityError):
            genent.codec.decode_matrix([[[1, 0]], [[1, 0], [0, 0]]])

    def test_missing_file(self):
        with self.assertRaises(genent.errors.ValidityError):
            genent.codec.load_json("/nonexistent/state.json")
