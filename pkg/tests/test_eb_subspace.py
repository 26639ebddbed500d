#!/usr/bin/env python3

import math
import unittest

import numpy as np

from .context import genent


H = genent.hilbert
EB = genent.eb_subspace


class TestBasis(unittest.TestCase):
    def test_zero_vector(self):
        with self.assertRaises(genent.errors.ValidityError):
            EB.EBBasis([[1, 0], [0, 0]], 2)

    def test_too_many_vectors(self):
        with self.assertRaises(genent.errors.ValidityError):
            EB.EBBasis([[1, 0], [0, 1], [1, 1]], 2)

    def test_index_vectors_orthonormal(self):
        with self.assertRaises(genent.errors.ValidityError):
            EB.EBBasis([[1, 0], [0, 1]], 2, [[1, 0], [1, 0]])

    def test_span_vectors_orthogonal(self):
        basis = EB.EBBasis([[1, 0], [1, 1], [0, 1]], 3)
        span = basis.span_vectors()
        gram = span.conj().T @ span
        self.assertTrue(np.allclose(gram - np.diag(np.diag(gram)), 0))

    def test_dump(self):
        basis = EB.EBBasis([[1, 0], [1, 1]], 3)
        again = EB.EBBasis.from_dict(basis.dump())
        self.assertEqual(again.index_dim, 3)
        self.assertTrue(np.allclose(again.span_vectors(), basis.span_vectors()))


class TestMembership(unittest.TestCase):
    def test_mc_state(self):
        rho = genent.constructions.mc_state([[0.6, 0.3], [0.3, 0.4]])
        coeffs = EB.verify_eb_membership(rho, genent.constructions.mc_basis(2))
        self.assertLess(coeffs.residual, 1e-12)
        self.assertTrue(np.allclose(coeffs.reconstruct(), rho.matrix))

    def test_non_member(self):
        rho = H.StateMatrix(H.HilbertStructure([2, 2]), np.eye(4) / 4)
        with self.assertRaises(genent.errors.NonMembershipError) as cm:
            EB.verify_eb_membership(rho, genent.constructions.mc_basis(2))
        self.assertGreater(cm.exception.residual, 0.1)

    def test_shape_mismatch(self):
        rho = H.StateMatrix(H.HilbertStructure([2, 3]), np.eye(6) / 6)
        with self.assertRaises(genent.errors.ShapeError):
            EB.verify_eb_membership(rho, genent.constructions.mc_basis(2))


class TestWootters(unittest.TestCase):
    def test_zero_row(self):
        rho, basis = genent.sweep.random_eb_state(genent.gen.rng(1), 4, 2, rank=3)
        coeffs = EB.verify_eb_membership(rho, basis)
        rotated = EB.wootters_zero_row(coeffs, 2)
        self.assertTrue(np.allclose(rotated.entries[2, 1:], 0, atol=1e-12))
        self.assertTrue(np.allclose(rotated.reconstruct(), rho.matrix))

    def test_degenerate_row(self):
        basis = EB.EBBasis([[1, 0], [0, 1], [1, 1]], 3)
        coeffs = EB.CoefficientMatrix([[1, 0], [0, 0], [0, 1]], basis)
        with self.assertRaises(genent.errors.DegenerateRowError):
            EB.wootters_zero_row(coeffs, 1)


class TestCascade(unittest.TestCase):
    def test_random_states(self):
        result = genent.sweep.cascade_sweep(count=12, seed=7)
        self.assertEqual(result["failures"], [])
        self.assertLessEqual(result["summaries"]["final_rank"]["max"], 2)
        self.assertLess(result["summaries"]["final_min_eigenvalue"]["max"], 0)

    def test_canonical_pair(self):
        rho, basis = genent.sweep.random_eb_state(genent.gen.rng(3), 5, 3, rank=3)
        if genent.criteria.ppt_check(rho, ["A"])[0]:
            self.skipTest("Random draw is PPT")
        cascade = EB.projection_cascade(rho, basis)
        pair = EB.reduce_to_canonical_pair(rho, basis, cascade)
        self.assertEqual(pair.dims, (2, 2))
        npt, lmin = EB.npt_on_support(pair)
        self.assertTrue(npt)
        dumped = cascade.dump()
        self.assertEqual(len(dumped["indices"]), 2)
        self.assertTrue(all(i >= 1 for i in dumped["indices"]))

    def test_separable_fails(self):
        # Classical mixture on span{|a_i, i>} is separable
        basis = EB.EBBasis([[1, 0], [0, 1], [1, 1]], 3)
        span = basis.span_vectors()
        m = sum(np.outer(span[:, i], span[:, i].conj()) for i in range(3))
        rho = H.StateMatrix(basis.structure(("A", "C")), m / np.trace(m).real)
        with self.assertRaises(genent.errors.CascadeFailure):
            EB.projection_cascade(rho, basis)


class TestPencil(unittest.TestCase):
    def test_normal_form_range(self):
        rho = EB.normal_form_state(0.5, 0.6)
        v, w = H.range_basis(rho)
        pencil = EB.product_vectors_in_pencil(v, w)
        self.assertFalse(pencil.infinite)
        self.assertEqual(len(pencil.ratios), 2)
        for z in pencil.product_vectors(v, w):
            s = np.linalg.svd(z.reshape(2, 2), compute_uv=False)
            self.assertLess(s[1], 1e-8 * s[0])

    def test_infinite_family(self):
        structure = H.HilbertStructure([2, 2])
        v = H.basis_ket(structure, [0, 0])
        w = H.basis_ket(structure, [0, 1])
        self.assertTrue(EB.product_vectors_in_pencil(v, w).infinite)

    def test_larger_dimensions(self):
        structure = H.HilbertStructure([3, 3])
        generator = genent.gen.rng(5)
        x1, y1, x2, y2 = (genent.gen.gen_unit_vector(generator, 3) for _ in range(4))
        v = H.PureVector(structure, np.kron(x1, y1) + np.kron(x2, y2))
        w = H.PureVector(structure, np.kron(x1, y1) - 0.5 * np.kron(x2, y2))
        pencil = EB.product_vectors_in_pencil(v, w)
        self.assertEqual(len(pencil.ratios), 2)


class TestNormalForm(unittest.TestCase):
    def test_round_trips(self):
        result = genent.sweep.normal_form_sweep(count=10, seed=11)
        self.assertEqual(result["failures"], [])
        self.assertLess(result["summaries"]["parameter_error"]["max"], 1e-8)
        self.assertLess(result["summaries"]["reconstruction_error"]["max"], 1e-9)

    def test_invariant_is_local(self):
        theta, mu = 0.7, 0.4
        rho = EB.normal_form_state(theta, mu)
        local = H.LocalOperator(rho.structure, [np.diag([2.0, 0.5]), np.diag([1.0, 3.0j])])
        moved = H.apply_local(rho, local).matrix[np.ix_([0, 3], [0, 3])]
        self.assertAlmostEqual(EB.block_invariant(moved), EB.normal_form_invariant(theta, mu))

    def test_rank_one_limit(self):
        structure = H.HilbertStructure([2, 2])
        psi = H.PureVector(structure, [math.cos(0.3), 0, 0, math.sin(0.3)])
        nf = EB.normal_form_rank2(psi.projector())
        self.assertTrue(nf.limit)
        self.assertEqual(nf.theta, 0.0)
        self.assertAlmostEqual(nf.mu, 0.3)

    def test_separable_degenerates(self):
        structure = H.HilbertStructure([2, 2])
        rho = H.StateMatrix(structure, np.diag([0.5, 0, 0, 0.5]))
        with self.assertRaises(genent.errors.DegeneracyError):
            EB.normal_form_rank2(rho)

    def test_product_degenerates(self):
        structure = H.HilbertStructure([2, 2])
        with self.assertRaises(genent.errors.DegeneracyError):
            EB.normal_form_rank2(H.basis_ket(structure, [0, 1]).projector())

    def test_rank_three(self):
        structure = H.HilbertStructure([2, 2])
        with self.assertRaises(genent.errors.NormalFormError):
            EB.normal_form_rank2(H.StateMatrix(structure, np.diag([0.4, 0.3, 0.3, 0])))
