#!/usr/bin/env python3

import inspect
import math
import unittest

import numpy as np

from .context import genent


H = genent.hilbert
M = genent.measures


class TestTwoQubit(unittest.TestCase):
    def test_bell(self):
        bell = genent.constructions.bell_state()
        self.assertAlmostEqual(M.concurrence_2qubit(bell), 1.0)
        self.assertAlmostEqual(M.eof_2qubit(bell), 1.0)

    def test_product(self):
        rho = H.StateMatrix(H.HilbertStructure([2, 2]), np.diag([1.0, 0, 0, 0]))
        self.assertAlmostEqual(M.concurrence_2qubit(rho), 0.0)
        self.assertAlmostEqual(M.eof_2qubit(rho), 0.0)

    def test_pure(self):
        psi = H.PureVector(H.HilbertStructure([2, 2]), [math.cos(0.4), 0, 0, math.sin(0.4)])
        self.assertAlmostEqual(M.concurrence_2qubit(psi.projector()), math.sin(0.8))
        self.assertAlmostEqual(M.eof_2qubit(psi.projector()), M.entanglement_entropy(psi, ["A"]))

    def test_shape(self):
        with self.assertRaises(genent.errors.ShapeError):
            M.concurrence_2qubit(genent.criteria.werner_state(genent.criteria.WernerParams(3, 0.0)))

    def test_entropy(self):
        psi = H.PureVector(H.HilbertStructure([2, 2]), [1, 0, 0, 1])
        self.assertAlmostEqual(M.entanglement_entropy(psi, ["B"]), 1.0)


class TestRoof(unittest.TestCase):
    def test_matches_closed_form(self):
        structure = H.HilbertStructure([2, 2])
        for seed, rank in ((1, 2), (2, 3)):
            rho = H.StateMatrix(structure, genent.gen.gen_psd(genent.gen.rng(seed), 4, rank))
            exact = M.concurrence_2qubit(rho)
            bound = M.concurrence_roof_upper_bound(rho, restarts=300, seed=seed)
            self.assertGreater(bound, exact - 1e-4)
            self.assertLess(bound, exact + 5e-3)

    def test_pure_state(self):
        psi = H.PureVector(H.HilbertStructure([2, 2]), [math.cos(0.4), 0, 0, math.sin(0.4)])
        bound = M.concurrence_roof_upper_bound(psi.projector(), restarts=10)
        self.assertAlmostEqual(bound, math.sin(0.8), places=6)

    def test_limits(self):
        defaults = inspect.signature(M.concurrence_roof_upper_bound).parameters
        self.assertEqual(defaults["restarts"].default, 10000)
        self.assertLessEqual(defaults["terms"].default, M.ROOF_MAX_TERMS)
        self.assertEqual(M.ROOF_MAX_TERMS, 8)
        rho = genent.constructions.bell_state()
        with self.assertRaises(genent.errors.ValidityError):
            M.concurrence_roof_upper_bound(rho, restarts=10, terms=9)
        with self.assertRaises(genent.errors.ValidityError):
            M.concurrence_roof_upper_bound(rho, restarts=0)
        bound = M.concurrence_roof_upper_bound(rho, restarts=5, terms=8, polish=0)
        self.assertAlmostEqual(bound, 1.0, places=6)


class TestLedger(unittest.TestCase):
    def setUp(self):
        alphas = [genent.constructions.bell_state(), genent.constructions.mc_state([[0.6, 0.3], [0.3, 0.4]])]
        self.report = genent.constructions.merged_chain(alphas, certify=False)
        self.ledger = self.report.ledger

    def test_cuts(self):
        self.assertEqual(self.ledger.find("A1:A2").tag, M.LedgerTag.SEPARABLE_ZERO)
        self.assertEqual(self.ledger.find("A1:C").tag, M.LedgerTag.SEP_FACTOR_ADDITIVE)
        self.assertEqual(self.ledger.find("A2:A1C").tag, M.LedgerTag.TENSOR_ADDITIVE)
        total = self.ledger.find("A1A2:C")
        self.assertAlmostEqual(total.value, 1.0 + M.eof_2qubit(self.report.inputs[1]))
        with self.assertRaises(KeyError):
            self.ledger.find("B:C")

    def test_verify(self):
        results = self.ledger.verify(self.report)
        self.assertGreater(len(results), 0)
        self.assertTrue(all(passed for _, passed, _ in results))

    def test_rows(self):
        rows = self.ledger.to_rows()
        self.assertEqual(len(rows), len(self.ledger))
        self.assertIn("WOOTTERS_EXACT > EB_RANGE_ADDITIVE", rows[0]["chain"])

    def test_tampered_value(self):
        self.ledger.find("A1:C1").value += 1e-3
        failed = [cut for cut, passed, _ in self.ledger.verify(self.report) if not passed]
        self.assertEqual(failed, ["A1:C1"])

    def test_input_eof(self):
        value, tag = M.input_eof(genent.constructions.mc_state(np.full((3, 3), 1 / 3)))
        self.assertAlmostEqual(value, math.log2(3))
        self.assertEqual(tag, M.LedgerTag.PURE_ENTROPY)
        self.assertEqual(M.input_eof(genent.constructions.mc_state(np.eye(3) / 3 + 0.1 * (np.ones((3, 3)) - np.eye(3)))), (None, None))


if __name__ == "__main__":
    unittest.main()
