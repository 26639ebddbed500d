#!/usr/bin/env python3

import math
import unittest

import numpy as np

from .context import genent


H = genent.hilbert
K = genent.constructions
V = genent.certificate.Verdict

MC = [[0.6, 0.3], [0.3, 0.4]]


class TestMaximallyCorrelated(unittest.TestCase):
    def test_state(self):
        rho = K.mc_state(MC)
        self.assertEqual(rho.dims, (2, 2))
        self.assertAlmostEqual(rho.matrix[0, 3].real, 0.3)
        self.assertTrue(K.is_mc(rho))
        self.assertFalse(K.is_mc(genent.criteria.werner_state(genent.criteria.WernerParams(2, 0.0))))

    def test_invalid(self):
        with self.assertRaises(genent.errors.ValidityError):
            K.mc_state([[0.5, 0.6], [0.6, 0.5]])
        with self.assertRaises(genent.errors.ValidityError):
            K.mc_state([[0.6, 0.1], [0.2, 0.4]])
        with self.assertRaises(genent.errors.ValidityError):
            K.mc_state([[0.5, 0.0], [0.0, 0.6]])
        with self.assertRaises(genent.errors.ValidityError):
            K.mc_state([[1.0, 0.0]])

    def test_ghz(self):
        rho = K.ghz_state(3, 3)
        self.assertEqual(rho.dims, (3, 3, 3))
        self.assertAlmostEqual(rho.trace, 1.0)


class TestChain(unittest.TestCase):
    def test_products_and_factors(self):
        alphas = [K.bell_state(), K.mc_state(MC)]
        report = K.merged_chain(alphas, certify=False)
        self.assertEqual(report.state.dims, (2, 2, 4))
        self.assertEqual(report.state.labels[-1], "C=C1*C2")
        self.assertLess(report.product_residuals["A1,A2"], 1e-10)
        for key, residual in report.factor_residuals.items():
            self.assertLess(residual, 1e-10, key)

    def test_negativity_carries_over(self):
        alphas = [K.bell_state(), K.mc_state(MC)]
        report = K.merged_chain(alphas, certify=False)
        for l, alpha in enumerate(report.inputs):
            key = f"A{l + 1},C"
            expected = genent.criteria.negativity(alpha, [alpha.labels[0]])
            self.assertAlmostEqual(genent.criteria.negativity(report.reduced_ops[key], [f"A{l + 1}"]), expected)

    def test_bell_and_rank_two_normal_form(self):
        alpha = genent.eb_subspace.normal_form_state(math.pi / 4, math.pi / 4)
        report = K.merged_chain([K.bell_state(), alpha], certify=False)
        reduced = report.reduced_ops["A1,A2"]
        a1 = H.partial_trace(reduced, ["A1"])
        a2 = H.partial_trace(reduced, ["A2"])
        self.assertLess(np.linalg.norm(reduced.matrix - np.kron(a1.matrix, a2.matrix)), 1e-10)
        self.assertAlmostEqual(
            genent.criteria.negativity(report.state, ["A1"]),
            genent.criteria.negativity(K.bell_state(), ["A"]),
            delta=1e-9,
        )
        self.assertEqual(report.ledger.find("A1:C1").tag, genent.measures.LedgerTag.WOOTTERS_EXACT)

    def test_three_inputs(self):
        report = K.merged_chain([K.bell_state()] * 3, certify=False)
        self.assertEqual(report.state.dims, (2, 2, 2, 8))
        self.assertEqual(len(report.product_residuals), 3)

    def test_associativity(self):
        generator = genent.gen.rng(3)
        alphas = [
            H.StateMatrix(H.HilbertStructure([2, 2], [f"A{j}", f"C{j}"]), genent.gen.gen_psd(generator, 4))
            for j in (1, 2, 3)
        ]
        chained = K.chain_product(alphas)
        joint = H.tensor_product(H.tensor_product(alphas[0], alphas[1]), alphas[2])
        direct = H.regroup(joint, ["A1", "A2", "A3", ("C", ["C1", "C2", "C3"])])
        self.assertEqual(chained.labels, direct.labels)
        self.assertTrue(np.allclose(chained.matrix, direct.matrix))

    def test_certified(self):
        report = K.merged_chain([K.bell_state(), K.bell_state()], seed=0)
        self.assertEqual(report.ge_certificate.verdict, V.GE_CERTIFIED)
        checks = report.ge_certificate.verify(report.state)
        self.assertTrue(all(passed for _, passed, _ in checks))
        for cert in report.bipartition_verdicts.values():
            self.assertEqual(cert.verdict, V.NPT)
        for cert in report.distillability.values():
            self.assertEqual(cert.verdict, V.ONE_COPY_DISTILLABLE)

    def test_certified_mixed_input(self):
        alpha = genent.eb_subspace.normal_form_state(math.pi / 4, math.pi / 4)
        report = K.merged_chain([K.bell_state(), alpha], seed=0)
        cert = report.ge_certificate
        self.assertEqual(cert.verdict, V.GE_CERTIFIED)
        self.assertLess(cert.value, 0)
        failed = [name for name, passed, _ in cert.verify(report.state) if not passed]
        self.assertEqual(failed, [])

    def test_dump(self):
        report = K.merged_chain([K.bell_state(), K.mc_state(MC)], certify=False)
        data = report.dump()
        self.assertEqual(data["structure"]["dims"], [2, 2, 4])
        self.assertIsNone(data["ge_certificate"])
        self.assertEqual(len(data["ledger"]), len(report.ledger))

    def test_refuses_ppt_input(self):
        product = H.StateMatrix(H.HilbertStructure([2, 2]), np.diag([1.0, 0, 0, 0]))
        with self.assertRaises(genent.errors.ConstructionRefused):
            K.merged_chain([K.bell_state(), product], certify=False)

    def test_refuses_non_member(self):
        werner = genent.criteria.werner_state(genent.criteria.WernerParams(2, -1.0))
        with self.assertRaises(genent.errors.ConstructionRefused):
            K.merged_chain([K.bell_state(), werner], certify=False)

    def test_arity(self):
        with self.assertRaises(genent.errors.ArityError):
            K.merged_chain([K.bell_state()])
        with self.assertRaises(genent.errors.ArityError):
            K.merged_chain([K.bell_state(), K.ghz_state()])

    def test_dim_cap(self):
        with self.assertRaises(genent.errors.DimensionCapError):
            K.merged_chain([K.mc_state(np.eye(3) / 3)] * 3, certify=False)


class TestOtherConstructions(unittest.TestCase):
    def test_pair(self):
        alpha = genent.eb_subspace.normal_form_state(math.pi / 4, math.pi / 4, ("A", "C"))
        beta = K.bell_state(("B", "C"))
        rho = K.merged_pair_state(alpha, beta)
        self.assertEqual(rho.dims, (2, 2, 4))
        split = H.unmerge(rho, "C")
        self.assertEqual(split.labels, ("A", "B", "Ca1", "Cb1"))

    def test_pair_arity(self):
        with self.assertRaises(genent.errors.ArityError):
            K.merged_pair_state(K.bell_state(), K.ghz_state())

    def test_ring(self):
        rho = K.ring_state([K.bell_state()] * 3)
        self.assertEqual(rho.dims, (4, 4, 4))
        out = K.construction_report("ring", rho, certify=False)
        for label, value in out["site_entropies"].items():
            self.assertAlmostEqual(value, 2.0, msg=label)

    def test_ring_too_short(self):
        with self.assertRaises(genent.errors.ArityError):
            K.ring_state([K.bell_state()] * 2)

    def test_satellite(self):
        rho = K.satellite_state([K.bell_state()] * 2)
        self.assertEqual(rho.dims, (4, 2, 2))
        out = K.construction_report("satellite", rho, certify=False)
        self.assertAlmostEqual(out["site_entropies"]["A=A1*A2"], 2.0)
        self.assertAlmostEqual(out["purity"], 1.0)

    def test_satellite_two_matches_chain(self):
        generator = genent.gen.rng(13)
        alphas = [
            H.StateMatrix(H.HilbertStructure([2, 3], [f"A{j}", f"B{j}"]), genent.gen.gen_psd(generator, 6))
            for j in (1, 2)
        ]
        rho = K.satellite_state(alphas)
        self.assertEqual(rho.labels, ("A=A1*A2", "B1", "B2"))
        flipped = [H.permute_systems(alpha, [alpha.labels[1], alpha.labels[0]]) for alpha in alphas]
        chained = K.chain_product(flipped)
        self.assertEqual(chained.labels, ("B1", "B2", "C=A1*A2"))
        chained = H.permute_systems(chained, ["C", "B1", "B2"])
        self.assertTrue(np.allclose(chained.matrix, rho.matrix))

    def test_satellite_three_bell(self):
        rho = K.satellite_state([K.bell_state()] * 3)
        self.assertEqual(rho.dims, (8, 2, 2, 2))
        out = K.construction_report("satellite", rho, certify=False)
        self.assertAlmostEqual(out["site_entropies"][rho.labels[0]], 3.0)
        for label in rho.labels[1:]:
            self.assertAlmostEqual(out["site_entropies"][label], 1.0, msg=label)
            pair = H.partial_trace(rho, [rho.labels[0], label])
            self.assertAlmostEqual(genent.criteria.negativity(pair, [label]), 0.5, msg=label)

    def test_triangle(self):
        rho = K.triangle_state(K.bell_state(), K.bell_state(), K.bell_state())
        self.assertEqual(rho.dims, (4, 4, 4))
        self.assertEqual([H.split_label(i)[0] for i in rho.labels], ["A", "B", "C"])

    def test_report_certifies(self):
        rho = K.satellite_state([K.bell_state()] * 2)
        out = K.construction_report("satellite", rho, seed=0)
        self.assertEqual(out["ge_certificate"]["verdict"], "GE_CERTIFIED")
        self.assertEqual(len(out["bipartition_verdicts"]), 3)


if __name__ == "__main__":
    unittest.main()
