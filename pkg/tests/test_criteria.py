#!/usr/bin/env python3

import unittest

import numpy as np

from .context import genent


H = genent.hilbert
C = genent.criteria
V = genent.certificate.Verdict


def product_state(seed, dims):
    generator = genent.gen.rng(seed)
    joint = None
    for i, d in enumerate(dims):
        part = H.StateMatrix(H.HilbertStructure([d], [f"S{i}"]), genent.gen.gen_psd(generator, d))
        joint = part if joint is None else H.tensor_product(joint, part)
    return H.relabel(joint, H.default_labels(len(dims)))


class TestWerner(unittest.TestCase):
    def test_params(self):
        with self.assertRaises(genent.errors.ValidityError):
            C.WernerParams(1, 0.0)
        with self.assertRaises(genent.errors.ValidityError):
            C.WernerParams(3, 1.5)

    def test_state(self):
        rho = C.werner_state(C.WernerParams(3, -0.6))
        self.assertAlmostEqual(rho.trace, 1.0)
        self.assertEqual(rho.dims, (3, 3))

    def test_classes(self):
        self.assertEqual(C.classify_werner(C.WernerParams(3, -0.3)), C.WernerClass.SEPARABLE)
        self.assertEqual(C.classify_werner(C.WernerParams(3, -0.4)), C.WernerClass.NPT_1COPY_UNDISTILLABLE)
        self.assertEqual(C.classify_werner(C.WernerParams(3, -0.6)), C.WernerClass.NPT_1COPY_DISTILLABLE)
        self.assertEqual(C.classify_werner(C.WernerParams(2, -0.5)), C.WernerClass.SEPARABLE)

    def test_params_of(self):
        params = C.werner_params_of(C.werner_state(C.WernerParams(4, -0.35)))
        self.assertEqual(params.d, 4)
        self.assertAlmostEqual(params.p, -0.35)

    def test_params_of_other_state(self):
        with self.assertRaises(genent.errors.ValidityError):
            C.werner_params_of(genent.constructions.mc_state([[0.6, 0.3], [0.3, 0.4]]))

    def test_sweep(self):
        result = genent.sweep.werner_sweep(dims=(2, 3), step=0.05, restarts_found=20, restarts_none=20)
        self.assertEqual(result["failures"], [])


class TestPpt(unittest.TestCase):
    def test_bell(self):
        ppt, lmin = C.ppt_check(genent.constructions.bell_state(), ["A"])
        self.assertFalse(ppt)
        self.assertAlmostEqual(lmin, -0.5)
        self.assertAlmostEqual(C.negativity(genent.constructions.bell_state(), ["B"]), 0.5)

    def test_product(self):
        rho = product_state(1, [2, 3])
        self.assertTrue(C.ppt_check(rho, ["A"])[0])
        self.assertAlmostEqual(C.negativity(rho, ["A"]), 0.0)

    def test_negativity_ignores_local_factor(self):
        sigma = product_state(2, [3])
        sigma = H.relabel(sigma, ["C"])
        joint = H.tensor_product(genent.constructions.bell_state(), sigma)
        self.assertAlmostEqual(C.negativity(joint, ["A"]), 0.5)

    def test_cut_has_to_split(self):
        with self.assertRaises(genent.errors.ArityError):
            C.ppt_check(genent.constructions.bell_state(), ["A", "B"])
        with self.assertRaises(genent.errors.LabelError):
            C.ppt_check(genent.constructions.bell_state(), ["Z"])

    def test_certificates(self):
        cert = C.ppt_certificate(genent.constructions.bell_state(), ["A"])
        self.assertEqual(cert.verdict, V.NPT)
        self.assertLess(cert.value, 0)
        cert = C.ppt_certificate(product_state(3, [2, 2]), ["A"])
        self.assertEqual(cert.verdict, V.SEPARABLE_CERTIFIED)
        cert = C.ppt_certificate(C.werner_state(C.WernerParams(3, 0.5)), ["A"])
        self.assertEqual(cert.verdict, V.PPT)


class TestDistillability(unittest.TestCase):
    def test_bell(self):
        cert = C.one_copy_distillable_search(genent.constructions.bell_state(), ["A"], restarts=1)
        self.assertEqual(cert.verdict, V.ONE_COPY_DISTILLABLE)
        self.assertAlmostEqual(cert.value, -0.5)

    def test_werner_distillable(self):
        rho = C.werner_state(C.WernerParams(3, -0.8))
        cert = C.one_copy_distillable_search(rho, ["A"], restarts=20, seed=4)
        self.assertEqual(cert.verdict, V.ONE_COPY_DISTILLABLE)
        self.assertTrue(all(passed for _, passed, _ in cert.verify(rho)))

    def test_werner_undistillable(self):
        rho = C.werner_state(C.WernerParams(3, -0.4))
        cert = C.one_copy_distillable_search(rho, ["A"], restarts=20, seed=4)
        self.assertEqual(cert.verdict, V.NOT_FOUND_DISTILLABLE)
        self.assertGreaterEqual(cert.value, -1e-10)

    def test_deterministic(self):
        rho = C.werner_state(C.WernerParams(4, -0.45))
        first = C.one_copy_distillable_search(rho, ["A"], restarts=5, seed=9)
        second = C.one_copy_distillable_search(rho, ["A"], restarts=5, seed=9)
        self.assertEqual(first.value, second.value)
        self.assertTrue(np.array_equal(first.evidence["vector"], second.evidence["vector"]))


class TestGenuineEntanglement(unittest.TestCase):
    def test_ghz(self):
        rho = genent.constructions.ghz_state()
        cert = C.ppt_mixture_search(rho, seed=0)
        self.assertEqual(cert.verdict, V.GE_CERTIFIED)
        self.assertLess(cert.value, 0)
        self.assertTrue(all(passed for _, passed, _ in cert.verify(rho)))

    def test_product(self):
        rho = product_state(5, [2, 2, 2])
        cert = C.ppt_mixture_search(rho)
        self.assertEqual(cert.verdict, V.PPT_MIXTURE_FEASIBLE)
        nonzero = [p for p in cert.evidence["parts"] if np.linalg.norm(p) > 0]
        self.assertEqual(len(nonzero), 1)
        self.assertTrue(all(passed for _, passed, _ in cert.verify(rho)))

    def test_mixture_of_pure_products(self):
        for seed in (1, 2, 3):
            rho = genent.sweep.random_biseparable_mixture(genent.gen.rng(seed))
            for side in (["A"], ["B"], ["C"]):
                self.assertFalse(C.ppt_check(rho, side)[0], f"seed {seed} cut {side}")
            cert = C.ppt_mixture_search(rho, seed=seed)
            self.assertEqual(cert.verdict, V.PPT_MIXTURE_FEASIBLE, f"seed {seed}")
            nonzero = [p for p in cert.evidence["parts"] if np.linalg.norm(p) > 0]
            self.assertEqual(len(nonzero), 3)
            self.assertLess(cert.residual, 1e-8)
            self.assertTrue(all(passed for _, passed, _ in cert.verify(rho)))

    def test_sanity_sweep(self):
        result = genent.sweep.run("ge-sanity", count=2, seed=0)
        self.assertEqual(result["failures"], [])
        self.assertTrue(result["passed"])
        self.assertEqual(result["summaries"]["ghz_value"]["samples"], 2)
        self.assertEqual(result["summaries"]["mixture_parts"]["samples"], 4)
        self.assertLess(result["summaries"]["mixture_residual"]["max"], 1e-8)

    def test_one_system(self):
        with self.assertRaises(genent.errors.ArityError):
            C.ppt_mixture_search(product_state(6, [3]))

    def test_identity_witness(self):
        rho = genent.constructions.ghz_state()
        cert = C.witness_certify(rho, np.eye(8))
        self.assertEqual(cert.verdict, V.INCONCLUSIVE)

    def test_projector_witness(self):
        rho = genent.constructions.ghz_state()
        w, hints = C.projector_witness(rho)
        self.assertAlmostEqual(np.trace(w @ rho.matrix).real, -0.5)
        self.assertEqual(len(hints), 3)
        cert = C.witness_certify(rho, w, hints=hints)
        self.assertEqual(cert.verdict, V.GE_CERTIFIED)

    def test_witness_shape(self):
        with self.assertRaises(genent.errors.ShapeError):
            C.witness_certify(genent.constructions.ghz_state(), np.eye(4))


if __name__ == "__main__":
    unittest.main()
