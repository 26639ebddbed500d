#!/usr/bin/env python3

import unittest

import numpy as np

from .context import genent


class TestGen(unittest.TestCase):
    def test_sub_seeds(self):
        first = genent.gen.sub_seeds(42, 5)
        self.assertEqual(first, genent.gen.sub_seeds(42, 5))
        self.assertEqual(first[:3], genent.gen.sub_seeds(42, 3))
        self.assertEqual(len(set(first)), 5)
        self.assertNotEqual(first, genent.gen.sub_seeds(43, 5))
        self.assertTrue(all(0 <= i < 2**64 for i in first))

    def test_splitmix64(self):
        # Reference output for seed 0
        self.assertEqual(genent.gen.splitmix64(0)[1], 0xE220A8397B1DCDAF)

    def test_rng(self):
        a = genent.gen.rng(7).standard_normal(4)
        b = genent.gen.rng(7).standard_normal(4)
        self.assertTrue(np.array_equal(a, b))

    def test_psd(self):
        m = genent.gen.gen_psd(genent.gen.rng(1), 5, rank=2)
        self.assertAlmostEqual(np.trace(m).real, 1.0)
        self.assertEqual(np.linalg.matrix_rank(m, tol=1e-10), 2)
        self.assertGreater(np.linalg.eigvalsh(m)[0], -1e-12)

    def test_unitary(self):
        u = genent.gen.gen_unitary(genent.gen.rng(2), 3)
        self.assertTrue(np.allclose(u @ u.conj().T, np.eye(3)))
        self.assertEqual(genent.gen.gen_unitary(genent.gen.rng(2), 1).shape, (1, 1))

    def test_isometry(self):
        v = genent.gen.gen_isometry(genent.gen.rng(3), 4, 2)
        self.assertTrue(np.allclose(v.conj().T @ v, np.eye(2)))

    def test_invertible(self):
        m = genent.gen.gen_invertible(genent.gen.rng(4), 3)
        s = np.linalg.svd(m, compute_uv=False)
        self.assertGreater(s[-1] / s[0], 0.2)


if __name__ == "__main__":
    unittest.main()
