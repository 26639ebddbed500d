#!/usr/bin/env python3

import json
import unittest

import numpy as np

from .context import genent


C = genent.criteria
Certificate = genent.certificate.Certificate
V = genent.certificate.Verdict


def all_passed(checks):
    return all(passed for _, passed, _ in checks)


class TestCertificate(unittest.TestCase):
    def setUp(self):
        self.rho = genent.constructions.bell_state()
        self.cert = C.ppt_certificate(self.rho, ["A"], seed=3)

    def test_unknown_verdict(self):
        with self.assertRaises(genent.errors.ValidityError):
            Certificate("MAYBE")
        with self.assertRaises(genent.errors.ValidityError):
            Certificate.from_dict({"value": 1.0})

    def test_to_dict_is_json(self):
        data = self.cert.to_dict()
        again = Certificate.from_dict(json.loads(json.dumps(data)))
        self.assertEqual(again.verdict, V.NPT)
        self.assertEqual(again.seed, 3)
        self.assertTrue(np.allclose(again.evidence["vector"], self.cert.evidence["vector"]))

    def test_verify(self):
        self.assertTrue(all_passed(self.cert.verify(self.rho)))

    def test_verify_other_state(self):
        other = genent.constructions.mc_state([[0.6, 0.3], [0.3, 0.4]])
        checks = dict((name, passed) for name, passed, _ in self.cert.verify(other))
        self.assertFalse(checks["state digest"])

    def test_verify_relabeled_state(self):
        other = genent.hilbert.relabel(self.rho, ["X", "Y"])
        checks = self.cert.verify(other)
        self.assertFalse(all_passed(checks))

    def test_inconclusive(self):
        cert = Certificate(V.INCONCLUSIVE)
        self.assertTrue(all_passed(cert.verify(self.rho)))

    def test_bipartitions(self):
        structure = genent.hilbert.HilbertStructure([2, 2, 2, 2])
        sides = genent.certificate.bipartitions(structure)
        # 4 single systems and 3 pairs containing the first system
        self.assertEqual(len(sides), 7)
        self.assertIn([0, 1], sides)
        self.assertNotIn([2, 3], sides)


class TestWitnessCertificate(unittest.TestCase):
    def setUp(self):
        self.rho = genent.constructions.ghz_state()
        w, hints = C.projector_witness(self.rho)
        self.cert = C.witness_certify(self.rho, w, seed=0, hints=hints)

    def test_round_trip_verifies(self):
        again = Certificate.from_dict(json.loads(json.dumps(self.cert.to_dict())))
        self.assertEqual(again.verdict, V.GE_CERTIFIED)
        self.assertTrue(all_passed(again.verify(self.rho)))

    def test_tampered_witness(self):
        data = self.cert.to_dict()
        w = genent.codec.decode_matrix(data["evidence"]["witness"])
        w[0, 0] += 1e-3
        data["evidence"]["witness"] = genent.codec.encode_matrix(w)
        checks = Certificate.from_dict(data).verify(self.rho)
        self.assertFalse(all_passed(checks))

    def test_missing_decomposition(self):
        data = self.cert.to_dict()
        data["evidence"]["decompositions"].pop("A")
        checks = dict((name, passed) for name, passed, _ in Certificate.from_dict(data).verify(self.rho))
        self.assertFalse(checks["decomposition A"])


if __name__ == "__main__":
    unittest.main()
