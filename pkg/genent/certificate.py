import enum
import hashlib
import itertools
import json
import logging

import numpy as np

from . import codec
from . import config
from . import errors
from . import hilbert


class Verdict(enum.Enum):
    SEPARABLE_CERTIFIED = "SEPARABLE_CERTIFIED"
    PPT = "PPT"
    NPT = "NPT"
    ONE_COPY_DISTILLABLE = "ONE_COPY_DISTILLABLE"
    NOT_FOUND_DISTILLABLE = "NOT_FOUND_DISTILLABLE"
    GE_CERTIFIED = "GE_CERTIFIED"
    PPT_MIXTURE_FEASIBLE = "PPT_MIXTURE_FEASIBLE"
    INCONCLUSIVE = "INCONCLUSIVE"


# Largest d_side * d_rest for which PPT implies separability
PPT_DECISIVE_DIM = 6

# Evidence keys holding matrices, vectors and maps of matrices
_MATRIX_KEYS = ("witness",)
_VECTOR_KEYS = ("vector",)


def state_digest(rho):
    payload = json.dumps(codec.state_to_dict(rho), sort_keys=True)
    return hashlib.sha256(payload.encode("UTF-8")).hexdigest()


def cut_key(labels):
    return ",".join(labels)


def cut_labels(key):
    return key.split(",")


def bipartitions(structure):
    """
    One side of every bipartition: subsets of at most half of the systems,
    ties broken by containing the first system.
    """
    n = len(structure)
    out = []
    for size in range(1, n // 2 + 1):
        for side in itertools.combinations(range(n), size):
            if 2 * size == n and 0 not in side:
                continue
            out.append(list(side))
    return out


def pt_on(matrix, structure, side_labels):
    return hilbert.partial_transpose_matrix(matrix, structure.dims, structure.indices(side_labels))


def _min_eig(matrix):
    return float(np.linalg.eigvalsh(hilbert.hermitian_part(matrix))[0])


class Certificate:
    """
    Outcome of an entanglement test with the evidence needed to re-check
    it against the state alone.
    """

    def __init__(self, verdict, evidence=None, value=None, residual=None, seed=None, tolerance=None):
        if not isinstance(verdict, Verdict):
            try:
                verdict = Verdict(verdict)
            except ValueError:
                raise errors.ValidityError(f"Unknown verdict '{verdict}'")
        self.verdict = verdict
        self.evidence = dict(evidence or {})
        self.value = value
        self.residual = residual
        self.seed = seed
        self.tolerance = tolerance if tolerance is not None else config.tol("verdict")

    def __repr__(self):
        return f"<Certificate {self.verdict.value} value={self.value} residual={self.residual}>"

    def to_dict(self):
        evidence = {}
        for key, val in self.evidence.items():
            if key in _MATRIX_KEYS:
                evidence[key] = codec.encode_matrix(val)
            elif key in _VECTOR_KEYS:
                evidence[key] = codec.encode_vector(val)
            elif key == "parts":
                evidence[key] = [codec.encode_matrix(m) for m in val]
            elif key == "decompositions":
                evidence[key] = {
                    k: {"P": codec.encode_matrix(v["P"]), "Q": codec.encode_matrix(v["Q"])}
                    for k, v in val.items()
                }
            else:
                evidence[key] = val
        return {
            "verdict": self.verdict.value,
            "value": self.value,
            "residual": self.residual,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "evidence": evidence,
        }

    @classmethod
    def from_dict(cls, data):
        if "verdict" not in data:
            raise errors.ValidityError("Certificate misses its verdict")
        evidence = {}
        for key, val in (data.get("evidence") or {}).items():
            if key in _MATRIX_KEYS:
                evidence[key] = codec.decode_matrix(val)
            elif key in _VECTOR_KEYS:
                evidence[key] = codec.decode_vector(val)
            elif key == "parts":
                evidence[key] = [codec.decode_matrix(m) for m in val]
            elif key == "decompositions":
                evidence[key] = {
                    k: {"P": codec.decode_matrix(v["P"]), "Q": codec.decode_matrix(v["Q"])}
                    for k, v in val.items()
                }
            else:
                evidence[key] = val
        return cls(
            data["verdict"],
            evidence,
            data.get("value"),
            data.get("residual"),
            data.get("seed"),
            data.get("tolerance"),
        )

    def verify(self, rho):
        """
        Re-check stored evidence against rho. Returns list of
        (check name, passed, detail).
        """
        checks = []
        ev = self.evidence
        if "state_digest" in ev:
            digest = state_digest(hilbert.normalize(rho))
            checks.append(("state digest", digest == ev["state_digest"], digest[:16]))
        if "labels" in ev:
            checks.append(
                ("labels", list(ev["labels"]) == list(rho.labels), ",".join(rho.labels))
            )
        try:
            checks += self._verify_evidence(hilbert.normalize(rho))
        except (errors.GenentError, ValueError, KeyError) as e:
            checks.append(("evidence", False, f"{type(e).__name__}: {e}"))
        logging.debug(f"Verification of {self}: {checks}")
        return checks

    def _verify_evidence(self, rho):
        v = self.verdict
        if v == Verdict.INCONCLUSIVE:
            return [("verdict", True, "inconclusive carries no evidence")]
        if v in (Verdict.PPT, Verdict.SEPARABLE_CERTIFIED, Verdict.NPT):
            return self._verify_pt(rho)
        if v in (Verdict.ONE_COPY_DISTILLABLE, Verdict.NOT_FOUND_DISTILLABLE):
            return self._verify_vector(rho)
        if v == Verdict.GE_CERTIFIED:
            return self._verify_witness(rho)
        if v == Verdict.PPT_MIXTURE_FEASIBLE:
            return self._verify_parts(rho)
        raise errors.ValidityError(f"No verification for {v}")

    def _verify_pt(self, rho):
        side = self.evidence["cut"]
        pt = pt_on(rho.matrix, rho.structure, side)
        lmin = _min_eig(pt)
        checks = []
        if self.verdict == Verdict.NPT:
            checks.append(("PT eigenvalue negative", lmin < -self.tolerance, f"{lmin:.6e}"))
            vector = self.evidence["vector"]
            value = float(np.vdot(vector, pt @ vector).real)
            checks.append(
                ("PT expectation of vector", abs(value - self.value) <= 1e-9 and value < 0, f"{value:.6e}")
            )
        else:
            checks.append(("PT eigenvalue non-negative", lmin >= -self.tolerance, f"{lmin:.6e}"))
        if self.verdict == Verdict.SEPARABLE_CERTIFIED:
            idx = rho.structure.indices(side)
            d_side = int(np.prod([rho.dims[i] for i in idx]))
            d_rest = rho.structure.total // d_side
            checks.append(("PPT decisive dimension", d_side * d_rest <= PPT_DECISIVE_DIM, f"{d_side}x{d_rest}"))
        return checks

    def _verify_vector(self, rho):
        side = self.evidence["cut"]
        vector = self.evidence["vector"]
        pt = pt_on(rho.matrix, rho.structure, side)
        value = float(np.vdot(vector, pt @ vector).real)
        checks = [("PT expectation of vector", abs(value - self.value) <= 1e-9, f"{value:.6e}")]
        psi = hilbert.PureVector(rho.structure, vector)
        s = hilbert.schmidt_decomposition(psi, side)[0]
        s = np.concatenate([s, np.zeros(3)])
        if self.verdict == Verdict.ONE_COPY_DISTILLABLE:
            checks.append(("expectation negative", value < 0, f"{value:.6e}"))
            checks.append(
                ("Schmidt rank two", s[1] > 1e-10 and s[2] < 1e-10, f"{s[1]:.3e} {s[2]:.3e}")
            )
        else:
            checks.append(("Schmidt rank at most two", s[2] < 1e-10, f"{s[2]:.3e}"))
        return checks

    def _verify_witness(self, rho):
        w = self.evidence["witness"]
        checks = []
        value = float(np.trace(w @ rho.matrix).real)
        checks.append(("witness expectation negative", value < -config.tol("witness"), f"{value:.6e}"))
        checks.append(("witness expectation recorded", abs(value - self.value) <= 1e-9, f"{self.value!r}"))
        decompositions = self.evidence["decompositions"]
        for side in bipartitions(rho.structure):
            key = cut_key([rho.labels[i] for i in side])
            if key not in decompositions:
                checks.append((f"decomposition {key}", False, "missing"))
                continue
            p = decompositions[key]["P"]
            q = decompositions[key]["Q"]
            residual = float(np.linalg.norm(w - p - pt_on(q, rho.structure, cut_labels(key))))
            scale = max(1.0, float(np.linalg.norm(w)))
            checks.append((f"decomposition {key}", residual <= 1e-8 * scale, f"{residual:.3e}"))
            for name, m in (("P", p), ("Q", q)):
                lmin = _min_eig(m)
                lmax = max(float(np.max(np.abs(np.linalg.eigvalsh(hilbert.hermitian_part(m))))), 1e-300)
                checks.append(
                    (f"{name} {key} positive", lmin >= -config.tol("psd") * lmax, f"{lmin:.3e}")
                )
        return checks

    def _verify_parts(self, rho):
        parts = self.evidence["parts"]
        cuts = self.evidence["part_cuts"]
        checks = []
        total = sum(parts)
        residual = float(np.linalg.norm(total - rho.matrix))
        checks.append(("parts sum to state", residual <= config.tol("mixture"), f"{residual:.3e}"))
        for part, side in zip(parts, cuts):
            key = cut_key(side)
            for name, m in (("part", part), ("PT of part", pt_on(part, rho.structure, side))):
                lmin = _min_eig(m)
                checks.append((f"{name} {key} positive", lmin >= -config.tol("psd"), f"{lmin:.3e}"))
        return checks
