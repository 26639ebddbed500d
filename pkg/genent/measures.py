import enum
import logging

import numpy as np

import scipy.linalg
import scipy.optimize
import scipy.stats

from . import config
from . import criteria
from . import errors
from . import gen
from . import hilbert


SIGMA_Y = np.array([[0, -1j], [1j, 0]])
YY = np.kron(SIGMA_Y, SIGMA_Y)

ROOF_RESTARTS = 10000
ROOF_MAX_TERMS = 8


def _check_two_qubit(rho):
    if tuple(rho.dims) != (2, 2):
        raise errors.ShapeError(f"Expected a two-qubit state, got {rho.structure}")


def _sqrt_psd(matrix):
    evals, evecs = np.linalg.eigh(hilbert.hermitian_part(matrix))
    return (evecs * np.sqrt(np.clip(evals, 0, None))) @ evecs.conj().T


def concurrence_2qubit(rho):
    """
    Wootters concurrence max(0, l1 - l2 - l3 - l4), l_i the descending
    square roots of the eigenvalues of rho (Y x Y) rho* (Y x Y).
    """
    _check_two_qubit(rho)
    rho = hilbert.normalize(rho).matrix
    root = _sqrt_psd(rho)
    # Same spectrum as rho * rho_tilde, but Hermitian
    m = root @ YY @ rho.conj() @ YY @ root
    evals = np.abs(np.sort(np.linalg.eigvalsh(hilbert.hermitian_part(m))))
    lsum = np.sqrt(evals[3]) - np.sqrt(evals[2]) - np.sqrt(evals[1]) - np.sqrt(evals[0])
    return float(min(1.0, max(0.0, lsum)))


def binary_entropy(x):
    return float(scipy.stats.entropy([x, 1.0 - x], base=2))


def eof_2qubit(rho):
    c = concurrence_2qubit(rho)
    return binary_entropy((1.0 + np.sqrt(max(0.0, 1.0 - c * c))) / 2.0)


def entanglement_entropy(psi, cut):
    """Von Neumann entropy (base 2) of the reduced state across the cut"""
    s = hilbert.schmidt_decomposition(psi, cut)[0]
    probs = s**2
    return float(scipy.stats.entropy(probs / np.sum(probs), base=2))


# Convex roof oracle


def _roof_objective(tau, u):
    return float(np.sum(np.abs(np.diag(u.T @ tau @ u))))


def _hermitian_from(params, m):
    h = np.zeros((m, m), dtype=complex)
    iu = np.triu_indices(m, 1)
    k = len(iu[0])
    h[np.diag_indices(m)] = params[:m]
    h[iu] = params[m:m + k] + 1j * params[m + k:]
    return h + np.triu(h, 1).conj().T


def concurrence_roof_upper_bound(rho, restarts=ROOF_RESTARTS, seed=0, terms=4, polish=3):
    """
    Upper bound on the concurrence convex roof: the average concurrence of
    decompositions W U of rho, with W the scaled eigenvectors and U the
    first rows of a Haar unitary of size `terms`. The best few random
    decompositions are polished locally over U exp(iH).

    Decompositions have between rank and ROOF_MAX_TERMS terms; four is
    enough for two qubits and keeps the polish over U small.
    """
    _check_two_qubit(rho)
    if not 1 <= terms <= ROOF_MAX_TERMS:
        raise errors.ValidityError(f"Decomposition length has to be in 1..{ROOF_MAX_TERMS}, got {terms}")
    if restarts < 1:
        raise errors.ValidityError(f"Need at least one restart, got {restarts}")
    rho = hilbert.normalize(rho)
    evals, evecs = hilbert.eigh(rho)
    keep = evals > config.tol("rank") * max(evals[-1], 1e-300)
    w = evecs[:, keep] * np.sqrt(evals[keep])
    rank = w.shape[1]
    terms = max(terms, rank)
    tau = w.T @ YY @ w

    candidates = []
    for sub in gen.sub_seeds(seed, restarts):
        u = gen.gen_unitary(gen.rng(sub), terms)[:rank]
        candidates.append((_roof_objective(tau, u), sub, u))
    candidates.sort(key=lambda i: i[0])
    best = candidates[0][0]
    logging.debug(f"Best random decomposition of {restarts} has average concurrence {best:.6e}")

    m = terms
    for value, sub, u0 in candidates[:polish]:
        def objective(params):
            return _roof_objective(tau, u0 @ scipy.linalg.expm(1j * _hermitian_from(params, m)))

        res = scipy.optimize.minimize(objective, np.zeros(m * m), method="Powell")
        logging.debug(f"Polish of restart {sub} moved {value:.6e} to {res.fun:.6e}")
        best = min(best, float(res.fun))
    return best


# Additivity ledger


class LedgerTag(enum.Enum):
    WOOTTERS_EXACT = "WOOTTERS_EXACT"
    PURE_ENTROPY = "PURE_ENTROPY"
    SEPARABLE_ZERO = "SEPARABLE_ZERO"
    EB_RANGE_ADDITIVE = "EB_RANGE_ADDITIVE"
    TENSOR_ADDITIVE = "TENSOR_ADDITIVE"
    SEP_FACTOR_ADDITIVE = "SEP_FACTOR_ADDITIVE"
    BOUND_ONLY = "BOUND_ONLY"


NOTES = {
    LedgerTag.WOOTTERS_EXACT: "two-qubit state, EOF from the Wootters concurrence formula",
    LedgerTag.PURE_ENTROPY: "pure across the cut, EOF is the entanglement entropy",
    LedgerTag.SEPARABLE_ZERO: "reduced operator is a product of its marginals, EOF is zero",
    LedgerTag.EB_RANGE_ADDITIVE: "range lies in an entanglement-breaking subspace, EOF is additive",
    LedgerTag.TENSOR_ADDITIVE: "tensor product of states with additive EOF, values add up",
    LedgerTag.SEP_FACTOR_ADDITIVE: "additive-EOF state times a separable factor keeps its EOF",
    LedgerTag.BOUND_ONLY: "no exact EOF available, value is the negativity as a bound",
}


class LedgerEntry:
    def __init__(self, cut, value, tag, chain=None, note=None, evidence=None):
        if not isinstance(tag, LedgerTag):
            tag = LedgerTag(tag)
        self.cut = cut
        self.value = value
        self.tag = tag
        self.chain = [LedgerTag(i) if not isinstance(i, LedgerTag) else i for i in (chain or [tag])]
        self.note = note if note is not None else NOTES[tag]
        self.evidence = dict(evidence or {})

    def __repr__(self):
        return f"<LedgerEntry {self.cut} {self.tag.value} {self.value}>"

    def dump(self):
        return {
            "cut": self.cut,
            "value": self.value,
            "tag": self.tag.value,
            "chain": [i.value for i in self.chain],
            "note": self.note,
            "evidence": self.evidence,
        }


class AdditivityLedger:
    """
    EOF bookkeeping of a chain construction. Values and justification
    chains are stored separately: the chain records why a value carries
    over, the value itself is only exact for the computable tags.
    """

    def __init__(self, entries=None):
        self.entries = list(entries or [])

    def __len__(self):
        return len(self.entries)

    def add(self, entry):
        logging.debug(f"Ledger entry {entry}")
        self.entries.append(entry)

    def find(self, cut):
        for entry in self.entries:
            if entry.cut == cut:
                return entry
        raise KeyError(cut)

    def to_rows(self):
        return [
            {
                "cut": e.cut,
                "value": e.value,
                "tag": e.tag.value,
                "chain": " > ".join(i.value for i in e.chain),
                "note": e.note,
            }
            for e in self.entries
        ]

    def dump(self):
        return [e.dump() for e in self.entries]

    def verify(self, report, tol=1e-10):
        """
        Recompute every entry whose value comes from a computable rule.
        Returns list of (cut, passed, detail).
        """
        out = []
        for entry in self.entries:
            if entry.tag == LedgerTag.SEPARABLE_ZERO:
                rho = report.reduced_ops[entry.evidence["reduced"]]
                residual = product_residual(rho)
                out.append((entry.cut, residual <= tol, f"product residual {residual:.3e}"))
                continue
            if "inputs" in entry.evidence and entry.tag == LedgerTag.TENSOR_ADDITIVE:
                values = [input_eof(report.inputs[i])[0] for i in entry.evidence["inputs"]]
                value = float(sum(values))
            elif "input" in entry.evidence and entry.tag != LedgerTag.BOUND_ONLY:
                value = input_eof(report.inputs[entry.evidence["input"]])[0]
            else:
                continue
            passed = abs(value - entry.value) <= tol
            out.append((entry.cut, passed, f"recomputed {value:.12f}"))
        return out


def product_residual(rho):
    """Frobenius distance of a bipartite state from the product of its marginals"""
    a = hilbert.partial_trace(rho, [rho.labels[0]])
    b = hilbert.partial_trace(rho, [rho.labels[1]])
    return float(np.linalg.norm(rho.matrix - np.kron(a.matrix, b.matrix)))


def input_eof(alpha):
    """
    Returns (EOF, tag) for a bipartite state when computable, (None, None)
    otherwise.
    """
    if tuple(alpha.dims) == (2, 2):
        return eof_2qubit(alpha), LedgerTag.WOOTTERS_EXACT
    if hilbert.numerical_rank(alpha) == 1:
        _, evecs = hilbert.eigh(alpha)
        psi = hilbert.PureVector(alpha.structure, evecs[:, -1])
        return entanglement_entropy(psi, [alpha.labels[0]]), LedgerTag.PURE_ENTROPY
    return None, None


def additivity_ledger(report):
    """
    Ledger for a chain construction: input EOFs, separable A_p A_q
    marginals, A_l C marginals as input times separable factor, and the
    cuts of the whole state that split off one A_l or the whole C.
    """
    ledger = AdditivityLedger()
    state = report.state
    a_labels = list(state.labels[:-1])
    c_label = state.labels[-1]
    c_name = hilbert.split_label(c_label)[0]
    values = []
    for l, alpha in enumerate(report.inputs):
        value, rule = input_eof(alpha)
        values.append(value)
        cut = f"{alpha.labels[0]}:{alpha.labels[1]}"
        if rule is None:
            ledger.add(
                LedgerEntry(
                    cut, criteria.negativity(alpha, [alpha.labels[0]]), LedgerTag.BOUND_ONLY,
                    [LedgerTag.EB_RANGE_ADDITIVE, LedgerTag.BOUND_ONLY], evidence={"input": l},
                )
            )
        else:
            ledger.add(
                LedgerEntry(cut, value, rule, [rule, LedgerTag.EB_RANGE_ADDITIVE], evidence={"input": l})
            )

    for p in range(len(a_labels)):
        for q in range(p + 1, len(a_labels)):
            key = f"{a_labels[p]},{a_labels[q]}"
            ledger.add(
                LedgerEntry(
                    f"{a_labels[p]}:{a_labels[q]}", 0.0, LedgerTag.SEPARABLE_ZERO,
                    evidence={"reduced": key, "product_residual": report.product_residuals[key]},
                )
            )

    for l, a in enumerate(a_labels):
        key = f"{a},{c_name}"
        value, rule = values[l], input_eof(report.inputs[l])[1]
        if rule is None:
            ledger.add(
                LedgerEntry(
                    f"{a}:{c_name}", criteria.negativity(report.reduced_ops[key], [a]), LedgerTag.BOUND_ONLY,
                    evidence={"reduced": key},
                )
            )
            continue
        chain = [rule, LedgerTag.EB_RANGE_ADDITIVE, LedgerTag.SEP_FACTOR_ADDITIVE]
        ledger.add(
            LedgerEntry(
                f"{a}:{c_name}", value, LedgerTag.SEP_FACTOR_ADDITIVE, chain,
                evidence={"input": l, "reduced": key, "factor_residual": report.factor_residuals[key]},
            )
        )

    for l, a in enumerate(a_labels):
        rest = "".join(hilbert.split_label(i)[0] for i in state.labels if i != a)
        cut = f"{a}:{rest}"
        rule = input_eof(report.inputs[l])[1]
        if rule is None:
            ledger.add(LedgerEntry(cut, criteria.negativity(state, [a]), LedgerTag.BOUND_ONLY))
            continue
        chain = [rule, LedgerTag.EB_RANGE_ADDITIVE, LedgerTag.TENSOR_ADDITIVE]
        ledger.add(LedgerEntry(cut, values[l], LedgerTag.TENSOR_ADDITIVE, chain, evidence={"input": l}))

    cut = f"{''.join(hilbert.split_label(i)[0] for i in a_labels)}:{c_name}"
    if any(v is None for v in values):
        ledger.add(LedgerEntry(cut, criteria.negativity(state, [c_label]), LedgerTag.BOUND_ONLY))
    else:
        chain = [LedgerTag.EB_RANGE_ADDITIVE, LedgerTag.TENSOR_ADDITIVE]
        ledger.add(
            LedgerEntry(
                cut, float(sum(values)), LedgerTag.TENSOR_ADDITIVE, chain,
                evidence={"inputs": list(range(len(values)))},
            )
        )
    return ledger
