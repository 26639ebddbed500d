import logging

import numpy as np

from . import certificate
from . import config
from . import criteria
from . import eb_subspace
from . import errors
from . import hilbert
from . import measures


def mc_state(c, labels=("A", "B")):
    """
    Maximally correlated state sum_ij c_ij |ii><jj|. The coefficient matrix
    has to be PSD with unit trace.
    """
    c = np.array(c, dtype=complex)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise errors.ValidityError(f"Coefficient matrix has to be square, got shape {c.shape}")
    if np.max(np.abs(c - c.conj().T), initial=0.0) > config.tol("herm") * max(1.0, np.max(np.abs(c))):
        raise errors.ValidityError("Coefficient matrix is not Hermitian")
    c = hilbert.hermitian_part(c)
    evals = np.linalg.eigvalsh(c)
    if evals[0] < -config.tol("psd") * max(float(np.max(np.abs(evals))), 1e-300):
        raise errors.ValidityError(f"Coefficient matrix is not PSD (min eigenvalue {evals[0]:.3e})")
    if abs(np.trace(c).real - 1) > config.tol("trace"):
        raise errors.ValidityError(f"Coefficient matrix has trace {np.trace(c).real}, expected 1")
    n = c.shape[0]
    matrix = np.zeros((n * n, n * n), dtype=complex)
    diag = [i * n + i for i in range(n)]
    matrix[np.ix_(diag, diag)] = c
    return hilbert.StateMatrix(hilbert.HilbertStructure([n, n], labels), matrix)


def mc_basis(n):
    """EB basis (|i>, i) of the maximally correlated subspace"""
    return eb_subspace.EBBasis(list(np.eye(n, dtype=complex)), n)


def is_mc(rho, tol=None):
    """True if rho is supported on span{|ii>}"""
    if tol is None:
        tol = config.tol("membership")
    if len(rho.structure) != 2 or rho.dims[0] != rho.dims[1]:
        return False
    try:
        eb_subspace.verify_eb_membership(rho, mc_basis(rho.dims[0]), tol)
    except errors.NonMembershipError:
        return False
    return True


def bell_state(labels=("A", "B")):
    return mc_state(np.full((2, 2), 0.5), labels)


def ghz_state(n=3, d=2, labels=None):
    structure = hilbert.HilbertStructure([d] * n, labels)
    vector = np.zeros(structure.total, dtype=complex)
    for i in range(d):
        vector[np.ravel_multi_index((i,) * n, structure.dims)] = 1 / np.sqrt(d)
    return hilbert.PureVector(structure, vector).projector()


def _check_cap(states):
    total = int(np.prod([s.structure.total for s in states]))
    config.check_dim_cap(total)
    return total


def _check_bipartite(alphas, what):
    for j, alpha in enumerate(alphas):
        if len(alpha.structure) != 2:
            raise errors.ArityError(f"Input {j + 1} of {what} has to be bipartite, got {alpha.structure}")


class ChainReport:
    """
    Merged chain state with its reduced operators and certificates.
    Keys of reduced operators are "A1,A2" for pairs of A systems and
    "A1,C" for an A system together with the merged C.
    """

    def __init__(self, state, inputs, bases):
        self.state = state
        self.inputs = inputs
        self.bases = bases
        self.reduced_ops = {}
        self.product_residuals = {}
        self.factor_residuals = {}
        self.bipartition_verdicts = {}
        self.reduced_npt = {}
        self.distillability = {}
        self.ge_certificate = None
        self.ledger = None

    def __repr__(self):
        return f"<ChainReport {self.state.structure}>"

    @property
    def a_labels(self):
        return list(self.state.labels[:-1])

    @property
    def c_name(self):
        return hilbert.split_label(self.state.labels[-1])[0]

    def dump(self):
        return {
            "structure": self.state.structure.dump(),
            "inputs": [{"labels": list(a.labels), "dims": list(a.dims)} for a in self.inputs],
            "product_residuals": self.product_residuals,
            "factor_residuals": self.factor_residuals,
            "bipartition_verdicts": {k: v.to_dict() for k, v in self.bipartition_verdicts.items()},
            "reduced_npt": {k: v.to_dict() for k, v in self.reduced_npt.items()},
            "distillability": {k: v.to_dict() for k, v in self.distillability.items()},
            "ge_certificate": self.ge_certificate.to_dict() if self.ge_certificate else None,
            "ledger": self.ledger.dump() if self.ledger else [],
        }


def _kc_step(state, alpha, name="C"):
    """Append alpha (A_l, C_l) to a chain (A_1..A_{l-1}, C), merging C_l into C"""
    if len(state.structure) == 2:
        return hilbert.tail_kron(state, alpha, name)
    joint = hilbert.tensor_product(state, alpha)
    layout = list(state.labels[:-1]) + [alpha.labels[0]]
    layout.append((name, [state.labels[-1], alpha.labels[1]]))
    return hilbert.regroup(joint, layout)


def chain_product(alphas, name="C"):
    """Left-associative merged product of bipartite (A_l, C_l) states"""
    _check_bipartite(alphas, "chain")
    if len(alphas) < 2:
        raise errors.ArityError("Chain needs at least two inputs")
    state = alphas[0]
    for alpha in alphas[1:]:
        state = _kc_step(state, alpha, name)
    return state


def _refuse_unless_entangled_eb(j, alpha, basis):
    try:
        eb_subspace.verify_eb_membership(alpha, basis)
    except errors.NonMembershipError as e:
        raise errors.ConstructionRefused(
            f"Input {j + 1} is not supported on its EB subspace (residual {e.residual:.3e})"
        )
    except (errors.ShapeError, errors.ArityError) as e:
        raise errors.ConstructionRefused(f"Input {j + 1} does not match its EB basis: {e}")
    ppt, lmin = criteria.ppt_check(alpha, [alpha.labels[0]])
    if ppt:
        raise errors.ConstructionRefused(f"Input {j + 1} is not entangled (PT minimal eigenvalue {lmin:.3e})")


def _expected_factor(report, l):
    """alpha^(l) times the C marginals of the other inputs, ordered as the merged C"""
    a = report.a_labels[l]
    parts = []
    for m, alpha in enumerate(report.inputs):
        if m == l:
            parts.append(alpha)
        else:
            parts.append(hilbert.partial_trace(alpha, [alpha.labels[1]]))
    joint = parts[0]
    for part in parts[1:]:
        joint = hilbert.tensor_product(joint, part)
    c_members = [alpha.labels[1] for alpha in report.inputs]
    return hilbert.regroup(joint, [a, (report.c_name, c_members)])


def merged_chain(alphas, bases=None, seed=0, certify=True, restarts=None, max_iters=None):
    """
    (n+1)-partite state alpha^(1) (x)_Kc ... (x)_Kc alpha^(n) on
    (A_1, .., A_n, C=C1*..*Cn). Inputs have to be entangled and verified
    members of their EB subspaces. Reduced operators A_p A_q are checked to
    be products, A_l C to be alpha^(l) times a separable factor.
    """
    _check_bipartite(alphas, "chain")
    if len(alphas) < 2:
        raise errors.ArityError("Chain needs at least two inputs")
    if bases is None:
        bases = [None] * len(alphas)
    if len(bases) != len(alphas):
        raise errors.ArityError(f"Got {len(alphas)} inputs but {len(bases)} bases")
    _check_cap(alphas)

    inputs, used_bases = [], []
    for j, (alpha, basis) in enumerate(zip(alphas, bases)):
        if basis is None:
            if alpha.dims[0] != alpha.dims[1]:
                raise errors.ConstructionRefused(f"Input {j + 1} has no EB basis and is not square")
            basis = mc_basis(alpha.dims[0])
        _refuse_unless_entangled_eb(j, alpha, basis)
        inputs.append(hilbert.relabel(hilbert.normalize(alpha), [f"A{j + 1}", f"C{j + 1}"]))
        used_bases.append(basis)

    state = chain_product(inputs)
    logging.info(f"Built chain state {state.structure}")
    report = ChainReport(state, inputs, used_bases)
    a_labels = report.a_labels
    c_label = state.labels[-1]

    for p in range(len(a_labels)):
        for q in range(p + 1, len(a_labels)):
            key = f"{a_labels[p]},{a_labels[q]}"
            reduced = hilbert.partial_trace(state, [a_labels[p], a_labels[q]])
            report.reduced_ops[key] = reduced
            report.product_residuals[key] = measures.product_residual(reduced)

    for l, a in enumerate(a_labels):
        key = f"{a},{report.c_name}"
        reduced = hilbert.partial_trace(state, [a, c_label])
        report.reduced_ops[key] = reduced
        expected = _expected_factor(report, l)
        report.factor_residuals[key] = float(np.linalg.norm(reduced.matrix - expected.matrix))

    if certify:
        for side in certificate.bipartitions(state.structure):
            cut = [state.labels[i] for i in side]
            report.bipartition_verdicts[certificate.cut_key(cut)] = criteria.ppt_certificate(state, cut, seed)
        mc_inputs = all(is_mc(alpha) for alpha in inputs)
        for l, a in enumerate(a_labels):
            key = f"{a},{report.c_name}"
            reduced = report.reduced_ops[key]
            report.reduced_npt[key] = criteria.ppt_certificate(reduced, [a], seed)
            if mc_inputs:
                report.distillability[key] = criteria.one_copy_distillable_search(reduced, [a], restarts, seed)
        report.ge_certificate = criteria.ppt_mixture_search(state, max_iters, seed=seed)

    report.ledger = measures.additivity_ledger(report)
    return report


def merged_pair_state(alpha, beta, name="C"):
    """
    (n+2)-partite alpha_{A C_1..C_n} (x)_Kc beta_{B C_1..C_n} with every
    C_j merging the j-th tails of both inputs.
    """
    if len(alpha.structure) != len(beta.structure):
        raise errors.ArityError(
            f"Inputs have {len(alpha.structure) - 1} and {len(beta.structure) - 1} tail systems"
        )
    n = len(alpha.structure) - 1
    _check_cap([alpha, beta])
    alpha = hilbert.relabel(alpha, ["A"] + [f"Ca{j}" for j in range(1, n + 1)])
    beta = hilbert.relabel(beta, ["B"] + [f"Cb{j}" for j in range(1, n + 1)])
    return hilbert.tail_kron(alpha, beta, name)


def ring_state(alphas):
    """
    n-partite ring alpha^(1)_{C1 B2} x .. x alpha^(n)_{Cn B1} with sites
    A_j = B_j C_j.
    """
    _check_bipartite(alphas, "ring")
    n = len(alphas)
    if n < 3:
        raise errors.ArityError(f"Ring needs at least three inputs, got {n}")
    _check_cap(alphas)
    joint = None
    for j, alpha in enumerate(alphas):
        alpha = hilbert.relabel(alpha, [f"C{j + 1}", f"B{(j + 1) % n + 1}"])
        joint = alpha if joint is None else hilbert.tensor_product(joint, alpha)
    return hilbert.regroup(joint, [(f"A{j}", [f"B{j}", f"C{j}"]) for j in range(1, n + 1)])


def satellite_state(alphas):
    """alpha^(1)_{A1 B1} x .. x alpha^(n)_{An Bn} with A = A1..An merged"""
    _check_bipartite(alphas, "satellite")
    n = len(alphas)
    if n < 2:
        raise errors.ArityError(f"Satellite state needs at least two inputs, got {n}")
    _check_cap(alphas)
    joint = None
    for j, alpha in enumerate(alphas):
        alpha = hilbert.relabel(alpha, [f"A{j + 1}", f"B{j + 1}"])
        joint = alpha if joint is None else hilbert.tensor_product(joint, alpha)
    layout = [("A", [f"A{j}" for j in range(1, n + 1)])] + [f"B{j}" for j in range(1, n + 1)]
    return hilbert.regroup(joint, layout)


def triangle_state(alpha, beta, gamma):
    """alpha_{A1 B1} x beta_{A2 C1} x gamma_{B2 C2} on A = A1A2, B = B1B2, C = C1C2"""
    _check_bipartite([alpha, beta, gamma], "triangle")
    _check_cap([alpha, beta, gamma])
    joint = hilbert.relabel(alpha, ["A1", "B1"])
    joint = hilbert.tensor_product(joint, hilbert.relabel(beta, ["A2", "C1"]))
    joint = hilbert.tensor_product(joint, hilbert.relabel(gamma, ["B2", "C2"]))
    return hilbert.regroup(joint, [("A", ["A1", "A2"]), ("B", ["B1", "B2"]), ("C", ["C1", "C2"])])


def construction_report(kind, state, seed=0, certify=True, restarts=None, max_iters=None):
    """
    Summary of a constructed state: purity, per-site entropies for pure
    states and, under the dimension cap, PPT verdicts of every cut and the
    genuine entanglement certificate.
    """
    rho = hilbert.normalize(state)
    purity = float(np.trace(rho.matrix @ rho.matrix).real)
    out = {
        "kind": kind,
        "structure": state.structure.dump(),
        "purity": purity,
    }
    if hilbert.numerical_rank(rho) == 1:
        _, evecs = hilbert.eigh(rho)
        psi = hilbert.PureVector(rho.structure, evecs[:, -1])
        out["site_entropies"] = {
            label: measures.entanglement_entropy(psi, [label]) for label in rho.labels
        }
    if certify and len(rho.structure) >= 2:
        if rho.structure.total > config.dim_cap():
            logging.warning(f"State {rho.structure} is above the dimension cap, skipping certification")
            return out
        verdicts = {}
        for side in certificate.bipartitions(rho.structure):
            cut = [rho.labels[i] for i in side]
            verdicts[certificate.cut_key(cut)] = criteria.ppt_certificate(rho, cut, seed).to_dict()
        out["bipartition_verdicts"] = verdicts
        out["ge_certificate"] = criteria.ppt_mixture_search(rho, max_iters, seed=seed).to_dict()
    return out
