import itertools
import logging
import math

import numpy as np

import scipy.linalg
import scipy.optimize

from . import codec
from . import config
from . import errors
from . import hilbert


class EBBasis:
    """
    Pairs (|a_i>, i) spanning the subspace span{|a_i, i>}. The a vectors
    need not be orthogonal or distinct, index vectors are orthonormal.
    """

    def __init__(self, a_vectors, index_dim, index_vectors=None):
        a_vectors = [np.array(a, dtype=complex).reshape(-1) for a in a_vectors]
        if len(a_vectors) == 0:
            raise errors.ValidityError("EB basis needs at least one vector")
        if len(set(a.shape[0] for a in a_vectors)) != 1:
            raise errors.ShapeError("All a vectors have to live in the same space")
        for i, a in enumerate(a_vectors):
            if np.linalg.norm(a) == 0:
                raise errors.ValidityError(f"Vector a_{i + 1} is zero")
        index_dim = int(index_dim)
        if len(a_vectors) > index_dim:
            raise errors.ValidityError(
                f"Basis has {len(a_vectors)} vectors but index system has dimension {index_dim}"
            )
        if index_vectors is None:
            index_vectors = np.eye(index_dim, len(a_vectors), dtype=complex)
        else:
            index_vectors = np.column_stack(
                [np.array(e, dtype=complex).reshape(-1) for e in index_vectors]
            )
            if index_vectors.shape != (index_dim, len(a_vectors)):
                raise errors.ShapeError(f"Index vectors have shape {index_vectors.shape}")
            gram = index_vectors.conj().T @ index_vectors
            if np.max(np.abs(gram - np.eye(len(a_vectors)))) > 1e-12:
                raise errors.ValidityError("Index vectors are not orthonormal")
        self.a_vectors = a_vectors
        self.index_dim = index_dim
        self.index_vectors = index_vectors

    def __len__(self):
        return len(self.a_vectors)

    def __repr__(self):
        return f"<EBBasis n={len(self)} d_a={self.d_a} index_dim={self.index_dim}>"

    @property
    def d_a(self):
        return self.a_vectors[0].shape[0]

    def span_vectors(self):
        """Columns |a_i> x |e_i>, mutually orthogonal"""
        return np.column_stack(
            [np.kron(a, self.index_vectors[:, i]) for i, a in enumerate(self.a_vectors)]
        )

    def structure(self, labels=("A", "C1")):
        return hilbert.HilbertStructure([self.d_a, self.index_dim], labels)

    def parallel(self, i, k):
        s = np.linalg.svd(np.column_stack([self.a_vectors[i], self.a_vectors[k]]), compute_uv=False)
        return s[1] <= config.tol("rank") * s[0]

    def dump(self):
        out = {
            "a_vectors": [codec.encode_vector(a) for a in self.a_vectors],
            "index_dim": self.index_dim,
        }
        if not np.allclose(self.index_vectors, np.eye(self.index_dim, len(self), dtype=complex)):
            out["index_vectors"] = [codec.encode_vector(e) for e in self.index_vectors.T]
        return out

    @classmethod
    def from_dict(cls, data):
        for key in ("a_vectors", "index_dim"):
            if key not in data:
                raise errors.ValidityError(f"EB basis document misses key '{key}'")
        index_vectors = data.get("index_vectors")
        if index_vectors is not None:
            index_vectors = [codec.decode_vector(e) for e in index_vectors]
        return cls(
            [codec.decode_vector(a) for a in data["a_vectors"]],
            data["index_dim"],
            index_vectors,
        )


def load_basis(path):
    return EBBasis.from_dict(codec.load_json(path))


def save_basis(basis, path):
    codec.dump_json(basis.dump(), path)


class CoefficientMatrix:
    """
    c_ij with psi_j = sum_i c_ij |a_i, i> and rho = sum_j |psi_j><psi_j|
    """

    def __init__(self, entries, basis, residual=0.0):
        entries = np.array(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != len(basis):
            raise errors.ShapeError(f"Coefficients of shape {entries.shape} do not match {basis}")
        self.entries = entries
        self.basis = basis
        self.residual = residual

    def __repr__(self):
        return f"<CoefficientMatrix {self.entries.shape[0]}x{self.entries.shape[1]} residual={self.residual:.3e}>"

    @property
    def shape(self):
        return self.entries.shape

    def vector_matrix(self):
        return self.basis.span_vectors() @ self.entries

    def vectors(self, structure=None):
        if structure is None:
            structure = self.basis.structure()
        m = self.vector_matrix()
        return [hilbert.PureVector(structure, m[:, j]) for j in range(m.shape[1])]

    def reconstruct(self):
        m = self.vector_matrix()
        return m @ m.conj().T

    def rotate(self, unitary):
        return CoefficientMatrix(self.entries @ unitary, self.basis, self.residual)

    def gram(self):
        """Index space Gram matrix C C^dagger, invariant under rotations"""
        return self.entries @ self.entries.conj().T


def _check_bipartite(rho, basis):
    if len(rho.structure) != 2:
        raise errors.ArityError(f"Expected bipartite state, got {rho.structure}")
    if tuple(rho.dims) != (basis.d_a, basis.index_dim):
        raise errors.ShapeError(f"State {rho.structure} does not match {basis}")


def verify_eb_membership(rho, basis, tol=None):
    """
    Check range(rho) is inside span{|a_i, i>} and express a square root
    of rho in that span.
    """
    if tol is None:
        tol = config.tol("membership")
    _check_bipartite(rho, basis)
    evals, evecs = hilbert.eigh(rho)
    lmax = float(np.max(np.abs(evals))) if evals.size else 0.0
    keep = [i for i in range(len(evals)) if lmax > 0 and evals[i] > config.tol("rank") * lmax][::-1]
    span = basis.span_vectors()
    norms2 = np.sum(np.abs(span) ** 2, axis=0)
    if not keep:
        return CoefficientMatrix(np.zeros((len(basis), 0), dtype=complex), basis, 0.0)
    u = evecs[:, keep]
    projected = span @ ((span.conj().T @ u) / norms2[:, None])
    residual = float(np.linalg.norm(u - projected, 2))
    logging.debug(f"EB membership residual {residual:.3e}")
    if residual > tol:
        raise errors.NonMembershipError("Range of the state is not inside the EB span", residual)
    root = u * np.sqrt(evals[keep])[None, :]
    entries = (span.conj().T @ root) / norms2[:, None]
    return CoefficientMatrix(entries, basis, residual)


def householder_unitary(x):
    """
    Hermitian unitary H with H x proportional to e_1
    """
    x = np.asarray(x, dtype=complex)
    norm = np.linalg.norm(x)
    phase = x[0] / abs(x[0]) if abs(x[0]) > 0 else 1.0
    alpha = -phase * norm
    v = x.copy()
    v[0] -= alpha
    return np.eye(x.shape[0], dtype=complex) - 2 * np.outer(v, v.conj()) / np.vdot(v, v).real


def wootters_zero_row(coeffs, row):
    """
    Rotate decomposition vectors so that only the first one has
    a component on the given EB index.
    """
    r = coeffs.entries[row, :]
    scale = max(1.0, float(np.max(np.abs(coeffs.entries)))) if coeffs.entries.size else 1.0
    if r.size == 0 or np.linalg.norm(r) <= 1e-14 * scale:
        raise errors.DegenerateRowError(f"Row {row + 1} of the coefficient matrix is zero")
    if r.size == 1:
        return coeffs
    return coeffs.rotate(householder_unitary(r.conj()))


class ProjectionCascade:
    def __init__(self, steps, descriptors, final_state, final_rank, indices):
        assert len(steps) == len(descriptors), "Every step needs a descriptor"
        self.steps = steps
        self.descriptors = descriptors
        self.final_state = final_state
        self.final_rank = final_rank
        self.indices = indices

    def __repr__(self):
        kinds = ",".join(d["kind"] for d in self.descriptors) or "identity"
        return f"<ProjectionCascade {kinds} final_rank={self.final_rank} indices={self.indices}>"

    def apply(self, rho):
        for step in self.steps:
            rho = hilbert.apply_local(rho, step)
        return rho

    def dump(self):
        return {
            "steps": [
                {"kind": d["kind"], "indices": [i + 1 for i in d["indices"]]}
                for d in self.descriptors
            ],
            "final_rank": self.final_rank,
            "indices": [i + 1 for i in self.indices],
        }


def _index_operator(rho, c_side):
    return hilbert.LocalOperator(rho.structure, [np.eye(rho.dims[0]), c_side])


def _pair_projector(rho, basis, p, k):
    e = basis.index_vectors
    pi = np.outer(e[:, p], e[:, p].conj()) + np.outer(e[:, k], e[:, k].conj())
    return _index_operator(rho, pi)


def npt_on_support(rho):
    """
    Decide entanglement of a state with 2-dim supports by PPT after
    compression to 2x2. Returns (npt, minimal eigenvalue of normalized PT).
    """
    if rho.trace <= 0:
        return False, 0.0
    compressed, u_a, u_c = hilbert.compress_to_support(rho)
    if min(compressed.dims) < 2:
        return False, 0.0
    pt = hilbert.partial_transpose(hilbert.normalize(compressed), [compressed.labels[1]])
    lmin = hilbert.min_eigenvalue(pt)
    return lmin < -config.tol("verdict"), lmin


def _active(coeffs):
    norms = np.linalg.norm(coeffs.entries, axis=1)
    scale = float(np.max(norms)) if norms.size else 0.0
    return [i for i in range(len(norms)) if scale > 0 and norms[i] > config.tol("rank") * scale]


def _peeling_operator(rho, coeffs, p, partners):
    """
    Q = I x (I - |t><g|/<g|t>) sending psi_1 to c_p1 |a_p, p> and
    fixing psi_j for j > 1. Returns None when no such g exists.
    """
    basis = coeffs.basis
    c = coeffs.entries
    a_p = basis.a_vectors[p]
    t = np.zeros(len(basis), dtype=complex)
    for k in partners:
        t[k] = c[k, 0] * np.vdot(a_p, basis.a_vectors[k]) / np.vdot(a_p, a_p)
    free = [i for i in range(len(basis)) if i != p]
    if c.shape[1] > 1:
        rows = []
        for j in range(1, c.shape[1]):
            rows.append(np.column_stack([c[i, j] * basis.a_vectors[i] for i in free]))
        null = scipy.linalg.null_space(np.vstack(rows))
    else:
        null = np.eye(len(free), dtype=complex)
    if null.shape[1] == 0:
        return None
    t_free = t[free]
    h_free = null @ (null.T @ t_free).conj()
    overlap = t_free @ h_free
    if abs(overlap) <= config.tol("rank") * max(1.0, np.linalg.norm(t_free)):
        return None
    g = np.zeros(len(basis), dtype=complex)
    g[free] = h_free.conj()
    e = basis.index_vectors
    t_vec = e @ t
    g_vec = e @ g
    q_side = np.eye(basis.index_dim, dtype=complex) - np.outer(t_vec, g_vec.conj()) / np.vdot(g_vec, t_vec)
    return _index_operator(rho, q_side)


def _check_peeling(step, coeffs, p):
    full = step.full()
    vectors = coeffs.vector_matrix()
    basis = coeffs.basis
    target = coeffs.entries[p, 0] * np.kron(basis.a_vectors[p], basis.index_vectors[:, p])
    scale = max(1.0, float(np.max(np.abs(vectors))))
    out = full @ vectors
    if np.linalg.norm(out[:, 0] - target) > 1e-10 * scale:
        return False
    if vectors.shape[1] > 1 and np.max(np.abs(out[:, 1:] - vectors[:, 1:])) > 1e-10 * scale:
        return False
    return True


def _pair_candidates(coeffs, active):
    gram = coeffs.gram()
    pairs = [
        (p, k)
        for p, k in itertools.combinations(active, 2)
        if not coeffs.basis.parallel(p, k)
    ]
    return sorted(pairs, key=lambda pk: -abs(gram[pk[0], pk[1]]))


def _pair_search(rho, basis):
    coeffs = verify_eb_membership(rho, basis)
    for p, k in _pair_candidates(coeffs, _active(coeffs)):
        step = _pair_projector(rho, basis, p, k)
        candidate = hilbert.apply_local(rho, step)
        npt, lmin = npt_on_support(candidate)
        logging.debug(f"Pair ({p + 1}, {k + 1}) gives minimal PT eigenvalue {lmin:.3e}")
        if npt:
            return ProjectionCascade(
                [step],
                [{"kind": "P", "indices": [p, k]}],
                candidate,
                hilbert.numerical_rank(candidate),
                [p, k],
            )
    return None


def _follow_cases(rho, basis):
    """
    Pivot, rotate, then either project onto a pair of indices or peel
    the pivot off and continue on what is left. None when stuck.
    """
    steps, descriptors = [], []
    current = rho
    peeled = False
    for _ in range(len(basis)):
        coeffs = verify_eb_membership(current, basis)
        active = _active(coeffs)
        if len(active) < 2:
            return None
        if len(active) == 2 and not steps:
            npt, _ = npt_on_support(current)
            if npt:
                return ProjectionCascade([], [], current, hilbert.numerical_rank(current), active)
        p = active[0]
        coeffs = wootters_zero_row(coeffs, p)
        scale = float(np.max(np.abs(coeffs.entries)))
        partners = [
            k for k in active if k != p and abs(coeffs.entries[k, 0]) > config.tol("rank") * scale
        ]
        for k in partners:
            if basis.parallel(p, k):
                continue
            step = _pair_projector(current, basis, p, k)
            candidate = hilbert.apply_local(current, step)
            npt, lmin = npt_on_support(candidate)
            if npt:
                steps.append(step)
                descriptors.append({"kind": "P'" if peeled else "P", "indices": [p, k]})
                return ProjectionCascade(
                    steps, descriptors, candidate, hilbert.numerical_rank(candidate), [p, k]
                )
            logging.debug(f"Projection onto ({p + 1}, {k + 1}) is not NPT ({lmin:.3e})")

        if not partners:
            # psi_1 already is |a_p, p>, nothing to peel
            step = None
        else:
            step = _peeling_operator(current, coeffs, p, partners)
            if step is None:
                logging.warning(
                    f"Peeling operator for index {p + 1} does not exist, falling back to pair search"
                )
                return None
            if not _check_peeling(step, coeffs, p):
                logging.warning(f"Peeling operator for index {p + 1} fails its action check")
                return None
            steps.append(step)
            descriptors.append({"kind": "Q", "indices": [p] + partners})
            current = hilbert.apply_local(current, step)

        e = basis.index_vectors[:, p]
        removal = _index_operator(current, np.eye(basis.index_dim) - np.outer(e, e.conj()))
        steps.append(removal)
        descriptors.append({"kind": "R", "indices": [p]})
        current = hilbert.apply_local(current, removal)
        peeled = True
        if current.trace <= config.tol("rank") * rho.trace:
            return None
    return None


def projection_cascade(rho, basis):
    """
    Project an entangled state supported on an EB span onto an entangled
    state of rank at most two supported on two EB indices.
    """
    _check_bipartite(rho, basis)
    lmin = hilbert.min_eigenvalue(
        hilbert.partial_transpose(hilbert.normalize(rho), [rho.labels[1]])
    )
    logging.debug(f"Starting cascade on {rho} with {basis}, min PT eigenvalue {lmin:.3e}")
    cascade = _follow_cases(rho, basis)
    if cascade is None:
        logging.info("Case analysis did not finish, searching all index pairs")
        cascade = _pair_search(rho, basis)
    if cascade is None:
        logging.warning(f"No entangled projection found for {rho} (min PT eigenvalue {lmin:.3e})")
        raise errors.CascadeFailure("Every candidate projection is separable")
    logging.info(f"Cascade finished: {cascade}")
    return cascade


class PencilResult:
    def __init__(self, ratios, infinite):
        self.ratios = ratios
        self.infinite = infinite

    def __repr__(self):
        return f"<PencilResult ratios={self.ratios} infinite={self.infinite}>"

    def product_vectors(self, v, w):
        return [a * v.vector + b * w.vector for a, b in self.ratios]


def same_ratio(r1, r2, tol=1e-6):
    n1 = math.hypot(abs(r1[0]), abs(r1[1]))
    n2 = math.hypot(abs(r2[0]), abs(r2[1]))
    return abs(r1[0] * r2[1] - r1[1] * r2[0]) <= tol * n1 * n2


def _quadratic_ratios(c2, c1, c0, scale):
    """
    Ratios (a:b) solving c2 a^2 + c1 ab + c0 b^2 = 0
    """
    tiny = config.tol("rank") * scale
    out = []
    if abs(c2) <= tiny:
        out.append((1.0 + 0j, 0j))
        if abs(c1) > tiny:
            out.append((-c0 / c1, 1.0 + 0j))
        return out
    for t in np.roots([c2, c1, c0]):
        out.append((complex(t), 1.0 + 0j))
    return out


def _minors(vm, wm):
    rows, cols = vm.shape
    for r in itertools.combinations(range(rows), 2):
        for c in itertools.combinations(range(cols), 2):
            v = vm[np.ix_(r, c)]
            w = wm[np.ix_(r, c)]
            det_v = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
            det_w = w[0, 0] * w[1, 1] - w[0, 1] * w[1, 0]
            mixed = v[0, 0] * w[1, 1] + v[1, 1] * w[0, 0] - v[0, 1] * w[1, 0] - v[1, 0] * w[0, 1]
            yield det_v, mixed, det_w


def _sigma_ratio(vm, wm, a, b):
    s = np.linalg.svd(a * vm + b * wm, compute_uv=False)
    return s[1] / s[0] if s[0] > 0 else 1.0


def _grid_ratios(vm, wm, tol, points=720):
    """
    Real ratios from a scan of sigma_2/sigma_1 over the real projective
    circle, local minima refined by golden section search.
    """
    angles = np.linspace(0, math.pi, points, endpoint=False)
    values = np.array([_sigma_ratio(vm, wm, math.cos(t), math.sin(t)) for t in angles])
    step = angles[1] - angles[0]
    out = []
    for i in range(points):
        if values[i] < values[i - 1] and values[i] < values[(i + 1) % points]:
            try:
                res = scipy.optimize.minimize_scalar(
                    lambda t: _sigma_ratio(vm, wm, math.cos(t), math.sin(t)),
                    bracket=(angles[i] - step, angles[i], angles[i] + step),
                    method="golden",
                    tol=1e-12,
                )
            except ValueError:
                logging.debug(f"Grid minimum at {angles[i]:.4f} is not a valid bracket")
                continue
            if res.fun < tol:
                out.append((complex(math.cos(res.x)), complex(math.sin(res.x))))
    return out


def product_vectors_in_pencil(v, w, tol=None):
    """
    All ratios (a:b), up to scale, with a|v> + b|w> a product vector.
    """
    if tol is None:
        tol = config.tol("pencil")
    if len(v.structure) != 2 or v.structure.dims != w.structure.dims:
        raise errors.ArityError("Pencil needs two vectors on the same bipartite structure")
    d_a, d_b = v.structure.dims
    vm = v.vector.reshape(d_a, d_b)
    wm = w.vector.reshape(d_a, d_b)
    if np.linalg.matrix_rank(np.column_stack([v.vector, w.vector])) < 2:
        raise errors.ValidityError("Pencil vectors have to be linearly independent")
    if d_a < 2 or d_b < 2:
        return PencilResult([], True)

    scale = max(np.max(np.abs(vm)), np.max(np.abs(wm))) ** 2
    candidates = []
    infinite = True
    for c2, c1, c0 in _minors(vm, wm):
        if max(abs(c2), abs(c1), abs(c0)) <= config.tol("rank") * scale:
            continue
        infinite = False
        candidates += _quadratic_ratios(c2, c1, c0, scale)
    if infinite:
        return PencilResult([], True)
    if (d_a, d_b) != (2, 2):
        candidates += _grid_ratios(vm, wm, tol)

    ratios = []
    for a, b in candidates:
        norm = math.hypot(abs(a), abs(b))
        a, b = a / norm, b / norm
        if _sigma_ratio(vm, wm, a, b) >= tol:
            continue
        if any(same_ratio((a, b), r) for r in ratios):
            continue
        ratios.append((a / b, 1.0 + 0j) if abs(b) > 1e-12 else (1.0 + 0j, 0j))
    logging.debug(f"Pencil has {len(ratios)} product vectors")
    return PencilResult(ratios, False)


class NormalForm:
    """
    Local operators X, Y taking alpha to the form
    cos^2(theta) |phi_mu><phi_mu| + sin^2(theta) |00><00|
    with |phi_mu> = cos(mu)|00> + sin(mu)|11>.
    """

    def __init__(self, X, Y, theta, mu, limit=False):
        self.X = X
        self.Y = Y
        self.theta = theta
        self.mu = mu
        self.limit = limit

    def __repr__(self):
        return f"<NormalForm theta={self.theta:.6g} mu={self.mu:.6g} limit={self.limit}>"

    def operator(self, structure):
        return hilbert.LocalOperator(structure, [self.X, self.Y])

    def apply(self, alpha):
        return hilbert.normalize(hilbert.apply_local(alpha, self.operator(alpha.structure)))

    def state(self):
        return normal_form_state(self.theta, self.mu)

    def invariant(self):
        return normal_form_invariant(self.theta, self.mu)

    def dump(self):
        return {
            "theta": self.theta,
            "mu": self.mu,
            "limit": self.limit,
            "X": codec.encode_matrix(self.X),
            "Y": codec.encode_matrix(self.Y),
        }


def normal_form_state(theta, mu, labels=("A", "C")):
    phi = np.zeros(4, dtype=complex)
    phi[0], phi[3] = math.cos(mu), math.sin(mu)
    m = math.cos(theta) ** 2 * np.outer(phi, phi.conj())
    m[0, 0] += math.sin(theta) ** 2
    return hilbert.StateMatrix(hilbert.HilbertStructure([2, 2], labels), m)


def normal_form_invariant(theta, mu):
    """
    |g01|^2 / (g00 g11) of the 2x2 block on span{|00>, |11>}. Unchanged
    by invertible diagonal local operators.
    """
    c2 = math.cos(theta) ** 2
    return c2 * math.cos(mu) ** 2 / (c2 * math.cos(mu) ** 2 + math.sin(theta) ** 2)


def block_invariant(g):
    return float(abs(g[0, 1]) ** 2 / (g[0, 0].real * g[1, 1].real))


def _split_block(g):
    """
    Write 2x2 PSD g as lam |0><0| + |v><v| with lam maximal. Returns
    (lam, v).
    """
    inv = np.linalg.inv(g)
    lam = 1 / inv[0, 0].real
    rest = g.copy()
    rest[0, 0] -= lam
    if rest[1, 1].real <= 0:
        return lam, np.array([math.sqrt(max(rest[0, 0].real, 0)), 0])
    v1 = math.sqrt(rest[1, 1].real)
    v0 = rest[0, 1] / v1
    return lam, np.array([v0, v1])


def _extract(g):
    """
    Normal form parameters of a 2x2 block. Returns theta, mu, the phases
    of the rank one part and whether the two slots got swapped.
    """
    trace = float(np.trace(g).real)
    g = g / trace
    lam0 = 1 / np.linalg.inv(g)[0, 0].real
    lam1 = 1 / np.linalg.inv(g)[1, 1].real
    swapped = lam1 > lam0 * (1 + 1e-12)
    if swapped:
        g = g[::-1, ::-1]
    lam, v = _split_block(g)
    theta = math.asin(math.sqrt(min(max(lam, 0.0), 1.0)))
    mu = math.atan2(abs(v[1]), abs(v[0]))
    phases = np.array([np.angle(v[0]) if abs(v[0]) > 0 else 0.0, np.angle(v[1])])
    return theta, mu, phases, swapped


def normal_form_canonical(theta, mu):
    """
    Representative of (theta, mu) picked by normal_form_rank2: the
    product vector with the larger extractable weight takes the |00> slot.
    """
    g = normal_form_state(theta, mu).matrix[np.ix_([0, 3], [0, 3])]
    theta, mu, _, _ = _extract(g)
    return theta, mu


def _product_factors(z, d_a, d_b):
    u, s, vh = np.linalg.svd(z.reshape(d_a, d_b))
    return u[:, 0], vh[0, :]


def _rank_one_form(alpha, tol):
    evals, evecs = hilbert.eigh(alpha)
    psi = hilbert.PureVector(alpha.structure, evecs[:, -1])
    s, u, v = hilbert.schmidt_decomposition(psi, [alpha.labels[0]])
    kept = int(np.sum(s > tol * s[0]))
    if kept == 1:
        raise errors.DegeneracyError("Pure product state has no entangled normal form")
    if kept > 2:
        raise errors.NormalFormError(f"Pure state has Schmidt rank {kept}, not two")
    mu = math.atan2(s[1], s[0])
    X = u[:, :2].conj().T
    Y = v[:, :2].conj().T
    return NormalForm(X, Y, 0.0, mu, limit=True)


def normal_form_rank2(alpha, tol=None):
    """
    Local invertible X, Y and angles theta, mu for a rank two state whose
    range is spanned by two product vectors (rank one gives the limit).
    """
    if tol is None:
        tol = config.tol("pencil")
    if len(alpha.structure) != 2:
        raise errors.ArityError(f"Expected bipartite state, got {alpha.structure}")
    d_a, d_b = alpha.dims
    rank = hilbert.numerical_rank(alpha)
    if rank == 1:
        return _rank_one_form(alpha, tol)
    if rank != 2:
        raise errors.NormalFormError(f"Expected rank two, got rank {rank}")

    v, w = hilbert.range_basis(alpha)
    pencil = product_vectors_in_pencil(v, w, tol)
    if pencil.infinite:
        raise errors.DegeneracyError("Every vector of the range is product, state is separable")
    if len(pencil.ratios) != 2:
        raise errors.NormalFormError(
            f"Range contains {len(pencil.ratios)} product vectors, need exactly two"
        )
    z1, z2 = pencil.product_vectors(v, w)
    x1, y1 = _product_factors(z1, d_a, d_b)
    x2, y2 = _product_factors(z2, d_a, d_b)
    X = np.linalg.pinv(np.column_stack([x1, x2]))
    Y = np.linalg.pinv(np.column_stack([y1, y2]))

    moved = hilbert.apply_local(alpha, hilbert.LocalOperator(alpha.structure, [X, Y]))
    g = moved.matrix[np.ix_([0, 3], [0, 3])]
    off = moved.matrix.copy()
    off[np.ix_([0, 3], [0, 3])] = 0
    if np.max(np.abs(off)) > 1e-8 * np.max(np.abs(g)):
        raise errors.NormalFormError("Transformed range is not inside span{|00>, |11>}")

    theta, mu, phases, swapped = _extract(g)
    if swapped:
        X, Y = X[::-1, :], Y[::-1, :]
    Y = np.diag(np.exp(-1j * phases)) @ Y
    if mu < tol or mu > math.pi / 2 - tol:
        raise errors.DegeneracyError(f"Normal form degenerates (mu={mu:.3e}), state is separable")
    nf = NormalForm(X, Y, theta, mu)
    logging.debug(f"Normal form {nf}")
    return nf


def reconstruction_error(alpha, nf):
    moved = nf.apply(alpha)
    return float(np.linalg.norm(moved.matrix - nf.state().matrix))


def canonical_relabeling(cascade, basis, structure):
    """
    Q' mapping surviving indices (m1, m2) to (1, 2) and compressing the
    A side onto span{a_m1, a_m2} when it is larger than two.
    """
    m1, m2 = sorted(cascade.indices)
    e = basis.index_vectors
    q_side = np.vstack([e[:, m1].conj(), e[:, m2].conj()])
    if basis.d_a > 2:
        x_side = scipy.linalg.orth(
            np.column_stack([basis.a_vectors[m1], basis.a_vectors[m2]])
        ).conj().T
    else:
        x_side = np.eye(basis.d_a)
    return hilbert.LocalOperator(structure, [x_side, q_side])


def reduce_to_canonical_pair(rho, basis, cascade=None):
    if cascade is None:
        cascade = projection_cascade(rho, basis)
    step = canonical_relabeling(cascade, basis, cascade.final_state.structure)
    return hilbert.apply_local(cascade.final_state, step)
