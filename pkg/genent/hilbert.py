import functools
import logging
import string

import numpy as np

from . import config
from . import errors


def default_labels(count):
    assert count <= len(string.ascii_uppercase), "Too many systems for default labels"
    return list(string.ascii_uppercase[:count])


def merged_label(name, parts):
    return f"{name}={'*'.join(parts)}"


def split_label(label):
    """
    Return (name, [parts]) for merged label "C=C1*C2", (label, [label])
    for plain one.
    """
    if "=" in label:
        name, rest = label.split("=", 1)
        return name, rest.split("*")
    return label, [label]


class HilbertStructure:
    """
    Ordered subsystem dimensions with unique labels. Merged systems carry
    their atomic factorization in `factors` so merging can be undone.
    """

    def __init__(self, dims, labels=None, factors=None):
        dims = tuple(int(d) for d in dims)
        if len(dims) == 0:
            raise errors.ArityError("Structure needs at least one system")
        if any(d < 1 for d in dims):
            raise errors.ValidityError(f"Every dimension have to be at least 1, got {dims}")
        if labels is None:
            labels = default_labels(len(dims))
        labels = tuple(str(i) for i in labels)
        if len(labels) != len(dims):
            raise errors.ArityError(f"Got {len(dims)} dims but {len(labels)} labels")
        if len(set(labels)) != len(labels):
            raise errors.LabelError(f"Labels have to be unique, got {labels}")
        names = [split_label(i)[0] for i in labels]
        if len(set(names)) != len(names):
            raise errors.LabelError(f"System names have to be unique, got {names}")
        self.dims = dims
        self.labels = labels
        self.factors = {}
        for label, sub in (factors or {}).items():
            if label not in labels:
                continue
            if not isinstance(sub, HilbertStructure):
                sub = HilbertStructure(sub["dims"], sub["labels"])
            if sub.total != dims[labels.index(label)]:
                raise errors.ValidityError(f"Factors of {label} do not multiply to its dimension")
            self.factors[label] = sub

    @property
    def total(self):
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    def __eq__(self, other):
        return self.dims == other.dims and self.labels == other.labels

    def __repr__(self):
        return f"<HilbertStructure {' x '.join(f'{l}:{d}' for l, d in zip(self.labels, self.dims))}>"

    def index(self, label):
        """
        Position of a system given its full label or its short name
        (name "C" matches label "C=C1*C2").
        """
        if label in self.labels:
            return self.labels.index(label)
        for i, full in enumerate(self.labels):
            if split_label(full)[0] == label:
                return i
        raise errors.LabelError(f"Unknown system '{label}', structure has {list(self.labels)}")

    def indices(self, labels):
        """Sorted positions of given labels"""
        idx = sorted(set(self.index(i) for i in labels))
        return idx

    def dim(self, label):
        return self.dims[self.index(label)]

    def concat(self, other):
        collision = set(self.names()) & set(other.names())
        if collision:
            raise errors.LabelError(f"Label collision {sorted(collision)}, relabel one of the states first")
        factors = dict(self.factors)
        factors.update(other.factors)
        return HilbertStructure(self.dims + other.dims, self.labels + other.labels, factors)

    def names(self):
        return [split_label(i)[0] for i in self.labels]

    def atoms(self, label):
        """Atomic structure behind given system"""
        label = self.labels[self.index(label)]
        if label in self.factors:
            return self.factors[label]
        return HilbertStructure([self.dim(label)], [label])

    def subset(self, idx):
        labels = [self.labels[i] for i in idx]
        return HilbertStructure(
            [self.dims[i] for i in idx],
            labels,
            {k: v for k, v in self.factors.items() if k in labels},
        )

    def dump(self):
        out = {"dims": list(self.dims), "labels": list(self.labels)}
        if self.factors:
            out["factors"] = {
                k: {"dims": list(v.dims), "labels": list(v.labels)}
                for k, v in sorted(self.factors.items())
            }
        return out


def _check_hermitian(matrix, tol=None):
    if tol is None:
        tol = config.tol("herm")
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise errors.ShapeError(f"Expected square matrix, got shape {matrix.shape}")
    if matrix.size == 0:
        return
    scale = max(1.0, float(np.max(np.abs(matrix))))
    deviation = float(np.max(np.abs(matrix - matrix.conj().T)))
    if deviation > tol * scale:
        raise errors.IntegrityError(f"Matrix is not Hermitian (deviation {deviation:.3e})")


def hermitian_part(matrix):
    return (matrix + matrix.conj().T) / 2


class StateMatrix:
    """
    Density operator (unnormalized unless `normalized` is set) over
    a HilbertStructure. Matrix is read-only once constructed.
    """

    def __init__(self, structure, matrix, check=True):
        if not isinstance(structure, HilbertStructure):
            structure = HilbertStructure(*structure)
        matrix = np.array(matrix, dtype=complex)
        side = structure.total
        if matrix.shape != (side, side):
            raise errors.ShapeError(f"Matrix shape {matrix.shape} does not match {structure}")
        if check:
            _check_hermitian(matrix)
        matrix = hermitian_part(matrix)
        if check:
            evals = np.linalg.eigvalsh(matrix)
            lmax = max(float(np.max(np.abs(evals))), np.finfo(float).tiny)
            if evals[0] < -config.tol("psd") * lmax:
                raise errors.IntegrityError(
                    f"Matrix is not positive semidefinite (min eigenvalue {evals[0]:.3e})"
                )
        matrix.setflags(write=False)
        self.structure = structure
        self.matrix = matrix
        self.normalized = abs(self.trace - 1) <= config.tol("trace")

    @property
    def trace(self):
        return float(np.trace(self.matrix).real)

    @property
    def labels(self):
        return self.structure.labels

    @property
    def dims(self):
        return self.structure.dims

    def __repr__(self):
        return f"<StateMatrix {self.structure} trace={self.trace:.6g}>"

    def eigvalsh(self):
        return np.linalg.eigvalsh(self.matrix)


class PureVector:
    def __init__(self, structure, vector):
        if not isinstance(structure, HilbertStructure):
            structure = HilbertStructure(*structure)
        vector = np.array(vector, dtype=complex).reshape(-1)
        if vector.shape[0] != structure.total:
            raise errors.ShapeError(f"Vector length {vector.shape[0]} does not match {structure}")
        norm = float(np.linalg.norm(vector))
        if norm == 0:
            raise errors.ValidityError("Pure vector have to be nonzero")
        vector.setflags(write=False)
        self.structure = structure
        self.vector = vector
        self.unit = abs(norm - 1) <= config.tol("trace")

    @property
    def norm(self):
        return float(np.linalg.norm(self.vector))

    def __repr__(self):
        return f"<PureVector {self.structure} norm={self.norm:.6g}>"

    def normalize(self):
        return PureVector(self.structure, self.vector / self.norm)

    def projector(self):
        return StateMatrix(self.structure, np.outer(self.vector, self.vector.conj()), check=False)


class LocalOperator:
    """
    Product operator X_1 x ... x X_n acting on given structure, factors
    may be rectangular.
    """

    def __init__(self, structure, factors):
        factors = [np.array(f, dtype=complex) for f in factors]
        if len(factors) != len(structure):
            raise errors.ArityError(f"Got {len(factors)} factors for {structure}")
        for f, d, label in zip(factors, structure.dims, structure.labels):
            if f.ndim != 2 or f.shape[1] != d:
                raise errors.ShapeError(f"Factor on {label} has shape {f.shape}, expected (*, {d})")
        self.structure = structure
        self.factors = factors

    @classmethod
    def on(cls, structure, **by_label):
        """Identity everywhere except given systems"""
        factors = []
        for label, d in zip(structure.labels, structure.dims):
            name = split_label(label)[0]
            factors.append(by_label.get(name, by_label.get(label, np.eye(d))))
        return cls(structure, factors)

    def __repr__(self):
        return f"<LocalOperator {[f.shape for f in self.factors]}>"

    def output_structure(self):
        dims = [f.shape[0] for f in self.factors]
        factors = {
            k: v
            for k, v in self.structure.factors.items()
            if self.structure.dims[self.structure.labels.index(k)] == dims[self.structure.labels.index(k)]
        }
        return HilbertStructure(dims, self.structure.labels, factors)

    def full(self):
        return functools.reduce(np.kron, self.factors)


def _as_matrix(rho):
    if isinstance(rho, StateMatrix):
        return rho.matrix
    return np.asarray(rho)


def tensor_product(rho, sigma):
    structure = rho.structure.concat(sigma.structure)
    return StateMatrix(structure, np.kron(rho.matrix, sigma.matrix), check=False)


def _permute_matrix(matrix, dims, perm):
    n = len(dims)
    side = int(np.prod(dims))
    t = matrix.reshape(tuple(dims) + tuple(dims))
    t = t.transpose(list(perm) + [n + p for p in perm])
    return t.reshape(side, side)


def _order_indices(structure, order):
    perm = [structure.index(i) for i in order]
    if sorted(perm) != list(range(len(structure))):
        raise errors.ArityError(f"Order {order} is not a permutation of {list(structure.labels)}")
    return perm


def permute_systems(rho, order):
    perm = _order_indices(rho.structure, order)
    structure = rho.structure.subset(perm)
    return StateMatrix(structure, _permute_matrix(rho.matrix, rho.dims, perm), check=False)


def permutation_matrix(structure, order):
    """
    Matrix P with P rho P^T equal to `permute_systems(rho, order)`
    """
    perm = _order_indices(structure, order)
    side = structure.total
    eye = np.eye(side).reshape(tuple(structure.dims) + (side,))
    return eye.transpose(perm + [len(perm)]).reshape(side, side)


def regroup(rho, layout):
    """
    Reorder and merge systems. `layout` items are either a label or
    a (name, [labels]) pair which merges listed systems, in that order,
    into one system labeled "name=part1*part2".
    """
    order = []
    groups = []
    for item in layout:
        if isinstance(item, str):
            item = (None, [item])
        name, members = item
        members = [rho.labels[rho.structure.index(m)] for m in members]
        order += members
        groups.append((name, members))
    perm = _order_indices(rho.structure, order)
    matrix = _permute_matrix(rho.matrix, rho.dims, perm)

    dims, labels, factors = [], [], {}
    for name, members in groups:
        if len(members) == 1 and name is None:
            labels.append(members[0])
            dims.append(rho.structure.dim(members[0]))
            if members[0] in rho.structure.factors:
                factors[members[0]] = rho.structure.factors[members[0]]
            continue
        atom_dims, atom_labels = [], []
        for m in members:
            atoms = rho.structure.atoms(m)
            atom_dims += atoms.dims
            atom_labels += atoms.labels
        if name is None:
            name = "".join(split_label(m)[0] for m in members)
        label = merged_label(name, atom_labels)
        labels.append(label)
        dims.append(int(np.prod(atom_dims)))
        factors[label] = HilbertStructure(atom_dims, atom_labels)
    structure = HilbertStructure(dims, labels, factors)
    logging.debug(f"Regrouped {rho.structure} into {structure}")
    return StateMatrix(structure, matrix, check=False)


def unmerge(rho, label):
    """Split merged system back into its atomic factors"""
    idx = rho.structure.index(label)
    full = rho.labels[idx]
    if full not in rho.structure.factors:
        raise errors.LabelError(f"System {full} is not a merged one")
    atoms = rho.structure.factors[full]
    dims = list(rho.dims[:idx]) + list(atoms.dims) + list(rho.dims[idx + 1:])
    labels = list(rho.labels[:idx]) + list(atoms.labels) + list(rho.labels[idx + 1:])
    factors = {k: v for k, v in rho.structure.factors.items() if k != full}
    return StateMatrix(HilbertStructure(dims, labels, factors), rho.matrix, check=False)


def relabel(rho, labels):
    structure = HilbertStructure(rho.dims, labels)
    return StateMatrix(structure, rho.matrix, check=False)


def kron_merge(rho, sigma, pairing=None):
    """
    Kronecker product of states: system i of sigma is merged with system
    i of rho, remaining systems of rho are kept.
    """
    n = len(rho.structure)
    m = len(sigma.structure)
    if m > n:
        raise errors.ArityError(f"Can not pair {m} systems onto {n}")
    if pairing is None:
        pairing = list(zip(rho.labels[:m], sigma.labels))
    if len(pairing) != m:
        raise errors.ArityError(f"Pairing has {len(pairing)} entries, sigma has {m} systems")
    for i, (a, b) in enumerate(pairing):
        if rho.structure.index(a) != i or sigma.structure.index(b) != i:
            raise errors.ArityError(f"Pair ({a}, {b}) does not match system number {i}")
    joint = tensor_product(rho, sigma)
    layout = [(None, [a, b]) for a, b in pairing] + list(rho.labels[m:])
    return regroup(joint, layout)


def tail_kron(alpha, beta, name="C"):
    """
    Product keeping lead systems of alpha and beta separate and merging
    their tail systems pairwise: (A, C_1..C_n) and (B, C'_1..C'_n) give
    (A, B, C_1C'_1, ..., C_nC'_n).
    """
    if len(alpha.structure) != len(beta.structure):
        raise errors.ArityError(
            f"Tails do not match: {len(alpha.structure) - 1} vs {len(beta.structure) - 1}"
        )
    if len(alpha.structure) < 2:
        raise errors.ArityError("Both states need a lead system and at least one tail system")
    n = len(alpha.structure) - 1
    joint = tensor_product(alpha, beta)
    layout = [alpha.labels[0], beta.labels[0]]
    for j in range(1, n + 1):
        tail_name = name if n == 1 else f"{name}{j}"
        layout.append((tail_name, [alpha.labels[j], beta.labels[j]]))
    return regroup(joint, layout)


def partial_trace(rho, keep):
    keep = list(keep)
    if len(keep) == 0:
        raise errors.ArityError("Have to keep at least one system")
    idx = rho.structure.indices(keep)
    dims = rho.dims
    n = len(dims)
    t = rho.matrix.reshape(tuple(dims) + tuple(dims))
    ket = list(range(n))
    bra = [n + i for i in range(n)]
    for i in range(n):
        if i not in idx:
            bra[i] = ket[i]
    out = [ket[i] for i in idx] + [bra[i] for i in idx]
    side = int(np.prod([dims[i] for i in idx]))
    reduced = np.einsum(t, ket + bra, out).reshape(side, side)
    return StateMatrix(rho.structure.subset(idx), reduced, check=False)


def partial_transpose_matrix(matrix, dims, idx):
    n = len(dims)
    side = int(np.prod(dims))
    t = matrix.reshape(tuple(dims) + tuple(dims))
    axes = list(range(2 * n))
    for i in idx:
        axes[i], axes[n + i] = n + i, i
    return t.transpose(axes).reshape(side, side)


def partial_transpose(rho, systems):
    idx = rho.structure.indices(systems)
    return partial_transpose_matrix(rho.matrix, rho.dims, idx)


def apply_local(rho, operator):
    if tuple(operator.structure.dims) != tuple(rho.dims):
        raise errors.ShapeError(f"Operator acts on {operator.structure}, state is {rho.structure}")
    full = operator.full()
    out = full @ rho.matrix @ full.conj().T
    structure = operator.output_structure()
    return StateMatrix(structure, out, check=False)


def eigh(matrix):
    matrix = _as_matrix(matrix)
    _check_hermitian(matrix)
    return np.linalg.eigh(hermitian_part(matrix))


def min_eigenvalue(matrix):
    matrix = _as_matrix(matrix)
    _check_hermitian(matrix)
    return float(np.linalg.eigvalsh(hermitian_part(matrix))[0])


def numerical_rank(rho, tol=None):
    if tol is None:
        tol = config.tol("rank")
    assert tol > 0, "Tolerance have to be positive"
    matrix = _as_matrix(rho)
    _check_hermitian(matrix)
    evals = np.linalg.eigvalsh(hermitian_part(matrix))
    lmax = float(np.max(np.abs(evals))) if evals.size else 0.0
    if lmax == 0:
        return 0
    return int(np.sum(evals > tol * lmax))


def range_basis(rho, tol=None):
    """Orthonormal eigenvectors of retained eigenvalues, largest first"""
    if tol is None:
        tol = config.tol("rank")
    assert tol > 0, "Tolerance have to be positive"
    evals, evecs = eigh(rho)
    lmax = float(np.max(np.abs(evals))) if evals.size else 0.0
    if lmax == 0:
        return []
    keep = [i for i in range(len(evals)) if evals[i] > tol * lmax][::-1]
    return [PureVector(rho.structure, evecs[:, i]) for i in keep]


def range_matrix(rho, tol=None):
    basis = range_basis(rho, tol)
    if not basis:
        return np.zeros((rho.structure.total, 0), dtype=complex)
    return np.column_stack([v.vector for v in basis])


def normalize(rho):
    if rho.normalized:
        return rho
    trace = rho.trace
    if trace <= 0:
        raise errors.ValidityError("Can not normalize state with non-positive trace")
    return StateMatrix(rho.structure, rho.matrix / trace, check=False)


def bipartition(rho, side):
    """
    Matrix of rho reordered as (side, rest) together with the two
    dimensions. Also works for PureVector.
    """
    structure = rho.structure
    idx = structure.indices(side)
    if len(idx) == 0 or len(idx) == len(structure):
        raise errors.ArityError(f"Cut {list(side)} does not split {list(structure.labels)}")
    rest = [i for i in range(len(structure)) if i not in idx]
    perm = idx + rest
    d_side = int(np.prod([structure.dims[i] for i in idx]))
    d_rest = structure.total // d_side
    if isinstance(rho, PureVector):
        v = rho.vector.reshape(structure.dims).transpose(perm).reshape(-1)
        return v, (d_side, d_rest)
    return _permute_matrix(rho.matrix, structure.dims, perm), (d_side, d_rest)


def compress_to_support(rho, tol=None):
    """
    Compress bipartite rho onto supports of its two marginals. Returns the
    compressed state and the two isometries (columns span the supports).
    """
    if len(rho.structure) != 2:
        raise errors.ArityError("Compression needs a bipartite state")
    isometries = []
    for label in rho.labels:
        marginal = partial_trace(rho, [label])
        u = range_matrix(marginal, tol)
        if u.shape[1] == 0:
            u = np.eye(marginal.structure.total, 1, dtype=complex)
        isometries.append(u)
    v = np.kron(isometries[0], isometries[1])
    compressed = v.conj().T @ rho.matrix @ v
    structure = HilbertStructure([u.shape[1] for u in isometries], rho.labels)
    return StateMatrix(structure, compressed, check=False), isometries[0], isometries[1]


def schmidt_decomposition(psi, side):
    """
    Schmidt coefficients (descending) and the local vectors as columns,
    psi = sum_i s_i |u_i>|v_i>.
    """
    v, (d_side, d_rest) = bipartition(psi, side)
    u, s, vh = np.linalg.svd(v.reshape(d_side, d_rest), full_matrices=False)
    return s, u, vh.T


def basis_ket(structure, digits):
    if not isinstance(structure, HilbertStructure):
        structure = HilbertStructure(structure)
    vector = np.zeros(structure.total, dtype=complex)
    vector[np.ravel_multi_index(tuple(digits), structure.dims)] = 1
    return PureVector(structure, vector)
