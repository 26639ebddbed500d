import enum
import logging

import numpy as np
import scipy.optimize

from . import certificate
from . import config
from . import errors
from . import gen
from . import hilbert
from .certificate import Certificate
from .certificate import Verdict


DISTILL_ALTERNATIONS = 200
WITNESS_CHECK_EVERY = 25
WITNESS_CUT_ITERS = 2000
REFINE_BELOW = 1e-2
REFINE_EVERY = 500
REFINE_DROP = 1e-6
REFINE_MAX_PARAMS = 2000
REFINE_MAX_NFEV = 200


# Werner family


class WernerParams:
    def __init__(self, d, p):
        if int(d) != d or d < 2:
            raise errors.ValidityError(f"Werner dimension have to be integer >= 2, got {d}")
        if not -1.0 <= p <= 1.0:
            raise errors.ValidityError(f"Werner parameter have to be in [-1, 1], got {p}")
        self.d = int(d)
        self.p = float(p)

    def __repr__(self):
        return f"<WernerParams d={self.d} p={self.p}>"

    def dump(self):
        return {"d": self.d, "p": self.p}


class WernerClass(enum.Enum):
    SEPARABLE = "SEPARABLE"
    NPT_1COPY_UNDISTILLABLE = "NPT_1COPY_UNDISTILLABLE"
    NPT_1COPY_DISTILLABLE = "NPT_1COPY_DISTILLABLE"


def swap_operator(d):
    v = np.zeros((d * d, d * d), dtype=complex)
    for i in range(d):
        for j in range(d):
            v[i * d + j, j * d + i] = 1
    return v


def werner_state(params, labels=("A", "B")):
    d, p = params.d, params.p
    matrix = (np.eye(d * d) + p * swap_operator(d)) / (d * d + p * d)
    return hilbert.StateMatrix(hilbert.HilbertStructure([d, d], labels), matrix)


def classify_werner(params):
    """
    Closed form classes: separable iff p >= -1/d, one-copy undistillable
    NPT on [-1/2, -1/d), one-copy distillable below -1/2.
    """
    if params.p >= -1.0 / params.d:
        return WernerClass.SEPARABLE
    if params.p >= -0.5:
        return WernerClass.NPT_1COPY_UNDISTILLABLE
    return WernerClass.NPT_1COPY_DISTILLABLE


def werner_params_of(rho, tol=None):
    """Recover (d, p) of a Werner state, ValidityError for anything else"""
    if tol is None:
        tol = config.tol("membership")
    if len(rho.structure) != 2:
        raise errors.ArityError(f"Werner states are bipartite, got {rho.structure}")
    d = rho.dims[0]
    if rho.dims[1] != d:
        raise errors.ShapeError(f"Werner states need equal local dimensions, got {rho.dims}")
    rho = hilbert.normalize(rho)
    v = swap_operator(d)
    tau = float(np.trace(v @ rho.matrix).real)
    p = (1.0 - tau * d) / (tau - d)
    if abs(p) > 1.0 + tol:
        raise errors.ValidityError(f"Swap expectation {tau} is out of the Werner range")
    params = WernerParams(d, float(np.clip(p, -1.0, 1.0)))
    distance = float(np.linalg.norm(rho.matrix - werner_state(params).matrix))
    if distance > tol:
        raise errors.ValidityError(f"State is {distance:.3e} away from the Werner family")
    return params


# Partial transpose


def _side_indices(structure, cut):
    idx = structure.indices(cut)
    if len(idx) == 0 or len(idx) == len(structure):
        raise errors.ArityError(f"Cut {list(cut)} does not split {list(structure.labels)}")
    return idx


def _cut_labels(structure, idx):
    return [structure.labels[i] for i in idx]


def _clip(matrix):
    evals, evecs = np.linalg.eigh(hilbert.hermitian_part(matrix))
    evals = np.clip(evals, 0, None)
    return (evecs * evals) @ evecs.conj().T


def _psd_ok(matrix, tol=None):
    if tol is None:
        tol = config.tol("psd")
    return float(np.linalg.eigvalsh(hilbert.hermitian_part(matrix))[0]) >= -tol


def _evidence_base(rho):
    return {"labels": list(rho.labels), "state_digest": certificate.state_digest(rho)}


def ppt_check(rho, cut, tol=None):
    """
    Returns (is PPT, smallest eigenvalue of the partial transpose of the
    normalized state) for the bipartition cut|rest.
    """
    if tol is None:
        tol = config.tol("psd")
    idx = _side_indices(rho.structure, cut)
    rho = hilbert.normalize(rho)
    pt = hilbert.partial_transpose_matrix(rho.matrix, rho.dims, idx)
    lmin = float(np.linalg.eigvalsh(hilbert.hermitian_part(pt))[0])
    logging.debug(f"PT across {list(cut)} has minimal eigenvalue {lmin:.6e}")
    return lmin >= -tol, lmin


def negativity(rho, cut):
    idx = _side_indices(rho.structure, cut)
    rho = hilbert.normalize(rho)
    pt = hilbert.partial_transpose_matrix(rho.matrix, rho.dims, idx)
    evals = np.linalg.eigvalsh(hilbert.hermitian_part(pt))
    return float(-np.sum(evals[evals < 0]))


def ppt_certificate(rho, cut, seed=None):
    """
    PPT verdict across one cut. PPT is decisive when the two sides span
    at most 2x3.
    """
    idx = _side_indices(rho.structure, cut)
    side = _cut_labels(rho.structure, idx)
    rho = hilbert.normalize(rho)
    pt = hilbert.partial_transpose_matrix(rho.matrix, rho.dims, idx)
    evals, evecs = np.linalg.eigh(hilbert.hermitian_part(pt))
    lmin = float(evals[0])
    tolerance = config.tol("verdict")
    evidence = _evidence_base(rho)
    evidence["cut"] = side
    if lmin < -tolerance:
        evidence["vector"] = evecs[:, 0]
        value = float(np.vdot(evecs[:, 0], pt @ evecs[:, 0]).real)
        return Certificate(Verdict.NPT, evidence, value, 0.0, seed, tolerance)
    d_side = int(np.prod([rho.dims[i] for i in idx]))
    d_rest = rho.structure.total // d_side
    if d_side * d_rest <= certificate.PPT_DECISIVE_DIM:
        verdict = Verdict.SEPARABLE_CERTIFIED
    else:
        verdict = Verdict.PPT
    return Certificate(verdict, evidence, lmin, 0.0, seed, tolerance)


# One-copy distillability


def _restricted_min(gamma, iso_a, iso_b):
    v = np.kron(iso_a, iso_b)
    k = v.conj().T @ gamma @ v
    evals, evecs = np.linalg.eigh(hilbert.hermitian_part(k))
    return float(evals[0]), v @ evecs[:, 0]


def _alternate(gamma, d_a, d_b, iso_a, tol):
    """
    Alternating minimization of <psi|gamma|psi> over Schmidt rank two psi:
    minimize with one local two-dimensional subspace fixed, then move
    the fixed subspace to the other side.
    """
    eye_b = np.eye(d_b)
    value, vec = _restricted_min(gamma, iso_a, eye_b)
    for _ in range(DISTILL_ALTERNATIONS):
        _, _, vh = np.linalg.svd(vec.reshape(d_a, d_b), full_matrices=False)
        iso_b = vh[:2].T
        _, vec_b = _restricted_min(gamma, np.eye(d_a), iso_b)
        u, _, _ = np.linalg.svd(vec_b.reshape(d_a, d_b), full_matrices=False)
        value_a, vec_a = _restricted_min(gamma, u[:, :2], eye_b)
        change = value - value_a
        value, vec = value_a, vec_a
        if change < tol:
            break
    return value, vec


def _unpermute_vector(vector, dims, perm):
    return vector.reshape([dims[i] for i in perm]).transpose(np.argsort(perm)).reshape(-1)


def one_copy_distillable_search(rho, cut, restarts=None, seed=0):
    """
    Search for a Schmidt rank two vector with negative expectation in the
    partial transpose. Finding one proves one-copy distillability, not
    finding one after all restarts is reported as NOT_FOUND_DISTILLABLE.
    """
    if restarts is None:
        restarts = config.DEFAULT_RESTARTS
    idx = _side_indices(rho.structure, cut)
    side = _cut_labels(rho.structure, idx)
    rho = hilbert.normalize(rho)
    rest = [i for i in range(len(rho.structure)) if i not in idx]
    perm = idx + rest
    d_a = int(np.prod([rho.dims[i] for i in idx]))
    d_b = rho.structure.total // d_a
    pt = hilbert.partial_transpose_matrix(rho.matrix, rho.dims, idx)
    gamma = hilbert._permute_matrix(pt, rho.dims, perm)
    tolerance = config.tol("distill")
    evidence = _evidence_base(rho)
    evidence["cut"] = side

    best_value, best_vec = None, None
    if d_a >= 2 and d_b >= 2:
        for i, sub in enumerate(gen.sub_seeds(seed, max(1, restarts))):
            generator = gen.rng(sub)
            iso_a = np.eye(d_a) if d_a == 2 else gen.gen_isometry(generator, d_a, 2)
            value, vec = _alternate(gamma, d_a, d_b, iso_a, config.tol("alternation"))
            if best_value is None or value < best_value:
                best_value, best_vec = value, vec
            if best_value < -tolerance:
                logging.debug(f"Restart {i} found PT expectation {best_value:.6e}")
                break
            if d_a == 2:
                # Subspace on the side is the whole space, the minimum is exact
                break
    else:
        logging.info(f"Cut {side} has a one-dimensional side, no Schmidt rank two vectors")
        best_vec = np.zeros(rho.structure.total, dtype=complex)
        best_vec[0] = 1
        best_value = float(gamma[0, 0].real)

    vector = _unpermute_vector(best_vec / np.linalg.norm(best_vec), rho.dims, perm)
    value = float(np.vdot(vector, pt @ vector).real)
    evidence["vector"] = vector
    if value < -tolerance:
        verdict = Verdict.ONE_COPY_DISTILLABLE
    else:
        verdict = Verdict.NOT_FOUND_DISTILLABLE
    logging.info(f"One-copy search across {side} with {restarts} restarts: {verdict.value} ({value:.6e})")
    return Certificate(verdict, evidence, value, 0.0, seed, tolerance)


# Witnesses


def _pt(matrix, dims, idx):
    return hilbert.partial_transpose_matrix(matrix, dims, idx)


def _polish(w, qs, cuts, dims):
    """
    Exact decompositions W + sI = P_M + Q_M^T_M with Q_M clipped to PSD and
    the smallest shift s making every P_M PSD.
    """
    qs = [_clip(q) for q in qs]
    ps = [w - _pt(q, dims, idx) for q, idx in zip(qs, cuts)]
    shift = 0.0
    for p in ps:
        shift = max(shift, -float(np.linalg.eigvalsh(hilbert.hermitian_part(p))[0]))
    eye = np.eye(w.shape[0])
    return w + shift * eye, [p + shift * eye for p in ps], qs, shift


def projector_witness(rho):
    """
    W = c I - |psi><psi| for the leading eigenvector psi of rho, with c the
    largest squared Schmidt coefficient of psi over all bipartitions.
    Decomposes as P = 0, Q = W^T_M on every cut.
    """
    rho = hilbert.normalize(rho)
    _, evecs = hilbert.eigh(rho)
    psi = hilbert.PureVector(rho.structure, evecs[:, -1])
    c = 0.0
    for idx in certificate.bipartitions(rho.structure):
        s = hilbert.schmidt_decomposition(psi, _cut_labels(rho.structure, idx))[0]
        c = max(c, float(s[0] ** 2))
    w = c * np.eye(rho.structure.total) - psi.projector().matrix
    hints = {}
    for idx in certificate.bipartitions(rho.structure):
        key = certificate.cut_key(_cut_labels(rho.structure, idx))
        hints[key] = (np.zeros_like(w), _pt(w, rho.dims, idx))
    return w, hints


def _decompose(w, dims, idx, p, q, iters):
    """
    Dykstra projections between PSD pairs (P, Q) and the affine set
    P + Q^T = W. Returns clipped Q and the shift its polish needs.
    """
    inc_p = np.zeros_like(w)
    inc_q = np.zeros_like(w)
    best_q, best_shift = None, None
    for it in range(iters):
        pc = _clip(p + inc_p)
        inc_p = p + inc_p - pc
        qc = _clip(q + inc_q)
        inc_q = q + inc_q - qc
        r = w - pc - _pt(qc, dims, idx)
        p = pc + r / 2
        q = qc + _pt(r, dims, idx) / 2
        if it % WITNESS_CHECK_EVERY == 0 or it == iters - 1:
            shift = _polish(w, [qc], [idx], dims)[3]
            if best_shift is None or shift < best_shift:
                best_q, best_shift = qc, shift
            if best_shift <= 1e-14:
                break
    return best_q, best_shift


def witness_certify(rho, witness, seed=None, hints=None, max_iters=None):
    """
    Certify genuine multipartite entanglement with a witness: W has to be
    decomposable on every bipartition and detect rho. Each cut is solved
    from warm starts (hints, (0, W^T), (W/2, W^T/2)) and the result is
    polished by a small identity shift of W.
    """
    if max_iters is None:
        max_iters = config.DEFAULT_MAX_ITERS
    rho = hilbert.normalize(rho)
    structure = rho.structure
    tolerance = config.tol("witness")
    w = hilbert.hermitian_part(np.asarray(witness, dtype=complex))
    if w.shape != rho.matrix.shape:
        raise errors.ShapeError(f"Witness shape {w.shape} does not match state {rho.matrix.shape}")
    norm = float(np.linalg.norm(w))
    if norm == 0:
        return Certificate(Verdict.INCONCLUSIVE, {}, 0.0, None, seed, tolerance)
    w = w / norm
    value = float(np.trace(w @ rho.matrix).real)
    if value >= -tolerance:
        logging.info(f"Witness does not detect the state, expectation {value:.6e}")
        return Certificate(Verdict.INCONCLUSIVE, {}, value, None, seed, tolerance)

    cuts = certificate.bipartitions(structure)
    keys = [certificate.cut_key(_cut_labels(structure, idx)) for idx in cuts]
    iters = min(max_iters, WITNESS_CUT_ITERS)
    qs = []
    for idx, key in zip(cuts, keys):
        wt = _pt(w, rho.dims, idx)
        starts = []
        if hints and key in hints:
            starts.append((hints[key][0] / norm, hints[key][1] / norm))
        starts += [(np.zeros_like(w), wt), (w / 2, wt / 2)]
        best_q, best_shift = None, None
        for p0, q0 in starts:
            q, shift = _decompose(w, rho.dims, idx, p0, q0, iters)
            if best_shift is None or shift < best_shift:
                best_q, best_shift = q, shift
            if best_shift <= 1e-14:
                break
        logging.debug(f"Cut {key} decomposes with shift {best_shift:.3e}")
        qs.append(best_q)

    w, ps, qs, shift = _polish(w, qs, cuts, rho.dims)
    value = float(np.trace(w @ rho.matrix).real)
    if value >= -tolerance:
        logging.info(f"Witness needs shift {shift:.3e} and then fails, expectation {value:.6e}")
        return Certificate(Verdict.INCONCLUSIVE, {}, value, shift, seed, tolerance)
    residual = 0.0
    decompositions = {}
    for idx, key, p, q in zip(cuts, keys, ps, qs):
        residual = max(residual, float(np.linalg.norm(w - p - _pt(q, rho.dims, idx))))
        decompositions[key] = {"P": p, "Q": q}
    evidence = _evidence_base(rho)
    evidence["witness"] = w
    evidence["decompositions"] = decompositions
    logging.info(f"Witness certifies genuine entanglement, expectation {value:.6e}")
    return Certificate(Verdict.GE_CERTIFIED, evidence, value, residual, seed, tolerance)


def _trace_halfspace(w, rho, target):
    """Project W onto {Tr W = 1, Tr W rho <= target}"""
    dim = w.shape[0]
    eye = np.eye(dim)
    w1 = w + (1.0 - np.trace(w).real) / dim * eye
    if np.trace(w1 @ rho).real <= target:
        return w1
    gram = np.array([[dim, 1.0], [1.0, float(np.vdot(rho, rho).real)]])
    rhs = np.array([1.0 - np.trace(w).real, target - np.trace(w @ rho).real])
    c = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    return w + c[0] * eye + c[1] * rho


def _link(w, ps, qs, cuts, dims):
    """Project (W, P_M, Q_M) onto W = P_M + Q_M^T_M for all M"""
    rs = [w - p - _pt(q, dims, idx) for p, q, idx in zip(ps, qs, cuts)]
    s = sum(rs) / (2 + len(rs))
    lams = [(r - s) / 2 for r in rs]
    ps = [p + lam for p, lam in zip(ps, lams)]
    qs = [q + _pt(lam, dims, idx) for q, lam, idx in zip(qs, lams, cuts)]
    return w - s, ps, qs


def witness_search(rho, seed=0, max_iters=None, start=None):
    """
    Search a fully decomposable witness with unit trace detecting rho by
    alternating projections, pushing the target expectation down while
    targets stay reachable. Returns (W, hints, value) or None.
    """
    if max_iters is None:
        max_iters = config.DEFAULT_MAX_ITERS
    rho = hilbert.normalize(rho)
    dims = rho.dims
    dim = rho.structure.total
    cuts = certificate.bipartitions(rho.structure)
    keys = [certificate.cut_key(_cut_labels(rho.structure, idx)) for idx in cuts]
    generator = gen.rng(seed)
    if start is None:
        noise = gen.gen_complex(generator, (dim, dim))
        w = np.eye(dim) / dim + 1e-3 * hilbert.hermitian_part(noise)
    else:
        w = hilbert.hermitian_part(np.asarray(start, dtype=complex))
    ps = [w / 2 for _ in cuts]
    qs = [_pt(w, dims, idx) / 2 for idx in cuts]

    best = None
    target = -1e-3
    budget = max(max_iters // 4, 200)
    while target >= -1.0:
        reached = False
        for it in range(budget):
            w = _trace_halfspace(w, rho.matrix, target)
            ps = [_clip(p) for p in ps]
            qs = [_clip(q) for q in qs]
            w, ps, qs = _link(w, ps, qs, cuts, dims)
            if it % WITNESS_CHECK_EVERY != WITNESS_CHECK_EVERY - 1:
                continue
            pw, pps, pqs, shift = _polish(w, qs, cuts, dims)
            trace = float(np.trace(pw).real)
            value = float(np.trace(pw @ rho.matrix).real) / trace
            if value <= target / 2:
                hints = {k: (p / trace, q / trace) for k, p, q in zip(keys, pps, pqs)}
                best = (pw / trace, hints, value)
                reached = True
                logging.debug(f"Witness target {target:.3e} reached after {it + 1} steps, value {value:.6e}")
                break
        if not reached:
            break
        target *= 3
    if best is None:
        logging.info("Witness search found no decomposable witness")
    return best


# PPT mixtures


def _feasible(parts, cuts, dims, tol):
    for x, idx in zip(parts, cuts):
        if not _psd_ok(x, tol) or not _psd_ok(_pt(x, dims, idx), tol):
            return False
    return True


def _permute_vector(vector, dims, perm):
    return vector.reshape(dims).transpose(perm).reshape(-1)


def _product_terms(part, dims, perm, d_a, drop):
    """Weighted Schmidt terms of the eigenvectors of part, heaviest first"""
    terms = []
    evals, evecs = np.linalg.eigh(hilbert.hermitian_part(part))
    for lam, vec in zip(evals, evecs.T):
        if lam <= drop:
            continue
        m = _permute_vector(vec, dims, perm).reshape(d_a, -1)
        u, s, vh = np.linalg.svd(m, full_matrices=False)
        for j in range(len(s)):
            weight = np.sqrt(lam) * s[j]
            if weight > drop:
                terms.append((weight, np.sqrt(weight) * u[:, j], np.sqrt(weight) * vh[j, :]))
    terms.sort(key=lambda t: -t[0])
    return terms


def _separable_refine(rho, parts, cuts, tol):
    """
    Least squares refinement of near-feasible parts into sums of product
    projectors across their own cuts. Such parts are PSD and PPT exactly,
    so any refinement whose sum matches rho within tol is feasible.
    Returns the refined parts or None.
    """
    dims = list(rho.dims)
    n = len(dims)
    max_terms = hilbert.numerical_rank(rho)
    layout = []
    x0 = []
    for k, (part, idx) in enumerate(zip(parts, cuts)):
        perm = list(idx) + [i for i in range(n) if i not in idx]
        d_a = int(np.prod([dims[i] for i in idx]))
        d_b = rho.structure.total // d_a
        for _, a, b in _product_terms(part, dims, perm, d_a, REFINE_DROP)[:max_terms]:
            layout.append((k, perm, d_a, d_b))
            x0 += [a.real, a.imag, b.real, b.imag]
    if not layout:
        return None
    x0 = np.concatenate(x0)
    if x0.size > REFINE_MAX_PARAMS:
        logging.debug(f"Skipping separable refinement with {x0.size} parameters")
        return None

    def build(params):
        out = [np.zeros_like(rho.matrix) for _ in parts]
        pos = 0
        for k, perm, d_a, d_b in layout:
            a = params[pos:pos + d_a] + 1j * params[pos + d_a:pos + 2 * d_a]
            pos += 2 * d_a
            b = params[pos:pos + d_b] + 1j * params[pos + d_b:pos + 2 * d_b]
            pos += 2 * d_b
            w = _unpermute_vector(np.kron(a, b), dims, perm)
            out[k] += np.outer(w, w.conj())
        return out

    def residuals(params):
        diff = sum(build(params)) - rho.matrix
        return np.concatenate([diff.real.ravel(), diff.imag.ravel()])

    fit = scipy.optimize.least_squares(
        residuals, x0, method="trf", ftol=1e-15, xtol=1e-15, gtol=1e-15, max_nfev=REFINE_MAX_NFEV
    )
    refined = build(fit.x)
    residual = float(np.linalg.norm(sum(refined) - rho.matrix))
    logging.debug(f"Separable refinement of {len(layout)} terms ends at residual {residual:.3e}")
    if residual >= tol or not _feasible(refined, cuts, dims, config.tol("psd")):
        return None
    return refined, residual


def _witness_stage(rho, residual_direction, seed, max_iters):
    candidates = []
    if residual_direction is not None:
        candidates.append(("residual direction", residual_direction, None))
    w, hints = projector_witness(rho)
    candidates.append(("projector", w, hints))
    for name, w, hints in candidates:
        cert = witness_certify(rho, w, seed, hints, max_iters)
        logging.debug(f"Witness seed {name}: {cert.verdict.value}")
        if cert.verdict == Verdict.GE_CERTIFIED:
            return cert
    found = witness_search(rho, seed, max_iters)
    if found is None:
        return Certificate(Verdict.INCONCLUSIVE, {}, None, None, seed, config.tol("witness"))
    w, hints, _ = found
    return witness_certify(rho, w, seed, hints, max_iters)


def ppt_mixture_search(rho, max_iters=None, tol=None, seed=0):
    """
    Try to write rho as a sum of parts, one per bipartition, each PSD and
    PPT across its own cut. A state PPT across some cut is its own single
    part. Otherwise Dykstra projections run over the three constraint
    sets. Once the residual is small the iterate is refined into product
    terms across each cut by least squares, which closes mixtures whose
    parts sit on the PSD boundary. A stalled residual hands the state
    over to witness certification.
    """
    if max_iters is None:
        max_iters = config.DEFAULT_MAX_ITERS
    structure = rho.structure
    if len(structure) < 2:
        raise errors.ArityError("PPT mixtures need at least two systems")
    config.check_dim_cap(structure.total)
    rho = hilbert.normalize(rho)
    dims = rho.dims
    cuts = certificate.bipartitions(structure)
    part_cuts = [_cut_labels(structure, idx) for idx in cuts]
    psd_tol = config.tol("psd")
    mixture_tol = tol if tol is not None else config.tol("mixture")

    def feasible(parts, residual, iters):
        evidence = _evidence_base(rho)
        evidence["parts"] = parts
        evidence["part_cuts"] = part_cuts
        logging.info(f"PPT mixture found after {iters} iterations, residual {residual:.3e}")
        return Certificate(Verdict.PPT_MIXTURE_FEASIBLE, evidence, 0.0, residual, seed, mixture_tol)

    for i in reversed(range(len(cuts))):
        pt = _pt(rho.matrix, dims, cuts[i])
        if _psd_ok(pt, psd_tol):
            parts = [np.zeros_like(rho.matrix) for _ in cuts]
            parts[i] = rho.matrix.copy()
            return feasible(parts, 0.0, 0)

    k = len(cuts)
    x = [rho.matrix / k for _ in cuts]
    y = x
    inc_psd = [np.zeros_like(rho.matrix) for _ in cuts]
    inc_pt = [np.zeros_like(rho.matrix) for _ in cuts]
    window = int(config.tol("stall_window"))
    history = []
    mismatch = None

    def refine(parts, iters):
        out = _separable_refine(rho, parts, cuts, mixture_tol)
        if out is None:
            return None
        logging.debug(f"Separable refinement closed the mixture after {iters} iterations")
        return feasible(out[0], out[1], iters)

    for it in range(max_iters):
        y = [_clip(xi + a) for xi, a in zip(x, inc_psd)]
        inc_psd = [xi + a - yi for xi, a, yi in zip(x, inc_psd, y)]
        z = [_pt(_clip(_pt(yi + b, dims, idx)), dims, idx) for yi, b, idx in zip(y, inc_pt, cuts)]
        inc_pt = [yi + b - zi for yi, b, zi in zip(y, inc_pt, z)]
        mismatch = sum(z) - rho.matrix
        x = [zi - mismatch / k for zi in z]
        residual = float(np.linalg.norm(mismatch))
        history.append(residual)
        if residual < mixture_tol and _feasible(x, cuts, dims, psd_tol):
            return feasible(x, residual, it + 1)
        if residual < REFINE_BELOW and it % REFINE_EVERY == REFINE_EVERY - 1:
            cert = refine(y, it + 1)
            if cert is not None:
                return cert
        if residual < mixture_tol:
            continue
        if it >= window:
            decrease = history[it - window] - residual
            if decrease < max(config.tol("stall"), config.tol("stall_rel") * residual):
                logging.info(f"PPT mixture search stalled at residual {residual:.3e} after {it + 1} iterations")
                if residual < REFINE_BELOW:
                    cert = refine(y, it + 1)
                    if cert is not None:
                        return cert
                return _witness_stage(rho, mismatch, seed, max_iters)
    if history and history[-1] < REFINE_BELOW:
        cert = refine(y, max_iters)
        if cert is not None:
            return cert
    logging.warning(f"PPT mixture search hit the cap of {max_iters} iterations")
    return Certificate(Verdict.INCONCLUSIVE, {}, None, history[-1] if history else None, seed, mixture_tol)
