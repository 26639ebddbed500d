"""
Parametric biseparable decompositions rho = delta + epsilon (+ zeta) of
alpha_{AC1} x beta_{BC2} with alpha in its rank two normal form.

All states here live on systems (A, B, C1, C2) with A and C1 qubits.
"""

import logging
import math

import numpy as np

from . import codec
from . import config
from . import criteria
from . import eb_subspace
from . import errors
from . import gen
from . import hilbert


LABELS = ("A", "B", "C1", "C2")

VERIFIED = "VERIFIED"
RESIDUAL_MISMATCH = "RESIDUAL_MISMATCH"
BRANCH_NOT_APPLICABLE = "BRANCH_NOT_APPLICABLE"
INFEASIBLE = "INFEASIBLE"

WEIGHT_TOL = 1e-12


def _unit(v):
    v = np.array(v, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise errors.ValidityError("Decomposition vectors have to be nonzero")
    return v / norm


def _check_weights(weights, what):
    if any(w <= 0 for w in weights):
        raise errors.ValidityError(f"All {what} weights have to be positive")
    if weights and abs(sum(weights) - 1) > WEIGHT_TOL:
        raise errors.ValidityError(f"{what} weights sum to {sum(weights)!r}, not 1")


class EpsTerm:
    """p |w><w|_B x (cos(xi)|00>|x> + sin(xi)|11>|y>)(...)^dagger"""

    def __init__(self, p, xi, w, x, y):
        if not 0 < xi < math.pi / 2:
            raise errors.EndpointError(f"xi={xi!r} is outside (0, pi/2), merge such term into delta")
        self.p = float(p)
        self.xi = float(xi)
        self.w = _unit(w)
        self.x = _unit(x)
        self.y = _unit(y)

    def __repr__(self):
        return f"<EpsTerm p={self.p:.6g} xi={self.xi:.6g}>"

    def wx(self):
        return np.kron(self.w, self.x)

    def wy(self):
        return np.kron(self.w, self.y)

    def dump(self):
        return {
            "p": self.p,
            "xi": self.xi,
            "w": codec.encode_vector(self.w),
            "x": codec.encode_vector(self.x),
            "y": codec.encode_vector(self.y),
        }


class PtTerm:
    """q (cos(eta)|00> + sin(eta)|11>)(...)^dagger x |psi><psi|_{BC2}"""

    def __init__(self, q, eta, psi):
        if not (-math.pi / 2 < eta < math.pi / 2) or eta == 0:
            raise errors.EndpointError(f"eta={eta!r} is outside (-pi/2, 0) u (0, pi/2)")
        self.q = float(q)
        self.eta = float(eta)
        self.psi = _unit(psi)

    def __repr__(self):
        return f"<PtTerm q={self.q:.6g} eta={self.eta:.6g}>"

    def dump(self):
        return {"q": self.q, "eta": self.eta, "psi": codec.encode_vector(self.psi)}


class DecompositionParams:
    def __init__(self, theta, mu, f, nu, beta0, beta1, eps_terms=None, pt_terms=None):
        eps_terms = list(eps_terms or [])
        pt_terms = list(pt_terms or [])
        for name, value in (("theta", theta), ("mu", mu)):
            if not 0 < value < math.pi / 2:
                raise errors.ValidityError(f"{name}={value!r} is outside (0, pi/2)")
        if not 0 < f <= 1:
            raise errors.ValidityError(f"f={f!r} is outside (0, 1]")
        if not 0 <= nu <= math.pi / 2:
            raise errors.ValidityError(f"nu={nu!r} is outside [0, pi/2]")
        if f < 1 and not eps_terms:
            raise errors.ValidityError("Epsilon part has positive weight but no terms")
        if len(beta0.structure) != 2 or beta0.dims != beta1.dims:
            raise errors.ArityError("beta0 and beta1 have to be states on the same (B, C2)")
        _check_weights([t.p for t in eps_terms], "epsilon")
        _check_weights([t.q for t in pt_terms], "PT")
        d_b, d_c2 = beta0.dims
        for t in eps_terms:
            if t.w.shape[0] != d_b or t.x.shape[0] != d_c2 or t.y.shape[0] != d_c2:
                raise errors.ShapeError(f"Term {t} does not match B:{d_b}, C2:{d_c2}")
        for t in pt_terms:
            if t.psi.shape[0] != d_b * d_c2:
                raise errors.ShapeError(f"Term {t} does not match B:{d_b}, C2:{d_c2}")
        self.theta = float(theta)
        self.mu = float(mu)
        self.f = float(f)
        self.nu = float(nu)
        self.beta0 = beta0
        self.beta1 = beta1
        self.eps_terms = eps_terms
        self.pt_terms = pt_terms

    def __repr__(self):
        return (
            f"<DecompositionParams theta={self.theta:.6g} mu={self.mu:.6g} f={self.f:.6g}"
            f" nu={self.nu:.6g} eps={len(self.eps_terms)} pt={len(self.pt_terms)}>"
        )

    @property
    def d_b(self):
        return self.beta0.dims[0]

    @property
    def d_c2(self):
        return self.beta0.dims[1]

    def structure(self):
        return hilbert.HilbertStructure([2, self.d_b, 2, self.d_c2], LABELS)

    def dump(self):
        return {
            "theta": self.theta,
            "mu": self.mu,
            "f": self.f,
            "nu": self.nu,
            "beta0": codec.state_to_dict(self.beta0),
            "beta1": codec.state_to_dict(self.beta1),
            "eps_terms": [t.dump() for t in self.eps_terms],
            "pt_terms": [t.dump() for t in self.pt_terms],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            eps_terms = [
                EpsTerm(
                    t["p"],
                    t["xi"],
                    codec.decode_vector(t["w"]),
                    codec.decode_vector(t["x"]),
                    codec.decode_vector(t["y"]),
                )
                for t in data.get("eps_terms", [])
            ]
            pt_terms = [
                PtTerm(t["q"], t["eta"], codec.decode_vector(t["psi"]))
                for t in data.get("pt_terms", [])
            ]
            return cls(
                data["theta"],
                data["mu"],
                data["f"],
                data["nu"],
                codec.state_from_dict(data["beta0"]),
                codec.state_from_dict(data["beta1"]),
                eps_terms,
                pt_terms,
            )
        except KeyError as e:
            raise errors.ValidityError(f"Decomposition parameters miss key {e}")


def load_params(path):
    return DecompositionParams.from_dict(codec.load_json(path))


def _ket(digit):
    e = np.zeros(4, dtype=complex)
    e[3 * digit] = 1
    return e


def _to_standard_order(matrix, d_b, d_c2):
    """Reorder from (A, C1, B, C2) to (A, B, C1, C2)"""
    return hilbert._permute_matrix(matrix, (2, 2, d_b, d_c2), [0, 2, 1, 3])


def _state(params, matrix):
    return hilbert.StateMatrix(params.structure(), matrix, check=False)


def build_delta(params):
    m = params.f * math.cos(params.nu) ** 2 * np.kron(np.outer(_ket(0), _ket(0)), params.beta0.matrix)
    m = m + params.f * math.sin(params.nu) ** 2 * np.kron(
        np.outer(_ket(1), _ket(1)), params.beta1.matrix
    )
    return _state(params, _to_standard_order(m, params.d_b, params.d_c2))


def _eps_vector(term):
    return math.cos(term.xi) * np.kron(_ket(0), term.wx()) + math.sin(term.xi) * np.kron(
        _ket(1), term.wy()
    )


def build_epsilon(params):
    if not params.eps_terms:
        raise errors.ValidityError("Epsilon part needs at least one term")
    side = 4 * params.d_b * params.d_c2
    m = np.zeros((side, side), dtype=complex)
    for t in params.eps_terms:
        v = _eps_vector(t)
        m += t.p * np.outer(v, v.conj())
    m *= 1 - params.f
    return _state(params, _to_standard_order(m, params.d_b, params.d_c2))


def build_pt_form(params):
    """Epsilon written as (1 - f) sum_k q_k |eta_k><eta_k| x |psi_k><psi_k|"""
    side = 4 * params.d_b * params.d_c2
    m = np.zeros((side, side), dtype=complex)
    for t in params.pt_terms:
        eta = math.cos(t.eta) * _ket(0) + math.sin(t.eta) * _ket(1)
        v = np.kron(eta, t.psi)
        m += t.q * np.outer(v, v.conj())
    m *= 1 - params.f
    return _state(params, _to_standard_order(m, params.d_b, params.d_c2))


def _frob(m):
    return float(np.linalg.norm(m))


def _eps_blocks(params):
    side = params.d_b * params.d_c2
    e00 = np.zeros((side, side), dtype=complex)
    e11 = np.zeros((side, side), dtype=complex)
    e01 = np.zeros((side, side), dtype=complex)
    for t in params.eps_terms:
        c, s = math.cos(t.xi), math.sin(t.xi)
        e00 += t.p * c * c * np.outer(t.wx(), t.wx().conj())
        e11 += t.p * s * s * np.outer(t.wy(), t.wy().conj())
        e01 += t.p * c * s * np.outer(t.wx(), t.wy().conj())
    return e00, e11, e01


def _pt_blocks(params):
    side = params.d_b * params.d_c2
    e00 = np.zeros((side, side), dtype=complex)
    e11 = np.zeros((side, side), dtype=complex)
    e01 = np.zeros((side, side), dtype=complex)
    for t in params.pt_terms:
        c, s = math.cos(t.eta), math.sin(t.eta)
        proj = np.outer(t.psi, t.psi.conj())
        e00 += t.q * c * c * proj
        e11 += t.q * s * s * proj
        e01 += t.q * c * s * proj
    return e00, e11, e01


def _alpha_blocks(alpha):
    a = hilbert.normalize(alpha).matrix
    return a[0, 0].real, a[3, 3].real, a[0, 3]


def verify_marginal_equations(alpha, beta, params, tol=None):
    """
    Compare the |00><00|, |11><11| and |00><11| blocks (on A C1) of
    alpha x beta with those of delta + epsilon. Residuals are Frobenius
    norms of the difference of the (B, C2) operators.
    """
    if tol is None:
        tol = config.tol("decomposition")
    if alpha.dims != (2, 2):
        raise errors.ShapeError(f"Alpha has to be a two qubit state, got {alpha.structure}")
    if beta.dims != params.beta0.dims:
        raise errors.ShapeError(f"Beta {beta.structure} does not match parameters")
    b = hilbert.normalize(beta).matrix
    g00, g11, g01 = _alpha_blocks(alpha)
    f = params.f
    if params.eps_terms:
        e00, e11, e01 = _eps_blocks(params)
    else:
        e00 = e11 = e01 = np.zeros_like(b)
    d00 = f * math.cos(params.nu) ** 2 * params.beta0.matrix + (1 - f) * e00
    d11 = f * math.sin(params.nu) ** 2 * params.beta1.matrix + (1 - f) * e11
    out = {
        "diag00": _frob(g00 * b - d00),
        "diag11": _frob(g11 * b - d11),
        "offdiag": _frob(g01 * b - (1 - f) * e01),
        "sum": _frob((g00 + g11) * b - d00 - d11),
        "alpha_form": _frob(
            hilbert.normalize(alpha).matrix
            - eb_subspace.normal_form_state(params.theta, params.mu).matrix
        ),
    }
    ok = all(out[k] < tol for k in ("diag00", "diag11", "offdiag"))
    out["verdict"] = VERIFIED if ok else RESIDUAL_MISMATCH
    logging.debug(f"Marginal equations: {out}")
    return out


def verify_pt_symmetric_branch(eps, params, beta, tol=None):
    """
    Check epsilon is invariant under partial transpose of A C1 and, if so,
    that the given PT terms describe it and match the epsilon terms. The
    number of terms r of the separable form is rank epsilon, which has to
    reach the range dimension of beta.
    """
    if tol is None:
        tol = config.tol("decomposition")
    if len(eps.structure) != 4:
        raise errors.ArityError(f"Expected state on {LABELS}, got {eps.structure}")
    pt = hilbert.partial_transpose_matrix(eps.matrix, eps.dims, [0, 2])
    asymmetry = _frob(pt - eps.matrix)
    out = {
        "pt_symmetric": asymmetry <= tol * max(1.0, _frob(eps.matrix)),
        "pt_asymmetry": asymmetry,
        "pt_form": None,
        "pt_diag00": None,
        "pt_diag11": None,
        "pt_offdiag": None,
        "rank_ok": None,
    }
    if not out["pt_symmetric"]:
        out["verdict"] = BRANCH_NOT_APPLICABLE
        return out
    if not params.pt_terms:
        out["verdict"] = INFEASIBLE
        out["note"] = "no separable PT form given for epsilon"
        return out

    out["pt_form"] = _frob(eps.matrix - build_pt_form(params).matrix)
    if params.eps_terms:
        e00, e11, e01 = _eps_blocks(params)
        p00, p11, p01 = _pt_blocks(params)
        out["pt_diag00"] = _frob(e00 - p00)
        out["pt_diag11"] = _frob(e11 - p11)
        out["pt_offdiag"] = _frob(e01 - p01)
    out["pt_terms"] = len(params.pt_terms)
    out["eps_rank"] = hilbert.numerical_rank(eps)
    out["range_dim"] = hilbert.numerical_rank(beta)
    out["rank_ok"] = out["eps_rank"] >= out["range_dim"]

    residuals = [out[k] for k in ("pt_form", "pt_diag00", "pt_diag11", "pt_offdiag") if out[k] is not None]
    ok = all(r < tol for r in residuals) and out["rank_ok"]
    out["verdict"] = VERIFIED if ok else RESIDUAL_MISMATCH
    logging.debug(f"PT symmetric branch: {out}")
    return out


def proportional_vector_check(u, v, tol=None):
    """
    Return m with v = m u when v is proportional to u, None otherwise.
    """
    if tol is None:
        tol = config.tol("proportional")
    u = getattr(u, "vector", u)
    v = getattr(v, "vector", v)
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if np.linalg.norm(u) == 0 or np.linalg.norm(v) == 0:
        raise errors.ValidityError("Both vectors have to be nonzero")
    m = np.vdot(u, v) / np.vdot(u, u)
    if np.linalg.norm(v - m * u) < tol * np.linalg.norm(v):
        return complex(m)
    return None


def werner_reduction(beta, tol=None):
    """
    NPT/PPT verdict for beta. An NPT beta may be traded for a Werner state
    of the same local dimension in downstream analysis.
    """
    if len(beta.structure) != 2:
        raise errors.ArityError(f"Expected bipartite state, got {beta.structure}")
    ppt, lmin = criteria.ppt_check(beta, [beta.labels[0]], tol)
    if ppt:
        note = "PPT state, no Werner replacement"
    else:
        note = (
            "NPT state: local operations and classical communication turn it"
            f" into an NPT Werner state on {beta.dims[0]}x{beta.dims[1]}"
        )
    return {
        "verdict": "PPT" if ppt else "NPT",
        "min_eigenvalue": lmin,
        "werner_licensed": not ppt,
        "note": note,
    }


def decomposition_residual(rho, params):
    if tuple(rho.dims) != params.structure().dims:
        raise errors.ShapeError(f"State {rho.structure} does not match {params.structure()}")
    total = build_delta(params).matrix
    if params.eps_terms:
        total = total + build_epsilon(params).matrix
    return _frob(rho.matrix - total)


def _solve_diagonal_blocks(coefficient, beta, weights, projectors):
    """
    Solve coefficient * beta = t * beta_k + sum_j weights_j P_j for the
    state beta_k and its weight t.
    """
    rest = coefficient * beta - sum(w * p for w, p in zip(weights, projectors))
    weight = float(np.trace(rest).real)
    if weight <= 0:
        return 0.0, np.eye(beta.shape[0]) / beta.shape[0]
    block = rest / weight
    if np.linalg.eigvalsh(hilbert.hermitian_part(block))[0] < -1e-12:
        raise errors.ValidityError("Solved block is not positive semidefinite, fixture is infeasible")
    return weight, block


def consistent_fixture(theta, mu, d_b, d_c2, terms, generator, phase=0.0):
    """
    Forward-construct alpha, beta and parameters solving all three marginal
    equations. Epsilon terms use x = y so the PT form is available too.
    Nonzero `phase` rotates every y away from x which breaks both.
    """
    c2 = math.cos(theta) ** 2
    cross = c2 * math.cos(mu) * math.sin(mu)
    d00 = c2 * math.cos(mu) ** 2 + math.sin(theta) ** 2
    d11 = c2 * math.sin(mu) ** 2
    t_lo, t_hi = cross / d00, math.tan(mu)

    raw = generator.random(terms) + 0.5
    weights = raw / raw.sum()
    xis = [math.atan(t_lo + (t_hi - t_lo) * (0.1 + 0.8 * generator.random())) for _ in range(terms)]
    ws = [gen.gen_unit_vector(generator, d_b) for _ in range(terms)]
    xs = [gen.gen_unit_vector(generator, d_c2) for _ in range(terms)]
    ys = [np.exp(1j * phase) * x for x in xs]

    total = sum(p * math.cos(xi) * math.sin(xi) for p, xi in zip(weights, xis))
    one_minus_f = cross / total
    f = 1 - one_minus_f
    if not 0 < f < 1:
        raise errors.ValidityError(f"Solved f={f!r} is outside (0, 1)")

    projectors = [np.outer(np.kron(w, x), np.kron(w, x).conj()) for w, x in zip(ws, xs)]
    b_weights = [one_minus_f * p * math.cos(xi) * math.sin(xi) / cross for p, xi in zip(weights, xis)]
    beta = sum(b * proj for b, proj in zip(b_weights, projectors))

    w0, beta0 = _solve_diagonal_blocks(
        d00, beta, [one_minus_f * p * math.cos(xi) ** 2 for p, xi in zip(weights, xis)], projectors
    )
    w1, beta1 = _solve_diagonal_blocks(
        d11, beta, [one_minus_f * p * math.sin(xi) ** 2 for p, xi in zip(weights, xis)], projectors
    )
    nu = math.atan2(math.sqrt(max(w1, 0.0)), math.sqrt(max(w0, 0.0)))

    bc = hilbert.HilbertStructure([d_b, d_c2], ("B", "C2"))
    eps_terms = [EpsTerm(p, xi, w, x, y) for p, xi, w, x, y in zip(weights, xis, ws, xs, ys)]
    params = DecompositionParams(
        theta,
        mu,
        f,
        nu,
        hilbert.StateMatrix(bc, beta0),
        hilbert.StateMatrix(bc, beta1),
        eps_terms,
    )
    alpha = eb_subspace.normal_form_state(theta, mu, ("A", "C1"))
    return alpha, hilbert.StateMatrix(bc, beta), params


def pt_symmetric_fixture(theta, mu, d_b, d_c2, terms, generator):
    """
    Consistent fixture whose epsilon is also given in the separable PT
    form: q_k = p_k, eta_k = xi_k, psi_k = |w_k, x_k>.
    """
    alpha, beta, params = consistent_fixture(theta, mu, d_b, d_c2, terms, generator)
    params.pt_terms = [PtTerm(t.p, t.xi, t.wx()) for t in params.eps_terms]
    return alpha, beta, params


class ZetaTerm:
    """z |dd><dd|_{AC1} x sigma_{BC2} for digit d"""

    def __init__(self, z, digit, sigma):
        if z <= 0:
            raise errors.ValidityError("Zeta weight have to be positive")
        if digit not in (0, 1):
            raise errors.ValidityError(f"Digit have to be 0 or 1, got {digit!r}")
        self.z = float(z)
        self.digit = digit
        self.sigma = hilbert.normalize(sigma)


def build_zeta(params, zeta_terms):
    side = 4 * params.d_b * params.d_c2
    m = np.zeros((side, side), dtype=complex)
    for t in zeta_terms:
        m += t.z * np.kron(np.outer(_ket(t.digit), _ket(t.digit)), t.sigma.matrix)
    return _state(params, _to_standard_order(m, params.d_b, params.d_c2))


def merge_separable_part(params, zeta_terms):
    """
    Fold a zeta part living on |00><00| and |11><11| of A C1 into delta.
    Returns parameters of (delta + epsilon + zeta) / (1 + z).
    """
    z0 = sum(t.z for t in zeta_terms if t.digit == 0)
    z1 = sum(t.z for t in zeta_terms if t.digit == 1)
    z = z0 + z1
    w0 = params.f * math.cos(params.nu) ** 2
    w1 = params.f * math.sin(params.nu) ** 2
    blocks = []
    for digit, weight, beta, extra in ((0, w0, params.beta0, z0), (1, w1, params.beta1, z1)):
        m = weight * beta.matrix + sum(t.z * t.sigma.matrix for t in zeta_terms if t.digit == digit)
        total = weight + extra
        blocks.append(hilbert.StateMatrix(beta.structure, m / total if total > 0 else beta.matrix))
    f = (params.f + z) / (1 + z)
    nu = math.atan2(math.sqrt(w1 + z1), math.sqrt(w0 + z0))
    return DecompositionParams(
        params.theta,
        params.mu,
        f,
        nu,
        blocks[0],
        blocks[1],
        params.eps_terms,
        params.pt_terms,
    )
