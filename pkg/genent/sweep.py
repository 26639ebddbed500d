"""
Randomized and grid checks of the numerical routines at full size. Each
sweep returns a plain dict with its parameters, the list of failing
instances and `data_stats` summaries of the measured quantities, ready to
be stored in a report.
"""

import logging
import math

import numpy as np

from . import biseparable
from . import constructions
from . import criteria
from . import data
from . import eb_subspace
from . import errors
from . import gen
from . import hilbert
from . import measures
from .certificate import Verdict


KINDS = ("werner", "cascade", "normal-form", "decomposition", "concurrence", "ge-sanity")

DEFAULT_COUNTS = {
    "werner": 1,
    "cascade": 200,
    "normal-form": 100,
    "decomposition": 50,
    "concurrence": 30,
    "ge-sanity": 20,
}

PARAMETER_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-9
EQUATION_TOL = 1e-10
PERTURBATION = 1e-3
PERTURBATION_FLOOR = 1e-5
ROOF_ABOVE = 5e-3
ROOF_BELOW = 1e-4


def _result(kind, parameters, failures, samples):
    return {
        "kind": kind,
        "parameters": parameters,
        "passed": len(failures) == 0,
        "failures": failures,
        "summaries": {name: data.data_stats(values) for name, values in sorted(samples.items())},
        "histograms": {name: data.get_hist(values) for name, values in sorted(samples.items())},
    }


def werner_sweep(dims=(2, 3, 4), step=0.01, restarts_found=50, restarts_none=200, seed=0):
    """
    Grid over p in [-1, 1]: PPT test against p >= -1/d, one-copy search
    has to succeed below -1/2 - step and fail on [-1/2 + step, -1/d).
    """
    steps = int(round(2 / step))
    failures = []
    samples = {"ppt_margin": [], "distill_found": [], "distill_none": []}
    for d in dims:
        for k in range(steps + 1):
            p = -1.0 + k * step
            params = criteria.WernerParams(d, max(-1.0, min(1.0, p)))
            rho = criteria.werner_state(params)
            ppt, lmin = criteria.ppt_check(rho, ["A"])
            expected = params.p >= -1.0 / d - 1e-12
            samples["ppt_margin"].append(lmin)
            if ppt != expected:
                failures.append({"d": d, "p": params.p, "check": "ppt", "min_eigenvalue": lmin})

            if params.p < -0.5 - step - 1e-12:
                cert = criteria.one_copy_distillable_search(rho, ["A"], restarts_found, seed)
                samples["distill_found"].append(cert.value)
                if cert.verdict != Verdict.ONE_COPY_DISTILLABLE:
                    failures.append({"d": d, "p": params.p, "check": "distillable", "value": cert.value})
            elif -0.5 + step - 1e-12 <= params.p < -1.0 / d - 1e-12:
                cert = criteria.one_copy_distillable_search(rho, ["A"], restarts_none, seed)
                samples["distill_none"].append(cert.value)
                if cert.verdict != Verdict.NOT_FOUND_DISTILLABLE:
                    failures.append({"d": d, "p": params.p, "check": "undistillable", "value": cert.value})
        logging.info(f"Werner grid for d={d} done, {len(failures)} failures so far")
    parameters = {
        "dims": list(dims),
        "step": step,
        "restarts_found": restarts_found,
        "restarts_none": restarts_none,
        "seed": seed,
    }
    return _result("werner", parameters, failures, samples)


def random_eb_state(generator, n, d_a, rank=None):
    """Random state supported on span{|a_i, i>} with random a_i"""
    basis = eb_subspace.EBBasis([gen.gen_unit_vector(generator, d_a) for _ in range(n)], n)
    if rank is None:
        rank = int(generator.integers(1, n + 1))
    coeffs = gen.gen_complex(generator, (n, rank))
    m = basis.span_vectors() @ coeffs
    m = m @ m.conj().T
    rho = hilbert.StateMatrix(basis.structure(("A", "C")), m / np.trace(m).real)
    return rho, basis


def cascade_sweep(count=200, ns=(3, 4, 5), d_as=(2, 3), seed=0, max_draws=100):
    """
    Projection cascade on random NPT states supported on EB spans. Every
    run has to end in an NPT state of rank at most two.
    """
    failures = []
    samples = {"final_rank": [], "final_min_eigenvalue": [], "draws": []}
    subs = gen.sub_seeds(seed, count)
    for i, sub in enumerate(subs):
        generator = gen.rng(sub)
        n = ns[i % len(ns)]
        d_a = d_as[(i // len(ns)) % len(d_as)]
        for draws in range(1, max_draws + 1):
            rho, basis = random_eb_state(generator, n, d_a)
            ppt, _ = criteria.ppt_check(rho, ["A"])
            if not ppt:
                break
        else:
            failures.append({"instance": i, "n": n, "d_a": d_a, "error": f"no NPT state in {max_draws} draws"})
            continue
        samples["draws"].append(draws)
        try:
            cascade = eb_subspace.projection_cascade(rho, basis)
        except errors.CascadeFailure as e:
            failures.append({"instance": i, "n": n, "d_a": d_a, "error": str(e)})
            continue
        npt, lmin = eb_subspace.npt_on_support(cascade.final_state)
        samples["final_rank"].append(cascade.final_rank)
        samples["final_min_eigenvalue"].append(lmin)
        if cascade.final_rank > 2 or not npt:
            failures.append(
                {"instance": i, "n": n, "d_a": d_a, "final_rank": cascade.final_rank, "min_eigenvalue": lmin}
            )
    parameters = {"count": count, "ns": list(ns), "d_as": list(d_as), "seed": seed}
    return _result("cascade", parameters, failures, samples)


def normal_form_sweep(count=100, seed=0, margin=0.1):
    """
    Forward-construct X0 Y0 applied to the normal form of random
    (theta, mu) and recover the parameters.
    """
    failures = []
    samples = {"parameter_error": [], "reconstruction_error": []}
    structure = hilbert.HilbertStructure([2, 2], ("A", "C"))
    for i, sub in enumerate(gen.sub_seeds(seed, count)):
        generator = gen.rng(sub)
        theta, mu = margin + (math.pi / 2 - 2 * margin) * generator.random(2)
        local = hilbert.LocalOperator(
            structure, [gen.gen_invertible(generator, 2), gen.gen_invertible(generator, 2)]
        )
        alpha = hilbert.normalize(
            hilbert.apply_local(eb_subspace.normal_form_state(theta, mu), local)
        )
        expected = eb_subspace.normal_form_canonical(theta, mu)
        try:
            nf = eb_subspace.normal_form_rank2(alpha)
        except errors.NormalFormError as e:
            failures.append({"instance": i, "theta": theta, "mu": mu, "error": str(e)})
            continue
        p_err = max(abs(nf.theta - expected[0]), abs(nf.mu - expected[1]))
        r_err = eb_subspace.reconstruction_error(alpha, nf)
        samples["parameter_error"].append(p_err)
        samples["reconstruction_error"].append(r_err)
        if p_err > PARAMETER_TOL or r_err > RECONSTRUCTION_TOL:
            failures.append(
                {"instance": i, "theta": theta, "mu": mu, "parameter_error": p_err, "reconstruction_error": r_err}
            )
    return _result("normal-form", {"count": count, "seed": seed, "margin": margin}, failures, samples)


def _perturbed_pt(params):
    terms = [biseparable.PtTerm(t.q, t.eta + PERTURBATION, t.psi) for t in params.pt_terms]
    return biseparable.DecompositionParams(
        params.theta, params.mu, params.f, params.nu, params.beta0, params.beta1, params.eps_terms, terms
    )


def _max_residual(result, keys):
    return max(result[k] for k in keys if result[k] is not None)


def decomposition_sweep(count=50, seed=0, margin=0.3, max_draws=20):
    """
    Consistent fixtures satisfy the marginal equations and the PT symmetric
    branch exactly; perturbing alpha or the PT form breaks them.
    """
    marginal = ("diag00", "diag11", "offdiag")
    branch = ("pt_form", "pt_diag00", "pt_diag11", "pt_offdiag")
    failures = []
    samples = {"marginal": [], "branch": [], "perturbed_marginal": [], "perturbed_branch": [], "draws": []}
    for i, sub in enumerate(gen.sub_seeds(seed, count)):
        generator = gen.rng(sub)
        for draws in range(1, max_draws + 1):
            theta, mu = margin + (math.pi / 2 - 2 * margin) * generator.random(2)
            d_b, d_c2 = (int(x) for x in generator.integers(2, 4, size=2))
            terms = int(generator.integers(1, 4))
            try:
                alpha, beta, params = biseparable.pt_symmetric_fixture(theta, mu, d_b, d_c2, terms, generator)
                break
            except errors.ValidityError as e:
                logging.debug(f"Fixture draw {draws} of instance {i} is infeasible: {e}")
        else:
            failures.append({"instance": i, "error": f"no feasible fixture in {max_draws} draws"})
            continue
        samples["draws"].append(draws)

        eqs = biseparable.verify_marginal_equations(alpha, beta, params)
        eps = biseparable.build_epsilon(params)
        pt = biseparable.verify_pt_symmetric_branch(eps, params, beta)
        r_m = _max_residual(eqs, marginal)
        if pt["verdict"] == biseparable.BRANCH_NOT_APPLICABLE:
            failures.append({"instance": i, "error": "epsilon is not PT symmetric", "asymmetry": pt["pt_asymmetry"]})
            continue
        r_b = _max_residual(pt, branch)

        moved = eb_subspace.normal_form_state(theta + PERTURBATION, mu, ("A", "C1"))
        p_m = _max_residual(biseparable.verify_marginal_equations(moved, beta, params), marginal)
        p_b = _max_residual(biseparable.verify_pt_symmetric_branch(eps, _perturbed_pt(params), beta), branch)

        samples["marginal"].append(r_m)
        samples["branch"].append(r_b)
        samples["perturbed_marginal"].append(p_m)
        samples["perturbed_branch"].append(p_b)
        if r_m >= EQUATION_TOL or r_b >= EQUATION_TOL or p_m <= PERTURBATION_FLOOR or p_b <= PERTURBATION_FLOOR:
            failures.append(
                {
                    "instance": i,
                    "theta": theta,
                    "mu": mu,
                    "marginal": r_m,
                    "branch": r_b,
                    "perturbed_marginal": p_m,
                    "perturbed_branch": p_b,
                }
            )
    parameters = {"count": count, "seed": seed, "margin": margin, "perturbation": PERTURBATION}
    return _result("decomposition", parameters, failures, samples)


def concurrence_sweep(count=30, seed=0, restarts=measures.ROOF_RESTARTS):
    """
    Randomized convex roof upper bound against the closed form concurrence
    of random two qubit states of every rank.
    """
    failures = []
    samples = {"gap": [], "concurrence": []}
    structure = hilbert.HilbertStructure([2, 2], ("A", "B"))
    for i, sub in enumerate(gen.sub_seeds(seed, count)):
        generator = gen.rng(sub)
        rank = 1 + i % 4
        rho = hilbert.StateMatrix(structure, gen.gen_psd(generator, 4, rank))
        exact = measures.concurrence_2qubit(rho)
        bound = measures.concurrence_roof_upper_bound(rho, restarts, sub)
        gap = bound - exact
        samples["gap"].append(gap)
        samples["concurrence"].append(exact)
        if gap > ROOF_ABOVE or gap < -ROOF_BELOW:
            failures.append({"instance": i, "rank": rank, "concurrence": exact, "bound": bound})
    return _result("concurrence", {"count": count, "seed": seed, "restarts": restarts}, failures, samples)


def random_biseparable_mixture(generator, dims=(2, 2, 2)):
    """
    Weighted mixture over the single-site cuts of pure states that are
    product across their cut, the rest of each vector random and so
    generically entangled.
    """
    structure = hilbert.HilbertStructure(list(dims))
    n = len(dims)
    weights = generator.dirichlet(np.ones(n))
    matrix = np.zeros((structure.total, structure.total), dtype=complex)
    for j, weight in enumerate(weights):
        perm = [j] + [i for i in range(n) if i != j]
        a = gen.gen_unit_vector(generator, dims[j])
        b = gen.gen_unit_vector(generator, structure.total // dims[j])
        w = np.kron(a, b).reshape([dims[i] for i in perm]).transpose(np.argsort(perm)).reshape(-1)
        matrix += weight * np.outer(w, w.conj())
    return hilbert.StateMatrix(structure, matrix)


def _random_local_ghz(generator, n=3):
    rho = constructions.ghz_state(n)
    u = np.array([[1.0]])
    for _ in range(n):
        u = np.kron(u, gen.gen_unitary(generator, 2))
    return hilbert.StateMatrix(rho.structure, u @ rho.matrix @ u.conj().T)


def _random_product(generator, n=3):
    vector = np.array([1.0 + 0j])
    for _ in range(n):
        vector = np.kron(vector, gen.gen_unit_vector(generator, 2))
    return hilbert.PureVector(hilbert.HilbertStructure([2] * n), vector).projector()


def ge_sanity_sweep(count=20, seed=0, max_iters=None):
    """
    Three qubit GHZ states under random local unitaries have to be
    certified genuinely entangled, random biseparable mixtures have to get
    a PPT mixture and random products a single part mixture. Every
    certificate has to verify.
    """
    failures = []
    samples = {"ghz_value": [], "mixture_residual": [], "mixture_parts": []}
    for i, sub in enumerate(gen.sub_seeds(seed, count)):
        generator = gen.rng(sub)
        cases = (
            ("ghz", _random_local_ghz(generator), Verdict.GE_CERTIFIED),
            ("biseparable", random_biseparable_mixture(generator), Verdict.PPT_MIXTURE_FEASIBLE),
            ("product", _random_product(generator), Verdict.PPT_MIXTURE_FEASIBLE),
        )
        for name, rho, expected in cases:
            cert = criteria.ppt_mixture_search(rho, max_iters=max_iters, seed=sub)
            failed = [check for check, passed, _ in cert.verify(rho) if not passed]
            parts = 0
            if cert.verdict == Verdict.PPT_MIXTURE_FEASIBLE:
                parts = sum(1 for p in cert.evidence["parts"] if np.linalg.norm(p) > 0)
                samples["mixture_parts"].append(parts)
                samples["mixture_residual"].append(cert.residual)
            elif cert.verdict == Verdict.GE_CERTIFIED:
                samples["ghz_value"].append(cert.value)
            if cert.verdict != expected or failed or (name == "product" and parts != 1):
                failures.append(
                    {"instance": i, "case": name, "verdict": cert.verdict.value, "failed_checks": failed, "parts": parts}
                )
    return _result("ge-sanity", {"count": count, "seed": seed}, failures, samples)


def run(kind, count=None, seed=0, restarts=None):
    """Dispatch sweep by its name, `count` None means the full size"""
    if kind not in KINDS:
        raise errors.ValidityError(f"Unknown sweep '{kind}' (known: {', '.join(KINDS)})")
    if count is None:
        count = DEFAULT_COUNTS[kind]
    logging.info(f"Running {kind} sweep with count {count} and seed {seed}")
    if kind == "werner":
        if restarts is None:
            return werner_sweep(seed=seed)
        return werner_sweep(seed=seed, restarts_found=restarts, restarts_none=max(restarts, 200))
    if kind == "cascade":
        return cascade_sweep(count, seed=seed)
    if kind == "normal-form":
        return normal_form_sweep(count, seed=seed)
    if kind == "decomposition":
        return decomposition_sweep(count, seed=seed)
    if kind == "ge-sanity":
        return ge_sanity_sweep(count, seed=seed)
    return concurrence_sweep(count, seed=seed, restarts=measures.ROOF_RESTARTS if restarts is None else restarts)
