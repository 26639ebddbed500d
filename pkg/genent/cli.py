import argparse
import logging
import os
import os.path

import tabulate

from . import biseparable
from . import certificate
from . import codec
from . import config
from . import constructions
from . import criteria
from . import eb_subspace
from . import errors
from . import hilbert
from . import skelet
from . import sweep


RECIPE_KINDS = ("chain", "pair", "ring", "satellite", "triangle")

EXIT_INVALID = 2
EXIT_DIM_CAP = 3
EXIT_STRUCTURE = 4
EXIT_VERIFY = 5


def _stem(path):
    """Path without ".json" and ".state" suffixes"""
    base = path[:-5] if path.endswith(".json") else path
    return base[:-6] if base.endswith(".state") else base


def _cert_stem(path):
    return path[: -len(".cert.json")] if path.endswith(".cert.json") else _stem(path)


def _parse_cut(value):
    cut = [i.strip() for i in value.split(",") if i.strip() != ""]
    if not cut:
        raise argparse.ArgumentTypeError("Cut needs at least one label")
    return cut


def _load_recipe(path):
    recipe = codec.load_json(path)
    if not isinstance(recipe, dict):
        raise errors.ValidityError(f"Recipe {path} have to be a JSON object")
    kind = recipe.get("kind")
    if kind not in RECIPE_KINDS:
        raise errors.ValidityError(f"Unknown recipe kind '{kind}' (known: {', '.join(RECIPE_KINDS)})")
    inputs = recipe.get("inputs")
    if not isinstance(inputs, list) or len(inputs) == 0:
        raise errors.ValidityError("Recipe needs a non-empty list of inputs")
    return recipe


def _expect_inputs(kind, states, count):
    if len(states) != count:
        raise errors.ValidityError(f"Recipe {kind} needs {count} inputs, got {len(states)}")


def cmd_construct(args, run_config, rdata):
    recipe = _load_recipe(args.recipe)
    here = os.path.dirname(os.path.abspath(args.recipe))
    kind = recipe["kind"]
    options = recipe.get("options") or {}
    certify = bool(options.get("certify", True))
    states = [codec.load_state(os.path.join(here, p)) for p in recipe["inputs"]]
    logging.info(f"Constructing {kind} from {len(states)} inputs")

    if kind == "chain":
        bases = [
            None if p is None else eb_subspace.load_basis(os.path.join(here, p))
            for p in recipe.get("bases") or [None] * len(states)
        ]
        chain = constructions.merged_chain(
            states,
            bases,
            seed=run_config.seed,
            certify=certify,
            restarts=run_config.restarts,
            max_iters=run_config.max_iters,
        )
        state = chain.state
        results = chain.dump()
        results["ledger_rows"] = chain.ledger.to_rows()
    else:
        if recipe.get("bases"):
            logging.warning(f"Recipe {kind} does not use EB bases, ignoring them")
        if kind == "pair":
            _expect_inputs(kind, states, 2)
            state = constructions.merged_pair_state(*states)
        elif kind == "ring":
            state = constructions.ring_state(states)
        elif kind == "satellite":
            state = constructions.satellite_state(states)
        else:
            _expect_inputs(kind, states, 3)
            state = constructions.triangle_state(*states)
        results = constructions.construction_report(
            kind,
            state,
            seed=run_config.seed,
            certify=certify,
            restarts=run_config.restarts,
            max_iters=run_config.max_iters,
        )

    if recipe.get("labels"):
        state = hilbert.relabel(state, recipe["labels"])

    out = run_config.out if run_config.out else _stem(args.recipe) + ".state.json"
    codec.save_state(state, out)
    print(f"State {state.structure} written to {out}")

    cert = results.get("ge_certificate")
    if cert and recipe.get("labels"):
        logging.warning("Recipe relabels the state, GE certificate stays in the report only")
    elif cert:
        cert_out = _stem(out) + ".cert.json"
        codec.dump_json(cert, cert_out)
        print(f"{cert['verdict']} certificate written to {cert_out}")

    rdata.set("name", f"construct {kind}")
    rdata.set("results", results)
    rdata.filename = _stem(out) + ".report.json"
    return 0


def _analyze_decomposition(rho, params_path):
    params = biseparable.load_params(params_path)
    if len(rho.structure) == 3:
        rho = hilbert.unmerge(rho, rho.labels[2])
    if len(rho.structure) != 4:
        raise errors.ArityError(f"Expected state on {biseparable.LABELS}, got {rho.structure}")
    rho = hilbert.normalize(hilbert.relabel(rho, biseparable.LABELS))
    alpha = hilbert.partial_trace(rho, ["A", "C1"])
    beta = hilbert.partial_trace(rho, ["B", "C2"])
    results = {
        "parameters": params.dump(),
        "marginal_equations": biseparable.verify_marginal_equations(alpha, beta, params),
        "residual": biseparable.decomposition_residual(rho, params),
        "werner_reduction": biseparable.werner_reduction(beta),
    }
    if params.eps_terms:
        results["pt_symmetric_branch"] = biseparable.verify_pt_symmetric_branch(
            biseparable.build_epsilon(params), params, beta=beta
        )
    return results


def _analyze_cascade(rho, basis_path):
    basis = eb_subspace.load_basis(basis_path)
    coeffs = eb_subspace.verify_eb_membership(rho, basis)
    cascade = eb_subspace.projection_cascade(rho, basis)
    pair = eb_subspace.reduce_to_canonical_pair(rho, basis, cascade)
    results = {
        "membership_residual": coeffs.residual,
        "cascade": cascade.dump(),
        "canonical_pair": codec.state_to_dict(hilbert.normalize(pair)),
        "canonical_pair_certificate": criteria.ppt_certificate(pair, [pair.labels[0]]).to_dict(),
    }
    try:
        results["normal_form"] = eb_subspace.normal_form_rank2(hilbert.normalize(pair)).dump()
    except errors.NormalFormError as e:
        logging.warning(f"Canonical pair has no rank two normal form: {e}")
        results["normal_form"] = {"error": str(e)}
    return results


def _analyze_werner(rho, run_config):
    params = criteria.werner_params_of(rho)
    cut = [rho.labels[0]]
    return {
        "werner": params.dump(),
        "class": criteria.classify_werner(params).value,
        "certificates": {
            "ppt": criteria.ppt_certificate(rho, cut, run_config.seed).to_dict(),
            "distill": criteria.one_copy_distillable_search(
                rho, cut, run_config.restarts, run_config.seed
            ).to_dict(),
        },
    }


def cmd_analyze(args, run_config, rdata):
    rho = codec.load_state(args.state)
    config.check_dim_cap(rho.structure.total)

    cert = None
    if args.ppt is not None:
        name = "ppt"
        cert = criteria.ppt_certificate(rho, args.ppt, run_config.seed)
    elif args.distill is not None:
        name = "distill"
        cert = criteria.one_copy_distillable_search(rho, args.distill, run_config.restarts, run_config.seed)
    elif args.ge:
        name = "ge"
        cert = criteria.ppt_mixture_search(rho, run_config.max_iters, seed=run_config.seed)

    if cert is not None:
        out = run_config.out if run_config.out else _stem(args.state) + ".cert.json"
        codec.dump_json(cert.to_dict(), out)
        print(f"{cert.verdict.value} (value {cert.value}) written to {out}")
        rdata.set("name", f"analyze {name}")
        rdata.set("results", {"certificate_file": os.path.basename(out), "certificate": cert.to_dict()})
        rdata.filename = _cert_stem(out) + ".report.json"
        return 0

    if args.werner:
        name = "werner"
        results = _analyze_werner(rho, run_config)
        verdict = results["class"]
    elif args.decomposition is not None:
        name = "decomposition"
        results = _analyze_decomposition(rho, args.decomposition)
        verdict = results["marginal_equations"]["verdict"]
    else:
        name = "cascade"
        results = _analyze_cascade(rho, args.cascade)
        verdict = results["canonical_pair_certificate"]["verdict"]

    out = run_config.out if run_config.out else _stem(args.state) + ".report.json"
    rdata.set("name", f"analyze {name}")
    rdata.set("results", results)
    rdata.filename = out
    print(f"{verdict} written to {out}")
    return 0


def cmd_verify(args, run_config, rdata):
    cert = certificate.Certificate.from_dict(codec.load_json(args.certificate))
    rho = codec.load_state(args.state)
    checks = cert.verify(rho)
    rows = [[name, "PASS" if passed else "FAIL", detail] for name, passed, detail in checks]
    print(tabulate.tabulate(rows, headers=["check", "result", "detail"], tablefmt="simple"))

    failed = [name for name, passed, _ in checks if not passed]
    rdata.set("name", f"verify {cert.verdict.value}")
    rdata.set("results", {"checks": rows, "failed": failed})
    if run_config.out:
        rdata.filename = run_config.out
    if failed:
        logging.error(f"Verification failed: {', '.join(failed)}")
        return EXIT_VERIFY
    return 0


def cmd_sweep(args, run_config, rdata):
    result = sweep.run(args.kind, args.count, run_config.seed, args.restarts)
    rows = [
        [name, stats.get("samples"), stats.get("min"), stats.get("median"), stats.get("max")]
        for name, stats in result["summaries"].items()
    ]
    print(tabulate.tabulate(rows, headers=["quantity", "samples", "min", "median", "max"], floatfmt=".3e"))

    rdata.set("name", f"sweep {args.kind}")
    rdata.set("results", result)
    rdata.filename = run_config.out if run_config.out else f"sweep-{args.kind}.report.json"
    if not result["passed"]:
        logging.error(f"Sweep {args.kind} has {len(result['failures'])} failing instances")
        return 1
    print(f"Sweep {args.kind} passed")
    return 0


COMMANDS = {
    "construct": cmd_construct,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def _add_common(parser):
    config.add_run_opts(parser)
    skelet.add_logging_opts(parser)


def build_parser():
    parser = argparse.ArgumentParser(
        description="Construct multipartite states from bipartite blocks and certify their entanglement",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    subparsers = parser.add_subparsers(dest="command", help="Select one of sub-commands")

    # Create the parser for the "construct" command
    parser_construct = subparsers.add_parser("construct", help="Build a state from a recipe")
    parser_construct.add_argument("recipe", help="Recipe JSON file")
    _add_common(parser_construct)

    # Create the parser for the "analyze" command
    parser_analyze = subparsers.add_parser("analyze", help="Run an entanglement analysis of a state")
    parser_analyze.add_argument("state", help="State JSON file")
    group = parser_analyze.add_mutually_exclusive_group(required=True)
    group.add_argument("--ppt", type=_parse_cut, metavar="CUT", help="PPT test, CUT is comma separated labels")
    group.add_argument("--werner", action="store_true", help="Werner parameters and classification")
    group.add_argument("--distill", type=_parse_cut, metavar="CUT", help="One-copy distillability search")
    group.add_argument("--ge", action="store_true", help="Genuine multipartite entanglement certification")
    group.add_argument("--decomposition", metavar="PARAMS", help="Check a biseparable decomposition")
    group.add_argument("--cascade", metavar="EBBASIS", help="Projection cascade on an EB subspace")
    _add_common(parser_analyze)

    # Create the parser for the "verify" command
    parser_verify = subparsers.add_parser("verify", help="Re-check a certificate against a state")
    parser_verify.add_argument("certificate", help="Certificate JSON file")
    parser_verify.add_argument("state", help="State JSON file")
    _add_common(parser_verify)

    # Create the parser for the "sweep" command
    parser_sweep = subparsers.add_parser("sweep", help="Run one of the randomized acceptance sweeps")
    parser_sweep.add_argument("kind", choices=sweep.KINDS, help="Sweep to run")
    parser_sweep.add_argument("--count", type=int, default=None, help="Number of instances, full size by default")
    _add_common(parser_sweep)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return EXIT_INVALID

    try:
        with skelet.run_setup(args) as (run_config, rdata):
            return COMMANDS[args.command](args, run_config, rdata)
    except errors.DimensionCapError as e:
        logging.error(str(e))
        return EXIT_DIM_CAP
    except (errors.LabelError, errors.ArityError, errors.ShapeError) as e:
        logging.error(f"{type(e).__name__}: {e}")
        return EXIT_STRUCTURE
    except errors.GenentError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return EXIT_INVALID
