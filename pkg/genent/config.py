import hashlib
import json
import logging
import os

import jinja2

import yaml

from . import errors


DEFAULTS = {
    "herm": 1e-10,
    "psd": 1e-9,
    "trace": 1e-10,
    "rank": 1e-10,
    "membership": 1e-8,
    "pencil": 1e-8,
    "verdict": 1e-8,
    "distill": 1e-10,
    "alternation": 1e-12,
    "mixture": 1e-8,
    "stall": 1e-12,
    "stall_rel": 1e-6,
    "stall_window": 200,
    "witness": 1e-9,
    "decomposition": 1e-8,
    "proportional": 1e-10,
}

DEFAULT_DIM_CAP = 64
DEFAULT_RESTARTS = 50
DEFAULT_MAX_ITERS = 20000


class Tolerances:
    """
    Numerical thresholds used across the package. Keys are fixed, values
    can be overridden from a config file or from the command line.
    """

    def __init__(self, overrides=None):
        self._data = dict(DEFAULTS)
        if overrides:
            self.override(overrides)

    def override(self, overrides):
        for key, value in overrides.items():
            if key not in DEFAULTS:
                raise errors.ValidityError(
                    f"Unknown tolerance key '{key}' (known: {', '.join(sorted(DEFAULTS))})"
                )
            value = float(value)
            if not value > 0:
                raise errors.ValidityError(f"Tolerance {key} have to be positive")
            self._data[key] = value
        logging.debug(f"Tolerances now {self._data}")

    def __getitem__(self, key):
        return self._data[key]

    def __repr__(self):
        return f"<Tolerances {self._data}>"

    def dump(self):
        return dict(self._data)


_current = Tolerances()
_dim_cap_default = DEFAULT_DIM_CAP


def tolerances():
    return _current


def tol(key):
    return _current[key]


def configure(overrides=None, cap=None):
    """Replace process wide tolerances with defaults plus given overrides"""
    global _current, _dim_cap_default
    _current = Tolerances(overrides)
    _dim_cap_default = DEFAULT_DIM_CAP if cap is None else int(cap)
    return _current


def dim_cap():
    value = os.getenv("GENENT_DIM_CAP", str(_dim_cap_default))
    try:
        cap = int(value)
    except ValueError:
        raise errors.ValidityError(f"GENENT_DIM_CAP have to be integer, got '{value}'")
    if cap < 1:
        raise errors.ValidityError(f"Dimension cap have to be positive, got {cap}")
    return cap


def check_dim_cap(total, cap=None):
    if cap is None:
        cap = dim_cap()
    if total > cap:
        raise errors.DimensionCapError(total, cap)


def parse_overrides(items):
    """
    Parse list of "key=value" strings as given by `--tol` into a dict.
    """
    out = {}
    for item in items:
        if item == "":
            logging.warning("Got empty key=value pair to set - ignoring it")
            continue
        if "=" not in item:
            raise errors.ValidityError(f"Expected KEY=VAL, got '{item}'")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise errors.ValidityError(f"Value of {key} is not a number: '{value}'")
    return out


def load_config(fp):
    """
    Load YAML config from file pointer. Values may use Jinja2 expressions
    with `environ` available, e.g. `{{ environ["GENENT_RESTARTS"] }}`.
    """
    raw = fp.read()
    env = jinja2.Environment(loader=jinja2.DictLoader({"config": raw}))
    rendered = env.get_template("config").render({"environ": os.environ})
    try:
        data = yaml.load(rendered, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        raise errors.ValidityError(f"Failed to parse config: {e}")
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise errors.ValidityError("Config file have to contain a mapping")
    logging.debug(f"Loaded config from {getattr(fp, 'name', '?')}: {data}")
    unknown = set(data) - {"tolerances", "dim_cap", "restarts", "max_iters"}
    if unknown:
        raise errors.ValidityError(f"Unknown config sections: {', '.join(sorted(unknown))}")
    return data


class RunConfig:
    """
    Everything that influences numerical output of one command run.
    """

    def __init__(
        self,
        command,
        inputs=None,
        out=None,
        seed=0,
        tol_overrides=None,
        restarts=DEFAULT_RESTARTS,
        max_iters=DEFAULT_MAX_ITERS,
        cap=None,
    ):
        if seed < 0:
            raise errors.ValidityError(f"Seed have to be non-negative, got {seed}")
        if restarts < 1:
            raise errors.ValidityError(f"Restarts have to be at least 1, got {restarts}")
        if max_iters < 1:
            raise errors.ValidityError("It does not make sense to iterate less than once")
        self.command = command
        self.inputs = list(inputs or [])
        self.out = out
        self.seed = int(seed) % 2**64
        self.tol_overrides = dict(tol_overrides or {})
        self.restarts = int(restarts)
        self.max_iters = int(max_iters)
        self.tolerances = Tolerances(self.tol_overrides)
        configure(self.tol_overrides, cap)
        self.dim_cap = dim_cap()

    def __repr__(self):
        return f"<RunConfig command={self.command} seed={self.seed} restarts={self.restarts} max_iters={self.max_iters}>"

    def dump(self):
        return {
            "tolerances": self.tolerances.dump(),
            "seed": self.seed,
            "restarts": self.restarts,
            "max_iters": self.max_iters,
            "dim_cap": self.dim_cap,
        }

    def config_hash(self):
        payload = json.dumps(self.dump(), sort_keys=True)
        return hashlib.sha256(payload.encode("UTF-8")).hexdigest()


def add_run_opts(parser):
    parser.add_argument(
        "--seed",
        type=int,
        default=int(os.getenv("GENENT_SEED", "0")),
        help="Seed for all randomized searches (also use env variable GENENT_SEED)",
    )
    parser.add_argument(
        "--tol",
        action="append",
        default=None,
        help=f"Override tolerance as KEY=VAL, repeatable, known keys: {', '.join(sorted(DEFAULTS))}",
    )
    parser.add_argument(
        "--restarts",
        type=int,
        default=None,
        help=f"Number of random restarts of searches (default {DEFAULT_RESTARTS})",
    )
    parser.add_argument(
        "--max-iters",
        type=int,
        default=None,
        help=f"Iteration cap of alternating projections (default {DEFAULT_MAX_ITERS})",
    )
    parser.add_argument(
        "--out",
        default=None,
        help="Where to write the produced file",
    )


def run_config_from_args(args):
    """
    Merge config file (if any) and command line into RunConfig. Command
    line wins.
    """
    data = {}
    if getattr(args, "config", None) is not None:
        data = load_config(args.config)
    overrides = dict(data.get("tolerances") or {})
    overrides.update(parse_overrides(getattr(args, "tol", []) or []))
    restarts = args.restarts if args.restarts is not None else data.get("restarts", DEFAULT_RESTARTS)
    max_iters = args.max_iters if args.max_iters is not None else data.get("max_iters", DEFAULT_MAX_ITERS)
    return RunConfig(
        command=args.command,
        inputs=[v for k, v in sorted(vars(args).items()) if k in ("recipe", "state", "certificate") and v],
        out=args.out,
        seed=args.seed,
        tol_overrides=overrides,
        restarts=restarts,
        max_iters=max_iters,
        cap=data.get("dim_cap"),
    )
