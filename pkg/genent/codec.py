import json
import logging

import numpy as np

from . import errors
from . import hilbert


def encode_complex(value):
    value = complex(value)
    return [float(value.real), float(value.imag)]


def encode_vector(vector):
    return [encode_complex(i) for i in np.asarray(vector).reshape(-1)]


def encode_matrix(matrix):
    """
    Row-major list of [re, im] pairs. Python float repr is the shortest
    string that reloads to the same double.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise errors.ShapeError(f"Expected 2D matrix, got shape {matrix.shape}")
    return [encode_vector(row) for row in matrix]


def decode_vector(data):
    try:
        return np.array([complex(re, im) for re, im in data], dtype=complex)
    except (TypeError, ValueError) as e:
        raise errors.ValidityError(f"Malformed complex vector: {e}")


def decode_matrix(data):
    rows = [decode_vector(row) for row in data]
    if len(rows) == 0:
        return np.zeros((0, 0), dtype=complex)
    if len(set(len(r) for r in rows)) != 1:
        raise errors.ValidityError("Matrix rows have different lengths")
    return np.array(rows)


def state_to_dict(rho):
    out = rho.structure.dump()
    out["matrix"] = encode_matrix(rho.matrix)
    return out


def state_from_dict(data):
    for key in ("dims", "labels", "matrix"):
        if key not in data:
            raise errors.ValidityError(f"State document misses key '{key}'")
    structure = hilbert.HilbertStructure(data["dims"], data["labels"], data.get("factors"))
    return hilbert.StateMatrix(structure, decode_matrix(data["matrix"]))


def load_json(path):
    try:
        with open(path, "r") as fp:
            data = json.load(fp)
    except FileNotFoundError:
        raise errors.ValidityError(f"File {path} does not exist")
    except json.JSONDecodeError as e:
        raise errors.ValidityError(f"File {path} is not valid JSON: {e}")
    logging.debug(f"Loaded {path}")
    return data


def dump_json(data, path):
    with open(path, "w") as fp:
        json.dump(data, fp, sort_keys=True, indent=4)
        fp.write("\n")
    logging.debug(f"Saved {path}")


def load_state(path):
    return state_from_dict(load_json(path))


def save_state(rho, path):
    dump_json(state_to_dict(rho), path)
