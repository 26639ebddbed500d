import numpy as np

import scipy.stats


_MASK64 = 2**64 - 1


def splitmix64(state):
    """
    One step of the splitmix64 generator. Returns (new_state, output).
    """
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def sub_seeds(seed, count):
    """
    Deterministic schedule of per-restart seeds derived from one 64-bit seed
    """
    state = int(seed) & _MASK64
    out = []
    for _ in range(count):
        state, value = splitmix64(state)
        out.append(value)
    return out


def rng(seed):
    return np.random.default_rng(int(seed) & _MASK64)


def gen_complex(generator, shape):
    return generator.standard_normal(shape) + 1j * generator.standard_normal(shape)


def gen_unit_vector(generator, dim):
    v = gen_complex(generator, dim)
    return v / np.linalg.norm(v)


def gen_unitary(generator, dim):
    if dim == 1:
        return np.array([[np.exp(2j * np.pi * generator.random())]])
    return scipy.stats.unitary_group.rvs(dim, random_state=generator)


def gen_invertible(generator, dim, min_singular=0.2):
    """
    Random well conditioned invertible matrix
    """
    while True:
        m = gen_complex(generator, (dim, dim))
        s = np.linalg.svd(m, compute_uv=False)
        if s[-1] / s[0] > min_singular:
            return m


def gen_psd(generator, dim, rank=None):
    """
    Random PSD matrix of given rank with unit trace
    """
    if rank is None:
        rank = dim
    g = gen_complex(generator, (dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def gen_isometry(generator, rows, cols):
    q, _ = np.linalg.qr(gen_complex(generator, (rows, cols)))
    return q
