"""Pure numpy kernels, used when the compiled extension is unavailable.

Same signatures as :mod:`crflat._jetcore`.
"""

import numpy as np


def _scatter(index, values, n):
    if np.iscomplexobj(values):
        return (np.bincount(index, weights=values.real, minlength=n)
                + 1j * np.bincount(index, weights=values.imag, minlength=n))
    return np.bincount(index, weights=values, minlength=n)


def mul(space, a, b):
    return _scatter(space.pair_k, a[space.pair_i] * b[space.pair_j], space.size)


def div(space, a, b):
    # degree-by-degree: contributions to degree d only involve lower degrees
    out = np.zeros_like(a)
    b0 = b[0]
    out[0] = a[0] / b0
    for lo, hi, I, J, K in space.division_groups:
        s = _scatter(K, out[I] * b[J], hi - lo)
        out[lo:hi] = (a[lo:hi] - s) / b0
    return out


def compose(space, coefs, h):
    out = np.zeros_like(h)
    out[0] = coefs[-1]
    for c in coefs[-2::-1]:
        out = mul(space, out, h)
        out[0] += c
    return out
