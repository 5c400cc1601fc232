"""Random-walk emission kernel: drifting unit context vector, softmax sampling.

One step: emit a sense index from the exact softmax over ``c . s_i``, then
move ``c`` towards a fresh unit-sphere direction ``g`` and renormalize,
``c <- normalize((1 - kappa) * c + kappa * g)``.  All randomness (the unit
directions ``G`` and the inverse-CDF uniforms ``U``) is drawn by the caller,
so both implementations consume the identical stream.
"""

import math

import numpy as np

from . import njit, numba_enabled


def _walk_sample_loop(sense_vecs, c, gauss, kappa, uniforms, out_senses):
    n, d = sense_vecs.shape
    steps = gauss.shape[0]
    scratch = np.empty(n)
    for t in range(steps):
        mx = -1.0e300
        for i in range(n):
            acc = 0.0
            for k in range(d):
                acc += c[k] * sense_vecs[i, k]
            scratch[i] = acc
            if acc > mx:
                mx = acc
        total = 0.0
        for i in range(n):
            e = math.exp(scratch[i] - mx)
            scratch[i] = e
            total += e
        target = uniforms[t] * total
        idx = n - 1
        run = 0.0
        for i in range(n):
            run += scratch[i]
            if run >= target:
                idx = i
                break
        out_senses[t] = idx
        nrm = 0.0
        for k in range(d):
            c[k] = (1.0 - kappa) * c[k] + kappa * gauss[t, k]
            nrm += c[k] * c[k]
        nrm = math.sqrt(nrm)
        for k in range(d):
            c[k] /= nrm


_walk_sample_nb = njit(cache=True, nogil=True)(_walk_sample_loop)


def walk_contexts(c0, gauss, kappa):
    """Context vector at every emission step, plus the post-walk context."""
    steps, d = gauss.shape
    contexts = np.empty((steps, d))
    c = np.asarray(c0, dtype=np.float64).copy()
    for t in range(steps):
        contexts[t] = c
        c = (1.0 - kappa) * c + kappa * gauss[t]
        c /= np.sqrt(c @ c)
    return contexts, c


def _walk_sample_np(sense_vecs, c, gauss, kappa, uniforms, out_senses):
    contexts, c_out = walk_contexts(c, gauss, kappa)
    dots = contexts @ sense_vecs.T
    dots -= dots.max(axis=1, keepdims=True)
    np.exp(dots, out=dots)
    cum = np.cumsum(dots, axis=1)
    targets = uniforms * cum[:, -1]
    hit = cum >= targets[:, None]
    out_senses[:] = np.where(hit.any(axis=1), hit.argmax(axis=1), sense_vecs.shape[0] - 1)
    c[:] = c_out


def walk_sample(sense_vecs, c, gauss, kappa, uniforms):
    """Emit one sense index per step; updates ``c`` in place.

    ``gauss`` rows must already lie on the unit sphere.
    """
    out = np.empty(gauss.shape[0], dtype=np.int64)
    if numba_enabled():
        _walk_sample_nb(sense_vecs, c, gauss, kappa, uniforms, out)
    else:
        _walk_sample_np(sense_vecs, c, gauss, kappa, uniforms, out)
    return out
