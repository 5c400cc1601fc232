"""AdaGrad sweep over co-occurrence entries for one epoch of GloVe training.

Gradients are the exact derivatives of ``f(x) * (w_i . w~_j + b_i + b~_j -
log x)^2`` with ``f(x) = min(1, (x / x_max)^alpha)``; squared-gradient
accumulators start at 1 so the first step is bounded by the learning rate.
The reported loss is accumulated before each entry's update.
"""

import math

from . import njit, numba_enabled


def _glove_epoch_loop(w_focus, w_ctx, b_focus, b_ctx, sq_focus, sq_ctx,
                      sq_bf, sq_bc, rows, cols, logx, weight, order, lr):
    dim = w_focus.shape[1]
    total = 0.0
    for t in range(order.shape[0]):
        e = order[t]
        i = rows[e]
        j = cols[e]
        f = weight[e]
        pred = b_focus[i] + b_ctx[j]
        for k in range(dim):
            pred += w_focus[i, k] * w_ctx[j, k]
        resid = pred - logx[e]
        total += f * resid * resid
        common = 2.0 * f * resid
        for k in range(dim):
            gi = common * w_ctx[j, k]
            gj = common * w_focus[i, k]
            w_focus[i, k] -= lr * gi / math.sqrt(sq_focus[i, k])
            w_ctx[j, k] -= lr * gj / math.sqrt(sq_ctx[j, k])
            sq_focus[i, k] += gi * gi
            sq_ctx[j, k] += gj * gj
        b_focus[i] -= lr * common / math.sqrt(sq_bf[i])
        b_ctx[j] -= lr * common / math.sqrt(sq_bc[j])
        sq_bf[i] += common * common
        sq_bc[j] += common * common
    return total


_glove_epoch_nb = njit(cache=True, nogil=True)(_glove_epoch_loop)


def glove_epoch(w_focus, w_ctx, b_focus, b_ctx, sq_focus, sq_ctx, sq_bf, sq_bc,
                rows, cols, logx, weight, order, lr):
    impl = _glove_epoch_nb if numba_enabled() else _glove_epoch_loop
    return impl(w_focus, w_ctx, b_focus, b_ctx, sq_focus, sq_ctx, sq_bf, sq_bc,
                rows, cols, logx, weight, order, lr)
