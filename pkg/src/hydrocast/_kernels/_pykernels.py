"""Pure numpy versions of the fused LSTM step kernels.

Gate layout along the last axis of ``z``/``gates`` is [i | f | o | g],
each block ``H`` wide. Both functions write into the arrays they are
given and return nothing, mirroring the compiled kernels exactly.
"""

import numpy as np


def _sigmoid(x, out):
    # split on sign so exp never overflows
    pos = x >= 0
    e = np.exp(-np.abs(x))
    np.divide(1.0, 1.0 + e, out=out, where=pos)
    np.divide(e, 1.0 + e, out=out, where=~pos)
    return out


def forward_step(z, c_prev, gates, c, tanh_c, h):
    """Activate pre-activations ``z`` (B, 4H) and advance the cell.

    Fills ``gates`` (B, 4H), ``c``, ``tanh_c`` and ``h`` (B, H).
    """
    H = c_prev.shape[1]
    _sigmoid(z[:, :3 * H], gates[:, :3 * H])
    np.tanh(z[:, 3 * H:], out=gates[:, 3 * H:])
    i = gates[:, :H]
    f = gates[:, H:2 * H]
    o = gates[:, 2 * H:3 * H]
    g = gates[:, 3 * H:]
    np.multiply(f, c_prev, out=c)
    c += i * g
    np.tanh(c, out=tanh_c)
    np.multiply(o, tanh_c, out=h)


def backward_step(gates, c_prev, tanh_c, dh, dc, dz, dc_prev):
    """Backpropagate one cell step.

    ``dh`` is the total gradient reaching h_t, ``dc`` the gradient carried
    into c_t from step t+1. Fills ``dz`` (gradient w.r.t. pre-activations)
    and ``dc_prev`` (gradient w.r.t. c_{t-1}).
    """
    H = c_prev.shape[1]
    i = gates[:, :H]
    f = gates[:, H:2 * H]
    o = gates[:, 2 * H:3 * H]
    g = gates[:, 3 * H:]
    dct = dc + dh * o * (1.0 - tanh_c * tanh_c)
    dz[:, :H] = dct * g * i * (1.0 - i)
    dz[:, H:2 * H] = dct * c_prev * f * (1.0 - f)
    dz[:, 2 * H:3 * H] = dh * tanh_c * o * (1.0 - o)
    dz[:, 3 * H:] = dct * i * (1.0 - g * g)
    np.multiply(dct, f, out=dc_prev)
