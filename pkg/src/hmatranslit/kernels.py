"""Hot numeric kernels: GRU cells, the transducer loss/gradient and batched decoding.

Every function here compiles with numba when it is available and runs as
ordinary numpy code otherwise (see ``_jit``). Arrays are float64 and
C-contiguous; weight matrices of a GRU stack the update, reset and candidate
blocks row-wise, so ``Wx`` is (3h, d_in), ``Wh`` is (3h, h) and ``b`` is (3h,).
"""

import numpy as np

from ._jit import USE_NUMBA, njit


@njit
def sigmoid(v):
    return 1.0 / (1.0 + np.exp(-v))


@njit
def log_softmax(v):
    shift = v - np.max(v)
    return shift - np.log(np.sum(np.exp(shift)))


@njit
def gru_forward(Wx, Wh, b, x, h):
    """One GRU step. Returns (h_new, z, r, c).

    z = sig(Wz [x; h] + bz), r = sig(Wr [x; h] + br),
    c = tanh(Wc [x; r*h] + bc), h_new = z*h + (1-z)*c.
    """
    k = h.shape[0]
    ax = np.dot(Wx, x) + b
    z = sigmoid(ax[:k] + np.dot(Wh[:k], h))
    r = sigmoid(ax[k:2 * k] + np.dot(Wh[k:2 * k], h))
    c = np.tanh(ax[2 * k:] + np.dot(Wh[2 * k:], r * h))
    return z * h + (1.0 - z) * c, z, r, c


@njit
def gru_backward(Wx, Wh, x, h, z, r, c, dh_new, dWx, dWh, db):
    """Backprop one GRU step; accumulates weight grads in place, returns (dx, dh)."""
    k = h.shape[0]
    dz = dh_new * (h - c)
    dh = dh_new * z
    dac = dh_new * (1.0 - z) * (1.0 - c * c)
    rh = r * h
    drh = np.dot(Wh[2 * k:].T, dac)
    dar = drh * h * r * (1.0 - r)
    daz = dz * z * (1.0 - z)
    dh += drh * r
    da = np.concatenate((daz, dar, dac))
    dWx += np.outer(da, x)
    db += da
    dWh[:2 * k] += np.outer(da[:2 * k], h)
    dWh[2 * k:] += np.outer(dac, rh)
    dh += np.dot(Wh[:2 * k].T, da[:2 * k])
    dx = np.dot(Wx.T, da)
    return dx, dh


@njit
def encode_kernel(src_emb, fWx, fWh, fb, bWx, bWh, bb, ids):
    """Bidirectional GRU encoding. Returns (H, forward caches, backward caches).

    H is (n, 2k); caches hold per-step (h_prev, z, r, c) stacked on axis 1.
    """
    n = ids.shape[0]
    k = fWh.shape[1]
    H = np.zeros((n, 2 * k))
    fcache = np.zeros((n, 4, k))
    bcache = np.zeros((n, 4, k))
    h = np.zeros(k)
    for i in range(n):
        h_new, z, r, c = gru_forward(fWx, fWh, fb, src_emb[ids[i]], h)
        fcache[i, 0] = h
        fcache[i, 1] = z
        fcache[i, 2] = r
        fcache[i, 3] = c
        H[i, :k] = h_new
        h = h_new
    h = np.zeros(k)
    for i in range(n - 1, -1, -1):
        h_new, z, r, c = gru_forward(bWx, bWh, bb, src_emb[ids[i]], h)
        bcache[i, 0] = h
        bcache[i, 1] = z
        bcache[i, 2] = r
        bcache[i, 3] = c
        H[i, k:] = h_new
        h = h_new
    return H, fcache, bcache


@njit
def sequence_loss(
    src_emb, act_emb, fWx, fWh, fb, bWx, bWh, bb, dWx, dWh, db, oW, ob,
    g_src_emb, g_act_emb, g_fWx, g_fWh, g_fb, g_bWx, g_bWh, g_bb,
    g_dWx, g_dWh, g_db, g_oW, g_ob,
    ids, actions, step_id, compute_grad,
):
    """Teacher-forced negative log-likelihood of an action sequence.

    The decoder starts from a zero state with the step action as its previous
    action and attends to source position 0. When ``compute_grad`` is true the
    gradient is added into the ``g_*`` arrays.
    """
    n = ids.shape[0]
    T = actions.shape[0]
    k = fWh.shape[1]
    hd_size = dWh.shape[1]
    d = act_emb.shape[1]
    H, fcache, bcache = encode_kernel(src_emb, fWx, fWh, fb, bWx, bWh, bb, ids)

    inputs = np.zeros((T, d + 2 * k))
    dcache = np.zeros((T, 4, hd_size))
    probs = np.zeros((T, oW.shape[0]))
    hiddens = np.zeros((T, hd_size))
    positions = np.zeros(T, dtype=np.int64)
    prevs = np.zeros(T, dtype=np.int64)

    loss = 0.0
    hd = np.zeros(hd_size)
    prev = step_id
    pos = 0
    for t in range(T):
        if pos >= n:
            raise ValueError("attention overrun")
        inputs[t, :d] = act_emb[prev]
        inputs[t, d:] = H[pos]
        h_new, z, r, c = gru_forward(dWx, dWh, db, inputs[t], hd)
        dcache[t, 0] = hd
        dcache[t, 1] = z
        dcache[t, 2] = r
        dcache[t, 3] = c
        hiddens[t] = h_new
        logp = log_softmax(np.dot(oW, h_new) + ob)
        a = actions[t]
        loss -= logp[a]
        probs[t] = np.exp(logp)
        positions[t] = pos
        prevs[t] = prev
        hd = h_new
        prev = a
        if a == step_id:
            pos += 1

    if not compute_grad:
        return loss

    dH = np.zeros((n, 2 * k))
    dhd = np.zeros(hd_size)
    for t in range(T - 1, -1, -1):
        dlogits = probs[t].copy()
        dlogits[actions[t]] -= 1.0
        g_oW += np.outer(dlogits, hiddens[t])
        g_ob += dlogits
        dhd = dhd + np.dot(oW.T, dlogits)
        dinp, dhd = gru_backward(
            dWx, dWh, inputs[t], dcache[t, 0], dcache[t, 1], dcache[t, 2], dcache[t, 3],
            dhd, g_dWx, g_dWh, g_db,
        )
        g_act_emb[prevs[t]] += dinp[:d]
        dH[positions[t]] += dinp[d:]

    dh = np.zeros(k)
    for i in range(n - 1, -1, -1):
        dh = dh + dH[i, :k]
        dx, dh = gru_backward(
            fWx, fWh, src_emb[ids[i]], fcache[i, 0], fcache[i, 1], fcache[i, 2], fcache[i, 3],
            dh, g_fWx, g_fWh, g_fb,
        )
        g_src_emb[ids[i]] += dx
    dh = np.zeros(k)
    for i in range(n):
        dh = dh + dH[i, k:]
        dx, dh = gru_backward(
            bWx, bWh, src_emb[ids[i]], bcache[i, 0], bcache[i, 1], bcache[i, 2], bcache[i, 3],
            dh, g_bWx, g_bWh, g_bb,
        )
        g_src_emb[ids[i]] += dx
    return loss


@njit
def decoder_step_batch(act_emb, dWx, dWh, db, oW, ob, prev, attended, hd):
    """Advance B decoder states at once.

    ``prev`` (B,) previous action ids, ``attended`` (B, 2k) encodings at the
    current attention positions, ``hd`` (B, h) decoder states. Returns
    (log-probs (B, V), new states (B, h)).
    """
    B = prev.shape[0]
    h = hd.shape[1]
    d = act_emb.shape[1]
    X = np.empty((d + attended.shape[1], B))
    for b in range(B):
        X[:d, b] = act_emb[prev[b]]
        X[d:, b] = attended[b]
    Hp = np.ascontiguousarray(hd.T)
    A = np.dot(dWx, X) + db.reshape((db.shape[0], 1))
    z = sigmoid(A[:h] + np.dot(dWh[:h], Hp))
    r = sigmoid(A[h:2 * h] + np.dot(dWh[h:2 * h], Hp))
    c = np.tanh(A[2 * h:] + np.dot(dWh[2 * h:], r * Hp))
    Hn = z * Hp + (1.0 - z) * c
    logits = np.dot(oW, Hn)
    V = oW.shape[0]
    out = np.empty((B, V))
    for b in range(B):
        out[b] = log_softmax(logits[:, b] + ob)
    return out, np.ascontiguousarray(Hn.T)


def adam_numpy(theta, grad, m, v, step, lr, beta1, beta2, eps):
    """In-place Adam with bias correction on flat buffers; zeroes ``grad``."""
    c1 = 1.0 - beta1 ** step
    c2 = 1.0 - beta2 ** step
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    theta -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    grad[:] = 0.0


@njit
def adam_fused(theta, grad, m, v, step, lr, beta1, beta2, eps):
    """Same update as :func:`adam_numpy` in one pass without temporaries."""
    c1 = 1.0 - beta1 ** step
    c2 = 1.0 - beta2 ** step
    for i in range(theta.shape[0]):
        g = grad[i]
        m[i] = beta1 * m[i] + (1.0 - beta1) * g
        v[i] = beta2 * v[i] + (1.0 - beta2) * g * g
        theta[i] -= lr * (m[i] / c1) / (np.sqrt(v[i] / c2) + eps)
        grad[i] = 0.0


# a python-level loop is far slower than the vectorized form, so pick per mode
adam_update = adam_fused if USE_NUMBA else adam_numpy
