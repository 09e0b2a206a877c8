"""GRU sequence kernels: the hot inner loops of training.

Both functions are written against the numba-supported numpy subset so the
exact same source runs as plain numpy or compiled by ``numba.njit``. The
backend module decides which variant is exported; the math is identical and
float64 throughout.

Gate equations (reset applied inside the candidate's recurrent term):

    z_t  = sigmoid(W_z x_t + U_z h_{t-1} + b_z)
    r_t  = sigmoid(W_r x_t + U_r h_{t-1} + b_r)
    hb_t = tanh(W_h x_t + U_h (r_t * h_{t-1}) + b_h)
    h_t  = (1 - z_t) * h_{t-1} + z_t * hb_t
"""

import numpy as np


def gru_forward(X, h0, Wz, Wr, Wh, Uz, Ur, Uh, bz, br, bh):
    """Run a GRU over X (m x d_in) from h0 (d_h).

    Returns H (m+1 x d_h, H[0] = h0, H[t+1] the state after step t) plus the
    per-step gate activations Z, R and candidates HB needed for backward.
    """
    m = X.shape[0]
    d_h = h0.shape[0]
    H = np.empty((m + 1, d_h))
    Z = np.empty((m, d_h))
    R = np.empty((m, d_h))
    HB = np.empty((m, d_h))
    H[0] = h0
    for t in range(m):
        x = X[t]
        h = H[t]
        z = 1.0 / (1.0 + np.exp(-(np.dot(Wz, x) + np.dot(Uz, h) + bz)))
        r = 1.0 / (1.0 + np.exp(-(np.dot(Wr, x) + np.dot(Ur, h) + br)))
        hb = np.tanh(np.dot(Wh, x) + np.dot(Uh, r * h) + bh)
        H[t + 1] = (1.0 - z) * h + z * hb
        Z[t] = z
        R[t] = r
        HB[t] = hb
    return H, Z, R, HB


def gru_backward(X, H, Z, R, HB, Wz, Wr, Wh, Uz, Ur, Uh, grad_h_last):
    """Exact reverse-mode gradients for one forward pass.

    Takes the forward caches and the loss gradient w.r.t. the final hidden
    state; returns gradients for the inputs, every parameter, and h0.
    """
    m = X.shape[0]
    d_in = X.shape[1]
    d_h = grad_h_last.shape[0]
    dX = np.zeros((m, d_in))
    dWz = np.zeros_like(Wz)
    dWr = np.zeros_like(Wr)
    dWh = np.zeros_like(Wh)
    dUz = np.zeros_like(Uz)
    dUr = np.zeros_like(Ur)
    dUh = np.zeros_like(Uh)
    dbz = np.zeros(d_h)
    dbr = np.zeros(d_h)
    dbh = np.zeros(d_h)
    dh = grad_h_last.copy()
    for t in range(m - 1, -1, -1):
        x = X[t]
        h = H[t]
        z = Z[t]
        r = R[t]
        hb = HB[t]
        dz = dh * (hb - h)
        dhb = dh * z
        dh_prev = dh * (1.0 - z)
        # candidate path
        da_h = dhb * (1.0 - hb * hb)
        dWh += np.outer(da_h, x)
        dUh += np.outer(da_h, r * h)
        dbh += da_h
        drh = np.dot(Uh.T, da_h)
        dh_prev = dh_prev + drh * r
        # reset gate
        da_r = (drh * h) * r * (1.0 - r)
        dWr += np.outer(da_r, x)
        dUr += np.outer(da_r, h)
        dbr += da_r
        dh_prev = dh_prev + np.dot(Ur.T, da_r)
        # update gate
        da_z = dz * z * (1.0 - z)
        dWz += np.outer(da_z, x)
        dUz += np.outer(da_z, h)
        dbz += da_z
        dh_prev = dh_prev + np.dot(Uz.T, da_z)
        dX[t] = np.dot(Wz.T, da_z) + np.dot(Wr.T, da_r) + np.dot(Wh.T, da_h)
        dh = dh_prev
    return dX, dWz, dWr, dWh, dUz, dUr, dUh, dbz, dbr, dbh, dh
