"""Pure-numpy versions of the propagation kernels.

These define the reference semantics; the compiled module must agree with
them to rounding error.
"""
import numpy as np


def step_propagators(A1, A2, A3, h):
    """RK4 one-step propagators P with Y(t + h) ~= P Y(t), batched.

    ``A1``, ``A2``, ``A3`` are (K, d, d) generators at t, t + h/2, t + h;
    ``h`` is a scalar or a (K,) array of step sizes.
    """
    h = np.asarray(h, dtype=float)
    if h.ndim == 1:
        h = h[:, None, None]
    eye = np.eye(A1.shape[-1])
    P1 = A1
    P2 = A2 @ (eye + 0.5 * h * P1)
    P3 = A2 @ (eye + 0.5 * h * P2)
    P4 = A3 @ (eye + h * P3)
    return eye + (h / 6.0) * (P1 + 2.0 * P2 + 2.0 * P3 + P4)


def chain_products(P, start):
    K, d = P.shape[0], P.shape[1]
    out = np.empty((K + 1, d, d))
    out[0] = start
    for k in range(K):
        out[k + 1] = P[k] @ out[k]
    return out


def rk4_fundamental(A, h, start):
    A = np.asarray(A, dtype=float)
    P = step_propagators(A[0:-1:2], A[1::2], A[2::2], h)
    return chain_products(P, np.asarray(start, dtype=float))
