"""numba kernels for in-place gate application on 1-D amplitude arrays."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def apply_1q(state, q, u00, u01, u10, u11):
    stride = 1 << q
    low = stride - 1
    for i in range(state.shape[0] >> 1):
        i0 = ((i >> q) << (q + 1)) | (i & low)
        i1 = i0 | stride
        a = state[i0]
        b = state[i1]
        state[i0] = u00 * a + u01 * b
        state[i1] = u10 * a + u11 * b


@njit(cache=True, nogil=True)
def apply_kq(state, targets, gate):
    # targets[0] is the most significant bit of the gate's row/column index
    k = targets.shape[0]
    dim = 1 << k
    asc = np.sort(targets)
    offsets = np.zeros(dim, dtype=np.int64)
    for j in range(dim):
        off = 0
        for m in range(k):
            if (j >> (k - 1 - m)) & 1:
                off |= 1 << targets[m]
        offsets[j] = off
    buf = np.empty(dim, dtype=state.dtype)
    for i in range(state.shape[0] >> k):
        base = i
        for m in range(k):
            q = asc[m]
            base = ((base >> q) << (q + 1)) | (base & ((1 << q) - 1))
        for j in range(dim):
            buf[j] = state[base | offsets[j]]
        for r in range(dim):
            acc = 0j
            for c in range(dim):
                g = gate[r, c]
                if g != 0:
                    acc += g * buf[c]
            state[base | offsets[r]] = acc


@njit(cache=True, nogil=True)
def apply_controlled_1q(state, ctrl_mask, q, u00, u01, u10, u11):
    stride = 1 << q
    low = stride - 1
    for i in range(state.shape[0] >> 1):
        i0 = ((i >> q) << (q + 1)) | (i & low)
        if (i0 & ctrl_mask) != ctrl_mask:
            continue
        i1 = i0 | stride
        a = state[i0]
        b = state[i1]
        state[i0] = u00 * a + u01 * b
        state[i1] = u10 * a + u11 * b
