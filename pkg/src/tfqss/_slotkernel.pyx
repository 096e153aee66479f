# cython: language_level=3
"""Compiled per-slot simulation kernel.

Mirrors _slotkernel_np.simulate_chunk draw for draw; see that module for
the layout of the uniform block.  Keep the two in lockstep: the acceptance
suite asserts bit-identical output.
"""

import numpy as np

from libc.stdint cimport int64_t, uint8_t


def simulate_chunk(double[:, ::1] u, double q_correct, double q_wrong,
                   double e_d, int64_t slot0):
    cdef Py_ssize_t m = u.shape[1]
    slot_arr = np.empty(m, dtype=np.int64)
    det_arr = np.empty(m, dtype=np.uint8)
    dbl_arr = np.empty(m, dtype=np.uint8)
    a_arr = np.empty(m, dtype=np.uint8)
    b_arr = np.empty(m, dtype=np.uint8)
    c_arr = np.empty(m, dtype=np.uint8)
    cdef int64_t[::1] slot_out = slot_arr
    cdef uint8_t[::1] det_out = det_arr
    cdef uint8_t[::1] dbl_out = dbl_arr
    cdef uint8_t[::1] a_out = a_arr
    cdef uint8_t[::1] b_out = b_arr
    cdef uint8_t[::1] c_out = c_arr

    cdef Py_ssize_t i, n = 0
    cdef bint parity_odd, bit_a, bit_b, phase_pi, det1_correct
    cdef bint click1, click2, double_click, recorded1, bit_c
    cdef double p1, p2

    with nogil:
        for i in range(m):
            parity_odd = ((slot0 + i) & 1) == 1
            bit_a = u[0, i] < 0.5
            bit_b = u[1, i] < 0.5
            phase_pi = bit_a != bit_b
            det1_correct = phase_pi == parity_odd
            if det1_correct:
                p1 = q_correct
                p2 = q_wrong
            else:
                p1 = q_wrong
                p2 = q_correct
            click1 = u[2, i] < p1
            click2 = u[3, i] < p2
            if not (click1 or click2):
                continue
            double_click = click1 and click2
            recorded1 = click1 and ((not click2) or u[4, i] < 0.5)
            if parity_odd:
                bit_c = recorded1
            else:
                bit_c = not recorded1
            if u[5, i] < e_d:
                bit_c = not bit_c
            slot_out[n] = slot0 + i
            det_out[n] = 1 if recorded1 else 2
            dbl_out[n] = double_click
            a_out[n] = bit_a
            b_out[n] = bit_b
            c_out[n] = bit_c
            n += 1

    return (slot_arr[:n].copy(), det_arr[:n].copy(), dbl_arr[:n].copy(),
            a_arr[:n].copy(), b_arr[:n].copy(), c_arr[:n].copy())
