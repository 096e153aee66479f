"""Numpy fallback for the per-slot simulation kernel.

Consumes the same (6, m) block of uniforms in the same order as the
compiled kernel in _slotkernel.pyx, so both backends produce bit-identical
detection records for a given RNG stream.  Rows of ``u``:

    0  sender A bit        3  detector-2 click
    1  sender B bit        4  double-click coin
    2  detector-1 click    5  misalignment flip

Slot parity is derived from the absolute slot index, which keeps results
independent of how the slot range is chunked.
"""

import numpy as np


def simulate_chunk(u, q_correct, q_wrong, e_d, slot0):
    """Simulate ``m`` consecutive slots starting at absolute index ``slot0``.

    ``q_correct`` is the click probability of the port the interference
    steers the light into, ``q_wrong`` the other port's.  Returns arrays
    over detected slots only: (slot, detector, double_click, bit_a, bit_b,
    bit_c).
    """
    m = u.shape[1]
    parity_odd = ((slot0 + np.arange(m, dtype=np.int64)) & 1).astype(bool)
    bit_a = u[0] < 0.5
    bit_b = u[1] < 0.5
    # Relative phase is pi when the senders' bits differ.
    phase_pi = bit_a ^ bit_b
    det1_correct = phase_pi == parity_odd
    p1 = np.where(det1_correct, q_correct, q_wrong)
    p2 = np.where(det1_correct, q_wrong, q_correct)
    click1 = u[2] < p1
    click2 = u[3] < p2
    clicked = click1 | click2
    double = click1 & click2
    recorded1 = click1 & (~click2 | (u[4] < 0.5))
    # Parity rule: even slots map detector 1 -> 0, odd slots the reverse.
    bit_c = np.where(parity_odd, recorded1, ~recorded1)
    bit_c = bit_c ^ (u[5] < e_d)

    sel = np.nonzero(clicked)[0]
    slot = slot0 + sel
    det = np.where(recorded1[sel], 1, 2).astype(np.uint8)
    return (slot, det, double[sel].astype(np.uint8),
            bit_a[sel].astype(np.uint8), bit_b[sel].astype(np.uint8),
            bit_c[sel].astype(np.uint8))
