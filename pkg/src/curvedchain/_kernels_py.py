"""Pure numpy versions of the gate kernels in ``_kernels.pyx``.

Same signatures and in-place semantics; used when the extension is not
built or ``CURVEDCHAIN_PURE_PYTHON`` is set.
"""

import numpy as np


def _split(state, n, site):
    return state.reshape(1 << (site - 1), 2, 1 << (n - site))


def apply_1q(state, n, site, u00, u01, u10, u11):
    view = _split(state, n, site)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    view[:, 0, :] = u00 * a + u01 * b
    view[:, 1, :] = u10 * a + u11 * b


def apply_diag(state, n, site, d0, d1):
    view = _split(state, n, site)
    view[:, 0, :] *= d0
    view[:, 1, :] *= d1


def apply_x(state, n, site):
    view = _split(state, n, site)
    view[:, ::-1, :] = view.copy()


def apply_cnot(state, n, control, target):
    lo, hi = sorted((control, target))
    view = state.reshape(1 << (lo - 1), 2, 1 << (hi - lo - 1), 2, 1 << (n - hi))
    if control < target:
        block = view[:, 1, :, :, :]
        block[:, :, ::-1, :] = block.copy()
    else:
        block = view[:, :, :, 1, :]
        block[:, ::-1, :, :] = block.copy()
