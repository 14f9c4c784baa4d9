"""Kernel selection: compiled extension when importable, Python otherwise.

Set ``RBPLAN_PURE=1`` to force the Python kernels.
"""
import os

import numpy as np

from . import _pykernels

MAX_NATIVE_BITS = 63

_native = None
if os.environ.get("RBPLAN_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _native
    except ImportError:  # extension not built
        _native = None

BACKEND = "cython" if _native is not None else "python"


def _pick(width, force_python=False):
    if force_python or _native is None or width > MAX_NATIVE_BITS:
        return _pykernels
    return _native


def dp_labeled(out_masks, force_python=False):
    """Return (mrb, last, bcount) uint8 tables indexed by subset bitmask."""
    size = 1 << len(out_masks)
    impl = _pick(len(out_masks), force_python)
    if impl is _pykernels:
        # plain bytearrays keep the Python loop off numpy scalars
        tables = [bytearray(size) for _ in range(3)]
        impl.dp_labeled(list(out_masks), *tables)
        return tuple(np.frombuffer(t, dtype=np.uint8) for t in tables)
    mrb = np.zeros(size, dtype=np.uint8)
    last = np.zeros(size, dtype=np.uint8)
    bcount = np.zeros(size, dtype=np.uint8)
    impl.dp_labeled(list(out_masks), mrb, last, bcount)
    return mrb, last, bcount


def dfdp_labeled_decide(out_masks, rb, deadline, force_python=False):
    return _pick(len(out_masks), force_python).dfdp_labeled_decide(list(out_masks), int(rb), float(deadline))


def dfdp_unlabeled_decide(goal_masks, rb, deadline, force_python=False):
    # start masks must fit too
    width = max(len(goal_masks), max((int(m).bit_length() for m in goal_masks), default=0))
    return _pick(width, force_python).dfdp_unlabeled_decide(list(goal_masks), int(rb), float(deadline))
