"""Hot loop of the jet engine: the truncated Cauchy product.

The compiled ``_jetcore`` extension is used when it was built; otherwise the
numpy formulation below takes over.  Setting ``PKETWISTOR_PURE_PYTHON=1``
forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np


def mul_flat_numpy(a: np.ndarray, b: np.ndarray, sp) -> np.ndarray:
    # gather every contributing pair, then sum into its target slot
    prods = a[:, sp.pair_i] * b[:, sp.pair_j]
    return prods @ sp.scatter


def _load_compiled():
    if os.environ.get("PKETWISTOR_PURE_PYTHON", "") not in ("", "0"):
        return None
    try:
        from . import _jetcore
    except ImportError:
        return None
    return _jetcore


_core = _load_compiled()

if _core is not None:
    BACKEND = "compiled"

    def mul_flat(a: np.ndarray, b: np.ndarray, sp) -> np.ndarray:
        return _core.mul_flat(a, b, sp.pair_i, sp.pair_j, sp.pair_k, sp.size)
else:
    BACKEND = "numpy"
    mul_flat = mul_flat_numpy
