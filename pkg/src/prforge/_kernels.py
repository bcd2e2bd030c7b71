"""Hot numeric kernels: numba-jitted with a pure-numpy fallback.

Backend selection, once at import:

    PRFORGE_BACKEND=numba   force the jitted path (error if numba missing)
    PRFORGE_BACKEND=numpy   force the vectorized numpy path
    unset / auto            numba when importable, else numpy

Both paths implement the same arithmetic; results agree to float64
round-off (summation order differs). ``benchmarks/bench_kernels.py``
times one against the other.
"""

from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

_choice = os.environ.get("PRFORGE_BACKEND", "auto").lower()
if _choice not in ("auto", "numba", "numpy"):
    raise ValueError(f"PRFORGE_BACKEND must be auto|numba|numpy, got {_choice!r}")

_HAVE_NUMBA = False
if _choice in ("auto", "numba"):
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _choice == "numba":
            raise
        _HAVE_NUMBA = False

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def _conv3x3_numpy(padded: np.ndarray, weight: np.ndarray, bias: np.ndarray, relu: bool) -> np.ndarray:
    # padded: (Cin, H+2, W+2), weight: (Cout, Cin, 3, 3), bias: (Cout,)
    win = sliding_window_view(padded, (3, 3), axis=(1, 2))  # (Cin, H, W, 3, 3)
    out = np.tensordot(weight, win, axes=([1, 2, 3], [0, 3, 4]))
    out += bias[:, None, None]
    if relu:
        np.maximum(out, 0.0, out=out)
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _conv3x3_njit(padded, weight, bias, relu):  # pragma: no cover - jitted
        cin, hp, wp = padded.shape
        cout = weight.shape[0]
        h = hp - 2
        w = wp - 2
        out = np.empty((cout, h, w), dtype=np.float64)
        # one pass per input channel with the nine taps fused in registers;
        # unit stride over j keeps the inner loop vectorizable
        for co in range(cout):
            plane = out[co]
            for i in range(h):
                for j in range(w):
                    plane[i, j] = bias[co]
            for ci in range(cin):
                channel = padded[ci]
                w00 = weight[co, ci, 0, 0]
                w01 = weight[co, ci, 0, 1]
                w02 = weight[co, ci, 0, 2]
                w10 = weight[co, ci, 1, 0]
                w11 = weight[co, ci, 1, 1]
                w12 = weight[co, ci, 1, 2]
                w20 = weight[co, ci, 2, 0]
                w21 = weight[co, ci, 2, 1]
                w22 = weight[co, ci, 2, 2]
                for i in range(h):
                    r0 = channel[i]
                    r1 = channel[i + 1]
                    r2 = channel[i + 2]
                    for j in range(w):
                        plane[i, j] += (
                            w00 * r0[j] + w01 * r0[j + 1] + w02 * r0[j + 2]
                            + w10 * r1[j] + w11 * r1[j + 1] + w12 * r1[j + 2]
                            + w20 * r2[j] + w21 * r2[j + 1] + w22 * r2[j + 2]
                        )
            if relu:
                for i in range(h):
                    for j in range(w):
                        if plane[i, j] < 0.0:
                            plane[i, j] = 0.0
        return out


def conv3x3_reflect(x: np.ndarray, weight: np.ndarray, bias: np.ndarray, relu: bool) -> np.ndarray:
    """3x3 cross-correlation with reflect padding, stride 1.

    x: (Cin, H, W) float64; weight: (Cout, Cin, 3, 3); bias: (Cout,).
    Returns (Cout, H, W). Requires H, W >= 2 for the reflect border.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    weight = np.ascontiguousarray(weight, dtype=np.float64)
    bias = np.ascontiguousarray(bias, dtype=np.float64)
    if x.ndim != 3:
        raise ValueError(f"input must be (C, H, W), got shape {x.shape}")
    if weight.shape[1:] != (x.shape[0], 3, 3) or bias.shape != (weight.shape[0],):
        raise ValueError(
            f"weight/bias shapes {weight.shape}/{bias.shape} do not match input {x.shape}"
        )
    if x.shape[1] < 2 or x.shape[2] < 2:
        raise ValueError("image too small for reflect padding (need H, W >= 2)")
    padded = np.pad(x, ((0, 0), (1, 1), (1, 1)), mode="reflect")
    if BACKEND == "numba":
        return _conv3x3_njit(padded, weight, bias, relu)
    return _conv3x3_numpy(padded, weight, bias, relu)
