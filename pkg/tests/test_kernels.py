"""Backend selection and numba/numpy agreement for the conv kernel."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from prforge import _kernels

_PROBE = r"""
import json, sys
import numpy as np
from prforge import _kernels
rng = np.random.default_rng(7)
x = rng.normal(size=(2, 9, 11))
w = rng.normal(0, 0.1, size=(4, 2, 3, 3))
b = rng.normal(0, 0.1, size=4)
out = _kernels.conv3x3_reflect(x, w, b, relu=True)
print(json.dumps({"backend": _kernels.BACKEND, "sum": float(out.sum()),
                  "out": out.ravel().tolist()}))
"""


def _run_with_backend(backend: str) -> dict:
    env = dict(os.environ, PRFORGE_BACKEND=backend)
    proc = subprocess.run([sys.executable, "-c", _PROBE], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def test_env_flag_selects_backend():
    got_np = _run_with_backend("numpy")
    assert got_np["backend"] == "numpy"
    got_nb = _run_with_backend("numba")
    assert got_nb["backend"] == "numba"


def test_backends_agree():
    a = np.asarray(_run_with_backend("numpy")["out"])
    b = np.asarray(_run_with_backend("numba")["out"])
    assert np.max(np.abs(a - b)) < 1e-10


def test_relu_and_linear_paths():
    rng = np.random.default_rng(8)
    x = rng.normal(size=(1, 6, 6))
    w = rng.normal(size=(2, 1, 3, 3))
    b = np.array([-100.0, 0.0])
    relu = _kernels.conv3x3_reflect(x, w, b, relu=True)
    linear = _kernels.conv3x3_reflect(x, w, b, relu=False)
    assert np.all(relu >= 0.0)
    assert np.any(linear < 0.0)
    assert np.array_equal(relu, np.maximum(linear, 0.0))


def test_shape_validation():
    with pytest.raises(ValueError):
        _kernels.conv3x3_reflect(np.zeros((2, 6, 6)), np.zeros((4, 3, 3, 3)), np.zeros(4), False)
    with pytest.raises(ValueError):
        _kernels.conv3x3_reflect(np.zeros((2, 1, 6)), np.zeros((4, 2, 3, 3)), np.zeros(4), False)
