"""Portable weights archive ("PRWT") for the small residual CNN.

Layout: 8-byte magic ``PRWT\\0\\0\\0\\1``, a uint32-LE length prefix, a UTF-8
JSON header ``{version, arch: [{name, shape, activation}], extras}``, then
the raw little-endian float32 tensor blobs concatenated in header order.
``extras.lambda`` optionally carries a trained measurement-weight schedule.

Weights are stored (out, in, 3, 3) and applied as cross-correlation over
reflect-padded inputs (see :func:`prforge.denoise.cnn_forward`).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

PRWT_MAGIC = b"PRWT\x00\x00\x00\x01"
PRWT_VERSION = 1

# Fixed residual-CNN architecture: conv3x3 (2->32) + ReLU, 4 x [conv3x3
# (32->32) + ReLU], conv3x3 (32->1) linear.
CNN_ARCH: tuple[tuple[str, tuple[int, ...], str], ...] = tuple(
    entry
    for idx, (cin, cout, act) in enumerate(
        [(2, 32, "relu"), (32, 32, "relu"), (32, 32, "relu"), (32, 32, "relu"), (32, 32, "relu"), (32, 1, "linear")],
        start=1,
    )
    for entry in (
        (f"conv{idx}.weight", (cout, cin, 3, 3), act),
        (f"conv{idx}.bias", (cout,), act),
    )
)


class WeightsError(ValueError):
    """Base class for archive problems."""


class BadMagicError(WeightsError):
    pass


class VersionError(WeightsError):
    pass


class ShapeError(WeightsError):
    pass


class TruncatedBlobError(WeightsError):
    pass


@dataclass(frozen=True)
class WeightsArchive:
    tensors: dict[str, np.ndarray]
    lambdas: np.ndarray | None = None
    version: int = PRWT_VERSION
    arch: tuple[tuple[str, tuple[int, ...], str], ...] = field(default=CNN_ARCH)

    def tensor(self, name: str) -> np.ndarray:
        return self.tensors[name]

    def validate_cnn(self) -> None:
        """Check the archive matches the fixed residual-CNN layout exactly."""
        if self.arch != CNN_ARCH:
            raise ShapeError("archive architecture does not match the fixed residual CNN")
        for name, shape, _act in CNN_ARCH:
            if name not in self.tensors:
                raise ShapeError(f"missing tensor {name!r}")
            got = self.tensors[name].shape
            if got != shape:
                raise ShapeError(f"tensor {name!r} has shape {got}, expected {shape}")


def zero_weights(lambdas=None) -> WeightsArchive:
    """All-zero archive: the residual CNN degenerates to the identity
    denoiser. Used as a fixture so the primary suite runs untrained."""
    tensors = {name: np.zeros(shape, dtype=np.float32) for name, shape, _ in CNN_ARCH}
    lam = None if lambdas is None else np.asarray(lambdas, dtype=np.float64)
    return WeightsArchive(tensors=tensors, lambdas=lam)


def save_weights(archive: WeightsArchive, path) -> None:
    header = {
        "version": archive.version,
        "arch": [
            {"name": name, "shape": list(shape), "activation": act}
            for name, shape, act in archive.arch
        ],
        "extras": {},
    }
    if archive.lambdas is not None:
        header["extras"]["lambda"] = [float(v) for v in archive.lambdas]
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as f:
        f.write(PRWT_MAGIC)
        f.write(struct.pack("<I", len(blob)))
        f.write(blob)
        for name, shape, _act in archive.arch:
            tensor = np.ascontiguousarray(archive.tensors[name], dtype="<f4")
            if tensor.shape != shape:
                raise ShapeError(f"tensor {name!r} has shape {tensor.shape}, expected {shape}")
            f.write(tensor.tobytes())


def load_weights(path) -> WeightsArchive:
    raw = Path(path).read_bytes()
    if len(raw) < len(PRWT_MAGIC) or raw[:4] != PRWT_MAGIC[:4]:
        raise BadMagicError(f"not a PRWT file: {path}")
    if raw[: len(PRWT_MAGIC)] != PRWT_MAGIC:
        raise VersionError(f"unsupported PRWT magic version byte in {path}")
    off = len(PRWT_MAGIC)
    if len(raw) < off + 4:
        raise TruncatedBlobError(f"truncated PRWT header length in {path}")
    (hlen,) = struct.unpack_from("<I", raw, off)
    off += 4
    if len(raw) < off + hlen:
        raise TruncatedBlobError(f"truncated PRWT header in {path}")
    try:
        header = json.loads(raw[off : off + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise WeightsError(f"bad PRWT header: {exc}") from exc
    off += hlen
    version = header.get("version")
    if version != PRWT_VERSION:
        raise VersionError(f"unsupported PRWT version {version!r}")
    arch = tuple(
        (str(e["name"]), tuple(int(v) for v in e["shape"]), str(e["activation"]))
        for e in header["arch"]
    )
    tensors: dict[str, np.ndarray] = {}
    for name, shape, _act in arch:
        count = int(np.prod(shape))
        end = off + 4 * count
        if end > len(raw):
            raise TruncatedBlobError(f"truncated tensor blob {name!r} in {path}")
        tensors[name] = np.frombuffer(raw[off:end], dtype="<f4").reshape(shape).copy()
        off = end
    if off != len(raw):
        raise ShapeError(f"{len(raw) - off} trailing bytes after declared tensors in {path}")
    extras = header.get("extras") or {}
    lam = extras.get("lambda")
    lambdas = None if lam is None else np.asarray(lam, dtype=np.float64)
    return WeightsArchive(tensors=tensors, lambdas=lambdas, version=version, arch=arch)
