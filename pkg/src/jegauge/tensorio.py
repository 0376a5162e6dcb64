"""Bit-exact array serialization: the GCT tensor container and PNM images.

GCT layout (all integers little-endian)::

    magic   4 bytes  b"GCT1"
    dtype   1 byte   1 = float32, 2 = uint8
    rank    1 byte   1..4
    extents rank x uint32, each >= 1
    payload row-major element bytes, little-endian

Tensors are plain numpy arrays; writing the same array twice yields
identical bytes, so files can be compared with ``cmp``.

Frames are uint8 arrays of shape (H, W) for grayscale or (H, W, 3) for
color and travel as binary PGM (P5) / PPM (P6) with maxval 255.
"""

from __future__ import annotations

import struct

import numpy as np

from .errors import DimensionError, FormatError, UnsupportedFormatError, ValidationError

MAGIC = b"GCT1"

_DTYPE_CODES = {np.dtype("float32"): 1, np.dtype("uint8"): 2}
_CODE_DTYPES = {1: np.dtype("<f4"), 2: np.dtype("u1")}

MAX_RANK = 4


def check_tensor(arr: np.ndarray, name: str = "tensor") -> np.ndarray:
    """Validate dtype/rank/extent invariants; returns the array unchanged."""
    if not isinstance(arr, np.ndarray):
        raise ValidationError(f"{name}: expected a numpy array, got {type(arr).__name__}")
    if arr.dtype not in _DTYPE_CODES:
        raise ValidationError(f"{name}: unsupported dtype {arr.dtype}, use float32 or uint8")
    if not 1 <= arr.ndim <= MAX_RANK:
        raise DimensionError(f"{name}: rank must be 1..{MAX_RANK}, got {arr.ndim}")
    if any(e < 1 for e in arr.shape):
        raise DimensionError(f"{name}: all extents must be >= 1, got {arr.shape}")
    return arr


def check_frame(frame: np.ndarray, name: str = "frame") -> np.ndarray:
    """Validate a uint8 image array: (H, W) grayscale or (H, W, 3) color."""
    if not isinstance(frame, np.ndarray) or frame.dtype != np.uint8:
        raise ValidationError(f"{name}: expected a uint8 numpy array")
    if frame.ndim == 2:
        h, w = frame.shape
    elif frame.ndim == 3 and frame.shape[2] == 3:
        h, w = frame.shape[:2]
    else:
        raise DimensionError(f"{name}: expected (H, W) or (H, W, 3), got {frame.shape}")
    if h < 1 or w < 1:
        raise DimensionError(f"{name}: empty image {frame.shape}")
    return frame


def write_tensor(arr: np.ndarray, path) -> None:
    """Serialize ``arr`` to ``path`` in the GCT container."""
    check_tensor(arr)
    dtype = _CODE_DTYPES[_DTYPE_CODES[np.dtype(arr.dtype)]]
    header = MAGIC + struct.pack(
        "<BB", _DTYPE_CODES[np.dtype(arr.dtype)], arr.ndim
    ) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    payload = np.ascontiguousarray(arr, dtype=dtype).tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_tensor(path) -> np.ndarray:
    """Read a GCT file back into a numpy array (inverse of write_tensor)."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {blob[:4]!r}, expected {MAGIC!r}")
    if len(blob) < 6:
        raise FormatError(f"{path}: truncated header")
    code, rank = struct.unpack_from("<BB", blob, 4)
    if code not in _CODE_DTYPES:
        raise UnsupportedFormatError(f"{path}: unsupported dtype code {code}")
    if not 1 <= rank <= MAX_RANK:
        raise FormatError(f"{path}: rank must be 1..{MAX_RANK}, got {rank}")
    off = 6
    if len(blob) < off + 4 * rank:
        raise FormatError(f"{path}: truncated extents")
    shape = struct.unpack_from(f"<{rank}I", blob, off)
    if any(e < 1 for e in shape):
        raise FormatError(f"{path}: zero extent in shape {shape}")
    off += 4 * rank
    dtype = _CODE_DTYPES[code]
    n = int(np.prod(shape, dtype=np.int64))
    expected = n * dtype.itemsize
    actual = len(blob) - off
    if actual != expected:
        raise FormatError(
            f"{path}: payload length mismatch, expected {expected} bytes for "
            f"shape {shape}, got {actual}"
        )
    data = np.frombuffer(blob, dtype=dtype, count=n, offset=off)
    return data.reshape(shape).astype(dtype.newbyteorder("="), copy=True)


def _read_pnm_token(blob: bytes, pos: int) -> tuple[bytes, int]:
    # skip whitespace and '#' comments, then read one token
    n = len(blob)
    while pos < n:
        c = blob[pos : pos + 1]
        if c.isspace():
            pos += 1
        elif c == b"#":
            while pos < n and blob[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        else:
            break
    start = pos
    while pos < n and not blob[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise FormatError("unexpected end of PNM header")
    return blob[start:pos], pos


def read_frame_pnm(path) -> np.ndarray:
    """Read a binary PGM/PPM file; header comments are tolerated."""
    with open(path, "rb") as fh:
        blob = fh.read()
    magic = blob[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"{path}: not a binary PGM/PPM file (magic {magic!r})")
    channels = 1 if magic == b"P5" else 3
    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _read_pnm_token(blob, pos)
        if not token.isdigit():
            raise FormatError(f"{path}: bad PNM header token {token!r}")
        fields.append(int(token))
    width, height, maxval = fields
    if maxval != 255:
        raise UnsupportedFormatError(f"{path}: maxval {maxval} not supported, need 255")
    if width < 1 or height < 1:
        raise FormatError(f"{path}: bad image extents {width}x{height}")
    pos += 1  # single whitespace byte separates header and payload
    expected = width * height * channels
    data = blob[pos : pos + expected]
    if len(data) != expected:
        raise FormatError(f"{path}: expected {expected} pixel bytes, got {len(data)}")
    arr = np.frombuffer(data, dtype=np.uint8).copy()
    if channels == 1:
        return arr.reshape(height, width)
    return arr.reshape(height, width, 3)


def write_frame_pnm(frame: np.ndarray, path) -> None:
    """Write a uint8 image as binary PGM (grayscale) or PPM (color)."""
    check_frame(frame)
    if frame.ndim == 2:
        magic, (h, w) = b"P5", frame.shape
    else:
        magic, (h, w) = b"P6", frame.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(frame).tobytes())
