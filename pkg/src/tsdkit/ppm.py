"""Binary PPM (P6) image I/O for (h, w, 3) uint8 arrays."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput, ParseError


def write_ppm(path, img: np.ndarray) -> None:
    """Write an RGB image; header is exactly b"P6\\n<w> <h>\\n255\\n"."""
    if img.ndim != 3 or img.shape[2] != 3 or img.dtype != np.uint8:
        raise InvalidInput(f"expected (h, w, 3) uint8 image, got {img.shape} {img.dtype}")
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(img).tobytes())


def _tokens(data: bytes):
    # PPM header tokens are whitespace separated; '#' starts a comment.
    pos = 0
    while True:
        while pos < len(data) and data[pos:pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            while pos < len(data) and data[pos:pos + 1] != b"\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise ParseError("truncated PPM header")
        yield data[start:pos], pos + 1
        pos += 1


def read_ppm(path) -> np.ndarray:
    """Read a binary P6 file with maxval 255 into an (h, w, 3) uint8 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    tokens = _tokens(data)
    magic, _ = next(tokens)
    if magic != b"P6":
        raise ParseError(f"not a binary PPM (magic {magic!r})")
    try:
        (w_raw, _), (h_raw, _), (maxval_raw, body_start) = (
            next(tokens), next(tokens), next(tokens))
        w, h, maxval = int(w_raw), int(h_raw), int(maxval_raw)
    except (StopIteration, ValueError) as exc:
        raise ParseError("malformed PPM header") from exc
    if maxval != 255:
        raise ParseError(f"unsupported maxval {maxval}")
    if w <= 0 or h <= 0:
        raise ParseError(f"bad PPM size {w}x{h}")
    body = data[body_start:]
    if len(body) != w * h * 3:
        raise ParseError(f"PPM body has {len(body)} bytes, expected {w * h * 3}")
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3).copy()
