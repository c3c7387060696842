"""Gray rasters, PGM/PNG codecs, intensity statistics and global binarization."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

PGM_MAXVAL = 255
_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class DecodeError(ValueError):
    """Raised when an encoded image cannot be decoded."""


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit single channel image; ``data`` has shape ``(height, width)``."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise ValueError("intensities must lie in [0, 255]")
            data = data.astype(np.uint8)
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @classmethod
    def from_values(cls, width: int, height: int, values) -> "GrayImage":
        if isinstance(values, (bytes, bytearray)):
            arr = np.frombuffer(values, dtype=np.uint8)
        else:
            arr = np.asarray(values)
        if arr.size != width * height:
            raise ValueError(f"expected {width * height} values, got {arr.size}")
        return cls(arr.reshape(height, width))

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.data.shape == other.data.shape and bool(np.array_equal(self.data, other.data))


@dataclass(frozen=True)
class ImageStats:
    max_intensity: int
    mean: float
    sigma: float
    threshold: float


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """Foreground (ink) partition of an image; ``foreground`` is ``(height, width)`` bool."""

    foreground: np.ndarray

    def __post_init__(self):
        fg = np.ascontiguousarray(np.asarray(self.foreground, dtype=bool))
        if fg.ndim != 2:
            raise ValueError(f"expected a 2-D array, got shape {fg.shape}")
        fg.setflags(write=False)
        object.__setattr__(self, "foreground", fg)

    @property
    def width(self) -> int:
        return self.foreground.shape[1]

    @property
    def height(self) -> int:
        return self.foreground.shape[0]

    @property
    def background(self) -> np.ndarray:
        return ~self.foreground

    def count(self) -> int:
        return int(np.count_nonzero(self.foreground))


# ---------------------------------------------------------------------------
# decoding / encoding


def _pgm_tokens(buf: bytes, count: int):
    """Read ``count`` whitespace separated header tokens, skipping comments.

    Returns the tokens and the offset just past the single whitespace byte
    that terminates the last one.
    """
    tokens = []
    pos = 0
    n = len(buf)
    while len(tokens) < count:
        while pos < n and buf[pos] in b" \t\r\n":
            pos += 1
        if pos < n and buf[pos] == ord("#"):
            while pos < n and buf[pos] not in b"\r\n":
                pos += 1
            continue
        if pos >= n:
            raise DecodeError("truncated header")
        start = pos
        while pos < n and buf[pos] not in b" \t\r\n#":
            pos += 1
        tokens.append(buf[start:pos])
    if pos >= n or buf[pos] not in b" \t\r\n":
        raise DecodeError("truncated header")
    return tokens, pos + 1


def _header_int(token: bytes, field: str) -> int:
    try:
        value = int(token.decode("ascii"))
    except (UnicodeDecodeError, ValueError):
        raise DecodeError(f"invalid {field}: {token!r}") from None
    return value


def decode_pgm(buf: bytes) -> GrayImage:
    if len(buf) < 2:
        raise DecodeError("truncated header")
    if buf[:2] != b"P5":
        raise DecodeError(f"bad magic number {buf[:2]!r}, expected b'P5'")
    (_, w_tok, h_tok, max_tok), offset = _pgm_tokens(buf, 4)
    width = _header_int(w_tok, "width")
    height = _header_int(h_tok, "height")
    maxval = _header_int(max_tok, "maxval")
    if width < 1:
        raise DecodeError(f"invalid width: {width}")
    if height < 1:
        raise DecodeError(f"invalid height: {height}")
    if maxval != PGM_MAXVAL:
        raise DecodeError(f"unsupported maxval {maxval} (only {PGM_MAXVAL})")
    payload = buf[offset : offset + width * height]
    if len(payload) < width * height:
        raise DecodeError(
            f"truncated payload: expected {width * height} bytes, got {len(payload)}"
        )
    data = np.frombuffer(payload, dtype=np.uint8).reshape(height, width)
    return GrayImage(data)


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Luma 0.299 R + 0.587 G + 0.114 B, rounded half up, in integer arithmetic."""
    rgb = np.asarray(rgb, dtype=np.int64)
    acc = 299 * rgb[..., 0] + 587 * rgb[..., 1] + 114 * rgb[..., 2]
    return ((acc + 500) // 1000).astype(np.uint8)


def decode_png(buf: bytes) -> GrayImage:
    from PIL import Image

    try:
        im = Image.open(io.BytesIO(buf))
        im.load()
    except Exception as exc:
        raise DecodeError(f"malformed PNG: {exc}") from None
    if im.mode == "L":
        return GrayImage(np.array(im, dtype=np.uint8))
    if im.mode in ("RGB", "RGBA"):
        arr = np.array(im.convert("RGB") if im.mode == "RGBA" else im, dtype=np.uint8)
        return GrayImage(rgb_to_gray(arr))
    raise DecodeError(f"unsupported PNG mode {im.mode!r} (8-bit gray or RGB only)")


def load_gray(buf: bytes) -> GrayImage:
    """Decode a binary PGM (P5, maxval 255) or an 8-bit gray/RGB PNG."""
    if buf.startswith(_PNG_SIGNATURE):
        return decode_png(buf)
    return decode_pgm(buf)


def read_image(path) -> GrayImage:
    with open(path, "rb") as fh:
        return load_gray(fh.read())


def encode_pgm(data) -> bytes:
    """Encode a GrayImage or a 2-D uint8 array as P5."""
    arr = data.data if isinstance(data, GrayImage) else np.asarray(data)
    if arr.dtype != np.uint8:
        raise ValueError("PGM payload must be uint8")
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(arr).tobytes()


def encode_ppm(rgb: np.ndarray) -> bytes:
    h, w, _ = rgb.shape
    return b"P6\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(rgb, dtype=np.uint8).tobytes()


def mask_to_pgm(mask: BinaryMask) -> bytes:
    """Debug rendering: ink black (0), paper white (255)."""
    return encode_pgm(np.where(mask.foreground, 0, 255).astype(np.uint8))


# ---------------------------------------------------------------------------
# statistics and thresholding


def _moments(img: GrayImage):
    hist = np.bincount(img.data.ravel(), minlength=256).astype(object)
    values = range(256)
    n = img.width * img.height
    s = sum(int(c) * v for c, v in zip(hist, values))
    q = sum(int(c) * v * v for c, v in zip(hist, values))
    return n, s, q


def _variance(n: int, s: int, q: int) -> Fraction:
    # population variance, exact
    return Fraction(n * q - s * s, n * n)


def compute_stats(img: GrayImage) -> ImageStats:
    n, s, q = _moments(img)
    var = _variance(n, s, q)
    sigma = math.sqrt(var.numerator / var.denominator) if var else 0.0
    top = int(img.data.max())
    return ImageStats(
        max_intensity=top,
        mean=s / n,
        sigma=sigma,
        threshold=top - sigma,
    )


def foreground_cutoff(img: GrayImage) -> int:
    """Smallest intensity that is *not* foreground.

    An intensity ``v`` is foreground iff ``v < max - sigma``, i.e.
    ``max - v > 0`` and ``var < (max - v)**2``.  Both sides are exact
    rationals, so ties are resolved without floating point error.
    """
    n, s, q = _moments(img)
    var = _variance(n, s, q)
    top = int(img.data.max())
    cutoff = 0
    for v in range(top):
        d = top - v
        if var < d * d:
            cutoff = v + 1
        else:
            break
    return cutoff


def binarize(img: GrayImage) -> BinaryMask:
    """Global threshold ``max - sigma``; pixels strictly below it are ink."""
    return BinaryMask(img.data < foreground_cutoff(img))
