"""CSV signal tables and 8-bit image I/O (PNG/PPM via Pillow)."""

from dataclasses import dataclass

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import FormatError, InvalidParameterError, ParseError

# a header row is recognized by this sentinel in its first cell
COORD_SENTINEL = "#coords"


@dataclass
class SignalTable:
    """Rectangular table of real signals; columns are individual signals."""

    values: np.ndarray
    coords: np.ndarray | None = None

    @property
    def n(self):
        return self.values.shape[0]

    def column(self, j):
        return self.values[:, j]


def load_signal_csv(path):
    """Load a rectangular CSV of reals.

    An optional first line starting with the ``#coords`` sentinel gives
    per-column node coordinates. Ragged rows and non-numeric cells raise
    a parse error naming the offending line.
    """
    rows = []
    coords = None
    with open(path) as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines and lines[0].split(",")[0].strip() == COORD_SENTINEL:
        try:
            coords = np.array([float(v) for v in lines[0].split(",")[1:]])
        except ValueError as exc:
            raise ParseError(f"line 1: bad coordinate header: {exc}") from exc
        start = 1
    width = None
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"line {lineno}: expected {width} cells, got {len(cells)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError as exc:
            raise ParseError(f"line {lineno}: non-numeric cell: {exc}") from exc
    if not rows:
        raise ParseError("empty signal file")
    values = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ParseError("signal file contains non-finite values")
    return SignalTable(values=values, coords=coords)


def save_signal_csv(table, path):
    with open(path, "w") as fh:
        if table.coords is not None:
            fh.write(COORD_SENTINEL + "," + ",".join(f"{v:.17g}" for v in table.coords) + "\n")
        for row in np.atleast_2d(table.values):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def load_image(path):
    """Load a PNG or PPM image as a uint8 array (HxW or HxWx3)."""
    try:
        with Image.open(path) as im:
            if im.format not in ("PNG", "PPM"):
                raise FormatError(f"unsupported image format {im.format!r} (PNG or PPM only)")
            if im.mode not in ("L", "RGB"):
                im = im.convert("RGB")
            return np.asarray(im, dtype=np.uint8)
    except UnidentifiedImageError as exc:
        raise FormatError(f"cannot read image {path!r}: {exc}") from exc


def save_image(img, path):
    """Save a uint8 array as PNG or PPM, chosen by the file suffix."""
    img = np.asarray(img)
    if img.dtype != np.uint8:
        img = np.clip(np.round(img), 0, 255).astype(np.uint8)
    suffix = str(path).lower().rsplit(".", 1)[-1]
    if suffix not in ("png", "ppm"):
        raise FormatError(f"unsupported image suffix .{suffix} (png or ppm only)")
    Image.fromarray(img).save(path)


def resize_image(img, size, method="bilinear"):
    """Resize to size x size (or (h, w)) with nearest or bilinear sampling."""
    if method not in ("nearest", "bilinear"):
        raise InvalidParameterError(f"unknown resize method {method!r}")
    if np.isscalar(size):
        size = (int(size), int(size))
    resample = Image.NEAREST if method == "nearest" else Image.BILINEAR
    im = Image.fromarray(np.asarray(img, dtype=np.uint8))
    return np.asarray(im.resize((size[1], size[0]), resample), dtype=np.uint8)


def crop_image(img, size, origin=(0, 0)):
    """Crop a size x size window starting at origin (row, col)."""
    img = np.asarray(img)
    r, c = origin
    if r + size > img.shape[0] or c + size > img.shape[1]:
        raise InvalidParameterError("crop window exceeds image bounds")
    return img[r : r + size, c : c + size].copy()
