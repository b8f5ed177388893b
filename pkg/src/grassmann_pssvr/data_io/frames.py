"""Frame ingestion: PGM/PPM readers and image-set to Grassmann point.

Frames are converted to grayscale with ITU-R 601 luma weights, normalized
to zero mean and unit variance over the whole set, and vectorized in
column-major order before orthonormalization.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataFormatError, DimensionError
from ..grassmann import GrassmannPoint, orthonormalize
from .dataset import LabeledGrassmannSet

LUMA_601 = np.array([0.299, 0.587, 0.114])
NETPBM_SUFFIXES = {".pgm", ".ppm", ".pnm"}
IMAGE_SUFFIXES = NETPBM_SUFFIXES | {".png"}


def _tokens(data: bytes, count: int, pos: int):
    """Read ``count`` whitespace-separated header tokens, skipping comments."""
    out = []
    n = len(data)
    while len(out) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
            pos += 1
        if start == pos:
            raise DataFormatError("truncated Netpbm header")
        out.append(data[start:pos])
    return out, pos


def parse_netpbm(data: bytes, name="<bytes>") -> np.ndarray:
    """Decode P2/P3/P5/P6 images to float arrays of shape (h, w) or (h, w, 3)."""
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise DataFormatError(f"{name}: not a PGM/PPM file (magic {magic!r})")
    try:
        (w, h, maxval), pos = _tokens(data, 3, 2)
        w, h, maxval = int(w), int(h), int(maxval)
    except (ValueError, DataFormatError) as exc:
        raise DataFormatError(f"{name}: malformed header") from exc
    if w <= 0 or h <= 0 or not 0 < maxval < 65536:
        raise DataFormatError(f"{name}: invalid size {w}x{h} or maxval {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = w * h * channels
    if magic in (b"P5", b"P6"):
        pos += 1  # single whitespace byte after maxval
        dtype = ">u2" if maxval > 255 else "u1"
        nbytes = count * np.dtype(dtype).itemsize
        if len(data) - pos < nbytes:
            raise DataFormatError(f"{name}: truncated pixel data")
        pix = np.frombuffer(data, dtype=dtype, count=count, offset=pos).astype(np.float64)
    else:
        try:
            pix = np.array(data[pos:].split()[:count], dtype=np.float64)
        except ValueError as exc:
            raise DataFormatError(f"{name}: non-numeric pixel data") from exc
        if pix.size != count:
            raise DataFormatError(f"{name}: truncated pixel data")
    pix = pix / maxval
    return pix.reshape(h, w, 3) if channels == 3 else pix.reshape(h, w)


def read_frame(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise DataFormatError(f"cannot read frame {path}: {exc}") from exc
    if path.suffix.lower() == ".png":
        try:
            from PIL import Image
        except ImportError as exc:
            raise DataFormatError(f"{path}: PNG input needs Pillow") from exc
        import io

        try:
            img = Image.open(io.BytesIO(data))
            img.load()
        except Exception as exc:
            raise DataFormatError(f"{path}: unreadable PNG: {exc}") from exc
        return to_grayscale(np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0)
    return to_grayscale(parse_netpbm(data, path))


def write_pgm(path, frame, maxval=65535):
    """Write a 2-D array scaled from [min, max] to a binary PGM."""
    frame = np.asarray(frame, dtype=np.float64)
    lo, hi = frame.min(), frame.max()
    scaled = np.zeros_like(frame) if hi == lo else (frame - lo) / (hi - lo)
    q = np.round(scaled * maxval).astype(">u2" if maxval > 255 else "u1")
    h, w = frame.shape
    Path(path).write_bytes(f"P5\n{w} {h}\n{maxval}\n".encode() + q.tobytes())


def to_grayscale(frame) -> np.ndarray:
    frame = np.asarray(frame, dtype=np.float64)
    if frame.ndim == 3 and frame.shape[2] == 3:
        return frame @ LUMA_601
    if frame.ndim == 2:
        return frame
    raise DimensionError(f"unsupported frame shape {frame.shape}")


def _frame_paths(source):
    path = Path(source)
    if path.is_dir():
        return sorted(p for p in path.iterdir() if p.suffix.lower() in IMAGE_SUFFIXES)
    return [path]


def frame_matrix(frames, normalize: bool = True) -> np.ndarray:
    """Stack frames as columns ``[vec(Y_1), ..., vec(Y_M)]`` (column-major vec)."""
    if isinstance(frames, (str, Path)):
        frames = _frame_paths(frames)
    grays = []
    for f in frames:
        grays.append(read_frame(f) if isinstance(f, (str, Path)) else to_grayscale(f))
    if not grays:
        raise DimensionError("no frames given")
    shapes = {g.shape for g in grays}
    if len(shapes) != 1:
        raise DimensionError(f"frames have inconsistent dimensions: {sorted(shapes)}")
    y = np.stack([g.ravel(order="F") for g in grays], axis=1)
    if normalize:
        y = y - y.mean()
        std = y.std()
        if std > 0:
            y = y / std
    return y


def ingest_frames(frames, p: int, normalize: bool = True) -> GrassmannPoint:
    """Grassmann point of an image set.

    Parameters
    ----------
    frames : directory, path, or sequence of arrays / paths
        A directory is read in sorted filename order.
    p : int
        Subspace dimension; at least p frames are required.
    normalize : bool
        Zero-mean / unit-variance normalization over the whole set.
    """
    return orthonormalize(frame_matrix(frames, normalize), p)


def load_frame_manifest(path, p: int, normalize: bool = True) -> LabeledGrassmannSet:
    """Read a JSON-lines manifest of image sets.

    Each line is ``{"set_id": ..., "frames": [paths...], "label": int}``;
    ``label`` is optional and relative frame paths resolve against the
    manifest's directory.
    """
    path = Path(path)
    base = path.parent
    points, labels, ids = [], [], []
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read manifest {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            entry = json.loads(line)
            frame_list = [base / f for f in entry["frames"]]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise DataFormatError(f"{path}:{lineno}: bad manifest entry") from exc
        points.append(ingest_frames(frame_list, p, normalize))
        labels.append(entry.get("label"))
        ids.append(str(entry.get("set_id", lineno)))
    has_labels = all(lb is not None for lb in labels)
    return LabeledGrassmannSet(
        points,
        np.asarray(labels, dtype=np.int64) if has_labels and labels else None,
        f"frames manifest {path.name} ({len(ids)} sets)",
    )
