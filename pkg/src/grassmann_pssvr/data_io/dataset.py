"""Labeled Grassmann sample sets."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..errors import DataFormatError, DimensionError
from ..grassmann import GrassmannPoint
from .matrix_io import load_matrix, save_matrix


@dataclass(frozen=True, eq=False)
class LabeledGrassmannSet:
    points: Sequence[GrassmannPoint]
    labels: np.ndarray | None = None
    source: str = ""

    def __post_init__(self):
        points = tuple(self.points)
        if not points:
            raise DimensionError("a sample set needs at least one point")
        dims = {pt.dims for pt in points}
        if len(dims) != 1:
            raise DimensionError(f"points have heterogeneous (d, p): {sorted(dims)}")
        object.__setattr__(self, "points", points)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.shape != (len(points),):
                raise DimensionError(f"{labels.size} labels for {len(points)} points")
            object.__setattr__(self, "labels", labels)

    def __len__(self):
        return len(self.points)

    @property
    def ambient_dim(self) -> int:
        return self.points[0].ambient_dim

    @property
    def subspace_dim(self) -> int:
        return self.points[0].subspace_dim

    @property
    def meta(self) -> dict:
        return {
            "d": self.ambient_dim,
            "p": self.subspace_dim,
            "m": len(self),
            "source": self.source,
        }


POINTS_DIR = "points"
LABELS_FILE = "labels.txt"
META_FILE = "meta.json"


def save_labels(path, labels):
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def load_labels(path) -> np.ndarray:
    try:
        tokens = Path(path).read_text().split()
        return np.array([int(t) for t in tokens], dtype=np.int64)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"cannot read labels from {path}: {exc}") from exc


def save_dataset(directory, dataset: LabeledGrassmannSet):
    """Write one GMX1 file per point, ``labels.txt`` and ``meta.json``."""
    directory = Path(directory)
    (directory / POINTS_DIR).mkdir(parents=True, exist_ok=True)
    written = []
    for i, pt in enumerate(dataset.points):
        written.append(save_matrix(directory / POINTS_DIR / f"{i:06d}.gmx", pt.basis))
    if dataset.labels is not None:
        save_labels(directory / LABELS_FILE, dataset.labels)
        written.append(directory / LABELS_FILE)
    (directory / META_FILE).write_text(json.dumps(dataset.meta, indent=2, sort_keys=True) + "\n")
    written.append(directory / META_FILE)
    return written


def load_dataset(directory) -> LabeledGrassmannSet:
    directory = Path(directory)
    files = sorted((directory / POINTS_DIR).glob("*.gmx"))
    if not files:
        raise DataFormatError(f"{directory}: no points found under {POINTS_DIR}/")
    points = []
    for f in files:
        try:
            points.append(GrassmannPoint(load_matrix(f)))
        except ValueError as exc:
            raise DataFormatError(f"{f}: {exc}") from exc
    labels_path = directory / LABELS_FILE
    labels = load_labels(labels_path) if labels_path.exists() else None
    source = ""
    meta_path = directory / META_FILE
    if meta_path.exists():
        try:
            source = json.loads(meta_path.read_text()).get("source", "")
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{meta_path}: {exc}") from exc
    try:
        return LabeledGrassmannSet(points, labels, source)
    except DimensionError as exc:
        raise DataFormatError(f"{directory}: {exc}") from exc
