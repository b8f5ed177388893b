from .dataset import LabeledGrassmannSet, load_dataset, load_labels, save_dataset, save_labels
from .frames import frame_matrix, ingest_frames, load_frame_manifest, parse_netpbm, read_frame
from .matrix_io import load_matrix, save_matrix
from .synth import SynthesisSpec, make_rng, random_orthonormal, synth

__all__ = [
    "LabeledGrassmannSet",
    "SynthesisSpec",
    "frame_matrix",
    "ingest_frames",
    "load_dataset",
    "load_frame_manifest",
    "load_labels",
    "load_matrix",
    "make_rng",
    "parse_netpbm",
    "random_orthonormal",
    "read_frame",
    "save_dataset",
    "save_labels",
    "save_matrix",
    "synth",
]
