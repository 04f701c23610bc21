"""Binary and text artifact formats: checkpoints, PGM grids, CSV, IDX.

The checkpoint layout is fixed and explicit so round trips are bitwise:

    magic "DAEB" | version u32 LE | kind u8 | sigma f64 | latent u32
    | dropout f64 | n_mlps u8 | one spec block per network | parameters

A spec block is: layer count+1 sizes (u8 count, u32 LE each), a hidden
activation tag, an output activation tag (u8 each), and the leaky slope
(f64). Parameters follow as little-endian float64, per network in
declaration order (encoder, decoder, then discriminator if present), per
layer weights row-major then biases. Loading rebuilds the specs first,
so every shape and cross-network invariant is re-validated on the way in.

Images are exported as binary PGM (P5, maxval 255), tiled row-major with
one-pixel black separators; values are clamped to [0, 1] and quantized at
write time only. IDX image files use the de-facto big-endian layout with
magic 0x00000803.
"""

from __future__ import annotations

import math
import struct

import numpy as np

from .models import CorruptionSpec, DaaeModel, DaeModel, DvaeModel, Model
from .nn import Mlp, MlpSpec

CHECKPOINT_MAGIC = b"DAEB"
CHECKPOINT_VERSION = 1
IDX_IMAGE_MAGIC = 0x00000803

_KIND_TAGS = {"dae": 0, "dvae": 1, "daae": 2}
_TAG_KINDS = {v: k for k, v in _KIND_TAGS.items()}
_HIDDEN_TAGS = {"relu": 0, "leaky_relu": 1}
_TAG_HIDDEN = {v: k for k, v in _HIDDEN_TAGS.items()}
_OUTPUT_TAGS = {"identity": 0, "sigmoid": 1}
_TAG_OUTPUT = {v: k for k, v in _OUTPUT_TAGS.items()}


class CheckpointError(ValueError):
    """Base class for unreadable checkpoint files."""


class CheckpointFormatError(CheckpointError):
    """Bad magic, unknown tag, or leftover bytes."""


class CheckpointVersionError(CheckpointError):
    """The file declares a format version this code does not speak."""


class CheckpointTruncatedError(CheckpointError):
    """The file ends before the declared content does."""


class IdxFormatError(ValueError):
    """An IDX file whose header or payload does not add up."""


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def _mlps_of(model: Model) -> list[Mlp]:
    mlps = [model.encoder, model.decoder]
    if isinstance(model, DaaeModel):
        mlps.append(model.discriminator)
    return mlps


def _pack_spec(spec: MlpSpec) -> bytes:
    parts = [struct.pack("<B", len(spec.layer_sizes))]
    parts.append(struct.pack(f"<{len(spec.layer_sizes)}I", *spec.layer_sizes))
    parts.append(
        struct.pack(
            "<BBd",
            _HIDDEN_TAGS[spec.hidden_activation],
            _OUTPUT_TAGS[spec.output_activation],
            spec.leaky_slope,
        )
    )
    return b"".join(parts)


def save_checkpoint(model: Model, path) -> None:
    """Serialize a model; the written file loads back bitwise-identical."""
    mlps = _mlps_of(model)
    dropout = model.dropout_rate if isinstance(model, DaaeModel) else 0.0
    blob = [
        CHECKPOINT_MAGIC,
        struct.pack("<I", CHECKPOINT_VERSION),
        struct.pack("<B", _KIND_TAGS[model.kind]),
        struct.pack("<d", model.corruption.sigma),
        struct.pack("<I", model.latent_dim),
        struct.pack("<d", dropout),
        struct.pack("<B", len(mlps)),
    ]
    blob.extend(_pack_spec(mlp.spec) for mlp in mlps)
    for mlp in mlps:
        for w, b in zip(mlp.weights, mlp.biases):
            blob.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
            blob.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    with open(path, "wb") as fh:
        fh.write(b"".join(blob))


class _Reader:
    def __init__(self, data: bytes, what: str):
        self.data = data
        self.offset = 0
        self.what = what

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.data):
            raise CheckpointTruncatedError(
                f"{self.what} ends at byte {len(self.data)}, "
                f"needed {self.offset + n}"
            )
        chunk = self.data[self.offset : self.offset + n]
        self.offset += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def _read_spec(reader: _Reader) -> MlpSpec:
    (n_sizes,) = reader.unpack("<B")
    if n_sizes < 2:
        raise CheckpointFormatError(f"network with {n_sizes} layer sizes at byte {reader.offset}")
    sizes = reader.unpack(f"<{n_sizes}I")
    hidden_tag, output_tag, slope = reader.unpack("<BBd")
    if hidden_tag not in _TAG_HIDDEN or output_tag not in _TAG_OUTPUT:
        raise CheckpointFormatError(
            f"unknown activation tag at byte {reader.offset}"
        )
    return MlpSpec(sizes, _TAG_HIDDEN[hidden_tag], _TAG_OUTPUT[output_tag], slope)


def _read_mlp(reader: _Reader, spec: MlpSpec) -> Mlp:
    weights, biases = [], []
    sizes = spec.layer_sizes
    for i in range(spec.n_layers):
        fan_in, fan_out = sizes[i], sizes[i + 1]
        w = np.frombuffer(reader.take(8 * fan_in * fan_out), dtype="<f8")
        weights.append(w.reshape(fan_out, fan_in).astype(np.float64))
        b = np.frombuffer(reader.take(8 * fan_out), dtype="<f8")
        biases.append(b.astype(np.float64))
    return Mlp(spec, weights, biases)


def load_checkpoint(path) -> Model:
    """Read a checkpoint back into a model, validating as it goes."""
    with open(path, "rb") as fh:
        data = fh.read()
    reader = _Reader(data, f"checkpoint {path}")
    if reader.take(4) != CHECKPOINT_MAGIC:
        raise CheckpointFormatError(f"bad magic in {path}; not a checkpoint file")
    (version,) = reader.unpack("<I")
    if version != CHECKPOINT_VERSION:
        raise CheckpointVersionError(
            f"checkpoint version {version} is not supported (expected {CHECKPOINT_VERSION})"
        )
    (kind_tag,) = reader.unpack("<B")
    if kind_tag not in _TAG_KINDS:
        raise CheckpointFormatError(f"unknown model kind tag {kind_tag}")
    kind = _TAG_KINDS[kind_tag]
    (sigma,) = reader.unpack("<d")
    (latent,) = reader.unpack("<I")
    (dropout,) = reader.unpack("<d")
    (n_mlps,) = reader.unpack("<B")
    expected = 3 if kind == "daae" else 2
    if n_mlps != expected:
        raise CheckpointFormatError(
            f"{kind} checkpoint declares {n_mlps} networks, expected {expected}"
        )
    specs = [_read_spec(reader) for _ in range(n_mlps)]
    mlps = [_read_mlp(reader, spec) for spec in specs]
    if reader.offset != len(data):
        raise CheckpointFormatError(
            f"trailing data after byte {reader.offset} in {path}"
        )
    corruption = CorruptionSpec(sigma)
    if kind == "dae":
        model = DaeModel(mlps[0], mlps[1], corruption)
    elif kind == "dvae":
        model = DvaeModel(mlps[0], mlps[1], corruption)
    else:
        model = DaaeModel(mlps[0], mlps[1], mlps[2], corruption, dropout)
    if model.latent_dim != latent:
        raise CheckpointFormatError(
            f"declared latent dim {latent} does not match networks ({model.latent_dim})"
        )
    return model


# ---------------------------------------------------------------------------
# PGM image grids
# ---------------------------------------------------------------------------

def write_pgm_grid(images, image_shape, grid_cols: int, path) -> None:
    """Tile flat images into one binary PGM, 1-pixel black separators.

    images is (n, h*w) with values interpreted in [0, 1] (clamped here,
    quantized to maxval 255); image_shape is (h, w); tiles fill row-major
    and unused cells stay black.
    """
    arr = np.atleast_2d(np.asarray(images, dtype=np.float64))
    h, w = int(image_shape[0]), int(image_shape[1])
    if h < 1 or w < 1 or arr.shape[1] != h * w:
        raise ValueError(
            f"image shape {image_shape} does not match flat size {arr.shape[1]}"
        )
    if grid_cols < 1:
        raise ValueError(f"grid_cols must be >= 1, got {grid_cols}")
    n = arr.shape[0]
    rows = math.ceil(n / grid_cols)
    cols = min(grid_cols, n)
    canvas = np.zeros((rows * h + rows - 1, cols * w + cols - 1), dtype=np.uint8)
    quantized = np.rint(np.clip(arr, 0.0, 1.0) * 255.0).astype(np.uint8)
    for i in range(n):
        r, c = divmod(i, grid_cols)
        top, left = r * (h + 1), c * (w + 1)
        canvas[top : top + h, left : left + w] = quantized[i].reshape(h, w)
    header = f"P5\n{canvas.shape[1]} {canvas.shape[0]}\n255\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header + canvas.tobytes())


def read_pgm(path) -> np.ndarray:
    """Read back a binary PGM written by write_pgm_grid, as floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0] != b"P5" or parts[2] != b"255":
        raise ValueError(f"{path} is not a maxval-255 binary PGM")
    width, height = (int(tok) for tok in parts[1].split())
    pixels = np.frombuffer(parts[3], dtype=np.uint8, count=width * height)
    return pixels.reshape(height, width).astype(np.float64) / 255.0


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

def write_csv(rows, path) -> None:
    """Write dict rows as CSV: header from the first row, '\\n' endings."""
    rows = list(rows)
    if not rows:
        raise ValueError("write_csv needs at least one row")
    columns = list(rows[0].keys())
    lines = [",".join(columns)]
    for i, row in enumerate(rows):
        if list(row.keys()) != columns:
            raise ValueError(f"row {i} columns {list(row)} differ from header {columns}")
        lines.append(",".join(str(row[c]) for c in columns))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# IDX image files
# ---------------------------------------------------------------------------

def read_idx_header(path) -> tuple[int, int, int]:
    """Return (n_images, rows, cols) from an IDX image file header."""
    with open(path, "rb") as fh:
        header = fh.read(16)
    if len(header) < 4:
        raise IdxFormatError(f"{path}: file ends at byte {len(header)}, no magic")
    (magic,) = struct.unpack(">I", header[:4])
    if magic != IDX_IMAGE_MAGIC:
        raise IdxFormatError(
            f"{path}: magic 0x{magic:08x} at byte 0 is not an IDX image file "
            f"(expected 0x{IDX_IMAGE_MAGIC:08x})"
        )
    if len(header) < 16:
        raise IdxFormatError(f"{path}: header truncated at byte {len(header)}")
    n, rows, cols = struct.unpack(">III", header[4:16])
    return n, rows, cols


def load_idx_images(path) -> np.ndarray:
    """Load an IDX image file as (n, rows*cols) floats in [0, 1]."""
    n, rows, cols = read_idx_header(path)
    with open(path, "rb") as fh:
        data = fh.read()
    expected = 16 + n * rows * cols
    if len(data) < expected:
        raise IdxFormatError(f"{path}: payload truncated at byte {len(data)}, expected {expected}")
    if len(data) > expected:
        raise IdxFormatError(f"{path}: trailing data at byte {expected}")
    pixels = np.frombuffer(data, dtype=np.uint8, offset=16)
    return pixels.reshape(n, rows * cols).astype(np.float64) / 255.0
