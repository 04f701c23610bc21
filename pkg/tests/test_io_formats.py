"""Tests for checkpoint, PGM, CSV, and IDX readers and writers.

Corruption tests patch bytes at fixed offsets; the header layout is
magic(0:4) version(4:8) kind(8) sigma(9:17) latent(17:21) dropout(21:29).
"""

import struct

import numpy as np
import pytest

from daechain.io_formats import (
    CHECKPOINT_MAGIC,
    CheckpointError,
    CheckpointFormatError,
    CheckpointTruncatedError,
    CheckpointVersionError,
    IdxFormatError,
    load_checkpoint,
    load_idx_images,
    read_idx_header,
    read_pgm,
    save_checkpoint,
    write_csv,
    write_pgm_grid,
)
from daechain.models import build_model
from daechain.numeric import Prng


def small_model(kind: str, seed: int = 0):
    return build_model(
        kind,
        data_dim=3,
        latent_dim=2,
        rng=Prng(seed),
        hidden=(5, 4),
        sigma=0.35,
        dropout_rate=0.15,
        disc_hidden=(6,),
    )


def mlps_of(model):
    mlps = [model.encoder, model.decoder]
    if model.kind == "daae":
        mlps.append(model.discriminator)
    return mlps


def assert_models_identical(a, b):
    assert a.kind == b.kind
    assert a.corruption.sigma == b.corruption.sigma
    if a.kind == "daae":
        assert a.dropout_rate == b.dropout_rate
    for ma, mb in zip(mlps_of(a), mlps_of(b)):
        assert ma.spec == mb.spec
        for wa, wb in zip(ma.weights, mb.weights):
            assert np.array_equal(wa, wb)
        for ba, bb in zip(ma.biases, mb.biases):
            assert np.array_equal(ba, bb)


class TestCheckpointRoundTrip:
    @pytest.mark.parametrize("kind", ["dae", "dvae", "daae"])
    def test_bitwise_round_trip(self, kind, tmp_path):
        model = small_model(kind)
        path = tmp_path / "model.ckpt"
        save_checkpoint(model, path)
        loaded = load_checkpoint(path)
        assert_models_identical(model, loaded)

    def test_rewrite_is_byte_identical(self, tmp_path):
        model = small_model("daae", seed=4)
        first = tmp_path / "a.ckpt"
        second = tmp_path / "b.ckpt"
        save_checkpoint(model, first)
        save_checkpoint(load_checkpoint(first), second)
        assert first.read_bytes() == second.read_bytes()

    def test_file_starts_with_magic(self, tmp_path):
        path = tmp_path / "model.ckpt"
        save_checkpoint(small_model("dae"), path)
        assert path.read_bytes()[:4] == CHECKPOINT_MAGIC

    def test_errors_are_value_errors(self):
        assert issubclass(CheckpointError, ValueError)
        for sub in (CheckpointFormatError, CheckpointVersionError, CheckpointTruncatedError):
            assert issubclass(sub, CheckpointError)


class TestCheckpointCorruption:
    def make_bytes(self, tmp_path, kind="dae"):
        path = tmp_path / "model.ckpt"
        save_checkpoint(small_model(kind), path)
        return path, bytearray(path.read_bytes())

    def test_bad_magic(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        raw[0] = ord("X")
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointFormatError, match="magic"):
            load_checkpoint(path)

    def test_unsupported_version(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        raw[5] = 7  # version u32 becomes 0x00070001
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointVersionError, match="version"):
            load_checkpoint(path)

    def test_unknown_kind_tag(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        raw[8] = 9
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointFormatError, match="kind tag"):
            load_checkpoint(path)

    def test_latent_mismatch(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        raw[17:21] = struct.pack("<I", 5)
        path.write_bytes(bytes(raw))
        with pytest.raises(CheckpointFormatError, match="latent"):
            load_checkpoint(path)

    def test_truncated_parameters(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        path.write_bytes(bytes(raw[: len(raw) // 2]))
        with pytest.raises(CheckpointTruncatedError, match="byte"):
            load_checkpoint(path)

    def test_truncated_header(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        path.write_bytes(bytes(raw[:10]))
        with pytest.raises(CheckpointTruncatedError):
            load_checkpoint(path)

    def test_trailing_data(self, tmp_path):
        path, raw = self.make_bytes(tmp_path)
        path.write_bytes(bytes(raw) + b"\x00")
        with pytest.raises(CheckpointFormatError, match="trailing"):
            load_checkpoint(path)


class TestPgmGrid:
    def test_single_image_exact_payload(self, tmp_path):
        path = tmp_path / "one.pgm"
        write_pgm_grid(np.ones((1, 4)), (2, 2), 1, path)
        raw = path.read_bytes()
        assert raw == b"P5\n2 2\n255\n" + bytes([255] * 4)

    def test_grid_dimensions_and_separators(self, tmp_path):
        path = tmp_path / "grid.pgm"
        images = np.full((3, 4), 0.5)
        write_pgm_grid(images, (2, 2), 2, path)
        canvas = read_pgm(path)
        # 2x2 cells of 2x2 tiles with 1-pixel gaps: 5x5 canvas.
        assert canvas.shape == (5, 5)
        assert np.all(canvas[2, :] == 0.0)
        assert np.all(canvas[:, 2] == 0.0)
        # Fourth cell has no image and stays black.
        assert np.all(canvas[3:, 3:] == 0.0)
        assert np.all(canvas[:2, :2] == 128.0 / 255.0)

    def test_values_clamped_and_quantized(self, tmp_path):
        path = tmp_path / "clamp.pgm"
        write_pgm_grid(np.array([[-0.5, 0.0, 1.0, 2.0]]), (2, 2), 1, path)
        canvas = read_pgm(path)
        assert np.array_equal(canvas.reshape(-1) * 255.0, [0.0, 0.0, 255.0, 255.0])

    def test_quantization_rounds_to_nearest(self, tmp_path):
        path = tmp_path / "round.pgm"
        # 0.5/255 is exactly half a quantum; rint rounds to even (0).
        write_pgm_grid(np.array([[1.4 / 255.0, 1.6 / 255.0, 200.5 / 255.0, 0.0]]), (2, 2), 1, path)
        canvas = read_pgm(path) * 255.0
        assert np.array_equal(canvas.reshape(-1), [1.0, 2.0, 200.0, 0.0])

    def test_round_trip_is_exact_on_quantized_values(self, tmp_path):
        path = tmp_path / "rt.pgm"
        levels = np.arange(64, dtype=np.float64) / 255.0
        write_pgm_grid(levels.reshape(1, 64), (8, 8), 1, path)
        back = read_pgm(path)
        assert np.array_equal(back.reshape(-1), levels)

    def test_rejects_bad_shape_and_grid(self, tmp_path):
        with pytest.raises(ValueError):
            write_pgm_grid(np.ones((1, 5)), (2, 2), 1, tmp_path / "x.pgm")
        with pytest.raises(ValueError):
            write_pgm_grid(np.ones((1, 4)), (2, 2), 0, tmp_path / "x.pgm")

    def test_read_rejects_non_pgm(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"P6\n2 2\n255\n" + bytes(12))
        with pytest.raises(ValueError):
            read_pgm(path)


class TestCsv:
    def test_header_plus_one_line_per_row(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv(
            [{"a": 1, "b": 2.5}, {"a": 3, "b": -1}, {"a": 0, "b": 0}],
            path,
        )
        text = path.read_text(encoding="utf-8")
        lines = text.splitlines()
        assert lines == ["a,b", "1,2.5", "3,-1", "0,0"]
        assert text.endswith("\n")

    def test_newlines_are_unix(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv([{"x": 1}], path)
        assert b"\r" not in path.read_bytes()

    def test_column_order_follows_first_row(self, tmp_path):
        path = tmp_path / "rows.csv"
        write_csv([{"z": 1, "a": 2}], path)
        assert path.read_text(encoding="utf-8").splitlines()[0] == "z,a"

    def test_rejects_mismatched_rows(self, tmp_path):
        with pytest.raises(ValueError, match="row 1"):
            write_csv([{"a": 1}, {"b": 2}], tmp_path / "x.csv")

    def test_rejects_empty(self, tmp_path):
        with pytest.raises(ValueError):
            write_csv([], tmp_path / "x.csv")


class TestIdx:
    def write_idx(self, path, n, rows, cols, payload: bytes):
        path.write_bytes(struct.pack(">IIII", 0x00000803, n, rows, cols) + payload)

    def test_header_fields(self, tmp_path):
        path = tmp_path / "img.idx"
        self.write_idx(path, 2, 2, 2, bytes(8))
        assert read_idx_header(path) == (2, 2, 2)

    def test_loads_scaled_pixels(self, tmp_path):
        path = tmp_path / "img.idx"
        self.write_idx(path, 2, 2, 2, bytes([0, 255, 128, 64, 1, 2, 3, 4]))
        images = load_idx_images(path)
        assert images.shape == (2, 4)
        assert np.array_equal(images[0], np.array([0, 255, 128, 64]) / 255.0)
        assert np.array_equal(images[1], np.array([1, 2, 3, 4]) / 255.0)

    def test_round_trip_of_synthetic_bytes(self, tmp_path):
        rng = np.random.default_rng(0)
        pixels = rng.integers(0, 256, size=(5, 6), dtype=np.uint8)
        path = tmp_path / "img.idx"
        self.write_idx(path, 5, 2, 3, pixels.tobytes())
        images = load_idx_images(path)
        assert np.array_equal(np.rint(images * 255.0).astype(np.uint8), pixels)

    def test_rejects_wrong_magic(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(struct.pack(">IIII", 0x00000801, 2, 2, 2) + bytes(8))
        with pytest.raises(IdxFormatError, match="magic"):
            read_idx_header(path)

    def test_rejects_short_header(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(struct.pack(">I", 0x00000803) + b"\x00\x00")
        with pytest.raises(IdxFormatError, match="truncated"):
            read_idx_header(path)

    def test_rejects_missing_magic(self, tmp_path):
        path = tmp_path / "img.idx"
        path.write_bytes(b"\x00\x08")
        with pytest.raises(IdxFormatError, match="magic"):
            read_idx_header(path)

    def test_rejects_truncated_payload(self, tmp_path):
        path = tmp_path / "img.idx"
        self.write_idx(path, 3, 2, 2, bytes(11))
        with pytest.raises(IdxFormatError, match="expected 28"):
            load_idx_images(path)

    def test_rejects_trailing_bytes(self, tmp_path):
        path = tmp_path / "img.idx"
        self.write_idx(path, 1, 2, 2, bytes(5))
        with pytest.raises(IdxFormatError, match="trailing"):
            load_idx_images(path)
