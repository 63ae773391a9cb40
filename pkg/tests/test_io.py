import numpy as np
import pytest

from src.errors import DataIOError, InvalidParameterError
from src.io import emit_image, read_array, read_csv_image, read_header, read_json, read_pgm, write_array, write_json
from src.io.binary import encode_array
from src.io.manifest import dumps, read_model
from src.schemas.manifest import Normalization


def test_dotb_header_layout():
    """Test the little-endian DOTB header"""
    payload = encode_array(np.zeros((2, 3), dtype=np.float32))
    assert payload[:4] == b"DOTB"
    assert payload[4] == 1
    assert payload[5] == 1
    assert payload[6:8] == (2).to_bytes(2, "little")
    assert payload[8:12] == (2).to_bytes(4, "little")
    assert payload[12:16] == (3).to_bytes(4, "little")
    assert len(payload) == 16 + 6 * 4


def test_dotb_preserves_values(tmp_path):
    """Test that stored arrays read back bit-exactly"""
    array = np.random.default_rng(0).standard_normal((4, 5, 6))
    path = write_array(tmp_path / "nested" / "a.dotb", array)
    loaded = read_array(path)
    assert loaded.dtype == np.float64
    assert np.array_equal(loaded, array)
    assert read_header(path) == (np.dtype("<f8"), (4, 5, 6))


def test_dotb_rejects_other_dtypes(tmp_path):
    """Test that integer arrays cannot be stored"""
    with pytest.raises(DataIOError):
        write_array(tmp_path / "a.dotb", np.arange(3))


def test_dotb_malformed(tmp_path):
    """Test corrupted files"""
    bad_magic = tmp_path / "magic.dotb"
    bad_magic.write_bytes(b"NOPE" + bytes(12))
    with pytest.raises(DataIOError, match="Not a DOTB file"):
        read_array(bad_magic)

    truncated = tmp_path / "truncated.dotb"
    truncated.write_bytes(encode_array(np.ones(4))[:-3])
    with pytest.raises(DataIOError, match="size mismatch"):
        read_array(truncated)

    with pytest.raises(DataIOError):
        read_array(tmp_path / "missing.dotb")


def test_emit_image(tmp_path):
    """Test PGM dimensions, orientation and the CSV twin"""
    array = np.zeros((4, 10))
    array[0, 0] = 1.0
    pgm = emit_image(array, tmp_path / "preview")
    assert pgm.suffix == ".pgm"
    assert pgm.read_bytes().startswith(b"P5\n10 4\n255\n")
    pixels = read_pgm(pgm)
    assert pixels.shape == (4, 10)
    assert pixels[0, 0] == 255
    assert pixels[1:].max() == 0
    assert np.allclose(read_csv_image(tmp_path / "preview.csv"), array)
    scaling = (tmp_path / "preview.scaling.txt").read_text()
    assert "scaling minmax" in scaling


def test_emit_image_fixed_range_and_depth(tmp_path):
    """Test fixed scaling with clipping and 16-bit output"""
    array = np.array([[-1.0, 0.5, 2.0]])
    pixels = read_pgm(emit_image(array, tmp_path / "fixed", scaling=(0.0, 1.0), bits=16))
    assert pixels.tolist() == [[0, 32768, 65535]]


def test_emit_image_constant(tmp_path):
    """Test that a constant image maps to zero"""
    assert read_pgm(emit_image(np.ones((2, 2)), tmp_path / "flat")).max() == 0


def test_emit_image_invalid(tmp_path):
    """Test invalid shapes, depths and ranges"""
    with pytest.raises(InvalidParameterError):
        emit_image(np.ones(3), tmp_path / "a")
    with pytest.raises(InvalidParameterError):
        emit_image(np.ones((2, 2)), tmp_path / "a", bits=12)
    with pytest.raises(InvalidParameterError):
        emit_image(np.ones((2, 2)), tmp_path / "a", scaling=(1.0, 0.0))
    with pytest.raises(InvalidParameterError):
        emit_image(np.ones((2, 2)), tmp_path / "a", scaling="log")


def test_json_is_canonical(tmp_path):
    """Test sorted keys and trailing newline"""
    assert dumps({"b": 1, "a": 2}) == '{\n  "a": 2,\n  "b": 1\n}\n'
    path = write_json(tmp_path / "x.json", {"z": [1, 2]})
    assert read_json(path) == {"z": [1, 2]}


def test_read_model_validation(tmp_path):
    """Test that malformed documents raise a data error"""
    path = write_json(tmp_path / "norm.json", {"mu_a_background": 0.01})
    with pytest.raises(DataIOError, match="Malformed Normalization"):
        read_model(path, Normalization)
    with pytest.raises(DataIOError):
        read_json(tmp_path / "missing.json")
