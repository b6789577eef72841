"""Binary container format: round trips, determinism, and corruption checks."""

import numpy as np
import pytest

from sgir.container import MAGIC, read_container, write_container
from sgir.errors import FormatError


def _sample_arrays():
    return {
        "weights": np.arange(6, dtype=np.float64).reshape(2, 3),
        "bias": np.array([[-1.5, 2.25]]),
    }


def test_round_trip_is_bit_exact(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", _sample_arrays(), meta={"note": "x", "n": 3})
    header, arrays = read_container(path, expect_kind="demo")
    assert header["kind"] == "demo"
    assert header["format_version"] == 1
    assert header["meta"] == {"note": "x", "n": 3}
    assert [e["name"] for e in header["arrays"]] == ["weights", "bias"]
    for name, arr in _sample_arrays().items():
        assert np.array_equal(arrays[name], arr)
        assert arrays[name].dtype == np.float64


def test_identical_inputs_produce_identical_bytes(tmp_path):
    p1, p2 = tmp_path / "1.bin", tmp_path / "2.bin"
    write_container(p1, "demo", _sample_arrays(), meta={"n": 3})
    write_container(p2, "demo", _sample_arrays(), meta={"n": 3})
    assert p1.read_bytes() == p2.read_bytes()


def test_non_float_input_is_converted(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", {"ids": np.array([[1, 2], [3, 4]])})
    _, arrays = read_container(path)
    assert arrays["ids"].dtype == np.float64
    assert np.array_equal(arrays["ids"], [[1.0, 2.0], [3.0, 4.0]])


def test_kind_mismatch_rejected(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", _sample_arrays())
    with pytest.raises(FormatError):
        read_container(path, expect_kind="other")
    # without an expectation the same file reads fine
    read_container(path)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "a.bin"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 16)
    with pytest.raises(FormatError):
        read_container(path)
    (tmp_path / "short.bin").write_bytes(MAGIC[:4])
    with pytest.raises(FormatError):
        read_container(tmp_path / "short.bin")


def test_truncated_header_rejected(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", _sample_arrays())
    raw = path.read_bytes()
    head_len = int.from_bytes(raw[8:16], "little")
    path.write_bytes(raw[: 16 + head_len - 4])
    with pytest.raises(FormatError, match="truncated"):
        read_container(path)


def test_unreadable_header_rejected(tmp_path):
    path = tmp_path / "a.bin"
    garbage = b"{not json"
    path.write_bytes(MAGIC + len(garbage).to_bytes(8, "little") + garbage)
    with pytest.raises(FormatError, match="unreadable"):
        read_container(path)


def test_unsupported_version_rejected(tmp_path):
    path = tmp_path / "a.bin"
    head = b'{"arrays":[],"format_version":99,"kind":"demo","meta":{}}'
    path.write_bytes(MAGIC + len(head).to_bytes(8, "little") + head)
    with pytest.raises(FormatError, match="format_version"):
        read_container(path)


def test_truncated_block_rejected(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", _sample_arrays())
    raw = path.read_bytes()
    path.write_bytes(raw[:-8])
    with pytest.raises(FormatError, match="truncated data block"):
        read_container(path)


def test_trailing_bytes_rejected(tmp_path):
    path = tmp_path / "a.bin"
    write_container(path, "demo", _sample_arrays())
    path.write_bytes(path.read_bytes() + b"\x00\x01")
    with pytest.raises(FormatError, match="trailing"):
        read_container(path)
