"""Binary PGM codec, strict about the P5 subset it accepts."""

import numpy as np
import pytest

from nutsort.errors import DataError
from nutsort.pgm import decode_pgm, encode_pgm, read_pgm, write_pgm


def tiny_buf():
    return b"P5\n2 2\n255\n" + bytes([0, 64, 128, 255])


class TestDecode:
    def test_hand_assembled_buffer(self):
        image = decode_pgm(tiny_buf())
        np.testing.assert_array_equal(image, [[0, 64], [128, 255]])
        assert image.dtype == np.uint8

    def test_width_and_height_order(self):
        buf = b"P5\n3 1\n255\n" + bytes([10, 20, 30])
        assert decode_pgm(buf).shape == (1, 3)

    def test_comments_in_header(self):
        buf = b"P5\n# made by hand\n2 1\n# another\n255\n" + bytes([7, 9])
        np.testing.assert_array_equal(decode_pgm(buf), [[7, 9]])

    def test_crlf_and_space_separators(self):
        buf = b"P5 2 1\r\n255\t" + bytes([1, 2])
        np.testing.assert_array_equal(decode_pgm(buf), [[1, 2]])

    def test_single_pixel(self):
        np.testing.assert_array_equal(decode_pgm(b"P5\n1 1\n255\n\xff"), [[255]])

    def test_bad_magic(self):
        with pytest.raises(DataError, match="P5"):
            decode_pgm(b"P2\n1 1\n255\n0")

    def test_wrong_maxval(self):
        with pytest.raises(DataError, match="maxval"):
            decode_pgm(b"P5\n1 1\n65535\n\x00\x00")

    def test_truncated_pixels(self):
        with pytest.raises(DataError, match="pixel"):
            decode_pgm(b"P5\n2 2\n255\n" + bytes([0, 1, 2]))

    def test_extra_pixels(self):
        with pytest.raises(DataError):
            decode_pgm(tiny_buf() + b"\x00")

    def test_zero_dimension(self):
        with pytest.raises(DataError):
            decode_pgm(b"P5\n0 2\n255\n")

    def test_missing_header_fields(self):
        with pytest.raises(DataError):
            decode_pgm(b"P5\n2\n")

    def test_nonnumeric_dimension(self):
        with pytest.raises(DataError):
            decode_pgm(b"P5\nab 2\n255\n\x00\x00")


class TestEncode:
    def test_round_trip(self):
        rng = np.random.default_rng(0)
        image = rng.integers(0, 256, size=(5, 7), dtype=np.uint8)
        np.testing.assert_array_equal(decode_pgm(encode_pgm(image)), image)

    def test_header_layout(self):
        image = np.zeros((2, 3), dtype=np.uint8)
        assert encode_pgm(image).startswith(b"P5\n3 2\n255\n")

    def test_rejects_non_uint8(self):
        with pytest.raises(DataError):
            encode_pgm(np.zeros((2, 2), dtype=np.float64))

    def test_rejects_wrong_rank(self):
        with pytest.raises(DataError):
            encode_pgm(np.zeros(4, dtype=np.uint8))


class TestFiles:
    def test_write_then_read(self, tmp_path):
        path = tmp_path / "img.pgm"
        image = np.arange(12, dtype=np.uint8).reshape(3, 4)
        write_pgm(path, image)
        np.testing.assert_array_equal(read_pgm(path), image)

    def test_read_error_names_path(self, tmp_path):
        path = tmp_path / "bad.pgm"
        path.write_bytes(b"nope")
        with pytest.raises(DataError, match="bad.pgm"):
            read_pgm(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError, match="gone.pgm"):
            read_pgm(tmp_path / "gone.pgm")
