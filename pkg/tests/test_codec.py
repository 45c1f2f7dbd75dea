"""Intra codec checks: transform oracle, entropy stage, rate/distortion laws."""

import numpy as np
import pytest

from chromacodec import ConfigError, DataError
from chromacodec import codec


def direct_dct8(block):
    """Reference DCT straight from the definition, O(n^4)."""
    n = 8
    out = np.zeros((n, n))
    for u in range(n):
        for v in range(n):
            cu = np.sqrt(1.0 / n) if u == 0 else np.sqrt(2.0 / n)
            cv = np.sqrt(1.0 / n) if v == 0 else np.sqrt(2.0 / n)
            acc = 0.0
            for x in range(n):
                for y in range(n):
                    acc += (
                        block[x, y]
                        * np.cos((2 * x + 1) * u * np.pi / (2 * n))
                        * np.cos((2 * y + 1) * v * np.pi / (2 * n))
                    )
            out[u, v] = cu * cv * acc
    return out


def golomb_bits(value):
    w = codec.BitWriter()
    codec.exp_golomb_write(w, value)
    p = w.payload()
    return "".join(
        str((p.data[i >> 3] >> (7 - (i & 7))) & 1) for i in range(p.bit_length)
    )


class TestTransform:
    def test_matches_direct_definition(self):
        rng = np.random.default_rng(20)
        block = rng.uniform(-128, 128, size=(8, 8))
        assert np.max(np.abs(codec.dct8(block) - direct_dct8(block))) < 1e-10

    def test_constant_block_dc(self):
        coef = codec.dct8(np.full((8, 8), 9.0))
        assert abs(coef[0, 0] - 72.0) < 1e-10
        coef[0, 0] = 0.0
        assert np.max(np.abs(coef)) < 1e-10

    def test_inverse_round_trip(self):
        rng = np.random.default_rng(21)
        block = rng.uniform(-128, 128, size=(8, 8))
        assert np.max(np.abs(codec.idct8(codec.dct8(block)) - block)) < 1e-10

    def test_parseval(self):
        rng = np.random.default_rng(22)
        block = rng.uniform(-128, 128, size=(8, 8))
        coef = codec.dct8(block)
        assert abs((block**2).sum() - (coef**2).sum()) < 1e-9

    def test_qstep_values(self):
        assert codec.qstep(4) == 1.0
        assert codec.qstep(10) == 2.0
        assert abs(codec.qstep(27) - 2.0 ** (23 / 6)) < 1e-12

    def test_qp_range_checked(self):
        with pytest.raises(ConfigError):
            codec.CodecParams(qp=52)
        with pytest.raises(ConfigError):
            codec.qstep(-1)


class TestEntropy:
    def test_known_codewords(self):
        assert golomb_bits(0) == "1"
        assert golomb_bits(1) == "010"
        assert golomb_bits(2) == "011"
        assert golomb_bits(3) == "00100"

    def test_round_trip_exhaustive(self):
        w = codec.BitWriter()
        for v in range(10_001):
            codec.exp_golomb_write(w, v)
        p = w.payload()
        r = codec.BitReader(p.data, p.bit_length)
        for v in range(10_001):
            assert codec.exp_golomb_read(r) == v

    def test_negative_rejected(self):
        with pytest.raises(DataError):
            codec.exp_golomb_write(codec.BitWriter(), -1)

    def test_reader_stops_at_bit_length(self):
        w = codec.BitWriter()
        codec.exp_golomb_write(w, 0)
        p = w.payload()
        r = codec.BitReader(p.data, p.bit_length)
        codec.exp_golomb_read(r)
        with pytest.raises(DataError):
            r.read(1)

    def test_signed_mapping(self):
        pairs = [(1, 1), (-1, 2), (2, 3), (-2, 4), (3, 5)]
        for z, c in pairs:
            assert codec._signed_to_code(z) == c
            assert codec._code_to_signed(c) == z

    def test_zigzag_prefix(self):
        want = [(0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (0, 3), (1, 2), (2, 1), (3, 0)]
        assert codec._ZIGZAG[:10] == want
        assert sorted(codec._ZIGZAG) == [(i, j) for i in range(8) for j in range(8)]


class TestPlaneCodec:
    def test_constant_plane_is_all_eob(self):
        plane = np.full((32, 32), 128, dtype=np.uint8)
        payload = codec.encode_plane(plane, codec.CodecParams(qp=27))
        blocks = 16
        assert len(payload.data) < 2 * blocks
        back = codec.decode_plane(payload, (32, 32), codec.CodecParams(qp=27))
        assert np.array_equal(back, plane)

    @pytest.mark.parametrize("qp", [27, 32, 37, 42])
    def test_distortion_bound(self, qp):
        rng = np.random.default_rng(23)
        plane = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
        params = codec.CodecParams(qp=qp)
        back = codec.decode_plane(
            codec.encode_plane(plane, params), (64, 64), params
        )
        mse = float(np.mean((back.astype(float) - plane.astype(float)) ** 2))
        assert mse <= (params.step / 2.0) ** 2 + 0.5

    def test_bitrate_monotone_in_qp(self):
        rng = np.random.default_rng(24)
        plane = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
        bits = [
            codec.encode_plane(plane, codec.CodecParams(qp=qp)).bit_length
            for qp in (27, 32, 37, 42)
        ]
        assert bits[0] > bits[1] > bits[2] > bits[3]

    def test_deterministic_bytes(self):
        rng = np.random.default_rng(25)
        plane = rng.integers(0, 256, size=(40, 24), dtype=np.uint8)
        params = codec.CodecParams(qp=32)
        a = codec.encode_plane(plane, params)
        b = codec.encode_plane(plane, params)
        assert a.data == b.data and a.bit_length == b.bit_length

    def test_non_multiple_of_8_dims(self):
        rng = np.random.default_rng(26)
        plane = rng.integers(0, 256, size=(13, 21), dtype=np.uint8)
        params = codec.CodecParams(qp=27)
        back = codec.decode_plane(codec.encode_plane(plane, params), (21, 13), params)
        assert back.shape == (13, 21)
        mse = float(np.mean((back.astype(float) - plane.astype(float)) ** 2))
        assert mse <= (params.step / 2.0) ** 2 + 0.5

    def test_smooth_content_codes_smaller(self):
        grad = np.tile(np.arange(64, dtype=np.uint8) * 2, (64, 1))
        rng = np.random.default_rng(27)
        noise = rng.integers(0, 256, size=(64, 64), dtype=np.uint8)
        params = codec.CodecParams(qp=32)
        assert (
            codec.encode_plane(grad, params).bit_length
            < codec.encode_plane(noise, params).bit_length
        )

    def test_empty_plane_rejected(self):
        with pytest.raises(DataError):
            codec.encode_plane(np.zeros((0, 8), dtype=np.uint8), codec.CodecParams(qp=27))

    def test_low_qp_near_lossless(self):
        rng = np.random.default_rng(28)
        plane = rng.integers(0, 256, size=(16, 16), dtype=np.uint8)
        params = codec.CodecParams(qp=0)
        back = codec.decode_plane(codec.encode_plane(plane, params), (16, 16), params)
        assert np.max(np.abs(back.astype(int) - plane.astype(int))) <= 1
