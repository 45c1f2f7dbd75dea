"""Block-transform intra codec for single 8-bit planes.

Encodes a plane as 8×8 orthonormal DCT blocks with uniform scalar
quantization and exponential-Golomb entropy coding. It is deliberately
small: no prediction, no in-loop filters. Its job is to turn planes
into measurable bit counts whose rate and distortion move the right way
with QP, and to decode them back deterministically. The same plane and
parameters always produce identical payload bytes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

BLOCK = 8


def qstep(qp: int) -> float:
    """Quantizer step, doubling every 6 QP."""
    if not 0 <= qp <= 51:
        raise ConfigError(f"qp must be in [0, 51], got {qp}")
    return float(2.0 ** ((qp - 4) / 6.0))


@dataclass(frozen=True)
class CodecParams:
    qp: int

    def __post_init__(self):
        qstep(self.qp)  # range check

    @property
    def step(self) -> float:
        return qstep(self.qp)


@dataclass(frozen=True)
class PlanePayload:
    """Entropy-coded plane: packed bits plus the exact bit count."""

    data: bytes
    bit_length: int

    def __post_init__(self):
        if not 0 <= len(self.data) * 8 - self.bit_length < 8:
            raise DataError(
                f"bit length {self.bit_length} inconsistent with {len(self.data)} bytes"
            )


def _dct_matrix() -> np.ndarray:
    n = np.arange(BLOCK)
    mat = np.cos(np.pi * (2.0 * n[None, :] + 1.0) * n[:, None] / (2.0 * BLOCK))
    mat *= np.sqrt(2.0 / BLOCK)
    mat[0] = np.sqrt(1.0 / BLOCK)
    return mat


_DCT = _dct_matrix()


def dct8(block: np.ndarray) -> np.ndarray:
    """Orthonormal 2-D type-II DCT of one 8×8 block."""
    return _DCT @ np.asarray(block, dtype=np.float64) @ _DCT.T


def idct8(coef: np.ndarray) -> np.ndarray:
    return _DCT.T @ np.asarray(coef, dtype=np.float64) @ _DCT


def _zigzag_order():
    order = []
    for d in range(2 * BLOCK - 1):
        diag = [(i, d - i) for i in range(max(0, d - BLOCK + 1), min(d, BLOCK - 1) + 1)]
        if d % 2 == 0:
            diag.reverse()
        order.extend(diag)
    return order


_ZIGZAG = _zigzag_order()
_ZZ_ROWS = np.array([i for i, _ in _ZIGZAG])
_ZZ_COLS = np.array([j for _, j in _ZIGZAG])

_EOB = 64  # runs occupy [0, 63], so 64 is free to mark end-of-block


class BitWriter:
    """MSB-first big-endian bit packer."""

    def __init__(self):
        self._chunks = []
        self._acc = 0
        self._nbits = 0

    def write(self, value: int, width: int):
        if width and not 0 <= value < (1 << width):
            raise DataError(f"value {value} does not fit in {width} bits")
        self._acc = (self._acc << width) | value
        self._nbits += width
        while self._nbits >= 8:
            self._nbits -= 8
            self._chunks.append((self._acc >> self._nbits) & 0xFF)
        self._acc &= (1 << self._nbits) - 1

    def payload(self) -> PlanePayload:
        bits = len(self._chunks) * 8 + self._nbits
        out = bytes(self._chunks)
        if self._nbits:
            out += bytes([(self._acc << (8 - self._nbits)) & 0xFF])
        return PlanePayload(out, bits)


class BitReader:
    """Reads back what BitWriter wrote, in order."""

    def __init__(self, data: bytes, bit_length=None):
        self._data = data
        self._pos = 0
        self._limit = len(data) * 8 if bit_length is None else bit_length

    def read(self, width: int) -> int:
        if self._pos + width > self._limit:
            raise DataError("bit stream exhausted")
        value = 0
        pos = self._pos
        for _ in range(width):
            byte = self._data[pos >> 3]
            value = (value << 1) | ((byte >> (7 - (pos & 7))) & 1)
            pos += 1
        self._pos = pos
        return value


def exp_golomb_write(writer: BitWriter, value: int):
    """Order-0 exp-Golomb: 0→'1', 1→'010', 2→'011', ..."""
    if value < 0:
        raise DataError(f"exp-Golomb codes unsigned values, got {value}")
    n = value + 1
    width = n.bit_length()
    writer.write(0, width - 1)
    writer.write(n, width)


def exp_golomb_read(reader: BitReader) -> int:
    zeros = 0
    while reader.read(1) == 0:
        zeros += 1
        if zeros > 64:
            raise DataError("exp-Golomb prefix too long: corrupt stream")
    rest = reader.read(zeros) if zeros else 0
    return (1 << zeros) + rest - 1


def _signed_to_code(z: int) -> int:
    return 2 * abs(z) - (1 if z > 0 else 0)


def _code_to_signed(c: int) -> int:
    # c >= 1 here; zero levels are expressed through runs, never coded
    return (c + 1) // 2 if c % 2 else -(c // 2)


def _pad_to_blocks(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    ph = (-h) % BLOCK
    pw = (-w) % BLOCK
    if ph or pw:
        plane = np.pad(plane, ((0, ph), (0, pw)), mode="edge")
    return plane


def _to_blocks(padded: np.ndarray) -> np.ndarray:
    h, w = padded.shape
    return (
        padded.reshape(h // BLOCK, BLOCK, w // BLOCK, BLOCK)
        .transpose(0, 2, 1, 3)
        .reshape(-1, BLOCK, BLOCK)
    )


def _from_blocks(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    bh, bw = h // BLOCK, w // BLOCK
    return (
        blocks.reshape(bh, bw, BLOCK, BLOCK).transpose(0, 2, 1, 3).reshape(h, w)
    )


def encode_plane(plane: np.ndarray, params: CodecParams) -> PlanePayload:
    """Encode one 8-bit plane; blocks in raster order, one EOB each."""
    arr = np.asarray(plane)
    if arr.ndim != 2 or arr.size == 0:
        raise DataError(f"encode_plane needs a non-empty 2-D plane, got shape {arr.shape}")
    padded = _pad_to_blocks(arr.astype(np.float64) - 128.0)
    blocks = _to_blocks(padded)
    coefs = np.einsum("ik,nkl,jl->nij", _DCT, blocks, _DCT, optimize=True)
    step = params.step
    # round half away from zero so the quantizer is symmetric in sign
    q = np.sign(coefs) * np.floor(np.abs(coefs) / step + 0.5)
    scans = q[:, _ZZ_ROWS, _ZZ_COLS].astype(np.int64)

    writer = BitWriter()
    for scan in scans:
        nz = np.nonzero(scan)[0]
        prev = -1
        for idx in nz:
            exp_golomb_write(writer, int(idx) - prev - 1)  # run of zeros
            exp_golomb_write(writer, _signed_to_code(int(scan[idx])))
            prev = int(idx)
        exp_golomb_write(writer, _EOB)
    return writer.payload()


def decode_plane(payload: PlanePayload, dims, params: CodecParams) -> np.ndarray:
    """Decode to an 8-bit plane of the given (width, height)."""
    width, height = dims
    if width <= 0 or height <= 0:
        raise DataError(f"invalid plane dims {width}×{height}")
    ph = height + (-height) % BLOCK
    pw = width + (-width) % BLOCK
    nblocks = (ph // BLOCK) * (pw // BLOCK)

    reader = BitReader(payload.data, payload.bit_length)
    scans = np.zeros((nblocks, BLOCK * BLOCK), dtype=np.float64)
    for b in range(nblocks):
        pos = 0
        while True:
            run = exp_golomb_read(reader)
            if run == _EOB:
                break
            if run > 63:
                raise DataError(f"run {run} out of range in block {b}")
            level = _code_to_signed(exp_golomb_read(reader))
            pos += run
            if pos >= BLOCK * BLOCK:
                raise DataError(f"coefficient index overflow in block {b}")
            scans[b, pos] = level
            pos += 1

    coefs = np.zeros((nblocks, BLOCK, BLOCK))
    coefs[:, _ZZ_ROWS, _ZZ_COLS] = scans * params.step
    blocks = np.einsum("ki,nkl,lj->nij", _DCT, coefs, _DCT, optimize=True)
    padded = _from_blocks(blocks, ph, pw) + 128.0
    pixels = np.clip(np.floor(padded + 0.5), 0, 255).astype(np.uint8)
    return pixels[:height, :width]
