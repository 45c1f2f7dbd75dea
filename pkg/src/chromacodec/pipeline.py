"""End-to-end compression pipeline and its container format.

The encoder keeps full 4:2:0 color only on anchor frames (one per
GOP); every other frame is transmitted as a single intra-coded luma
plane. The generator weights travel in-band so the decoder can restore
chrominance for the luma-only frames: anchors decode conventionally,
non-anchors decode their luma and get chroma from the colorizer.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass

import numpy as np

from . import codec, network
from . import tensor as T
from .colorspace import (
    Frame,
    Plane,
    SubsamplingMode,
    chroma_dims,
    subsample,
    upsample,
)
from .errors import ConfigError, DataError, DimensionError

ANCHOR = 0
LUMA_ONLY = 1

_SUBSAMPLE_CODES = {
    SubsamplingMode.S444: 0,
    SubsamplingMode.S422: 1,
    SubsamplingMode.S420: 2,
    SubsamplingMode.S400: 3,
}
_CODE_MODES = {v: k for k, v in _SUBSAMPLE_CODES.items()}


@dataclass(frozen=True)
class GopStructure:
    gop_size: int
    frame_count: int
    anchors: tuple

    def __post_init__(self):
        if self.gop_size < 1:
            raise ConfigError(f"gop_size must be ≥ 1, got {self.gop_size}")
        if self.frame_count < 1:
            raise ConfigError(f"frame_count must be ≥ 1, got {self.frame_count}")
        want = tuple(range(0, self.frame_count, self.gop_size))
        if self.anchors != want:
            raise ConfigError(f"anchors {self.anchors} != expected {want}")

    def is_anchor(self, index: int) -> bool:
        return index % self.gop_size == 0


def split_gops(frame_count: int, gop_size: int = 6) -> GopStructure:
    """Anchor at every multiple of gop_size."""
    if gop_size < 1 or frame_count < 1:
        raise ConfigError(
            f"need frame_count ≥ 1 and gop_size ≥ 1, got {frame_count} and {gop_size}"
        )
    return GopStructure(gop_size, frame_count, tuple(range(0, frame_count, gop_size)))


@dataclass(frozen=True)
class FrameRecord:
    kind: int  # ANCHOR or LUMA_ONLY
    payloads: tuple  # PlanePayload per stored plane (Y[, Cb, Cr])

    def __post_init__(self):
        want = 3 if self.kind == ANCHOR else 1
        if self.kind not in (ANCHOR, LUMA_ONLY):
            raise DataError(f"unknown frame record type {self.kind}")
        if len(self.payloads) != want:
            raise DataError(
                f"record type {self.kind} needs {want} plane payloads, got {len(self.payloads)}"
            )


@dataclass(frozen=True)
class CompressedVideo:
    width: int
    height: int
    qp: int
    gop_size: int
    anchor_mode: SubsamplingMode
    weight_blob: bytes
    records: tuple

    @property
    def frame_count(self) -> int:
        return len(self.records)


def encode_sequence(frames, qp: int, gop: GopStructure, gen_store, net_config, fps: float = 30.0):
    """Compress 4:4:4 frames; returns (CompressedVideo, kbps at the given fps)."""
    if len(frames) != gop.frame_count:
        raise DimensionError(
            f"gop structure covers {gop.frame_count} frames, got {len(frames)}"
        )
    params = codec.CodecParams(qp=qp)
    first = frames[0]
    w, h = first.y.width, first.y.height
    if w % 8 or h % 8:
        raise DimensionError(f"frame dims must be divisible by 8, got {w}×{h}")
    records = []
    for i, frame in enumerate(frames):
        if frame.mode is not SubsamplingMode.S444:
            raise ConfigError(f"frame {i} is {frame.mode.value}, expected 4:4:4")
        if (frame.y.width, frame.y.height) != (w, h):
            raise DimensionError(f"frame {i} dims differ from frame 0")
        if gop.is_anchor(i):
            sub = subsample(frame, SubsamplingMode.S420)
            payloads = tuple(
                codec.encode_plane(p.samples, params) for p in (sub.y, sub.cb, sub.cr)
            )
            records.append(FrameRecord(ANCHOR, payloads))
        else:
            records.append(
                FrameRecord(LUMA_ONLY, (codec.encode_plane(frame.y.samples, params),))
            )
    blob = network.serialize_weights(gen_store, net_config)
    video = CompressedVideo(
        w, h, qp, gop.gop_size, SubsamplingMode.S420, blob, tuple(records)
    )
    total_bits = len(serialize_video(video)) * 8
    kbps = total_bits * fps / (1000.0 * len(frames))
    return video, kbps


def _decode_anchor(record, width, height, mode, params):
    cdims = chroma_dims(width, height, mode)
    y = codec.decode_plane(record.payloads[0], (width, height), params)
    cb = codec.decode_plane(record.payloads[1], cdims, params)
    cr = codec.decode_plane(record.payloads[2], cdims, params)
    frame = Frame(Plane(y), Plane(cb), Plane(cr), mode)
    return upsample(frame) if mode is not SubsamplingMode.S444 else frame


def decode_sequence(video: CompressedVideo):
    """Decompress to 4:4:4 frames, colorizing the luma-only ones."""
    params = codec.CodecParams(qp=video.qp)
    store, net_config = network.deserialize_weights(video.weight_blob)
    frames = []
    for i, record in enumerate(video.records):
        try:
            if record.kind == ANCHOR:
                frames.append(
                    _decode_anchor(record, video.width, video.height, video.anchor_mode, params)
                )
                continue
            y = codec.decode_plane(
                record.payloads[0], (video.width, video.height), params
            )
            luma = T.Tensor(network.luma_to_unit(y)[None, None])
            out = network.generator_forward(store, net_config, luma).data[0]
            cb = network.unit_to_chroma(out[0])
            cr = network.unit_to_chroma(out[1])
            frames.append(Frame(Plane(y), Plane(cb), Plane(cr), SubsamplingMode.S444))
        except DataError as exc:
            raise DataError(f"frame {i}: {exc}") from exc
    return frames


# ---------------------------------------------------------------------------
# container serialization
# ---------------------------------------------------------------------------

_MAGIC = b"CGV1"
_VERSION = 1
_HEADER = "<HHHBBBII"  # version, width, height, subsample, qp, gop, frames, blob len


def serialize_video(video: CompressedVideo) -> bytes:
    buf = io.BytesIO()
    buf.write(_MAGIC)
    buf.write(
        struct.pack(
            _HEADER,
            _VERSION,
            video.width,
            video.height,
            _SUBSAMPLE_CODES[video.anchor_mode],
            video.qp,
            video.gop_size,
            video.frame_count,
            len(video.weight_blob),
        )
    )
    buf.write(video.weight_blob)
    for record in video.records:
        buf.write(struct.pack("B", record.kind))
        for payload in record.payloads:
            buf.write(struct.pack("<I", len(payload.data)))
            buf.write(payload.data)
    return buf.getvalue()


def _read_exact(buf, n, what):
    data = buf.read(n)
    if len(data) != n:
        raise DataError(f"truncated container: {what}")
    return data


def deserialize_video(data: bytes) -> CompressedVideo:
    buf = io.BytesIO(data)
    if _read_exact(buf, 4, "magic") != _MAGIC:
        raise DataError("not a compressed video: bad magic")
    header = _read_exact(buf, struct.calcsize(_HEADER), "header")
    version, width, height, sub_code, qp, gop_size, frame_count, blob_len = struct.unpack(
        _HEADER, header
    )
    if version != _VERSION:
        raise DataError(f"unsupported container version {version}")
    if sub_code not in _CODE_MODES:
        raise DataError(f"unknown subsample code {sub_code}")
    blob = _read_exact(buf, blob_len, "weight blob")
    records = []
    for i in range(frame_count):
        (kind,) = struct.unpack("B", _read_exact(buf, 1, f"frame {i} type"))
        if kind not in (ANCHOR, LUMA_ONLY):
            raise DataError(f"frame {i}: unknown record type {kind}")
        payloads = []
        for p in range(3 if kind == ANCHOR else 1):
            (plen,) = struct.unpack("<I", _read_exact(buf, 4, f"frame {i} plane {p} length"))
            raw = _read_exact(buf, plen, f"frame {i} plane {p} payload")
            payloads.append(codec.PlanePayload(raw, len(raw) * 8))
        records.append(FrameRecord(kind, tuple(payloads)))
    if buf.read(1):
        raise DataError("trailing bytes after final frame record")
    return CompressedVideo(
        width, height, qp, gop_size, _CODE_MODES[sub_code], blob, tuple(records)
    )


def write_video(path, video: CompressedVideo) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_video(video))


def read_video(path) -> CompressedVideo:
    with open(path, "rb") as fh:
        return deserialize_video(fh.read())


def bitrate_report(video: CompressedVideo, fps: float = 30.0) -> dict:
    """Exact bit accounting per stream component, plus kbps both ways."""
    anchor_bits = 0
    luma_bits = 0
    record_overhead = 0
    for record in video.records:
        payload_bits = sum(len(p.data) * 8 for p in record.payloads)
        record_overhead += 8 + 32 * len(record.payloads)
        if record.kind == ANCHOR:
            anchor_bits += payload_bits
        else:
            luma_bits += payload_bits
    model_bits = len(video.weight_blob) * 8
    header_bits = (4 + struct.calcsize(_HEADER)) * 8
    total_bits = anchor_bits + luma_bits + model_bits + header_bits + record_overhead
    n = video.frame_count
    return {
        "anchor_bits": anchor_bits,
        "luma_bits": luma_bits,
        "model_bits": model_bits,
        "overhead_bits": header_bits + record_overhead,
        "total_bits": total_bits,
        "kbps": total_bits * fps / (1000.0 * n),
        "kbps_without_model": (total_bits - model_bits) * fps / (1000.0 * n),
    }
