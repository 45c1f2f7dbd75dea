"""Command line front end: train, encode, decode, eval, rd-report."""

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import colorspace as cs
from . import losses, metrics, network, pipeline, trainer
from .errors import ConfigError, DataError, DimensionError, NumericError

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved settings for one command invocation."""

    command: str
    inputs: tuple
    output: str
    width: int
    height: int
    mode: str
    qp: int
    gop_size: int
    fps: float
    seed: int
    steps: int
    loss_weights: tuple
    channels: int
    use_attention: bool
    use_glrc: bool
    threads: int
    loss_log: str

    def __post_init__(self):
        if not 0 <= self.qp <= 51:
            raise ConfigError(f"qp must be in [0, 51], got {self.qp}")
        if self.gop_size < 1:
            raise ConfigError(f"gop size must be >= 1, got {self.gop_size}")
        if self.fps <= 0:
            raise ConfigError(f"fps must be positive, got {self.fps}")
        if self.steps < 0:
            raise ConfigError(f"steps must be nonnegative, got {self.steps}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if len(self.loss_weights) != 4 or any(w < 0 for w in self.loss_weights):
            raise ConfigError(f"need 4 nonnegative loss weights, got {self.loss_weights}")


def _parse_loss_weights(args) -> tuple:
    group = getattr(args, "loss_group", None)
    text = getattr(args, "loss_weights", None)
    if group and text:
        raise ConfigError("pass either --loss-group or --loss-weights, not both")
    if group:
        w = losses.LOSS_GROUPS[group]
        return (w.gan, w.mse, w.content, w.color)
    if text:
        parts = text.split(",")
        if len(parts) != 4:
            raise ConfigError(f"--loss-weights needs 4 comma-separated values, got {text!r}")
        try:
            return tuple(float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError(f"bad --loss-weights {text!r}: {exc}") from exc
    w = losses.LossWeights()
    return (w.gan, w.mse, w.content, w.color)


def _resolve(args) -> RunConfig:
    seed = getattr(args, "seed", 0)
    env_seed = os.environ.get("CHROMACODEC_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"CHROMACODEC_SEED must be an integer, got {env_seed!r}") from exc
    inputs = []
    for name in ("input", "weights", "ref", "test", "anchor", "proposed"):
        value = getattr(args, name, None)
        if value is not None:
            inputs.append(value)
    return RunConfig(
        command=args.command,
        inputs=tuple(inputs),
        output=getattr(args, "out", ""),
        width=getattr(args, "width", 0) or 0,
        height=getattr(args, "height", 0) or 0,
        mode=getattr(args, "mode", "4:4:4"),
        qp=getattr(args, "qp", 32),
        gop_size=getattr(args, "gop", 6),
        fps=getattr(args, "fps", 30.0),
        seed=seed,
        steps=getattr(args, "steps", 0),
        loss_weights=_parse_loss_weights(args),
        channels=getattr(args, "channels", 8),
        use_attention=not getattr(args, "no_attention", False),
        use_glrc=not getattr(args, "no_glrc", False),
        threads=getattr(args, "threads", 1),
        loss_log=getattr(args, "loss_log", "") or "",
    )


def _log_config(cfg: RunConfig) -> None:
    print("config: " + json.dumps(asdict(cfg), sort_keys=True), file=sys.stderr)


# ---------------------------------------------------------------------------
# input and output helpers
# ---------------------------------------------------------------------------


def _load_frames(path_str: str, cfg: RunConfig):
    """Read a PPM file, a directory of PPM files, or headerless raw video.

    Output is always a 4:4:4 frame list; subsampled raw input is upsampled.
    """
    path = Path(path_str)
    if path.is_dir():
        files = sorted(path.glob("*.ppm"))
        if not files:
            raise DataError(f"no .ppm files in directory {path}")
        return [cs.rgb_to_ycbcr(cs.read_ppm(f)) for f in files]
    if not path.is_file():
        raise DataError(f"input not found: {path}")
    if path.suffix.lower() == ".ppm":
        return [cs.rgb_to_ycbcr(cs.read_ppm(path))]
    if not cfg.width or not cfg.height:
        raise ConfigError("raw input is headerless: pass --width and --height")
    mode = cs.SubsamplingMode.parse(cfg.mode)
    frames = cs.read_raw(path, cfg.width, cfg.height, mode)
    return [f if f.mode is cs.SubsamplingMode.S444 else cs.upsample(f) for f in frames]


def _write_frames(out_str: str, frames) -> None:
    """PPM directory when the path has no suffix, raw 4:4:4 file otherwise."""
    out = Path(out_str)
    if out.suffix:
        if out.suffix.lower() == ".ppm":
            if len(frames) != 1:
                raise ConfigError(f"cannot write {len(frames)} frames to a single .ppm")
            cs.write_ppm(out, cs.ycbcr_to_rgb(frames[0]))
            return
        cs.write_raw(out, frames)
        return
    out.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        cs.write_ppm(out / f"frame_{i:04d}.ppm", cs.ycbcr_to_rgb(frame))


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return value


def _emit_json(report: dict, out: str) -> None:
    text = json.dumps(_json_safe(report), indent=2, sort_keys=True)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _net_config(cfg: RunConfig, width: int, height: int) -> network.NetworkConfig:
    return network.NetworkConfig(
        width=width,
        height=height,
        base_channels=cfg.channels,
        use_attention=cfg.use_attention,
        use_glrc=cfg.use_glrc,
    )


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_train(cfg: RunConfig) -> int:
    frames = _load_frames(cfg.inputs[0], cfg)
    height, width = frames[0].y.height, frames[0].y.width
    net_config = _net_config(cfg, width, height)
    gop = pipeline.split_gops(len(frames), cfg.gop_size)
    pairs = trainer.build_training_set(frames, gop, cfg.qp)
    gen = network.init_generator(net_config, cfg.seed)
    disc = network.init_discriminator(net_config, cfg.seed)
    train_config = trainer.TrainConfig(
        steps=cfg.steps, seed=cfg.seed, weights=losses.LossWeights(*cfg.loss_weights)
    )
    history = trainer.train(gen, disc, net_config, pairs, train_config)
    Path(cfg.output).write_bytes(network.serialize_weights(gen, net_config))
    if cfg.loss_log:
        Path(cfg.loss_log).write_text(trainer.history_to_csv(history), encoding="utf-8")
    final = history[-1].total if history else float("nan")
    print(f"trained {cfg.steps} steps on {len(pairs)} anchor pairs, final loss {final:.6g}")
    return EXIT_OK


def cmd_encode(cfg: RunConfig) -> int:
    frames = _load_frames(cfg.inputs[0], cfg)
    blob = Path(cfg.inputs[1]).read_bytes()
    gen, saved_config = network.deserialize_weights(blob)
    height, width = frames[0].y.height, frames[0].y.width
    # weights are spatial-size agnostic; rebind the config to the input dims
    net_config = network.NetworkConfig(
        width=width,
        height=height,
        base_channels=saved_config.base_channels,
        use_attention=saved_config.use_attention,
        use_glrc=saved_config.use_glrc,
    )
    gop = pipeline.split_gops(len(frames), cfg.gop_size)
    video, kbps = pipeline.encode_sequence(frames, cfg.qp, gop, gen, net_config, cfg.fps)
    pipeline.write_video(cfg.output, video)
    report = pipeline.bitrate_report(video, cfg.fps)
    print(f"encoded {len(frames)} frames at {kbps:.3f} kbps")
    print(json.dumps(_json_safe(report), sort_keys=True))
    return EXIT_OK


def cmd_decode(cfg: RunConfig) -> int:
    video = pipeline.read_video(cfg.inputs[0])
    frames = pipeline.decode_sequence(video)
    _write_frames(cfg.output, frames)
    print(f"decoded {len(frames)} frames of {video.width}x{video.height}")
    return EXIT_OK


def cmd_eval(cfg: RunConfig) -> int:
    ref = _load_frames(cfg.inputs[0], cfg)
    test = _load_frames(cfg.inputs[1], cfg)
    if len(ref) != len(test):
        raise DataError(f"frame count mismatch: ref {len(ref)} vs test {len(test)}")
    rows = []
    for a, b in zip(ref, test):
        quality = metrics.psnr_frame(a, b)
        rows.append(
            {
                "psnr_y": quality["y"],
                "psnr_cb": quality["cb"],
                "psnr_cr": quality["cr"],
                "psnr_combined": quality["combined"],
                "ssim_y": metrics.ssim(a.y, b.y),
            }
        )
    average = {
        key: sum(r[key] for r in rows) / len(rows) for key in rows[0]
    }
    _emit_json({"frame_count": len(rows), "frames": rows, "average": average}, cfg.output)
    return EXIT_OK


def cmd_rd_report(cfg: RunConfig) -> int:
    anchor = metrics.read_curve(cfg.inputs[0])
    proposed = metrics.read_curve(cfg.inputs[1])
    _emit_json(metrics.comparison_report(anchor, proposed), cfg.output)
    return EXIT_OK


_DISPATCH = {
    "train": cmd_train,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "eval": cmd_eval,
    "rd-report": cmd_rd_report,
}


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_raw_flags(sub) -> None:
    sub.add_argument("--width", type=int, help="raw input width in pixels")
    sub.add_argument("--height", type=int, help="raw input height in pixels")
    sub.add_argument("--mode", default="4:4:4", help="raw input subsampling (default 4:4:4)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chromacodec",
        description="Video compression that drops chroma and restores it with a learned colorizer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit colorizer weights on a sequence's anchor frames")
    p.add_argument("--input", required=True, help="raw 4:4:4 file, PPM file, or PPM directory")
    _add_raw_flags(p)
    p.add_argument("--qp", type=int, default=32)
    p.add_argument("--gop", type=int, default=6)
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--channels", type=int, default=8, help="base channel width")
    p.add_argument("--no-attention", action="store_true")
    p.add_argument("--no-glrc", action="store_true")
    p.add_argument("--loss-group", choices=sorted(losses.LOSS_GROUPS))
    p.add_argument("--loss-weights", help="gan,mse,content,color")
    p.add_argument("--loss-log", help="write per-step loss CSV here")
    p.add_argument("--out", required=True, help="weights file to write")

    p = sub.add_parser("encode", help="compress a sequence")
    p.add_argument("--input", required=True)
    _add_raw_flags(p)
    p.add_argument("--weights", required=True, help="trained weights file")
    p.add_argument("--qp", type=int, default=32)
    p.add_argument("--gop", type=int, default=6)
    p.add_argument("--fps", type=float, default=30.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="compressed stream to write")

    p = sub.add_parser("decode", help="decompress a stream")
    p.add_argument("--input", required=True)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="raw file (suffix) or PPM directory (no suffix)")

    p = sub.add_parser("eval", help="compare decoded frames against a reference")
    p.add_argument("--ref", required=True)
    p.add_argument("--test", required=True)
    _add_raw_flags(p)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="report JSON (stdout when omitted)")

    p = sub.add_parser("rd-report", help="rate-distortion deltas and BD summary of two curves")
    p.add_argument("--anchor", required=True)
    p.add_argument("--proposed", required=True)
    p.add_argument("--out", help="report JSON (stdout when omitted)")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve(args)
        _log_config(cfg)
        return _DISPATCH[cfg.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, DimensionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
