"""Frame-sequence preprocessing for the face and body indicators.

Key-frame normalization to a fixed count, seeded image augmentation
(rotation / brightness / horizontal flip), ROI cropping with bilinear
resizing, and frame-differencing motion images. Images are uint8 arrays,
(H, W) grayscale or (H, W, 3) RGB; PNG I/O goes through Pillow.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from neopain.errors import ContractError, DataError
from neopain.seeding import rng_for

LUMINANCE = (0.299, 0.587, 0.114)
MOTION_THRESHOLD = 15.0


@dataclass
class FrameSequence:
    """Ordered frames of one video segment with per-frame timestamps."""

    frames: np.ndarray  # (N, H, W) or (N, H, W, 3)
    timestamps: np.ndarray  # seconds, strictly increasing
    subject_id: str

    def __post_init__(self):
        self.frames = np.asarray(self.frames)
        self.timestamps = np.asarray(self.timestamps, dtype=np.float64)
        if self.frames.ndim not in (3, 4) or len(self.frames) == 0:
            raise ContractError("frames must be a non-empty (N,H,W[,3]) array")
        if len(self.timestamps) != len(self.frames):
            raise ContractError("one timestamp per frame required")
        if len(self.timestamps) > 1 and np.any(np.diff(self.timestamps) <= 0):
            raise ContractError("timestamps must be strictly increasing")
        if not self.subject_id:
            raise ContractError("subject id must be non-empty")

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class RoiBox:
    """Pixel-coordinate crop region; kind is 'face' or 'body'."""

    x: int
    y: int
    width: int
    height: int
    kind: str = "face"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ContractError(f"box dimensions must be positive: {self}")

    def clipped_to(self, frame_h: int, frame_w: int) -> "RoiBox":
        x = min(max(self.x, 0), frame_w - 1)
        y = min(max(self.y, 0), frame_h - 1)
        return RoiBox(x, y, min(self.width, frame_w - x),
                      min(self.height, frame_h - y), self.kind)


@dataclass
class MotionImage:
    """Binary movement mask from thresholded frame differencing."""

    pixels: np.ndarray  # (H, W) of {0, 1}
    threshold: float

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels)
        vals = np.unique(self.pixels)
        if not np.all(np.isin(vals, (0, 1))):
            raise ContractError("motion image must be binary")


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Luminance-weighted grayscale as float64; pass-through for 2-D input."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        return img
    if img.ndim == 3 and img.shape[2] == 3:
        return img @ np.asarray(LUMINANCE)
    raise ContractError(f"expected (H,W) or (H,W,3) image, got {img.shape}")


def _reflect_coords(p: np.ndarray, n: int) -> np.ndarray:
    """Fold continuous coordinates into [0, n-1] by edge reflection."""
    if n == 1:
        return np.zeros_like(p)
    period = 2.0 * (n - 1)
    p = np.mod(np.abs(p), period)
    return np.where(p > n - 1, period - p, p)


def _bilinear_at(channel: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    h, w = channel.shape
    y0 = np.clip(np.floor(ys).astype(int), 0, h - 1)
    x0 = np.clip(np.floor(xs).astype(int), 0, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = ys - y0
    wx = xs - x0
    top = channel[y0, x0] * (1 - wx) + channel[y0, x1] * wx
    bot = channel[y1, x0] * (1 - wx) + channel[y1, x1] * wx
    return top * (1 - wy) + bot * wy


def _sample_image(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    imgf = np.asarray(img, dtype=np.float64)
    if imgf.ndim == 2:
        out = _bilinear_at(imgf, ys, xs)
    else:
        out = np.stack([_bilinear_at(imgf[..., c], ys, xs)
                        for c in range(imgf.shape[2])], axis=-1)
    if np.issubdtype(img.dtype, np.integer):
        return np.clip(np.round(out), 0, 255).astype(img.dtype)
    return out


def resize_bilinear(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Corner-aligned bilinear resize; preserves integer dtypes by rounding."""
    if out_h <= 0 or out_w <= 0:
        raise ContractError("output size must be positive")
    h, w = img.shape[:2]
    ys = (np.linspace(0.0, h - 1.0, out_h) if out_h > 1
          else np.array([(h - 1) / 2.0]))
    xs = (np.linspace(0.0, w - 1.0, out_w) if out_w > 1
          else np.array([(w - 1) / 2.0]))
    grid_y, grid_x = np.meshgrid(ys, xs, indexing="ij")
    return _sample_image(img, grid_y, grid_x)


def rotate_image(img: np.ndarray, angle_deg: float) -> np.ndarray:
    """Rotate about the center with bilinear sampling and reflected borders."""
    if angle_deg == 0.0:
        return img.copy()
    h, w = img.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    theta = np.deg2rad(angle_deg)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    yy, xx = np.meshgrid(np.arange(h, dtype=np.float64),
                         np.arange(w, dtype=np.float64), indexing="ij")
    dy, dx = yy - cy, xx - cx
    # inverse rotation of each output pixel back into the source frame
    src_y = _reflect_coords(cy + cos_t * dy + sin_t * dx, h)
    src_x = _reflect_coords(cx - sin_t * dy + cos_t * dx, w)
    return _sample_image(img, src_y, src_x)


def adjust_brightness(img: np.ndarray, factor: float) -> np.ndarray:
    """Scale intensities, clamped to the valid range of the dtype."""
    out = np.asarray(img, dtype=np.float64) * factor
    if np.issubdtype(img.dtype, np.integer):
        return np.clip(np.round(out), 0, 255).astype(img.dtype)
    return np.clip(out, 0.0, 255.0)


def apply_augmentation(img: np.ndarray, angle_deg: float, brightness: float,
                       flip: bool) -> np.ndarray:
    """Deterministic augmentation core: rotate, scale brightness, maybe flip."""
    out = rotate_image(img, angle_deg)
    out = adjust_brightness(out, brightness)
    if flip:
        out = out[:, ::-1].copy()
    return out


def augment_image(img: np.ndarray, seed: int = 0) -> np.ndarray:
    """Seeded random augmentation: rotation in [-30, 30] degrees, brightness
    in [0.75, 1.25], horizontal flip with probability 0.5."""
    rng = rng_for(seed, "imgaug")
    angle = rng.uniform(-30.0, 30.0)
    brightness = rng.uniform(0.75, 1.25)
    flip = rng.random() < 0.5
    return apply_augmentation(img, angle, brightness, flip)


def normalize_keyframes(seq: FrameSequence, target: int = 32,
                        seed: int = 0) -> FrameSequence:
    """Force a sequence to exactly ``target`` frames.

    Longer sequences drop a seeded random subset (order kept); shorter ones
    repeat frames at evenly spaced positions, with timestamps respaced
    uniformly over the original span.
    """
    n = len(seq)
    if n == target:
        return FrameSequence(seq.frames.copy(), seq.timestamps.copy(),
                             seq.subject_id)
    if n > target:
        keep = np.sort(rng_for(seed, "framedrop").choice(n, target, replace=False))
        return FrameSequence(seq.frames[keep], seq.timestamps[keep],
                             seq.subject_id)
    idx = np.round(np.linspace(0, n - 1, target)).astype(int)
    span = seq.timestamps[-1] - seq.timestamps[0]
    if span <= 0:
        span = 1.0
    stamps = seq.timestamps[0] + np.linspace(0.0, span, target)
    return FrameSequence(seq.frames[idx], stamps, seq.subject_id)


def motion_image(prev: np.ndarray, curr: np.ndarray,
                 threshold: float = MOTION_THRESHOLD) -> MotionImage:
    """1 where |curr - prev| exceeds ``threshold`` in grayscale, else 0."""
    if prev.shape != curr.shape:
        raise ContractError(
            f"frame shapes differ: {prev.shape} vs {curr.shape}"
        )
    diff = np.abs(to_grayscale(curr) - to_grayscale(prev))
    return MotionImage((diff > threshold).astype(np.uint8), threshold)


def total_motion(m: MotionImage) -> float:
    """Moving-pixel fraction: sum / (height * width)."""
    return float(m.pixels.sum()) / m.pixels.size


def crop_roi(img: np.ndarray, box: RoiBox, out_size: int = 224) -> np.ndarray:
    """Crop the box then bilinear-resize to out_size x out_size."""
    h, w = img.shape[:2]
    if (box.x < 0 or box.y < 0 or box.x + box.width > w
            or box.y + box.height > h):
        raise ContractError(
            f"box {box} outside {h}x{w} frame; nearest valid: {box.clipped_to(h, w)}"
        )
    patch = img[box.y:box.y + box.height, box.x:box.x + box.width]
    return resize_bilinear(patch, out_size, out_size)


def load_frame(path) -> np.ndarray:
    try:
        with Image.open(path) as im:
            return np.asarray(im)
    except (OSError, ValueError) as exc:
        raise DataError(f"{path}: unreadable image ({exc})") from exc


def save_frame(path, img: np.ndarray) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(np.asarray(img)).save(path, format="PNG")


def load_frame_dir(directory, subject_id: str, fps: float = 1.0) -> FrameSequence:
    """Read the numbered frame files of one segment directory, sorted by name."""
    directory = Path(directory)
    paths = sorted(directory.glob("*.png"))
    if not paths:
        raise DataError(f"{directory}: no frame files found")
    frames = np.stack([load_frame(p) for p in paths])
    stamps = np.arange(len(frames), dtype=np.float64) / fps
    return FrameSequence(frames, stamps, subject_id)
