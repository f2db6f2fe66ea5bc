"""Run configuration.

Defaults are the full-scale training settings (lr 1e-4, up to 100 epochs,
patience 10, batches 16/1, 32 key-frames, 224-pixel crops, 44.1 kHz audio).
``RunConfig.desk()`` swaps in the small sizes used for fast end-to-end runs;
both profiles are plain field overrides, nothing else changes.

Config files are ``key = value`` lines; values are parsed as Python literals
with a bare-string fallback.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from neopain.errors import DataError

MINIATURE_BLOCKS = ((2, 8), (2, 16))
DEEP_BLOCKS = ((2, 64), (2, 128), (3, 256), (3, 512), (3, 512))


@dataclass
class RunConfig:
    # seeding
    master_seed: int = 0

    # training (both levels unless suffixed)
    lr: float = 1e-4
    batch_spatial: int = 16
    batch_temporal: int = 1
    max_epochs_spatial: int = 100
    max_epochs_temporal: int = 100
    patience: int = 10
    min_delta: float = 1e-4
    val_fraction: float = 0.2

    # preprocessing
    keyframes: int = 32
    frame_size: int = 224          # generated/stored frame edge
    cnn_input: int = 224           # model input edge after ROI crop
    conv_blocks: tuple = MINIATURE_BLOCKS
    motion_threshold: float = 15.0
    spatial_frames_per_segment: int = 4  # frames sampled per segment, level 1

    # audio
    sample_rate: int = 44100
    audio_duration: float = 9.0
    stft_window: int = 1024
    stft_hop: int = 512
    n_mels: int = 40
    n_mfcc: int = 20
    mfcc_pooled_length: int = 388

    # augmentation multiplicity (0 disables offline augmentation)
    image_aug_copies: int = 0
    audio_aug: bool = False

    # shallow baselines
    knn_k: int = 3
    rf_trees: int = 100

    # synthetic data
    subjects: int = 10
    segments_per_subject: int = 20
    separation_face: float = 1.0
    separation_body: float = 1.0
    separation_sound: float = 1.0
    absent_audio: int = 2
    frames_min: int = 24
    frames_max: int = 40
    fps: float = 8.0

    # experiments
    drop_fraction: float = 0.25
    drop_trials: int = 10

    @classmethod
    def desk(cls, **overrides) -> "RunConfig":
        """Small-and-fast profile: 64-pixel frames, 2 s audio at 8 kHz,
        short training schedules."""
        cfg = cls(
            frame_size=64,
            cnn_input=32,
            sample_rate=8000,
            audio_duration=2.0,
            lr=1e-3,  # short schedules need a hotter step than full scale
            max_epochs_spatial=10,
            max_epochs_temporal=12,
            patience=3,
            spatial_frames_per_segment=1,
        )
        return replace(cfg, **overrides)

    def replace(self, **overrides) -> "RunConfig":
        return replace(self, **overrides)

    def to_file(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"{f.name} = {getattr(self, f.name)!r}" for f in fields(self)]
        path.write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataError(f"{path}:{lineno}: expected 'key = value'")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in known:
                raise DataError(f"{path}:{lineno}: unknown config key {key!r}")
            text = value.strip()
            try:
                values[key] = ast.literal_eval(text)
            except (ValueError, SyntaxError):
                values[key] = text
        return cls(**values)
