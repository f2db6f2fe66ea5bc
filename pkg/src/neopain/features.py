"""Per-sample preprocessing: manifest records -> model-ready arrays.

Each segment is reduced once, deterministically, to:

* ``face_frames`` / ``body_frames`` — keyframe-normalised ROI crops, kept as
  uint8 and converted to float batches on demand
* ``motion_stats`` — summary statistics of inter-frame body motion (the
  hand-crafted baseline feature)
* ``spec_image`` — spectrogram image of the audio, if the segment has audio
* ``mfcc_pooled`` — fixed-length pooled MFCC vector (baseline feature)

Keyframe selection is seeded per sample id, so a store built twice from the
same manifest is identical, independent of iteration order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from neopain.audio import load_wav, mfcc, render_spectrogram_image, stft
from neopain.config import RunConfig
from neopain.errors import DataError
from neopain.manifest import Manifest, SampleRecord
from neopain.seeding import derive_seed
from neopain.video import (crop_roi, load_frame_dir, motion_image,
                           normalize_keyframes, total_motion)

MOTION_STAT_NAMES = ("mean", "max", "std", "sum")


@dataclass
class SampleFeatures:
    sample_id: str
    subject_id: str
    face_frames: np.ndarray          # (K, s, s) uint8
    body_frames: np.ndarray          # (K, s, s) uint8
    motion_stats: np.ndarray         # (4,) float64
    spec_image: np.ndarray | None    # (s, s) uint8, None when audio absent
    mfcc_pooled: np.ndarray | None   # (pooled_length,) float64

    def has_audio(self) -> bool:
        return self.spec_image is not None


def frames_to_batch(frames: np.ndarray) -> np.ndarray:
    """uint8 (K, s, s) -> float64 (K, 1, s, s) scaled to [0, 1]."""
    return frames.astype(np.float64)[:, None, :, :] / 255.0


def image_to_batch(image: np.ndarray) -> np.ndarray:
    """uint8 (s, s) -> float64 (1, 1, s, s) scaled to [0, 1]."""
    return image.astype(np.float64)[None, None, :, :] / 255.0


def motion_summary(crops: np.ndarray) -> np.ndarray:
    """Motion statistics over consecutive body crops of one segment."""
    values = np.array([
        total_motion(motion_image(crops[i], crops[i + 1]))
        for i in range(len(crops) - 1)
    ])
    if values.size == 0:
        return np.zeros(len(MOTION_STAT_NAMES))
    return np.array([values.mean(), values.max(), values.std(), values.sum()])


def prepare_sample(record: SampleRecord, manifest: Manifest,
                   cfg: RunConfig) -> SampleFeatures:
    if not record.has_video():
        raise DataError(f"sample {record.sample_id}: no frames directory")
    seq = load_frame_dir(manifest.resolve(record.frames_dir),
                         record.subject_id, fps=cfg.fps)
    seq = normalize_keyframes(seq, target=cfg.keyframes,
                              seed=derive_seed(cfg.master_seed, "keyframes",
                                               record.sample_id))
    s = cfg.cnn_input
    face = np.stack([crop_roi(f, record.face_box, out_size=s)
                     for f in seq.frames])
    body = np.stack([crop_roi(f, record.body_box, out_size=s)
                     for f in seq.frames])

    spec_image = None
    pooled = None
    if record.has_audio():
        seg = load_wav(manifest.resolve(record.audio_path))
        spec = stft(seg, window=cfg.stft_window, hop=cfg.stft_hop)
        spec_image = render_spectrogram_image(spec, out_size=s)
        pooled = mfcc(seg, n_mels=cfg.n_mels, n_coeffs=cfg.n_mfcc,
                      window=cfg.stft_window, hop=cfg.stft_hop,
                      pooled_length=cfg.mfcc_pooled_length).pooled

    return SampleFeatures(
        sample_id=record.sample_id, subject_id=record.subject_id,
        face_frames=face, body_frames=body,
        motion_stats=motion_summary(body),
        spec_image=spec_image, mfcc_pooled=pooled,
    )


class FeatureStore:
    """All samples of a manifest, preprocessed once and indexable by id."""

    def __init__(self, manifest: Manifest, cfg: RunConfig):
        self.manifest = manifest
        self.cfg = cfg
        self.samples = {r.sample_id: prepare_sample(r, manifest, cfg)
                        for r in manifest.records}

    def __getitem__(self, sample_id: str) -> SampleFeatures:
        try:
            return self.samples[sample_id]
        except KeyError:
            raise DataError(f"unknown sample id {sample_id!r}") from None

    def __len__(self) -> int:
        return len(self.samples)
