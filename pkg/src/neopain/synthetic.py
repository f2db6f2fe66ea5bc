"""Synthetic dataset generator.

Stands in for the (private) clinical recordings. Each segment draws a latent
pain intensity u in [0, 1]; the six NIPS components are sampled from
u-dependent Bernoulli/binomial laws, so all modalities carry redundant but
noisy class signal. The label follows from the NIPS total. Rendering:

* face frames — a moving bright blob inside the face ROI whose brightness
  and wander grow with the facial-expression component
* body frames — limb blobs inside the body ROI whose frame-to-frame
  displacement grows with arm/leg movement
* audio — harmonic cry bursts whose coverage and loudness grow with the cry
  component, over a low uniform noise floor; a few segments get no audio

Everything is driven by named substreams of the master seed, so a rerun
writes byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from neopain.audio import AudioSegment, save_wav
from neopain.config import RunConfig
from neopain.errors import ContractError
from neopain.manifest import Manifest, SampleRecord, save_manifest
from neopain.seeding import rng_for
from neopain.video import RoiBox, save_frame

# coupling strengths between the latent intensity and each component family
FACE_COUPLING = 1.6
CRY_COUPLING = 1.4
LIMB_COUPLING = 1.2
WEAK_COUPLING = 0.6


def _ramp(u: float, strength: float) -> float:
    """Latent intensity -> Bernoulli probability, clipped away from 0/1."""
    return float(np.clip(0.5 + strength * (u - 0.5), 0.02, 0.98))


def sample_components(u: float, cfg: RunConfig, rng: np.random.Generator) -> dict:
    pf = _ramp(u, FACE_COUPLING * cfg.separation_face)
    pc = _ramp(u, CRY_COUPLING * cfg.separation_sound)
    pl = _ramp(u, LIMB_COUPLING * cfg.separation_body)
    pw = _ramp(u, WEAK_COUPLING)
    return {
        "face": int(rng.random() < pf),
        "cry": int(rng.random() < pc) + int(rng.random() < pc),
        "breathing": int(rng.random() < pw),
        "arms": int(rng.random() < pl),
        "legs": int(rng.random() < pl),
        "arousal": int(rng.random() < pw),
    }


def _blob(canvas: np.ndarray, cy: float, cx: float, sigma: float,
          peak: float) -> None:
    h, w = canvas.shape
    yy, xx = np.ogrid[:h, :w]
    canvas += peak * np.exp(-((yy - cy) ** 2 + (xx - cx) ** 2) / (2.0 * sigma**2))


def _subject_traits(seed: int, subject: int, size: int) -> dict:
    rng = rng_for(seed, "subject", subject)
    return {
        "face_dx": int(rng.integers(-2, 3)),
        "face_dy": int(rng.integers(-2, 3)),
        "texture": rng.normal(0.0, 3.0, size=(size, size)),
        "tone": float(rng.uniform(20.0, 32.0)),
        "f0": float(rng.uniform(360.0, 440.0)),
        "limb_spread": float(rng.uniform(0.8, 1.2)),
    }


def render_frames(components: dict, u: float, n_frames: int, cfg: RunConfig,
                  traits: dict, rng: np.random.Generator):
    """Frames plus the face/body ROI boxes used while drawing them."""
    size = cfg.frame_size
    s = size / 64.0  # layout is designed on a 64-pixel grid
    face_box = RoiBox(int(10 * s) + traits["face_dx"], int(4 * s) + traits["face_dy"],
                      int(28 * s), int(26 * s), "face")
    body_box = RoiBox(int(6 * s), int(33 * s), int(52 * s), int(28 * s), "body")

    face = components["face"]
    movement = components["arms"] + components["legs"]
    # per-segment jitter keeps the rendered signal noisy relative to the
    # component scores, so trained models cannot recover the latent exactly
    expr_level = float(np.clip(
        0.30 + 0.52 * face + 0.04 * (u - 0.5) + 0.06 * rng.normal(), 0.05, 1.0
    ))
    face_amp = (1.0 + 3.0 * face) * s
    body_amp = max(0.4, 0.8 + 2.2 * cfg.separation_body * movement
                   + 0.25 * (u - 0.5) + 0.20 * rng.normal()) * s

    fcy = face_box.y + face_box.height / 2.0
    fcx = face_box.x + face_box.width / 2.0
    limb_y = body_box.y + body_box.height * 0.55
    limb_xs = [body_box.x + body_box.width * f * traits["limb_spread"]
               for f in (0.25, 0.72)]
    phases = rng.uniform(0.0, 2.0 * np.pi, size=4)

    frames = np.empty((n_frames, size, size), dtype=np.uint8)
    for t in range(n_frames):
        canvas = np.full((size, size), traits["tone"], dtype=np.float64)
        canvas += traits["texture"]
        # head disc and the expression blob wandering inside the face ROI
        _blob(canvas, fcy, fcx, 9.0 * s, 60.0)
        bx = fcx + face_amp * np.sin(0.9 * t + phases[0])
        by = fcy - 2.0 * s + face_amp * np.cos(1.1 * t + phases[1])
        _blob(canvas, by, bx, 3.2 * s, 150.0 * expr_level)
        # limbs: displacement per frame carries the movement signal
        for i, lx in enumerate(limb_xs):
            ox = body_amp * np.sin(1.3 * t + phases[2] + i * 2.1)
            oy = body_amp * np.cos(0.7 * t + phases[3] + i * 1.7)
            _blob(canvas, limb_y + oy, lx + ox, 2.6 * s, 110.0)
        canvas += rng.normal(0.0, 4.0, size=canvas.shape)
        frames[t] = np.clip(canvas, 0, 255).astype(np.uint8)
    return frames, face_box, body_box


def render_audio(components: dict, u: float, cfg: RunConfig, traits: dict,
                 rng: np.random.Generator) -> AudioSegment:
    n = int(round(cfg.audio_duration * cfg.sample_rate))
    t = np.arange(n) / cfg.sample_rate
    samples = rng.uniform(-0.008, 0.008, size=n)
    cry = components["cry"]
    if cry > 0:
        n_bursts = 1 + cry
        burst_len = cfg.audio_duration * (0.12 + 0.13 * cry)
        amp = (0.10 + 0.22 * (cry / 2.0)) * cfg.separation_sound
        f0 = traits["f0"] + 120.0 * u
        for _ in range(n_bursts):
            start = rng.uniform(0.0, max(cfg.audio_duration - burst_len, 0.01))
            mask = (t >= start) & (t < start + burst_len)
            if not np.any(mask):
                continue
            tb = t[mask] - start
            envelope = np.sin(np.pi * tb / burst_len) ** 2
            vibrato = 1.0 + 0.02 * np.sin(2.0 * np.pi * 5.0 * tb)
            tone = np.zeros_like(tb)
            for h in (1, 2, 3, 4):
                tone += np.sin(2.0 * np.pi * f0 * h * vibrato * tb) / h
            samples[mask] += amp * envelope * tone
    return AudioSegment(np.clip(samples, -1.0, 1.0), cfg.sample_rate)


def generate_synthetic(out_dir, cfg: RunConfig) -> Manifest:
    """Write frames, audio, and the manifest; returns the loaded-shape manifest."""
    if cfg.subjects < 2:
        raise ContractError(f"need at least 2 subjects, got {cfg.subjects}")
    out_dir = Path(out_dir)
    (out_dir / "frames").mkdir(parents=True, exist_ok=True)
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    seed = cfg.master_seed

    n_total = cfg.subjects * cfg.segments_per_subject
    absent = set()
    if cfg.absent_audio > 0:
        absent_rng = rng_for(seed, "absent-audio")
        absent = set(absent_rng.choice(n_total, size=min(cfg.absent_audio, n_total),
                                       replace=False).tolist())

    records = []
    flat_index = 0
    for s in range(cfg.subjects):
        subject_id = f"S{s:02d}"
        traits = _subject_traits(seed, s, cfg.frame_size)
        for e in range(cfg.segments_per_subject):
            sample_id = f"{subject_id}_E{e:03d}"
            comp_rng = rng_for(seed, "components", sample_id)
            u = float(comp_rng.random())
            components = sample_components(u, cfg, comp_rng)
            total = sum(components.values())

            frame_rng = rng_for(seed, "frames", sample_id)
            n_frames = int(frame_rng.integers(cfg.frames_min, cfg.frames_max + 1))
            frames, face_box, body_box = render_frames(
                components, u, n_frames, cfg, traits, frame_rng
            )
            frames_dir = f"frames/{sample_id}"
            for i in range(n_frames):
                save_frame(out_dir / frames_dir / f"f{i:03d}.png", frames[i])

            audio_path = None
            if flat_index not in absent:
                audio_rng = rng_for(seed, "audio", sample_id)
                seg = render_audio(components, u, cfg, traits, audio_rng)
                audio_path = f"audio/{sample_id}.wav"
                save_wav(out_dir / audio_path, seg)

            records.append(SampleRecord(
                sample_id=sample_id, subject_id=subject_id,
                frames_dir=frames_dir, audio_path=audio_path,
                scale="NIPS", components=components, total=total,
                face_box=face_box, body_box=body_box,
            ))
            flat_index += 1

    manifest = Manifest(records, out_dir)
    save_manifest(manifest, out_dir / "manifest.csv")
    return manifest
