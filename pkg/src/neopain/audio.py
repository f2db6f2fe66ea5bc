"""Audio features for the crying-sound indicator.

Hann-window STFT, rendered log-spectrogram images for the CNN path, MFCCs for
the shallow-classifier path, and the 27-variant augmentation grid (3 sample
rates x 6 noise amplitudes plus the singles). WAV I/O is 16-bit mono PCM via
the stdlib ``wave`` module.
"""

from __future__ import annotations

import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from neopain.errors import ContractError, DataError
from neopain.seeding import rng_for

NOISE_AMPLITUDES = (0.001, 0.003, 0.005, 0.01, 0.03, 0.05)
FREQUENCY_LEVELS = ("1/3", "1/2", "2/3")
_FREQ_FRACTIONS = {"1/3": 1.0 / 3.0, "1/2": 0.5, "2/3": 2.0 / 3.0}
LOG_FLOOR = 1e-10


@dataclass
class AudioSegment:
    """Mono audio: samples in [-1, 1] plus the rate they were captured at."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ContractError(f"samples must be 1-D, got {self.samples.ndim}-D")
        if not np.all(np.isfinite(self.samples)):
            raise ContractError("samples contain non-finite values")
        if np.any(np.abs(self.samples) > 1.0 + 1e-9):
            raise ContractError("samples exceed [-1, 1]")
        if self.sample_rate <= 0:
            raise ContractError(f"sample_rate must be positive, got {self.sample_rate}")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass
class Spectrogram:
    """Non-negative magnitudes laid out (frequency bins, time frames)."""

    magnitudes: np.ndarray
    window: int
    hop: int
    sample_rate: int

    def __post_init__(self):
        self.magnitudes = np.asarray(self.magnitudes, dtype=np.float64)
        if np.any(self.magnitudes < 0):
            raise ContractError("spectrogram magnitudes must be non-negative")

    @property
    def bins(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def frames(self) -> int:
        return self.magnitudes.shape[1]


@dataclass
class MfccFeatures:
    """Per-frame cepstral coefficients plus a fixed-length pooled summary."""

    coefficients: np.ndarray  # (frames, n_coeffs)
    pooled: np.ndarray


def _frame_starts(n: int, window: int, hop: int) -> np.ndarray:
    if hop < 1:
        raise ContractError(f"hop must be >= 1, got {hop}")
    if window > n:
        raise ContractError(f"window {window} exceeds signal length {n}")
    count = 1 + (n - window) // hop
    return np.arange(count) * hop


def _windowed_frames(samples: np.ndarray, window: int, hop: int) -> np.ndarray:
    starts = _frame_starts(len(samples), window, hop)
    idx = starts[:, None] + np.arange(window)[None, :]
    return samples[idx] * np.hanning(window)


def stft(seg: AudioSegment, window: int = 1024, hop: int = 512) -> Spectrogram:
    """Short-time Fourier magnitudes; bins = window/2 + 1 (real input)."""
    if window % 2 != 0:
        raise ContractError(f"window must be even, got {window}")
    frames = _windowed_frames(seg.samples, window, hop)
    mags = np.abs(np.fft.rfft(frames, axis=1)).T  # (bins, frames)
    return Spectrogram(mags, window, hop, seg.sample_rate)


def render_spectrogram_image(spec: Spectrogram, out_size: int = 32) -> np.ndarray:
    """Log-magnitude image, min-max scaled to [0, 255], low frequencies at bottom.

    A flat spectrogram (max == min after the log) renders as all zeros.
    Returns a uint8 array of shape (out_size, out_size).
    """
    if spec.magnitudes.size == 0:
        raise ContractError("empty spectrogram")
    from neopain.video import resize_bilinear

    logmag = np.log10(np.maximum(spec.magnitudes, LOG_FLOOR))
    lo, hi = logmag.min(), logmag.max()
    if hi - lo < 1e-15:
        norm = np.zeros_like(logmag)
    else:
        norm = (logmag - lo) / (hi - lo)
    img = resize_bilinear(norm[::-1, :], out_size, out_size)
    return np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, window: int, sample_rate: int) -> np.ndarray:
    """Triangular filters (n_mels, bins) with edges evenly spaced in mel."""
    bins = window // 2 + 1
    if not 1 <= n_mels <= bins:
        raise ContractError(f"need 1 <= n_mels <= {bins}, got {n_mels}")
    edges_hz = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))
    if np.any(np.diff(edges_hz) <= 0):
        raise ContractError("mel filter edges are not strictly increasing")
    freqs = np.arange(bins) * sample_rate / window
    bank = np.zeros((n_mels, bins))
    for m in range(n_mels):
        left, center, right = edges_hz[m], edges_hz[m + 1], edges_hz[m + 2]
        rising = (freqs - left) / (center - left)
        falling = (right - freqs) / (right - center)
        bank[m] = np.maximum(0.0, np.minimum(rising, falling))
    return bank


def dct_ii(x: np.ndarray) -> np.ndarray:
    """Orthonormal type-II DCT along the last axis."""
    n = x.shape[-1]
    k = np.arange(n)[:, None]
    basis = np.cos(np.pi * k * (2 * np.arange(n)[None, :] + 1) / (2 * n))
    out = x @ basis.T
    out *= np.sqrt(2.0 / n)
    out[..., 0] *= np.sqrt(0.5)
    return out


def mfcc(seg: AudioSegment, n_mels: int = 40, n_coeffs: int = 20,
         window: int = 1024, hop: int = 512,
         pooled_length: int = 388) -> MfccFeatures:
    """Mel-frequency cepstral coefficients, (frames, n_coeffs).

    Pipeline per frame: Hann window -> power spectrum -> triangular mel
    filterbank -> log (floored) -> DCT-II, keeping the first ``n_coeffs``.
    The pooled vector is mean/std/min/max per coefficient, padded with zeros
    (or truncated) to ``pooled_length``.
    """
    if n_coeffs > n_mels:
        raise ContractError(f"n_coeffs {n_coeffs} exceeds n_mels {n_mels}")
    frames = _windowed_frames(seg.samples, window, hop)
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    bank = mel_filterbank(n_mels, window, seg.sample_rate)
    energies = power @ bank.T
    logged = np.log(np.maximum(energies, LOG_FLOOR))
    coeffs = dct_ii(logged)[:, :n_coeffs]
    stats = np.concatenate([
        coeffs.mean(axis=0), coeffs.std(axis=0),
        coeffs.min(axis=0), coeffs.max(axis=0),
    ])
    pooled = np.zeros(pooled_length)
    take = min(pooled_length, len(stats))
    pooled[:take] = stats[:take]
    return MfccFeatures(coeffs, pooled)


def resample_linear(samples: np.ndarray, new_length: int) -> np.ndarray:
    """Linear-interpolation resample onto ``new_length`` evenly spaced points."""
    n = len(samples)
    if new_length == n:
        return samples.copy()
    positions = np.linspace(0.0, n - 1.0, new_length)
    return np.interp(positions, np.arange(n), samples)


def _frequency_variant(seg: AudioSegment, fraction: float) -> AudioSegment:
    new_rate = int(round(seg.sample_rate * fraction))
    new_length = int(round(seg.duration * new_rate))
    return AudioSegment(resample_linear(seg.samples, new_length), new_rate)


def _noise_variant(seg: AudioSegment, amplitude: float,
                   rng: np.random.Generator) -> AudioSegment:
    noise = rng.uniform(-amplitude, amplitude, size=len(seg.samples))
    return AudioSegment(np.clip(seg.samples + noise, -1.0, 1.0), seg.sample_rate)


def augment_audio(seg: AudioSegment, seed: int = 0) -> list[AudioSegment]:
    """The 27-variant grid: 3 rate levels, 6 noise amplitudes, 18 combined.

    Order: frequency variants (f/3, f/2, 2f/3), then the six noise-only
    variants in increasing amplitude, then for each rate level the six noise
    amplitudes again. Deterministic for a fixed seed.
    """
    out = []
    for level in FREQUENCY_LEVELS:
        out.append(_frequency_variant(seg, _FREQ_FRACTIONS[level]))
    for i, amp in enumerate(NOISE_AMPLITUDES):
        out.append(_noise_variant(seg, amp, rng_for(seed, "noise", i)))
    for li, level in enumerate(FREQUENCY_LEVELS):
        scaled = _frequency_variant(seg, _FREQ_FRACTIONS[level])
        for i, amp in enumerate(NOISE_AMPLITUDES):
            out.append(_noise_variant(scaled, amp,
                                      rng_for(seed, "combined", li, i)))
    return out


def load_wav(path) -> AudioSegment:
    """Read a mono 16-bit PCM WAV file."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as wf:
            if wf.getnchannels() != 1:
                raise DataError(f"{path}: expected mono, got {wf.getnchannels()} channels")
            if wf.getsampwidth() != 2:
                raise DataError(f"{path}: expected 16-bit PCM")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
    except wave.Error as exc:
        raise DataError(f"{path}: not a readable WAV file ({exc})") from exc
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return AudioSegment(samples, rate)


def save_wav(path, seg: AudioSegment) -> None:
    """Write a mono 16-bit PCM WAV file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ints = np.round(np.clip(seg.samples, -1.0, 1.0) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(seg.sample_rate)
        wf.writeframes(ints.tobytes())
