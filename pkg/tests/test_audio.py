"""STFT, spectrogram images, MFCC, and the audio augmentation grid."""

import numpy as np
import pytest

from neopain.audio import (FREQUENCY_LEVELS, NOISE_AMPLITUDES, AudioSegment,
                           augment_audio, dct_ii, hz_to_mel, load_wav,
                           mel_filterbank, mel_to_hz, mfcc,
                           render_spectrogram_image, resample_linear,
                           save_wav, stft)
from neopain.errors import ContractError, DataError
from oracles import direct_dft_magnitudes


def _segment(rng, n=3000, rate=8000):
    return AudioSegment(rng.uniform(-0.5, 0.5, n), rate)


def test_segment_validation():
    with pytest.raises(ContractError):
        AudioSegment(np.array([0.0, 2.0]), 8000)  # out of [-1, 1]
    with pytest.raises(ContractError):
        AudioSegment(np.array([[0.0], [0.1]]), 8000)  # not 1-D
    with pytest.raises(ContractError):
        AudioSegment(np.array([0.0, np.nan]), 8000)
    seg = AudioSegment(np.zeros(4000), 8000)
    assert seg.duration == pytest.approx(0.5)


def test_stft_shape_formula():
    rng = np.random.default_rng(0)
    for n, window, hop in [(3000, 256, 128), (1024, 1024, 512), (5000, 512, 256)]:
        spec = stft(_segment(rng, n), window=window, hop=hop)
        assert spec.bins == window // 2 + 1
        assert spec.frames == 1 + (n - window) // hop


def test_stft_matches_direct_dft():
    """Window-and-sum DFT oracle, ten random short signals, 1e-9."""
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(300, 900))
        window = int(rng.choice([64, 128, 256]))
        hop = window // 2
        seg = AudioSegment(rng.uniform(-0.9, 0.9, n), 8000)
        spec = stft(seg, window=window, hop=hop)
        hann = np.hanning(window)
        for f in range(spec.frames):
            frame = seg.samples[f * hop:f * hop + window] * hann
            oracle = direct_dft_magnitudes(frame)
            assert np.max(np.abs(spec.magnitudes[:, f] - oracle)) < 1e-9


def test_440hz_lands_in_bin_10():
    rate, window = 44100, 1024
    t = np.arange(rate) / rate
    seg = AudioSegment(0.5 * np.sin(2 * np.pi * 440.0 * t), rate)
    spec = stft(seg, window=window, hop=512)
    mean_mag = spec.magnitudes.mean(axis=1)
    assert int(np.argmax(mean_mag)) == 10


def test_stft_parseval_with_rfft_weights():
    rng = np.random.default_rng(13)
    window = 256
    x = rng.uniform(-0.8, 0.8, window)
    seg = AudioSegment(x, 8000)
    spec = stft(seg, window=window, hop=window)
    weights = np.full(window // 2 + 1, 2.0)
    weights[0] = weights[-1] = 1.0
    lhs = np.sum(weights * spec.magnitudes[:, 0] ** 2)
    xw = x * np.hanning(window)
    assert lhs == pytest.approx(window * np.sum(xw**2), rel=1e-12)


def test_stft_window_too_long():
    with pytest.raises(ContractError):
        stft(AudioSegment(np.zeros(100), 8000), window=256, hop=128)
    with pytest.raises(ContractError):
        stft(AudioSegment(np.zeros(1000), 8000), window=255, hop=128)


def test_spectrogram_image_layout_and_range():
    # a pure tone should produce a bright horizontal band
    rate = 8000
    t = np.arange(2 * rate) / rate
    seg = AudioSegment(0.7 * np.sin(2 * np.pi * 400.0 * t), rate)
    img = render_spectrogram_image(stft(seg), out_size=32)
    assert img.shape == (32, 32) and img.dtype == np.uint8
    rows = img.astype(float).mean(axis=1)
    # 400 Hz of 4000 Hz Nyquist -> band in the lower tenth (bottom = low freq)
    assert int(np.argmax(rows)) >= 28


def test_spectrogram_image_degenerate_is_zero():
    seg = AudioSegment(np.zeros(4000), 8000)
    img = render_spectrogram_image(stft(seg), out_size=16)
    assert img.shape == (16, 16)
    assert np.all(img == 0)


def test_mel_scale_round_trip():
    f = np.array([0.0, 300.0, 1000.0, 4000.0])
    assert np.allclose(mel_to_hz(hz_to_mel(f)), f, atol=1e-9)
    assert hz_to_mel(1000.0) == pytest.approx(2595.0 * np.log10(1 + 1000 / 700))


def test_mel_filterbank_shape_and_coverage():
    bank = mel_filterbank(40, 1024, 44100)
    assert bank.shape == (40, 513)
    assert np.all(bank >= 0)
    assert np.all(bank.max(axis=1) > 0)  # every filter has support
    with pytest.raises(ContractError):
        mel_filterbank(0, 1024, 44100)
    with pytest.raises(ContractError):
        mel_filterbank(514, 1024, 44100)


def test_dct_orthonormal():
    rng = np.random.default_rng(3)
    n = 16
    basis = dct_ii(np.eye(n))
    assert np.allclose(basis @ basis.T, np.eye(n), atol=1e-12)
    x = rng.normal(size=n)
    assert np.sum(dct_ii(x) ** 2) == pytest.approx(np.sum(x**2))


def test_mfcc_silence_only_c0():
    seg = AudioSegment(np.zeros(4000), 8000)
    feats = mfcc(seg, n_mels=20, n_coeffs=12, window=512, hop=256)
    assert np.all(feats.coefficients[:, 0] != 0.0)
    assert np.allclose(feats.coefficients[:, 1:], 0.0, atol=1e-9)


def test_mfcc_pooled_layout():
    rng = np.random.default_rng(5)
    seg = _segment(rng, 6000)
    feats = mfcc(seg, n_mels=26, n_coeffs=13, window=512, hop=256,
                 pooled_length=388)
    assert feats.pooled.shape == (388,)
    c = feats.coefficients
    assert feats.pooled[:13] == pytest.approx(c.mean(axis=0))
    assert feats.pooled[13:26] == pytest.approx(c.std(axis=0))
    assert feats.pooled[26:39] == pytest.approx(c.min(axis=0))
    assert feats.pooled[39:52] == pytest.approx(c.max(axis=0))
    assert np.all(feats.pooled[52:] == 0.0)


def test_mfcc_rejects_more_coeffs_than_mels():
    with pytest.raises(ContractError):
        mfcc(AudioSegment(np.zeros(4000), 8000), n_mels=10, n_coeffs=11)


def test_resample_linear_endpoints():
    x = np.array([0.0, 1.0, 0.0, -1.0])
    y = resample_linear(x, 7)
    assert y[0] == x[0] and y[-1] == x[-1]
    assert len(y) == 7
    assert np.array_equal(resample_linear(x, 4), x)


def test_augmentation_grid_count_and_order():
    rng = np.random.default_rng(9)
    seg = _segment(rng, 4000, rate=44100)
    variants = augment_audio(seg, seed=1)
    assert len(variants) == 27
    fractions = [1 / 3, 1 / 2, 2 / 3]
    # 3 frequency-only variants first: new rate, duration preserved
    for v, frac in zip(variants[:3], fractions):
        assert v.sample_rate == int(round(44100 * frac))
        assert v.duration == pytest.approx(seg.duration, rel=1e-3)
    # then 6 noise-only variants at the original rate
    for v, amp in zip(variants[3:9], NOISE_AMPLITUDES):
        assert v.sample_rate == 44100
        assert len(v.samples) == len(seg.samples)
        assert np.max(np.abs(v.samples - seg.samples)) <= amp + 1e-12
    # then 18 combined, frequency-major
    k = 9
    for frac in fractions:
        for amp in NOISE_AMPLITUDES:
            v = variants[k]
            assert v.sample_rate == int(round(44100 * frac))
            k += 1
    assert len(FREQUENCY_LEVELS) == 3 and len(NOISE_AMPLITUDES) == 6


def test_augmentation_deterministic_and_clipped():
    rng = np.random.default_rng(21)
    loud = AudioSegment(np.clip(rng.uniform(-1.0, 1.0, 2000), -1, 1), 8000)
    a = augment_audio(loud, seed=4)
    b = augment_audio(loud, seed=4)
    for va, vb in zip(a, b):
        assert np.array_equal(va.samples, vb.samples)
    for v in a:
        assert np.all(v.samples <= 1.0) and np.all(v.samples >= -1.0)
    c = augment_audio(loud, seed=5)
    assert any(not np.array_equal(va.samples, vc.samples)
               for va, vc in zip(a, c))


def test_half_rate_example():
    seg = AudioSegment(np.zeros(44100), 44100)
    variants = augment_audio(seg, seed=0)
    half = variants[1]
    assert half.sample_rate == 22050
    assert half.duration == pytest.approx(1.0)


def test_wav_round_trip(tmp_path):
    rng = np.random.default_rng(2)
    seg = AudioSegment(np.round(rng.uniform(-0.9, 0.9, 4000) * 32767) / 32768.0,
                       16000)
    path = tmp_path / "clip.wav"
    save_wav(path, seg)
    back = load_wav(path)
    assert back.sample_rate == 16000
    assert np.allclose(back.samples, seg.samples, atol=1.0 / 32768.0)


def test_load_wav_errors(tmp_path):
    bad = tmp_path / "noise.wav"
    bad.write_bytes(b"this is not audio")
    with pytest.raises(DataError):
        load_wav(bad)
