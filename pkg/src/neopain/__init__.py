"""Multimodal spatio-temporal pain assessment pipeline.

Per-indicator feature extraction (face, body, crying sound), CNN + bilinear
pooling + LSTM classification, decision-level fusion, and a
leave-one-subject-out evaluation harness, runnable end-to-end on synthetic
data.

Module map:

* ``nn``        — from-scratch numeric kernel (layers, LSTM, Adam, losses)
* ``models``    — spatial networks: bilinear two-stream and VGG-style CNNs
* ``temporal``  — LSTM classification head over per-frame feature sequences
* ``audio``     — STFT, spectrogram images, MFCC, audio augmentation
* ``video``     — keyframes, ROI crops, image augmentation, motion images
* ``fusion``    — clinical scales (NIPS, N-PASS) and decision-level fusion
* ``metrics``   — weighted metrics, ROC/AUC, kappa, Pearson
* ``shallow``   — Gaussian NB / KNN / random forest baselines
* ``features``  — manifest records -> model-ready arrays
* ``evaluate``  — leave-one-subject-out training and the experiment kinds
* ``synthetic`` — seeded synthetic dataset generator
* ``repro``     — one-call reproduction of the full experiment suite
* ``cli``       — ``neopain`` command-line entry points
"""

__version__ = "0.1.0"

from neopain.config import RunConfig
from neopain.manifest import Manifest, SampleRecord, load_manifest, save_manifest

__all__ = ["RunConfig", "Manifest", "SampleRecord", "load_manifest",
           "save_manifest", "__version__"]
