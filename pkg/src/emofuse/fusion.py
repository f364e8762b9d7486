"""Decision-level fusion of per-modality class probabilities.

The multimodal probability is the convex combination
p = alpha * p_eeg + (1 - alpha) * p_music for class 1; endpoints alpha in
{0, 1} reproduce the unimodal probabilities exactly (no rescaling involved).
Feature-level fusion (plain concatenation) lives here too for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eeg_features import EEG_FEATURE_NAMES
from .errors import DimensionMismatch, MismatchedWindows
from .music_features import MUSIC_FEATURE_NAMES

MODALITY_EEG = "EEG"
MODALITY_MUSIC = "music"
MODALITY_MULTIMODAL = "multimodal"

EEG_DIM = len(EEG_FEATURE_NAMES)
MUSIC_DIM = len(MUSIC_FEATURE_NAMES)
FUSED_DIM = EEG_DIM + MUSIC_DIM


@dataclass(frozen=True)
class ClassProbabilities:
    """Probability of class 1 for one analysis window; class 2 is the complement."""

    p_class1: float
    modality: str = MODALITY_MULTIMODAL
    window_id: tuple | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_class1 <= 1.0:
            raise ValueError(f"probability outside [0,1]: {self.p_class1}")


@dataclass(frozen=True)
class FusionConfig:
    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha outside [0,1]: {self.alpha}")


def fuse_decision(
    p_eeg: ClassProbabilities, p_music: ClassProbabilities, cfg: FusionConfig
) -> ClassProbabilities:
    if (
        p_eeg.window_id is not None
        and p_music.window_id is not None
        and p_eeg.window_id != p_music.window_id
    ):
        raise MismatchedWindows(f"{p_eeg.window_id} vs {p_music.window_id}")
    fused = cfg.alpha * p_eeg.p_class1 + (1.0 - cfg.alpha) * p_music.p_class1
    return ClassProbabilities(
        p_class1=fused, modality=MODALITY_MULTIMODAL, window_id=p_eeg.window_id
    )


def fuse_probabilities(p_eeg: np.ndarray, p_music: np.ndarray, alpha: float) -> np.ndarray:
    """Vectorized form of fuse_decision for whole test folds."""
    return alpha * np.asarray(p_eeg) + (1.0 - alpha) * np.asarray(p_music)


def decide(p: ClassProbabilities | float, seed) -> int:
    """Class 1 above probability 0.5, class 2 below, fair seeded coin at exactly 0.5."""
    value = p.p_class1 if isinstance(p, ClassProbabilities) else float(p)
    if value > 0.5:
        return 1
    if value < 0.5:
        return 2
    return 1 if np.random.default_rng(seed).random() < 0.5 else 2


def fuse_features(v_eeg: np.ndarray, v_music: np.ndarray) -> np.ndarray:
    """Concatenate the EEG block (first) and the music block into one vector."""
    v_eeg = np.asarray(v_eeg, dtype=np.float64)
    v_music = np.asarray(v_music, dtype=np.float64)
    if v_eeg.shape != (EEG_DIM,):
        raise DimensionMismatch(f"EEG block must have {EEG_DIM} dims, got {v_eeg.shape}")
    if v_music.shape != (MUSIC_DIM,):
        raise DimensionMismatch(f"music block must have {MUSIC_DIM} dims, got {v_music.shape}")
    return np.concatenate([v_eeg, v_music])
