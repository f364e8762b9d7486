"""Synthetic demo dataset with known class structure.

Each trial is a sequence of 10 s segments, one (arousal, valence) class combo
per segment, balanced exactly across the subject's trials. Arousal class is
coded into signal properties both modalities can see (EEG smoothness via an
AR(1) pole, audio click rate and level), valence into hemispheric asymmetry
of the EEG pole and into consonant versus dissonant tone content. Annotation
traces sit near (+-0.6, +-0.6) with small jitter, so window labels recover
the segment schedule. Same seed, same bytes.
"""

from __future__ import annotations

import json
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

from .dataset import ASYMMETRY_PAIRS, CHANNELS

SEGMENT_COMBOS = ((1, 1), (1, 2), (2, 1), (2, 2))  # (arousal_class, valence_class)

_LEFT = {left for left, _ in ASYMMETRY_PAIRS}
_RIGHT = {right for _, right in ASYMMETRY_PAIRS}

CLICK_BPM_HIGH = 150.0
CLICK_BPM_LOW = 60.0
CONSONANT_HZ = (220.0, 275.0, 330.0)   # 4:5:6
DISSONANT_HZ = (220.0, 241.7, 330.0)   # middle partial near peak dissonance

ANNOTATION_RATE_HZ = 10.0
ANNOTATION_MAGNITUDE = 0.6
ANNOTATION_JITTER = 0.05


@dataclass(frozen=True)
class SynthConfig:
    subjects: int = 2
    trials_per_subject: int = 4
    segments_per_trial: int = 6
    segment_s: float = 10.0
    eeg_rate_hz: float = 250.0
    audio_rate_hz: float = 22050.0
    seed: int = 0

    def __post_init__(self):
        if self.subjects < 1 or self.trials_per_subject < 1 or self.segments_per_trial < 1:
            raise ValueError("counts must be positive")

    @property
    def trial_s(self) -> float:
        return self.segments_per_trial * self.segment_s


def _schedule(rng: np.random.Generator, n_segments: int) -> list[tuple[int, int]]:
    """Balanced class-combo sequence: each combo appears n/4 times (padded, then trimmed)."""
    reps = -(-n_segments // len(SEGMENT_COMBOS))
    combos = list(SEGMENT_COMBOS) * reps
    order = rng.permutation(len(combos))
    return [combos[i] for i in order[:n_segments]]


def _ar1_pole(arousal_class: int, valence_class: int, channel: str) -> float:
    """AR(1) pole per channel: rough (low pole) for high arousal, asymmetric by valence."""
    base = 0.15 if arousal_class == 1 else 0.75
    val_sign = 1.0 if valence_class == 1 else -1.0
    if channel in _LEFT:
        shift = -0.15 * val_sign
    elif channel in _RIGHT:
        shift = 0.15 * val_sign
    else:
        shift = 0.0
    return float(np.clip(base + shift, 0.0, 0.9))


def _eeg_trial(rng: np.random.Generator, cfg: SynthConfig,
               schedule: list[tuple[int, int]]) -> np.ndarray:
    n_seg = int(round(cfg.segment_s * cfg.eeg_rate_hz))
    out = np.empty((len(CHANNELS), n_seg * len(schedule)))
    for s, (aro, val) in enumerate(schedule):
        noise = rng.standard_normal((len(CHANNELS), n_seg))
        for c, name in enumerate(CHANNELS):
            a = _ar1_pole(aro, val, name)
            out[c, s * n_seg : (s + 1) * n_seg] = lfilter([1.0 - a], [1.0, -a], noise[c])
    return out


def _audio_segment(rng: np.random.Generator, cfg: SynthConfig,
                   aro: int, val: int) -> np.ndarray:
    sr = cfg.audio_rate_hz
    n = int(round(cfg.segment_s * sr))
    t = np.arange(n) / sr
    tone_amp = 0.22 if aro == 1 else 0.12
    click_amp = 0.6 if aro == 1 else 0.4
    freqs = CONSONANT_HZ if val == 1 else DISSONANT_HZ
    x = sum(tone_amp / len(freqs) * np.sin(2 * np.pi * f * t) for f in freqs)
    bpm = CLICK_BPM_HIGH if aro == 1 else CLICK_BPM_LOW
    interval = int(round(60.0 / bpm * sr))
    burst_len = int(round(0.002 * sr))
    decay = np.exp(-np.linspace(0.0, 5.0, burst_len))
    for start in range(0, n - burst_len, interval):
        x[start : start + burst_len] += click_amp * decay * rng.standard_normal(burst_len)
    return x


def _annotation_rows(rng: np.random.Generator, cfg: SynthConfig,
                     schedule: list[tuple[int, int]]) -> list[tuple[int, float, float]]:
    rows = []
    step_ms = int(round(1000.0 / ANNOTATION_RATE_HZ))
    n_events = int(round(cfg.trial_s * ANNOTATION_RATE_HZ))
    for k in range(n_events):
        t_ms = k * step_ms
        seg = min(int(t_ms / 1000.0 / cfg.segment_s), len(schedule) - 1)
        aro, val = schedule[seg]
        v = ANNOTATION_MAGNITUDE * (1.0 if val == 1 else -1.0)
        a = ANNOTATION_MAGNITUDE * (1.0 if aro == 1 else -1.0)
        jit = rng.uniform(-ANNOTATION_JITTER, ANNOTATION_JITTER, size=2)
        rows.append((t_ms, float(v + jit[0]), float(a + jit[1])))
    return rows


def _write_eeg_csv(path: Path, samples: np.ndarray, rate_hz: float) -> None:
    with path.open("w", newline="") as fh:
        fh.write(",".join(CHANNELS) + "\n")
        for row in samples.T:
            fh.write(",".join(f"{v:.6f}" for v in row) + "\n")
    path.with_name(path.name + ".json").write_text(
        json.dumps({"sample_rate_hz": rate_hz}))


def _write_wav(path: Path, samples: np.ndarray, rate_hz: float) -> None:
    pcm = np.clip(np.round(samples * 32767.0), -32768, 32767).astype("<i2")
    with wave.open(str(path), "wb") as wv:
        wv.setnchannels(1)
        wv.setsampwidth(2)
        wv.setframerate(int(rate_hz))
        wv.writeframes(pcm.tobytes())


def _write_annotations(path: Path, rows: list[tuple[int, float, float]]) -> None:
    with path.open("w", newline="") as fh:
        for t_ms, v, a in rows:
            fh.write(f"{t_ms},{v:.6f},{a:.6f}\n")


def generate_dataset(out_dir: str | Path, cfg: SynthConfig | None = None) -> Path:
    """Write a complete manifest dataset under out_dir; returns the manifest path."""
    cfg = cfg or SynthConfig()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    root_ss = np.random.SeedSequence(cfg.seed)
    subject_seeds = root_ss.spawn(cfg.subjects)
    manifest: dict = {"subjects": []}
    for si in range(cfg.subjects):
        subject_id = f"s{si + 1:02d}"
        subj_dir = out / subject_id
        subj_dir.mkdir(exist_ok=True)
        subj_rng = np.random.default_rng(subject_seeds[si])
        total_segments = cfg.trials_per_subject * cfg.segments_per_trial
        segments = _schedule(subj_rng, total_segments)
        record = {"subject_id": subject_id, "trials": []}
        for ti in range(cfg.trials_per_subject):
            song_id = f"song{ti + 1:02d}"
            schedule = segments[ti * cfg.segments_per_trial : (ti + 1) * cfg.segments_per_trial]
            eeg = _eeg_trial(subj_rng, cfg, schedule)
            audio = np.concatenate([
                _audio_segment(subj_rng, cfg, aro, val) for aro, val in schedule
            ])
            annotations = _annotation_rows(subj_rng, cfg, schedule)
            eeg_path = subj_dir / f"{song_id}_eeg.csv"
            wav_path = subj_dir / f"{song_id}.wav"
            ann_path = subj_dir / f"{song_id}_annotations.csv"
            _write_eeg_csv(eeg_path, eeg, cfg.eeg_rate_hz)
            _write_wav(wav_path, audio, cfg.audio_rate_hz)
            _write_annotations(ann_path, annotations)
            record["trials"].append({
                "song_id": song_id,
                "eeg": eeg_path.relative_to(out).as_posix(),
                "audio": wav_path.relative_to(out).as_posix(),
                "annotations": ann_path.relative_to(out).as_posix(),
                "familiarity": int(subj_rng.integers(0, 2)),
                "confidence": int(subj_rng.integers(1, 4)),
            })
        manifest["subjects"].append(record)
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=1, sort_keys=True))
    return manifest_path
