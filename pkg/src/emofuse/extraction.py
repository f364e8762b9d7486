"""From manifest datasets to windowed feature matrices, with disk caching.

Each trial's features for one window size are three CSV tables (EEG, music,
window labels) plus a meta record carrying a content hash of the raw inputs
and extraction parameters; re-extraction is skipped when the hash matches.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import dataset as ds
from .eeg_features import EEG_FEATURE_NAMES, EegFeatureConfig, extract_eeg_features
from .evaluation import WindowedDataset
from .music_features import MUSIC_FEATURE_NAMES, FrameConfig, extract_music_features

FORMAT_VERSION = 1


@dataclass(frozen=True)
class TrialFeatures:
    subject_id: str
    song_id: str
    window_s: float
    starts_s: np.ndarray
    eeg: np.ndarray
    music: np.ndarray
    mean_valence: np.ndarray
    mean_arousal: np.ndarray
    arousal_class: np.ndarray  # 1 high, 2 low
    valence_class: np.ndarray  # 1 positive, 2 negative

    @property
    def n_windows(self) -> int:
        return len(self.starts_s)


def extract_trial(
    trial: ds.Trial,
    window_s: float,
    eeg_cfg: EegFeatureConfig | None = None,
    frame_cfg: FrameConfig | None = None,
) -> TrialFeatures:
    eeg_cfg = eeg_cfg or EegFeatureConfig()
    frame_cfg = frame_cfg or FrameConfig()
    windows = ds.segment_trial(trial, window_s)
    eeg_rows = np.empty((len(windows), len(EEG_FEATURE_NAMES)))
    music_rows = np.empty((len(windows), len(MUSIC_FEATURE_NAMES)))
    starts = np.empty(len(windows))
    mean_v = np.empty(len(windows))
    mean_a = np.empty(len(windows))
    cls_a = np.empty(len(windows), dtype=int)
    cls_v = np.empty(len(windows), dtype=int)
    for i, w in enumerate(windows):
        sl = ds.window_slice(w, trial.eeg.sample_rate_hz)
        eeg_win = ds.MultichannelSignal(
            samples=trial.eeg.samples[:, sl],
            sample_rate_hz=trial.eeg.sample_rate_hz,
            channel_names=trial.eeg.channel_names,
        )
        eeg_rows[i] = extract_eeg_features(eeg_win, eeg_cfg).values
        sl = ds.window_slice(w, trial.audio.sample_rate_hz)
        audio_win = ds.AudioSignal(
            samples=trial.audio.samples[sl],
            sample_rate_hz=trial.audio.sample_rate_hz,
        )
        music_rows[i] = extract_music_features(audio_win, frame_cfg).values
        label = ds.label_window(trial.annotations, w)
        starts[i] = w.start_s
        mean_v[i] = label.mean_valence
        mean_a[i] = label.mean_arousal
        cls_a[i] = 1 if label.arousal_sign > 0 else 2
        cls_v[i] = 1 if label.valence_sign > 0 else 2
    return TrialFeatures(
        subject_id=trial.ref.subject_id,
        song_id=trial.ref.song_id,
        window_s=window_s,
        starts_s=starts,
        eeg=eeg_rows,
        music=music_rows,
        mean_valence=mean_v,
        mean_arousal=mean_a,
        arousal_class=cls_a,
        valence_class=cls_v,
    )


def assemble_windowed(trials: list[TrialFeatures], window_s: float) -> WindowedDataset:
    subjects: list[str] = []
    songs: list[str] = []
    for tf in trials:
        subjects.extend([tf.subject_id] * tf.n_windows)
        songs.extend([tf.song_id] * tf.n_windows)
    return WindowedDataset(
        window_s=window_s,
        subjects=tuple(subjects),
        song_ids=tuple(songs),
        window_starts_s=np.concatenate([tf.starts_s for tf in trials]),
        eeg=np.vstack([tf.eeg for tf in trials]),
        music=np.vstack([tf.music for tf in trials]),
        arousal=np.concatenate([tf.arousal_class for tf in trials]),
        valence=np.concatenate([tf.valence_class for tf in trials]),
    )


def extract_dataset(
    manifest: ds.DatasetManifest,
    window_s: float,
    eeg_cfg: EegFeatureConfig | None = None,
    frame_cfg: FrameConfig | None = None,
) -> WindowedDataset:
    """In-memory extraction of every trial at one window size."""
    trials = [
        extract_trial(ds.load_trial(ref), window_s, eeg_cfg, frame_cfg)
        for ref in manifest.all_trials()
    ]
    return assemble_windowed(trials, window_s)


# ---------------------------------------------------------------------------
# disk cache

def _params_blob(window_s: float, eeg_cfg: EegFeatureConfig, frame_cfg: FrameConfig) -> bytes:
    return json.dumps({
        "format_version": FORMAT_VERSION,
        "window_s": window_s,
        "k_max": eeg_cfg.k_max,
        "bandpass": list(eeg_cfg.bandpass) if eeg_cfg.bandpass else None,
        "frame_len": frame_cfg.frame_len,
        "hop": frame_cfg.hop,
    }, sort_keys=True).encode()


def content_hash(ref: ds.TrialRef, window_s: float, eeg_cfg: EegFeatureConfig,
                 frame_cfg: FrameConfig) -> str:
    h = hashlib.sha256(_params_blob(window_s, eeg_cfg, frame_cfg))
    sidecar = ref.eeg_path.with_name(ref.eeg_path.name + ".json")
    for path in (ref.eeg_path, sidecar, ref.audio_path, ref.annotation_path):
        if path.exists():
            h.update(path.read_bytes())
    return h.hexdigest()


def _safe(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]", "-", name)


def features_dir(out_dir: str | Path, window_s: float) -> Path:
    return Path(out_dir) / "features" / f"w{int(round(window_s * 1000))}ms"


def _trial_stem(directory: Path, subject_id: str, song_id: str) -> Path:
    return directory / f"{_safe(subject_id)}__{_safe(song_id)}"


def write_trial_features(directory: Path, tf: TrialFeatures, digest: str) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    stem = _trial_stem(directory, tf.subject_id, tf.song_id)
    np.savetxt(stem.with_suffix(".eeg.csv"), np.atleast_2d(tf.eeg),
               delimiter=",", fmt="%.17g", comments="",
               header=",".join(EEG_FEATURE_NAMES))
    np.savetxt(stem.with_suffix(".music.csv"), np.atleast_2d(tf.music),
               delimiter=",", fmt="%.17g", comments="",
               header=",".join(MUSIC_FEATURE_NAMES))
    label_rows = np.column_stack([
        tf.starts_s, tf.mean_valence, tf.mean_arousal, tf.arousal_class, tf.valence_class,
    ])
    np.savetxt(stem.with_suffix(".windows.csv"), np.atleast_2d(label_rows),
               delimiter=",", fmt=["%.17g", "%.17g", "%.17g", "%d", "%d"],
               comments="",
               header="start_s,mean_valence,mean_arousal,arousal_class,valence_class")
    stem.with_suffix(".meta.json").write_text(json.dumps({
        "hash": digest,
        "subject_id": tf.subject_id,
        "song_id": tf.song_id,
        "window_s": tf.window_s,
        "n_windows": tf.n_windows,
    }, sort_keys=True, indent=1))


def read_trial_features(directory: Path, subject_id: str, song_id: str,
                        window_s: float) -> TrialFeatures:
    stem = _trial_stem(directory, subject_id, song_id)
    eeg = np.atleast_2d(np.loadtxt(stem.with_suffix(".eeg.csv"),
                                   delimiter=",", skiprows=1))
    music = np.atleast_2d(np.loadtxt(stem.with_suffix(".music.csv"),
                                     delimiter=",", skiprows=1))
    labels = np.atleast_2d(np.loadtxt(stem.with_suffix(".windows.csv"),
                                      delimiter=",", skiprows=1))
    return TrialFeatures(
        subject_id=subject_id,
        song_id=song_id,
        window_s=window_s,
        starts_s=labels[:, 0],
        eeg=eeg,
        music=music,
        mean_valence=labels[:, 1],
        mean_arousal=labels[:, 2],
        arousal_class=labels[:, 3].astype(int),
        valence_class=labels[:, 4].astype(int),
    )


def _cached_digest(directory: Path, subject_id: str, song_id: str) -> str | None:
    meta = _trial_stem(directory, subject_id, song_id).with_suffix(".meta.json")
    if not meta.exists():
        return None
    try:
        return json.loads(meta.read_text()).get("hash")
    except (OSError, json.JSONDecodeError):
        return None


def ensure_trial_features(
    ref: ds.TrialRef,
    out_dir: str | Path,
    window_s: float,
    eeg_cfg: EegFeatureConfig | None = None,
    frame_cfg: FrameConfig | None = None,
) -> bool:
    """Extract one trial unless its cache is fresh; returns True when cached."""
    eeg_cfg = eeg_cfg or EegFeatureConfig()
    frame_cfg = frame_cfg or FrameConfig()
    directory = features_dir(out_dir, window_s)
    digest = content_hash(ref, window_s, eeg_cfg, frame_cfg)
    if _cached_digest(directory, ref.subject_id, ref.song_id) == digest:
        return True
    tf = extract_trial(ds.load_trial(ref), window_s, eeg_cfg, frame_cfg)
    write_trial_features(directory, tf, digest)
    return False


def ensure_features(
    manifest: ds.DatasetManifest,
    out_dir: str | Path,
    window_s: float,
    eeg_cfg: EegFeatureConfig | None = None,
    frame_cfg: FrameConfig | None = None,
) -> list[tuple[ds.TrialRef, bool]]:
    """Extract any trial whose cache is missing or stale; returns (trial, cached) pairs."""
    return [
        (ref, ensure_trial_features(ref, out_dir, window_s, eeg_cfg, frame_cfg))
        for ref in manifest.all_trials()
    ]


def load_windowed(manifest: ds.DatasetManifest, out_dir: str | Path,
                  window_s: float) -> WindowedDataset:
    directory = features_dir(out_dir, window_s)
    trials = [
        read_trial_features(directory, ref.subject_id, ref.song_id, window_s)
        for ref in manifest.all_trials()
    ]
    return assemble_windowed(trials, window_s)
