"""Data model and file ingestion: manifest, EEG text, WAV audio, annotations, windowing.

File formats
------------
Manifest: JSON document::

    {"subjects": [{"subject_id": "s01",
                   "trials": [{"song_id": "song01",
                               "eeg": "s01/song01_eeg.csv",
                               "audio": "songs/song01.wav",
                               "annotations": "s01/song01_annotations.csv",
                               "familiarity": 1, "confidence": 3}]}]}

All trial paths are resolved relative to the manifest's directory.

EEG: comma-delimited text, one header row with the 12 channel names (any
order), one row per sample, values in microvolts.  A JSON sidecar at
``<eeg_path>.json`` carries ``{"sample_rate_hz": 250.0}``.

Audio: PCM WAV, 16-bit integer samples, mono or stereo.

Annotations: one event per line, ``t_ms,valence,arousal`` with no header.
The annotator frontend exports this exact schema.
"""

from __future__ import annotations

import json
import wave
from bisect import bisect_right
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ChannelCountMismatch,
    CorruptHeader,
    DuplicateTrial,
    EmptyStream,
    MissingFile,
    NonNumericSample,
    ParseError,
    UnknownChannel,
    UnsupportedEncoding,
    WindowLongerThanTrial,
)

# Canonical electrode order; every loaded EEG signal is reordered to this.
CHANNELS = ("Fp1", "Fp2", "F3", "F4", "C3", "C4", "F7", "F8", "T3", "T4", "Fz", "Pz")

# Left/right electrode pairs used for the asymmetry indexes.
ASYMMETRY_PAIRS = (("Fp1", "Fp2"), ("F3", "F4"), ("C3", "C4"), ("F7", "F8"), ("T3", "T4"))

DEFAULT_EEG_RATE_HZ = 250.0
DEFAULT_AUDIO_RATE_HZ = 44100.0

# Rate at which the zero-order-hold annotation is sampled when labelling.
LABEL_RESAMPLE_HZ = 10.0


@dataclass(frozen=True)
class TrialRef:
    subject_id: str
    song_id: str
    eeg_path: Path
    audio_path: Path
    annotation_path: Path
    familiarity: int
    confidence: int


@dataclass(frozen=True)
class SubjectRecord:
    subject_id: str
    trials: tuple[TrialRef, ...]


@dataclass(frozen=True)
class DatasetManifest:
    subjects: tuple[SubjectRecord, ...]

    def all_trials(self) -> list[TrialRef]:
        return [t for s in self.subjects for t in s.trials]


@dataclass(frozen=True)
class MultichannelSignal:
    """EEG signal, channels x time, in canonical channel order."""

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_EEG_RATE_HZ
    channel_names: tuple[str, ...] = CHANNELS

    @property
    def n_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def channel(self, name: str) -> np.ndarray:
        return self.samples[self.channel_names.index(name)]


@dataclass(frozen=True)
class AudioSignal:
    """Mono audio, amplitudes in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: float = DEFAULT_AUDIO_RATE_HZ

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate_hz


@dataclass(frozen=True)
class AnnotationStream:
    """Continuous self-report events: (t_ms, valence, arousal), t_ms strictly increasing."""

    t_ms: np.ndarray
    valence: np.ndarray
    arousal: np.ndarray

    def __len__(self) -> int:
        return len(self.t_ms)


@dataclass(frozen=True)
class AnalysisWindow:
    start_s: float
    length_s: float
    trial: TrialRef | None = None

    @property
    def end_s(self) -> float:
        return self.start_s + self.length_s


@dataclass(frozen=True)
class WindowLabel:
    mean_valence: float
    mean_arousal: float

    # Binarization: threshold 0, ties assigned to the positive/high class.
    @property
    def valence_class(self) -> str:
        return "positive" if self.mean_valence >= 0 else "negative"

    @property
    def arousal_class(self) -> str:
        return "high" if self.mean_arousal >= 0 else "low"

    @property
    def valence_sign(self) -> int:
        return 1 if self.mean_valence >= 0 else -1

    @property
    def arousal_sign(self) -> int:
        return 1 if self.mean_arousal >= 0 else -1


@dataclass(frozen=True)
class Trial:
    """One subject x one song, with all signals loaded."""

    ref: TrialRef
    eeg: MultichannelSignal
    audio: AudioSignal
    annotations: AnnotationStream

    @property
    def duration_s(self) -> float:
        # Windows must be coverable by every modality.
        return min(self.eeg.duration_s, self.audio.duration_s)


def load_manifest(path: str | Path) -> DatasetManifest:
    """Load and validate a dataset manifest, checking every referenced file exists."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or "subjects" not in doc:
        raise ParseError(f"{path}: manifest must be an object with a 'subjects' list")

    base = path.parent
    subjects: list[SubjectRecord] = []
    seen_subjects: set[str] = set()
    seen_trials: set[tuple[str, str]] = set()
    for sub in doc["subjects"]:
        try:
            subject_id = str(sub["subject_id"])
            raw_trials = sub["trials"]
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{path}: malformed subject record: {exc}") from exc
        if subject_id in seen_subjects:
            raise DuplicateTrial(f"duplicate subject_id {subject_id!r}")
        seen_subjects.add(subject_id)

        trials: list[TrialRef] = []
        for raw in raw_trials:
            try:
                ref = TrialRef(
                    subject_id=subject_id,
                    song_id=str(raw["song_id"]),
                    eeg_path=base / raw["eeg"],
                    audio_path=base / raw["audio"],
                    annotation_path=base / raw["annotations"],
                    familiarity=int(raw["familiarity"]),
                    confidence=int(raw["confidence"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ParseError(f"{path}: malformed trial record: {exc}") from exc
            key = (subject_id, ref.song_id)
            if key in seen_trials:
                raise DuplicateTrial(f"duplicate trial {key}")
            seen_trials.add(key)
            if ref.confidence not in (1, 2, 3):
                raise ParseError(
                    f"{path}: trial {key}: confidence must be 1, 2 or 3, got {ref.confidence}"
                )
            for p in (ref.eeg_path, ref.audio_path, ref.annotation_path):
                if not p.exists():
                    raise MissingFile(p)
            trials.append(ref)
        subjects.append(SubjectRecord(subject_id=subject_id, trials=tuple(trials)))
    return DatasetManifest(subjects=tuple(subjects))


def _read_eeg_sidecar(path: Path) -> float:
    sidecar = Path(str(path) + ".json")
    if not sidecar.exists():
        return DEFAULT_EEG_RATE_HZ
    try:
        meta = json.loads(sidecar.read_text())
        return float(meta["sample_rate_hz"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{sidecar}: bad sidecar: {exc}") from exc


def load_eeg(path: str | Path) -> MultichannelSignal:
    """Load a delimited EEG text file, reordering columns to canonical order."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(path)
    with open(path) as fh:
        header_line = fh.readline().strip()
        if not header_line:
            raise ParseError(f"{path}: empty file")
        names = [h.strip() for h in header_line.split(",")]
        for name in names:
            if name not in CHANNELS:
                raise UnknownChannel(f"{path}: unknown channel {name!r}")
        if sorted(names) != sorted(CHANNELS):
            raise ChannelCountMismatch(
                f"{path}: expected the {len(CHANNELS)} canonical channels, got {len(names)} "
                f"columns ({', '.join(names)})"
            )
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(CHANNELS):
                raise ChannelCountMismatch(
                    f"{path}:{lineno}: expected {len(CHANNELS)} values, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise NonNumericSample(f"{path}:{lineno}: {exc}") from exc
    if not rows:
        raise ParseError(f"{path}: no samples")
    data = np.asarray(rows, dtype=np.float64).T  # channels x time, file order
    order = [names.index(ch) for ch in CHANNELS]
    return MultichannelSignal(samples=data[order], sample_rate_hz=_read_eeg_sidecar(path))


def load_wav(path: str | Path) -> AudioSignal:
    """Load 16-bit PCM WAV; stereo is averaged to mono, samples scaled by 1/32768."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(path)
    try:
        with wave.open(str(path), "rb") as wf:
            n_channels = wf.getnchannels()
            sampwidth = wf.getsampwidth()
            rate = wf.getframerate()
            n_frames = wf.getnframes()
            raw = wf.readframes(n_frames)
    except (wave.Error, EOFError) as exc:
        msg = str(exc)
        if "unknown format" in msg:
            raise UnsupportedEncoding(f"{path}: {msg}") from exc
        raise CorruptHeader(f"{path}: {msg}") from exc
    if sampwidth != 2:
        raise UnsupportedEncoding(f"{path}: only 16-bit PCM supported, got {8 * sampwidth}-bit")
    if n_channels not in (1, 2):
        raise UnsupportedEncoding(f"{path}: only mono or stereo supported, got {n_channels} channels")
    data = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    if n_channels == 2:
        data = data.reshape(-1, 2).mean(axis=1)
    if len(data) == 0:
        raise CorruptHeader(f"{path}: zero-length audio")
    return AudioSignal(samples=data, sample_rate_hz=float(rate))


def load_annotations(path: str | Path) -> AnnotationStream:
    """Load an annotation event file (lines of ``t_ms,valence,arousal``)."""
    path = Path(path)
    if not path.exists():
        raise MissingFile(path)
    t_ms: list[int] = []
    valence: list[float] = []
    arousal: list[float] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 't_ms,valence,arousal'")
            try:
                t = int(parts[0])
                v = float(parts[1])
                a = float(parts[2])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if t < 0:
                raise ParseError(f"{path}:{lineno}: negative timestamp")
            if t_ms and t <= t_ms[-1]:
                raise ParseError(f"{path}:{lineno}: timestamps must be strictly increasing")
            if not (-1.0 <= v <= 1.0 and -1.0 <= a <= 1.0):
                raise ParseError(f"{path}:{lineno}: valence/arousal outside [-1, 1]")
            t_ms.append(t)
            valence.append(v)
            arousal.append(a)
    return AnnotationStream(
        t_ms=np.asarray(t_ms, dtype=np.int64),
        valence=np.asarray(valence, dtype=np.float64),
        arousal=np.asarray(arousal, dtype=np.float64),
    )


def load_trial(ref: TrialRef) -> Trial:
    return Trial(
        ref=ref,
        eeg=load_eeg(ref.eeg_path),
        audio=load_wav(ref.audio_path),
        annotations=load_annotations(ref.annotation_path),
    )


def resample_annotations(stream: AnnotationStream, t_s: float) -> tuple[float, float]:
    """Zero-order hold: value of the latest event at or before t_s.

    Before the first event the first event's value applies.
    """
    if len(stream) == 0:
        raise EmptyStream("annotation stream has no events")
    idx = bisect_right(stream.t_ms, t_s * 1000.0) - 1
    if idx < 0:
        idx = 0
    return float(stream.valence[idx]), float(stream.arousal[idx])


def segment_windows(
    duration_s: float,
    window_s: float,
    hop_s: float | None = None,
    trial: TrialRef | None = None,
) -> list[AnalysisWindow]:
    """Non-overlapping by default; trailing partial window is dropped."""
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    if hop_s is None:
        hop_s = window_s
    if hop_s <= 0:
        raise ValueError("hop_s must be positive")
    if window_s > duration_s + 1e-9:
        raise WindowLongerThanTrial(
            f"window of {window_s} s does not fit in a {duration_s} s trial"
        )
    windows = []
    i = 0
    while True:
        start = i * hop_s
        if start + window_s > duration_s + 1e-9:
            break
        windows.append(AnalysisWindow(start_s=start, length_s=window_s, trial=trial))
        i += 1
    return windows


def segment_trial(trial: Trial, window_s: float, hop_s: float | None = None) -> list[AnalysisWindow]:
    return segment_windows(trial.duration_s, window_s, hop_s, trial=trial.ref)


def label_window(stream: AnnotationStream, window: AnalysisWindow) -> WindowLabel:
    """Mean of the zero-order-hold annotation sampled at 10 Hz over [start, end)."""
    if len(stream) == 0:
        raise EmptyStream("annotation stream has no events")
    n = int(round(window.length_s * LABEL_RESAMPLE_HZ))
    if n < 1:
        n = 1
    times = window.start_s + np.arange(n) / LABEL_RESAMPLE_HZ
    idx = np.searchsorted(stream.t_ms, times * 1000.0, side="right") - 1
    idx = np.maximum(idx, 0)
    return WindowLabel(
        mean_valence=float(stream.valence[idx].mean()),
        mean_arousal=float(stream.arousal[idx].mean()),
    )


def window_slice(window: AnalysisWindow, sample_rate_hz: float) -> slice:
    """Sample index range of a window in a signal of the given rate."""
    start = int(round(window.start_s * sample_rate_hz))
    n = int(round(window.length_s * sample_rate_hz))
    return slice(start, start + n)
