"""Cross-validation harness: normalization, folds, metrics, sweeps.

Per-fold SVMs are trained once per (subject, repetition, fold, modality) and
their calibrated test probabilities reused by every cell that shares them, so
the 41-point alpha sweep and the unimodal columns are exact re-reads of the
same predictions. Every random draw is keyed by its coordinates (never by
"how many draws happened before"), which makes serial and parallel execution
produce identical reports.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import svm
from .errors import EmptyInput, NotEnoughSubjects, SingleClass
from .fusion import EEG_DIM, MUSIC_DIM, fuse_probabilities

PROTOCOL_SD = "subject_dependent_10fold"
PROTOCOL_SI = "leave_one_subject_out"
PROTOCOLS = (PROTOCOL_SD, PROTOCOL_SI)

TARGET_AROUSAL = "arousal"
TARGET_VALENCE = "valence"
TARGETS = (TARGET_AROUSAL, TARGET_VALENCE)

MODALITIES = ("EEG", "MF", "DLF", "FLF")
NORMALIZATION_MODES = ("split", "pooled")

WINDOW_SIZES_S = tuple(range(2, 11))
ALPHA_GRID = tuple(float(a) for a in np.linspace(0.0, 1.0, 41))
ALPHA_DLF_EEG = 0.55
ALPHA_DLF_MF = 0.45
WINDOW_SWEEP_COLUMNS = ("DLF_EEG", "DLF_MF", "EEG", "MF", "Chance")


# ---------------------------------------------------------------------------
# seeds

def _coord_int(c) -> int:
    if isinstance(c, str):
        return zlib.crc32(c.encode("utf-8"))
    if isinstance(c, (bool, np.bool_)):
        return int(c)
    if isinstance(c, (int, np.integer)):
        return int(c) & 0xFFFFFFFF
    if isinstance(c, float):
        return int(round(c * 1_000_000)) & 0xFFFFFFFF
    raise TypeError(f"cannot derive a seed from {type(c).__name__}")


def derive_seed(global_seed: int, *coords) -> int:
    """Deterministic child seed for a named point in the experiment grid."""
    entropy = [_coord_int(global_seed)] + [_coord_int(c) for c in coords]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint32)[0])


# ---------------------------------------------------------------------------
# metrics

@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    tn: int = 0
    fp: int = 0
    fn: int = 0

    def __post_init__(self):
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


def confusion_from_predictions(y_true, y_pred) -> ConfusionMatrix:
    """Counts with class 1 as the positive class; labels are in {1, 2}."""
    t = np.asarray(y_true)
    p = np.asarray(y_pred)
    if t.shape != p.shape:
        raise ValueError("prediction/label length mismatch")
    return ConfusionMatrix(
        tp=int(np.count_nonzero((t == 1) & (p == 1))),
        tn=int(np.count_nonzero((t == 2) & (p == 2))),
        fp=int(np.count_nonzero((t == 2) & (p == 1))),
        fn=int(np.count_nonzero((t == 1) & (p == 2))),
    )


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyInput("empty confusion matrix")
    return 100.0 * (cm.tp + cm.tn) / cm.total


def mcc(cm: ConfusionMatrix) -> float:
    """Matthews correlation; 0 when any marginal is empty (random-guess convention)."""
    factors = (
        (cm.tp + cm.fp) * (cm.tp + cm.fn) * (cm.tn + cm.fp) * (cm.tn + cm.fn)
    )
    if factors == 0:
        return 0.0
    return (cm.tp * cm.tn - cm.fp * cm.fn) / math.sqrt(factors)


def chance_level(labels) -> float:
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise EmptyInput("no labels")
    _, counts = np.unique(labels, return_counts=True)
    return 100.0 * counts.max() / len(labels)


# ---------------------------------------------------------------------------
# normalization

@dataclass(frozen=True)
class MinMaxParams:
    mins: np.ndarray
    scales: np.ndarray  # 0 for constant columns, so they map to 0


def fit_minmax(x: np.ndarray) -> MinMaxParams:
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("cannot fit normalization on empty data")
    mins = x.min(axis=0)
    ranges = x.max(axis=0) - mins
    scales = np.where(ranges > 0, np.divide(1.0, ranges, where=ranges > 0), 0.0)
    return MinMaxParams(mins=mins, scales=scales)


def apply_minmax(params: MinMaxParams, x: np.ndarray) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - params.mins) * params.scales


def minmax_normalize(x: np.ndarray, scope: str = "global", subjects=None) -> np.ndarray:
    """Whole-matrix scaling to [0,1]; per_subject scope scales each block alone."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise EmptyInput("empty feature matrix")
    if scope == "global":
        return apply_minmax(fit_minmax(x), x)
    if scope == "per_subject":
        if subjects is None:
            raise ValueError("per_subject scope needs subject ids")
        subjects = np.asarray(subjects)
        out = np.empty_like(x, dtype=np.float64)
        for s in dict.fromkeys(subjects.tolist()):
            rows = subjects == s
            out[rows] = apply_minmax(fit_minmax(x[rows]), x[rows])
        return out
    raise ValueError(f"unknown scope {scope!r}")


# ---------------------------------------------------------------------------
# splits

@dataclass(frozen=True)
class FoldPlan:
    folds: tuple[np.ndarray, ...]
    single_class: bool = False


def stratified_kfold(labels, k: int, seed: int) -> FoldPlan:
    """k disjoint test-index sets with per-class counts balanced within one.

    Each class is shuffled by the seeded generator and dealt into k chunks;
    classes with fewer than k members land one per fold until exhausted. A
    single-class input degenerates to plain k-fold and is flagged.
    """
    labels = np.asarray(labels)
    if len(labels) == 0:
        raise EmptyInput("no labels to fold")
    if k < 2:
        raise ValueError("need k >= 2")
    rng = np.random.default_rng(seed)
    classes = np.unique(labels)
    parts: list[list[np.ndarray]] = [[] for _ in range(k)]
    for cls in classes:
        idx = np.nonzero(labels == cls)[0]
        rng.shuffle(idx)
        for f, chunk in enumerate(np.array_split(idx, k)):
            parts[f].append(chunk)
    folds = tuple(np.sort(np.concatenate(p)) if p else np.empty(0, dtype=int) for p in parts)
    return FoldPlan(folds=folds, single_class=len(classes) < 2)


def leave_one_subject_out(subject_ids) -> list[tuple[tuple[str, ...], str]]:
    """(train subjects, test subject) pairs, one per subject in first-seen order."""
    unique = list(dict.fromkeys(subject_ids))
    if len(unique) < 2:
        raise NotEnoughSubjects(f"need >= 2 subjects, got {len(unique)}")
    return [(tuple(s for s in unique if s != test), test) for test in unique]


# ---------------------------------------------------------------------------
# windowed dataset and config

@dataclass(frozen=True)
class WindowedDataset:
    """Materialized feature matrices and labels for one window size."""

    window_s: float
    subjects: tuple[str, ...]
    song_ids: tuple[str, ...]
    window_starts_s: np.ndarray
    eeg: np.ndarray
    music: np.ndarray
    arousal: np.ndarray
    valence: np.ndarray

    def __post_init__(self):
        n = len(self.subjects)
        shapes = (
            len(self.song_ids), len(self.window_starts_s), len(self.eeg),
            len(self.music), len(self.arousal), len(self.valence),
        )
        if any(s != n for s in shapes):
            raise ValueError("inconsistent window counts")
        if n and (self.eeg.shape[1] != EEG_DIM or self.music.shape[1] != MUSIC_DIM):
            raise ValueError("feature matrices have wrong widths")
        for lab in (self.arousal, self.valence):
            if not np.all(np.isin(lab, (1, 2))):
                raise ValueError("labels must be 1 or 2")

    @property
    def n_windows(self) -> int:
        return len(self.subjects)

    def labels(self, target: str) -> np.ndarray:
        if target == TARGET_AROUSAL:
            return self.arousal
        if target == TARGET_VALENCE:
            return self.valence
        raise ValueError(f"unknown target {target!r}")

    def subject_list(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(self.subjects))


@dataclass(frozen=True)
class CvConfig:
    protocol: str = PROTOCOL_SD
    folds: int = 10
    repetitions: int = 5
    seed: int = 0
    window_s: float = 2.0
    alpha: float = 0.5
    modality: str = "DLF"
    target: str = TARGET_AROUSAL
    normalization: str = "split"
    group_by_song: bool = False
    box_c: float = svm.DEFAULT_BOX_C
    kernel_scale: float = svm.DEFAULT_KERNEL_SCALE

    def __post_init__(self):
        if self.protocol not in PROTOCOLS:
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")
        if self.target not in TARGETS:
            raise ValueError(f"unknown target {self.target!r}")
        if self.normalization not in NORMALIZATION_MODES:
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.folds < 2:
            raise ValueError("folds must be >= 2")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha outside [0,1]")


# ---------------------------------------------------------------------------
# prediction engine

@dataclass(frozen=True)
class FoldPrediction:
    subject: str
    rep: int
    fold: int
    test_idx: np.ndarray
    p_eeg: np.ndarray | None = None
    p_music: np.ndarray | None = None
    p_flf: np.ndarray | None = None
    degenerate: bool = False
    majority_class: int = 1
    unconverged: bool = False


@dataclass(frozen=True)
class PredictionBundle:
    windows: WindowedDataset
    cfg: CvConfig
    folds: tuple[FoldPrediction, ...]
    has_flf: bool


def _window_key(window_s: float) -> int:
    return int(round(window_s * 1000))


def _split_indexes(windows: WindowedDataset, cfg: CvConfig, rep: int):
    """Yield (subject, fold_index, train_idx, test_idx) for one repetition."""
    wkey = _window_key(windows.window_s)
    all_idx = np.arange(windows.n_windows)
    subj = np.asarray(windows.subjects)
    if cfg.protocol == PROTOCOL_SD:
        for s in windows.subject_list():
            s_idx = all_idx[subj == s]
            labels = windows.labels(cfg.target)[s_idx]
            fold_seed = derive_seed(cfg.seed, "folds", cfg.target, wkey, s, rep)
            if cfg.group_by_song:
                songs = np.asarray(windows.song_ids)[s_idx]
                groups = list(dict.fromkeys(songs.tolist()))
                group_labels = [
                    int(np.bincount(labels[songs == g], minlength=3)[1:].argmax()) + 1
                    for g in groups
                ]
                plan = stratified_kfold(group_labels, cfg.folds, fold_seed)
                fold_sets = [
                    np.nonzero(np.isin(songs, [groups[i] for i in f]))[0]
                    for f in plan.folds
                ]
            else:
                fold_sets = list(stratified_kfold(labels, cfg.folds, fold_seed).folds)
            for f, local_test in enumerate(fold_sets):
                if len(local_test) == 0:
                    continue
                test = s_idx[local_test]
                train = np.setdiff1d(s_idx, test)
                yield s, f, train, test
    else:
        for _, test_subject in leave_one_subject_out(windows.subject_list()):
            test = all_idx[subj == test_subject]
            train = all_idx[subj != test_subject]
            yield test_subject, 0, train, test


def _normalized(windows: WindowedDataset, cfg: CvConfig, x: np.ndarray,
                train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if cfg.normalization == "split":
        params = fit_minmax(x[train])
        return apply_minmax(params, x[train]), apply_minmax(params, x[test])
    # pooled: fits on the whole scope before splitting (leaks by design)
    if cfg.protocol == PROTOCOL_SD:
        scope = np.concatenate([train, test])  # one subject's windows
        params = fit_minmax(x[scope])
    else:
        params = fit_minmax(x)
    return apply_minmax(params, x[train]), apply_minmax(params, x[test])


def _fold_roles(cfg: CvConfig, include_flf: bool) -> tuple[str, ...]:
    return ("eeg", "music", "flf") if include_flf else ("eeg", "music")


def _predict_fold(windows: WindowedDataset, cfg: CvConfig, subject: str, rep: int,
                  fold: int, train: np.ndarray, test: np.ndarray,
                  include_flf: bool) -> FoldPrediction:
    wkey = _window_key(windows.window_s)
    y = np.where(windows.labels(cfg.target) == 1, 1.0, -1.0)
    counts = np.bincount(windows.labels(cfg.target)[train], minlength=3)
    majority = 1 if counts[1] >= counts[2] else 2
    if counts[1] == 0 or counts[2] == 0:
        return FoldPrediction(subject, rep, fold, test, degenerate=True,
                              majority_class=majority)
    matrices = {"eeg": windows.eeg, "music": windows.music,
                "flf": np.hstack([windows.eeg, windows.music])}
    probs: dict[str, np.ndarray] = {}
    unconverged = False
    for role in _fold_roles(cfg, include_flf):
        x_train, x_test = _normalized(windows, cfg, matrices[role], train, test)
        model = svm.train_svm(
            x_train, y[train], box_c=cfg.box_c, kernel_scale=cfg.kernel_scale,
            seed=derive_seed(cfg.seed, "svm", cfg.target, wkey, subject, rep, fold, role),
        )
        unconverged = unconverged or not model.converged
        calib = svm.fit_calibration(svm.decision_values(model, x_train), y[train])
        probs[role] = svm.predict_proba(model, calib, x_test)
    return FoldPrediction(
        subject, rep, fold, test,
        p_eeg=probs["eeg"], p_music=probs["music"], p_flf=probs.get("flf"),
        unconverged=unconverged,
    )


def compute_predictions(windows: WindowedDataset, cfg: CvConfig,
                        include_flf: bool = False, jobs: int = 1) -> PredictionBundle:
    """Train all per-fold classifiers and collect calibrated test probabilities."""
    if windows.n_windows == 0:
        raise EmptyInput("no windows to evaluate")
    tasks = [
        (subject, rep, fold, train, test)
        for rep in range(cfg.repetitions)
        for subject, fold, train, test in _split_indexes(windows, cfg, rep)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            preds = list(pool.map(
                _predict_fold_task,
                [(windows, cfg, s, r, f, tr, te, include_flf)
                 for s, r, f, tr, te in tasks],
                chunksize=max(1, len(tasks) // (4 * jobs)),
            ))
    else:
        preds = [_predict_fold(windows, cfg, s, r, f, tr, te, include_flf)
                 for s, r, f, tr, te in tasks]
    return PredictionBundle(windows=windows, cfg=cfg, folds=tuple(preds),
                            has_flf=include_flf)


def _predict_fold_task(args) -> FoldPrediction:
    return _predict_fold(*args)


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class SubjectSummary:
    subject: str
    accuracy: float
    mcc: float
    chance_level: float


@dataclass(frozen=True)
class RepetitionSummary:
    repetition: int
    accuracy: float
    mcc: float


@dataclass(frozen=True)
class EvaluationReport:
    protocol: str
    target: str
    modality: str
    window_s: float
    alpha: float | None
    accuracy_mean: float
    accuracy_std: float
    mcc_mean: float
    mcc_std: float
    chance_level_mean: float
    chance_level_std: float
    per_subject: tuple[SubjectSummary, ...]
    per_repetition: tuple[RepetitionSummary, ...]
    flags: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "target": self.target,
            "modality": self.modality,
            "window_s": self.window_s,
            "alpha": self.alpha,
            "accuracy_mean": self.accuracy_mean,
            "accuracy_std": self.accuracy_std,
            "mcc_mean": self.mcc_mean,
            "mcc_std": self.mcc_std,
            "chance_level_mean": self.chance_level_mean,
            "chance_level_std": self.chance_level_std,
            "per_subject": [
                {"subject": s.subject, "accuracy": s.accuracy, "mcc": s.mcc,
                 "chance_level": s.chance_level}
                for s in self.per_subject
            ],
            "per_repetition": [
                {"repetition": r.repetition, "accuracy": r.accuracy, "mcc": r.mcc}
                for r in self.per_repetition
            ],
            "flags": list(self.flags),
        }


def _std(values: np.ndarray) -> float:
    return float(np.std(values, ddof=1)) if len(values) > 1 else 0.0


def _modality_probs(pred: FoldPrediction, modality: str, alpha: float | None) -> np.ndarray:
    if modality == "EEG":
        return pred.p_eeg
    if modality == "MF":
        return pred.p_music
    if modality == "DLF":
        return fuse_probabilities(pred.p_eeg, pred.p_music, alpha)
    if modality == "FLF":
        if pred.p_flf is None:
            raise ValueError("bundle was computed without feature-level fusion")
        return pred.p_flf
    raise ValueError(f"unknown modality {modality!r}")


def evaluate_cell(bundle: PredictionBundle, modality: str,
                  alpha: float | None = None) -> EvaluationReport:
    """Score one (modality, alpha) cell from precomputed fold probabilities."""
    windows, cfg = bundle.windows, bundle.cfg
    wkey = _window_key(windows.window_s)
    labels = windows.labels(cfg.target)
    subjects = windows.subject_list()
    subj_arr = np.asarray(windows.subjects)
    flags: set[str] = set()

    by_rep_subject: dict[tuple[int, str], list[FoldPrediction]] = {}
    for pred in bundle.folds:
        by_rep_subject.setdefault((pred.rep, pred.subject), []).append(pred)

    acc = np.zeros((cfg.repetitions, len(subjects)))
    mcc_vals = np.zeros_like(acc)
    for rep in range(cfg.repetitions):
        for si, s in enumerate(subjects):
            s_idx = np.nonzero(subj_arr == s)[0]
            preds_here = by_rep_subject.get((rep, s), [])
            if any(p.degenerate for p in preds_here):
                flags.add("degenerate_fold")
                acc[rep, si] = chance_level(labels[s_idx])
                mcc_vals[rep, si] = 0.0
                continue
            if any(p.unconverged for p in preds_here):
                flags.add("unconverged_svm")
            predicted = np.zeros(windows.n_windows, dtype=int)
            for p in preds_here:
                probs = _modality_probs(p, modality, alpha)
                cls = np.where(probs > 0.5, 1, np.where(probs < 0.5, 2, 0))
                for ti in np.nonzero(cls == 0)[0]:
                    widx = int(p.test_idx[ti])
                    tie_seed = derive_seed(cfg.seed, "decide", cfg.target, wkey, rep, widx)
                    cls[ti] = 1 if np.random.default_rng(tie_seed).random() < 0.5 else 2
                predicted[p.test_idx] = cls
            cm = confusion_from_predictions(labels[s_idx], predicted[s_idx])
            acc[rep, si] = accuracy(cm)
            mcc_vals[rep, si] = mcc(cm)

    rep_acc = acc.mean(axis=1)
    rep_mcc = mcc_vals.mean(axis=1)
    subj_acc = acc.mean(axis=0)
    subj_mcc = mcc_vals.mean(axis=0)
    chances = np.array([chance_level(labels[subj_arr == s]) for s in subjects])

    return EvaluationReport(
        protocol=cfg.protocol,
        target=cfg.target,
        modality=modality,
        window_s=windows.window_s,
        alpha=alpha,
        accuracy_mean=float(rep_acc.mean()),
        accuracy_std=_std(subj_acc),
        mcc_mean=float(rep_mcc.mean()),
        mcc_std=_std(subj_mcc),
        chance_level_mean=float(chances.mean()),
        chance_level_std=_std(chances),
        per_subject=tuple(
            SubjectSummary(s, float(subj_acc[i]), float(subj_mcc[i]), float(chances[i]))
            for i, s in enumerate(subjects)
        ),
        per_repetition=tuple(
            RepetitionSummary(r, float(rep_acc[r]), float(rep_mcc[r]))
            for r in range(cfg.repetitions)
        ),
        flags=tuple(sorted(flags)),
    )


def chance_report(windows: WindowedDataset, cfg: CvConfig) -> EvaluationReport:
    """Majority-class baseline in report form; identical for every modality."""
    labels = windows.labels(cfg.target)
    subj_arr = np.asarray(windows.subjects)
    subjects = windows.subject_list()
    chances = np.array([chance_level(labels[subj_arr == s]) for s in subjects])
    return EvaluationReport(
        protocol=cfg.protocol,
        target=cfg.target,
        modality="Chance",
        window_s=windows.window_s,
        alpha=None,
        accuracy_mean=float(chances.mean()),
        accuracy_std=_std(chances),
        mcc_mean=0.0,
        mcc_std=0.0,
        chance_level_mean=float(chances.mean()),
        chance_level_std=_std(chances),
        per_subject=tuple(
            SubjectSummary(s, float(chances[i]), 0.0, float(chances[i]))
            for i, s in enumerate(subjects)
        ),
        per_repetition=tuple(
            RepetitionSummary(r, float(chances.mean()), 0.0)
            for r in range(cfg.repetitions)
        ),
    )


def run_protocol(windows: WindowedDataset, cfg: CvConfig, jobs: int = 1) -> EvaluationReport:
    """Full protocol for one configuration cell (train, calibrate, fuse, score)."""
    bundle = compute_predictions(windows, cfg, include_flf=(cfg.modality == "FLF"),
                                 jobs=jobs)
    alpha = cfg.alpha if cfg.modality == "DLF" else None
    return evaluate_cell(bundle, cfg.modality, alpha)


# ---------------------------------------------------------------------------
# sweeps

@dataclass(frozen=True)
class SweepTable:
    kind: str  # "windows" or "alpha"
    protocol: str
    axis: tuple
    columns: tuple[str, ...]
    targets: tuple[str, ...]
    cells: dict = field(default_factory=dict)  # (axis value, column, target) -> report

    def cell(self, axis_value, column: str, target: str) -> EvaluationReport:
        return self.cells[(axis_value, column, target)]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "protocol": self.protocol,
            "axis": list(self.axis),
            "columns": list(self.columns),
            "targets": list(self.targets),
            "cells": {
                _cell_key(k): report.to_dict() for k, report in self.cells.items()
            },
        }


def _axis_text(value) -> str:
    return f"{value:.3f}" if isinstance(value, float) else str(value)


def _cell_key(key: tuple) -> str:
    axis_value, column, target = key
    return f"{_axis_text(axis_value)}|{column}|{target}"


def _window_group(windows: WindowedDataset, cfg: CvConfig, target: str) -> dict:
    """All five Table-style columns for one (window size, target) pair."""
    cfg_t = replace(cfg, window_s=windows.window_s, target=target)
    bundle = compute_predictions(windows, cfg_t)
    return {
        "DLF_EEG": evaluate_cell(bundle, "DLF", ALPHA_DLF_EEG),
        "DLF_MF": evaluate_cell(bundle, "DLF", ALPHA_DLF_MF),
        "EEG": evaluate_cell(bundle, "EEG"),
        "MF": evaluate_cell(bundle, "MF"),
        "Chance": chance_report(windows, cfg_t),
    }


def _window_group_task(args) -> tuple[tuple, dict]:
    (window_s, target), windows, cfg = args
    return (window_s, target), _window_group(windows, cfg, target)


def sweep_windows(windows_by_size, cfg: CvConfig, jobs: int = 1,
                  sizes=WINDOW_SIZES_S) -> SweepTable:
    """The full window-size grid: sizes x five columns x two targets.

    windows_by_size is a mapping or callable giving the WindowedDataset for
    each size. Grid points are independent jobs; their seeds depend only on
    their coordinates, so any execution order gives the same table.
    """
    get = windows_by_size.__getitem__ if hasattr(windows_by_size, "__getitem__") \
        else windows_by_size
    points = [(w, t) for w in sizes for t in TARGETS]
    tasks = [((w, t), get(w), cfg) for w, t in points]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            groups = dict(pool.map(_window_group_task, tasks))
    else:
        groups = dict(map(_window_group_task, tasks))
    cells = {
        (w, column, t): groups[(w, t)][column]
        for w, t in points
        for column in WINDOW_SWEEP_COLUMNS
    }
    return SweepTable(
        kind="windows", protocol=cfg.protocol, axis=tuple(sizes),
        columns=WINDOW_SWEEP_COLUMNS, targets=TARGETS, cells=cells,
    )


def sweep_alpha(windows: WindowedDataset, cfg: CvConfig, jobs: int = 1) -> SweepTable:
    """41-point alpha grid at a fixed window size, per target.

    The per-fold classifiers are shared across all alpha cells, so the alpha
    endpoints are exact re-reads of the unimodal predictions.
    """
    cells = {}
    for target in TARGETS:
        cfg_t = replace(cfg, window_s=windows.window_s, target=target)
        bundle = compute_predictions(windows, cfg_t, jobs=jobs)
        for alpha in ALPHA_GRID:
            cells[(alpha, "DLF", target)] = evaluate_cell(bundle, "DLF", alpha)
    return SweepTable(
        kind="alpha", protocol=cfg.protocol, axis=ALPHA_GRID,
        columns=("DLF",), targets=TARGETS, cells=cells,
    )


def report_from_dict(d: dict) -> EvaluationReport:
    return EvaluationReport(
        protocol=d["protocol"],
        target=d["target"],
        modality=d["modality"],
        window_s=d["window_s"],
        alpha=d["alpha"],
        accuracy_mean=d["accuracy_mean"],
        accuracy_std=d["accuracy_std"],
        mcc_mean=d["mcc_mean"],
        mcc_std=d["mcc_std"],
        chance_level_mean=d["chance_level_mean"],
        chance_level_std=d["chance_level_std"],
        per_subject=tuple(
            SubjectSummary(s["subject"], s["accuracy"], s["mcc"], s["chance_level"])
            for s in d["per_subject"]
        ),
        per_repetition=tuple(
            RepetitionSummary(r["repetition"], r["accuracy"], r["mcc"])
            for r in d["per_repetition"]
        ),
        flags=tuple(d["flags"]),
    )


def sweep_table_from_dict(d: dict) -> SweepTable:
    axis = tuple(d["axis"])
    by_text = {_axis_text(a): a for a in axis}
    cells = {}
    for key, rd in d["cells"].items():
        axis_text, column, target = key.split("|")
        cells[(by_text[axis_text], column, target)] = report_from_dict(rd)
    return SweepTable(
        kind=d["kind"], protocol=d["protocol"], axis=axis,
        columns=tuple(d["columns"]), targets=tuple(d["targets"]), cells=cells,
    )


# ---------------------------------------------------------------------------
# rendering

def render_window_table(table: SweepTable, target: str) -> str:
    """Text table shaped like the published layout: modality rows, window columns."""
    header = ["Window size (s)"] + [str(w) for w in table.axis]
    rows = [header]
    for column in table.columns:
        label = {
            "DLF_EEG": f"DLF_EEG (a={ALPHA_DLF_EEG})",
            "DLF_MF": f"DLF_MF (a={ALPHA_DLF_MF})",
        }.get(column, column)
        row = [label]
        for w in table.axis:
            r = table.cell(w, column, target)
            row.append(f"{r.accuracy_mean:.2f} ({r.accuracy_std:.2f})")
        rows.append(row)
    widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
    lines = [f"{table.protocol} / {target}: accuracy mean (std) in %"]
    for r in rows:
        lines.append("  ".join(cell.ljust(widths[c]) for c, cell in enumerate(r)))
    return "\n".join(lines) + "\n"


def render_alpha_series(table: SweepTable, target: str) -> str:
    lines = [f"{table.protocol} / {target}: alpha sweep"]
    lines.append("alpha  accuracy_mean  accuracy_std  mcc_mean  mcc_std")
    for alpha in table.axis:
        r = table.cell(alpha, "DLF", target)
        lines.append(
            f"{alpha:.3f}  {r.accuracy_mean:.4f}  {r.accuracy_std:.4f}  "
            f"{r.mcc_mean:.4f}  {r.mcc_std:.4f}"
        )
    return "\n".join(lines) + "\n"
