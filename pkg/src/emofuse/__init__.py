"""Continuous music-emotion recognition from EEG and musical descriptors.

Pipeline: windowed trials -> Higuchi fractal-dimension EEG features and 37
musical descriptors -> per-modality RBF-SVM classifiers with calibrated
probabilities -> decision-level fusion -> cross-validated evaluation sweeps.
"""

from .dataset import (
    ASYMMETRY_PAIRS,
    CHANNELS,
    AnalysisWindow,
    AnnotationStream,
    AudioSignal,
    DatasetManifest,
    MultichannelSignal,
    Trial,
    TrialRef,
    WindowLabel,
    label_window,
    load_annotations,
    load_eeg,
    load_manifest,
    load_trial,
    load_wav,
    resample_annotations,
    segment_trial,
    segment_windows,
    window_slice,
)
from .eeg_features import (
    EEG_FEATURE_NAMES,
    EegFeatureConfig,
    EegFeatureVector,
    bandpass_filter,
    extract_eeg_features,
    higuchi_fd,
)
from .evaluation import (
    ALPHA_GRID,
    WINDOW_SIZES_S,
    ConfusionMatrix,
    CvConfig,
    EvaluationReport,
    SweepTable,
    WindowedDataset,
    accuracy,
    chance_level,
    confusion_from_predictions,
    derive_seed,
    leave_one_subject_out,
    mcc,
    minmax_normalize,
    run_protocol,
    stratified_kfold,
    sweep_alpha,
    sweep_windows,
)
from .extraction import extract_dataset, extract_trial
from .fusion import (
    ClassProbabilities,
    FusionConfig,
    decide,
    fuse_decision,
    fuse_features,
)
from .music_features import (
    MUSIC_FEATURE_NAMES,
    FrameConfig,
    MusicFeatureVector,
    extract_music_features,
)
from .svm import (
    PlattCalibration,
    SvmModel,
    decision_value,
    fit_calibration,
    predict_proba,
    rbf_kernel,
    train_svm,
)
from .synth import SynthConfig, generate_dataset

__version__ = "0.1.0"
