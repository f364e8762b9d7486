"""Musical descriptors from windowed audio: dynamics, rhythm, timbre, tonal.

All 37 features are means over STFT analysis frames within one window:
RMS; tempo, attack time, attack slope; roughness, MFCC 1-13, dMFCC 1-13,
zero-crossing rate, low-energy rate, spectral flux; key clarity, mode, HCDF.
Degenerate windows (no onsets, flat chroma) yield flagged neutral values
instead of errors so whole-trial extraction never aborts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct
from scipy.signal import get_window

from .dataset import AudioSignal
from .errors import TooFewFrames, TooShort

N_MEL_FILTERS = 40
MEL_LOW_HZ = 20.0
N_MFCC = 13
LOG_ENERGY_FLOOR = 1e-10

CHROMA_LOW_HZ = 55.0
CHROMA_HIGH_HZ = 2000.0

PEAK_REL_THRESHOLD = 0.01  # spectral peaks must exceed 1% of the frame max

BPM_MIN = 40.0
BPM_MAX = 200.0
NEUTRAL_BPM = 120.0

MIN_WINDOW_S = 2.0

# Krumhansl-Kessler tonal hierarchy profiles (probe-tone ratings), tonic first.
KK_MAJOR = np.array([6.35, 2.23, 3.48, 2.33, 4.38, 4.09, 2.52, 5.19, 2.39, 3.66, 2.29, 2.88])
KK_MINOR = np.array([6.33, 2.68, 3.52, 5.38, 2.60, 3.53, 2.54, 4.75, 3.98, 2.69, 3.34, 3.17])

MUSIC_FEATURE_NAMES = tuple(
    ["rms", "tempo_bpm", "attack_time_s", "attack_slope", "roughness"]
    + [f"mfcc_{i:02d}" for i in range(1, N_MFCC + 1)]
    + [f"dmfcc_{i:02d}" for i in range(1, N_MFCC + 1)]
    + ["zero_cross_rate", "low_energy_rate", "spectral_flux", "key_clarity", "mode", "hcdf"]
)


@dataclass(frozen=True)
class FrameConfig:
    frame_len: int = 2048
    hop: int = 1024

    def __post_init__(self):
        if not (0 < self.hop <= self.frame_len):
            raise ValueError("need 0 < hop <= frame_len")
        if self.frame_len & (self.frame_len - 1):
            raise ValueError("frame_len must be a power of two")


@dataclass(frozen=True)
class FrameSequence:
    magnitudes: np.ndarray  # frames x bins
    rms: np.ndarray         # per-frame RMS of the raw (unwindowed) samples
    times_s: np.ndarray     # frame start times
    sample_rate_hz: float
    cfg: FrameConfig

    @property
    def n_frames(self) -> int:
        return self.magnitudes.shape[0]

    @property
    def frame_rate_hz(self) -> float:
        return self.sample_rate_hz / self.cfg.hop

    def bin_freqs_hz(self) -> np.ndarray:
        return np.arange(self.magnitudes.shape[1]) * self.sample_rate_hz / self.cfg.frame_len


@dataclass(frozen=True)
class MusicFeatureVector:
    rms: float
    tempo_bpm: float
    attack_time_s: float
    attack_slope: float
    roughness: float
    mfcc: np.ndarray
    dmfcc: np.ndarray
    zero_cross_rate: float
    low_energy_rate: float
    spectral_flux: float
    key_clarity: float
    mode: float
    hcdf: float
    flags: tuple[str, ...] = ()

    @property
    def values(self) -> np.ndarray:
        return np.concatenate([
            [self.rms, self.tempo_bpm, self.attack_time_s, self.attack_slope, self.roughness],
            self.mfcc,
            self.dmfcc,
            [self.zero_cross_rate, self.low_energy_rate, self.spectral_flux,
             self.key_clarity, self.mode, self.hcdf],
        ])


def analyze_frames(audio: AudioSignal, cfg: FrameConfig | None = None) -> FrameSequence:
    """Hann-windowed magnitude STFT plus per-frame RMS over raw samples."""
    cfg = cfg or FrameConfig()
    x = np.asarray(audio.samples, dtype=np.float64)
    if len(x) < cfg.frame_len:
        raise TooShort(f"need at least {cfg.frame_len} samples, got {len(x)}")
    n_frames = (len(x) - cfg.frame_len) // cfg.hop + 1
    starts = np.arange(n_frames) * cfg.hop
    idx = starts[:, None] + np.arange(cfg.frame_len)[None, :]
    frames = x[idx]
    window = get_window("hann", cfg.frame_len, fftbins=True)
    mags = np.abs(np.fft.rfft(frames * window, axis=1))
    rms = np.sqrt(np.mean(frames**2, axis=1))
    return FrameSequence(
        magnitudes=mags,
        rms=rms,
        times_s=starts / audio.sample_rate_hz,
        sample_rate_hz=audio.sample_rate_hz,
        cfg=cfg,
    )


def rms_mean(frames: FrameSequence) -> float:
    if frames.n_frames < 1:
        raise TooFewFrames("need at least one frame")
    return float(frames.rms.mean())


def zero_crossing_rate(audio: AudioSignal, cfg: FrameConfig | None = None) -> float:
    """Per frame: strict sign changes between consecutive samples / frame_len; mean over frames."""
    cfg = cfg or FrameConfig()
    x = np.asarray(audio.samples, dtype=np.float64)
    if len(x) < cfg.frame_len:
        raise TooShort(f"need at least {cfg.frame_len} samples, got {len(x)}")
    n_frames = (len(x) - cfg.frame_len) // cfg.hop + 1
    rates = np.empty(n_frames)
    for i in range(n_frames):
        frame = x[i * cfg.hop : i * cfg.hop + cfg.frame_len]
        rates[i] = np.count_nonzero(frame[:-1] * frame[1:] < 0) / cfg.frame_len
    return float(rates.mean())


def low_energy_rate(frames: FrameSequence) -> float:
    """Fraction of frames whose RMS is strictly below the window's mean frame RMS."""
    if frames.n_frames < 1:
        raise TooFewFrames("need at least one frame")
    return float(np.count_nonzero(frames.rms < frames.rms.mean()) / frames.n_frames)


def spectral_flux(frames: FrameSequence) -> float:
    """Mean Euclidean distance between consecutive magnitude spectra; 0 with a single frame."""
    if frames.n_frames < 2:
        return 0.0
    d = np.diff(frames.magnitudes, axis=0)
    return float(np.linalg.norm(d, axis=1).mean())


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_bins: int, frame_len: int, sample_rate_hz: float,
                   low_hz: float = MEL_LOW_HZ) -> np.ndarray:
    """Triangular mel filters on rFFT bins, each normalized to unit area in Hz."""
    high_hz = sample_rate_hz / 2.0
    edges_hz = _mel_to_hz(np.linspace(_hz_to_mel(low_hz), _hz_to_mel(high_hz), n_filters + 2))
    bin_hz = np.arange(n_bins) * sample_rate_hz / frame_len
    bank = np.zeros((n_filters, n_bins))
    for i in range(n_filters):
        lo, center, hi = edges_hz[i], edges_hz[i + 1], edges_hz[i + 2]
        up = (bin_hz - lo) / (center - lo)
        down = (hi - bin_hz) / (hi - center)
        bank[i] = np.maximum(0.0, np.minimum(up, down)) * 2.0 / (hi - lo)
    return bank


def mfcc_mean(frames: FrameSequence) -> tuple[np.ndarray, np.ndarray]:
    """Mean MFCC 1..13 and mean first-difference dMFCC over the window's frames.

    Per frame: mel band energies from the power spectrum, log with floor,
    orthonormal DCT-II keeping coefficients 1..13 (the gain-carrying 0th is
    dropped).
    """
    if frames.n_frames < 2:
        raise TooFewFrames("need at least two frames for the delta")
    bank = mel_filterbank(
        N_MEL_FILTERS, frames.magnitudes.shape[1], frames.cfg.frame_len, frames.sample_rate_hz
    )
    energies = frames.magnitudes**2 @ bank.T
    log_energies = np.log(np.maximum(energies, LOG_ENERGY_FLOOR))
    coeffs = dct(log_energies, type=2, norm="ortho", axis=1)[:, 1 : N_MFCC + 1]
    return coeffs.mean(axis=0), np.diff(coeffs, axis=0).mean(axis=0)


def _frame_peaks(mags: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indexes and magnitudes of strict local maxima above the relative threshold."""
    peak = (mags[1:-1] > mags[:-2]) & (mags[1:-1] > mags[2:])
    idx = np.nonzero(peak)[0] + 1
    if len(idx) == 0:
        return idx, mags[idx]
    keep = mags[idx] > PEAK_REL_THRESHOLD * mags.max()
    idx = idx[keep]
    return idx, mags[idx]


def plomp_levelt_dissonance(f1, f2, a1, a2):
    """Sensory dissonance of two partials (symmetric in the arguments)."""
    f_lo = np.minimum(f1, f2)
    df = np.abs(f1 - f2)
    s = 0.24 / (0.021 * f_lo + 19.0)
    return a1 * a2 * (np.exp(-3.5 * s * df) - np.exp(-5.75 * s * df))


def roughness_mean(frames: FrameSequence) -> float:
    """Plomp-Levelt dissonance summed over spectral peak pairs, averaged over frames."""
    bin_hz = frames.bin_freqs_hz()
    total = 0.0
    for mags in frames.magnitudes:
        idx, amps = _frame_peaks(mags)
        if len(idx) < 2:
            continue
        f = bin_hz[idx]
        d = plomp_levelt_dissonance(f[:, None], f[None, :], amps[:, None], amps[None, :])
        total += float(np.triu(d, k=1).sum())
    return total / frames.n_frames


def onset_strength(frames: FrameSequence) -> np.ndarray:
    """Half-wave-rectified spectral flux per consecutive frame pair."""
    d = np.diff(frames.magnitudes, axis=0)
    return np.maximum(d, 0.0).sum(axis=1)


def tempo_estimate(
    audio: AudioSignal, cfg: FrameConfig | None = None, neutral_bpm: float = NEUTRAL_BPM
) -> tuple[float, bool]:
    """Tempo in BPM from the autocorrelation of the onset-strength curve.

    Returns (bpm, flagged); a flat onset curve cannot carry a tempo and yields
    the neutral value with the flag set.
    """
    cfg = cfg or FrameConfig()
    if audio.duration_s < MIN_WINDOW_S:
        raise TooShort(f"tempo needs >= {MIN_WINDOW_S} s of audio")
    frames = analyze_frames(audio, cfg)
    onsets = onset_strength(frames)
    frame_rate = frames.frame_rate_hz
    lag_min = max(1, int(np.ceil(60.0 * frame_rate / BPM_MAX)))
    lag_max = int(np.floor(60.0 * frame_rate / BPM_MIN))
    lag_max = min(lag_max, len(onsets) - 1)
    if lag_max < lag_min:
        raise TooShort("onset curve too short for the tempo search range")
    if len(onsets) == 0 or np.all(onsets == onsets[0]):
        return neutral_bpm, True
    centered = onsets - onsets.mean()
    acf = np.array([
        float(np.dot(centered[: len(centered) - lag], centered[lag:]))
        for lag in range(lag_min, lag_max + 1)
    ])
    best_lag = lag_min + int(np.argmax(acf))
    return 60.0 * frame_rate / best_lag, False


def _onset_peak_indexes(onsets: np.ndarray) -> np.ndarray:
    """Local maxima of the onset curve above mean + 1 std (window ends included)."""
    if len(onsets) == 0:
        return np.empty(0, dtype=int)
    threshold = onsets.mean() + onsets.std()
    padded = np.concatenate([[-np.inf], onsets, [-np.inf]])
    peak = (padded[1:-1] > padded[:-2]) & (padded[1:-1] > padded[2:]) & (onsets > threshold)
    return np.nonzero(peak)[0]


def attack_features(
    audio: AudioSignal, cfg: FrameConfig | None = None
) -> tuple[float, float, bool]:
    """Mean attack time and slope over detected onsets; (0, 0, flagged) without onsets.

    For each onset the attack end is reached by climbing the RMS envelope
    while it strictly rises, and the attack start by walking back to the last
    local minimum before that peak.
    """
    cfg = cfg or FrameConfig()
    frames = analyze_frames(audio, cfg)
    env = frames.rms
    onsets = onset_strength(frames)
    hop_s = cfg.hop / audio.sample_rate_hz
    segments: list[tuple[int, int]] = []
    for p in _onset_peak_indexes(onsets):
        j_end = min(p + 1, len(env) - 1)  # onset p marks flux into frame p+1
        while j_end + 1 < len(env) and env[j_end + 1] > env[j_end]:
            j_end += 1
        j_start = j_end
        while j_start - 1 >= 0 and env[j_start - 1] < env[j_start]:
            j_start -= 1
        if j_end > j_start and (j_start, j_end) not in segments:
            segments.append((j_start, j_end))
    if not segments:
        return 0.0, 0.0, True
    times = np.array([(e - s) * hop_s for s, e in segments])
    slopes = np.array([(env[e] - env[s]) / ((e - s) * hop_s) for s, e in segments])
    return float(times.mean()), float(slopes.mean()), False


def chromagram(frames: FrameSequence) -> np.ndarray:
    """Per-frame 12-bin pitch-class energy (class 0 = A), unit-sum when nonzero.

    Spectral bin energies for frequencies in [55, 2000] Hz are accumulated at
    pitch class round(12*log2(f/440)) mod 12.
    """
    bin_hz = frames.bin_freqs_hz()
    in_range = (bin_hz >= CHROMA_LOW_HZ) & (bin_hz <= CHROMA_HIGH_HZ)
    classes = np.mod(np.round(12.0 * np.log2(bin_hz[in_range] / 440.0)).astype(int), 12)
    energies = frames.magnitudes[:, in_range] ** 2
    chroma = np.zeros((frames.n_frames, 12))
    for pc in range(12):
        sel = classes == pc
        if sel.any():
            chroma[:, pc] = energies[:, sel].sum(axis=1)
    sums = chroma.sum(axis=1, keepdims=True)
    nonzero = sums[:, 0] > 0
    chroma[nonzero] /= sums[nonzero]
    return chroma


def key_clarity_mode(mean_chroma: np.ndarray) -> tuple[float, float, bool]:
    """Correlate a mean chroma against the 24 rotated tonal-hierarchy profiles.

    Returns (key_clarity, mode, flat) where key_clarity is the maximum Pearson
    correlation, mode is max-major minus max-minor correlation, and flat marks
    a zero-variance chroma (neutral (0, 0) result).
    """
    c = np.asarray(mean_chroma, dtype=np.float64)
    if c.std() == 0.0:
        return 0.0, 0.0, True
    major = np.empty(12)
    minor = np.empty(12)
    for rot in range(12):
        major[rot] = np.corrcoef(c, np.roll(KK_MAJOR, rot))[0, 1]
        minor[rot] = np.corrcoef(c, np.roll(KK_MINOR, rot))[0, 1]
    return float(max(major.max(), minor.max())), float(major.max() - minor.max()), False


def _tonal_centroid_basis() -> np.ndarray:
    """6 x 12 projection onto the fifths / minor-third / major-third circles."""
    pc = np.arange(12)
    return np.vstack([
        np.sin(pc * 7.0 * np.pi / 6.0),
        np.cos(pc * 7.0 * np.pi / 6.0),
        np.sin(pc * 3.0 * np.pi / 2.0),
        np.cos(pc * 3.0 * np.pi / 2.0),
        0.5 * np.sin(pc * 2.0 * np.pi / 3.0),
        0.5 * np.cos(pc * 2.0 * np.pi / 3.0),
    ])


_TONAL_BASIS = _tonal_centroid_basis()


def hcdf_mean(chroma: np.ndarray) -> float:
    """Mean distance between the tonal centroids of each frame's neighbours.

    Fewer than 3 frames carry no harmonic change and return 0.
    """
    chroma = np.asarray(chroma, dtype=np.float64)
    if chroma.ndim != 2 or chroma.shape[0] < 3:
        return 0.0
    sums = chroma.sum(axis=1, keepdims=True)
    normed = np.where(sums > 0, chroma / np.where(sums > 0, sums, 1.0), 0.0)
    centroids = normed @ _TONAL_BASIS.T
    return float(np.linalg.norm(centroids[2:] - centroids[:-2], axis=1).mean())


def extract_music_features(
    audio: AudioSignal, cfg: FrameConfig | None = None
) -> MusicFeatureVector:
    """All 37 descriptors of one analysis window, in the fixed feature order."""
    cfg = cfg or FrameConfig()
    if audio.duration_s < MIN_WINDOW_S:
        raise TooShort(f"music features need >= {MIN_WINDOW_S} s windows")
    frames = analyze_frames(audio, cfg)
    flags: list[str] = []

    tempo, tempo_flagged = tempo_estimate(audio, cfg)
    if tempo_flagged:
        flags.append("no_onsets_tempo")
    attack_time, attack_slope, attack_flagged = attack_features(audio, cfg)
    if attack_flagged:
        flags.append("no_onsets_attack")
    mfcc, dmfcc = mfcc_mean(frames)
    chroma = chromagram(frames)
    key_clarity, mode, flat = key_clarity_mode(chroma.mean(axis=0))
    if flat:
        flags.append("flat_chroma")

    return MusicFeatureVector(
        rms=rms_mean(frames),
        tempo_bpm=tempo,
        attack_time_s=attack_time,
        attack_slope=attack_slope,
        roughness=roughness_mean(frames),
        mfcc=mfcc,
        dmfcc=dmfcc,
        zero_cross_rate=zero_crossing_rate(audio, cfg),
        low_energy_rate=low_energy_rate(frames),
        spectral_flux=spectral_flux(frames),
        key_clarity=key_clarity,
        mode=mode,
        hcdf=hcdf_mean(chroma),
        flags=tuple(flags),
    )
