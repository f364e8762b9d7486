"""The 37 windowed music descriptors and their frame-level building blocks."""

import numpy as np
import pytest

from emofuse.dataset import AudioSignal
from emofuse.errors import TooFewFrames, TooShort
from emofuse.music_features import (
    KK_MAJOR,
    KK_MINOR,
    MUSIC_FEATURE_NAMES,
    FrameConfig,
    analyze_frames,
    attack_features,
    chromagram,
    extract_music_features,
    hcdf_mean,
    key_clarity_mode,
    low_energy_rate,
    mfcc_mean,
    plomp_levelt_dissonance,
    rms_mean,
    roughness_mean,
    spectral_flux,
    tempo_estimate,
    zero_crossing_rate,
)

from oracles import key_mode_direct, mfcc_direct, plomp_levelt_direct

SR = 44100.0


def tone(f_hz, seconds=2.0, amp=0.5, sr=SR, phase=0.0):
    t = np.arange(int(seconds * sr)) / sr
    return AudioSignal(amp * np.sin(2 * np.pi * f_hz * t + phase), sr)


def hop_periodic_tone(m=16, seconds=2.0, amp=0.5, sr=SR, hop=1024):
    """Tone whose period divides the hop, so successive frames are identical."""
    return tone(m * sr / hop, seconds, amp, sr)


def silence(seconds=2.0, sr=SR):
    return AudioSignal(np.zeros(int(seconds * sr)), sr)


def noise(seconds=2.0, amp=0.5, sr=SR, seed=0):
    rng = np.random.default_rng(seed)
    return AudioSignal(amp * rng.uniform(-1, 1, int(seconds * sr)), sr)


def click_train(bpm, seconds=12.0, sr=SR, offset=3000):
    samples = np.zeros(int(seconds * sr))
    step = 60.0 / bpm * sr
    pos = float(offset)
    while pos < len(samples):
        samples[int(round(pos))] = 1.0
        pos += step
    return AudioSignal(samples, sr)


# Frame geometry chosen so the frame rate is exactly 6 per second: the
# autocorrelation lags for 120 and 90 BPM fall exactly on 3 and 4 hops.
TEMPO_CFG = FrameConfig(frame_len=8192, hop=7350)


# --- analyze_frames --------------------------------------------------------------

def test_frames_of_silence_are_zero():
    frames = analyze_frames(silence())
    assert np.all(frames.magnitudes == 0.0)
    assert np.all(frames.rms == 0.0)
    assert frames.magnitudes.shape[1] == 2048 // 2 + 1


def test_one_khz_peak_bin():
    frames = analyze_frames(tone(1000.0))
    assert np.all(np.argmax(frames.magnitudes, axis=1) == 46)


def test_input_shorter_than_frame_rejected():
    with pytest.raises(TooShort):
        analyze_frames(AudioSignal(np.zeros(1024), SR))


def test_frame_count_and_times():
    frames = analyze_frames(AudioSignal(np.zeros(2048 + 3 * 1024), SR))
    assert frames.n_frames == 4
    assert np.allclose(frames.times_s, np.arange(4) * 1024 / SR)


# --- rms -------------------------------------------------------------------------

def test_rms_of_sine():
    assert rms_mean(analyze_frames(tone(441.0, amp=0.5))) == pytest.approx(
        0.5 / np.sqrt(2), abs=1e-3)


def test_rms_of_silence_and_constant():
    assert rms_mean(analyze_frames(silence())) == 0.0
    ones = AudioSignal(np.ones(int(2 * SR)), SR)
    assert rms_mean(analyze_frames(ones)) == pytest.approx(1.0, abs=1e-12)


# --- zero crossing rate -------------------------------------------------------------

def test_zcr_of_sine():
    audio = tone(441.0, amp=0.5, phase=0.1)
    assert zero_crossing_rate(audio) == pytest.approx(2 * 441 / SR, rel=0.05)


def test_zcr_constant_positive_is_zero():
    audio = AudioSignal(np.full(int(2 * SR), 0.25), SR)
    assert zero_crossing_rate(audio) == 0.0


def test_zcr_alternating_signs_near_one():
    samples = np.ones(int(SR)) * 0.5
    samples[1::2] = -0.5
    assert zero_crossing_rate(AudioSignal(samples, SR)) > 0.99


# --- low energy rate -------------------------------------------------------------

def test_low_energy_all_equal_frames():
    assert low_energy_rate(analyze_frames(AudioSignal(np.ones(20480), SR))) == 0.0


def test_low_energy_half_and_half():
    cfg = FrameConfig(frame_len=2048, hop=2048)
    samples = np.concatenate([np.ones(2048 * 5), np.zeros(2048 * 5)])
    assert low_energy_rate(analyze_frames(AudioSignal(samples, SR), cfg)) == 0.5


def test_low_energy_one_loud_frame():
    cfg = FrameConfig(frame_len=2048, hop=2048)
    samples = np.zeros(2048 * 10)
    samples[3 * 2048:4 * 2048] = 1.0
    assert low_energy_rate(analyze_frames(AudioSignal(samples, SR), cfg)) == 0.9


# --- spectral flux ------------------------------------------------------------------

def test_flux_of_stationary_tone_negligible():
    frames = analyze_frames(hop_periodic_tone())
    assert spectral_flux(frames) < 1e-3 * frames.magnitudes.max()


def test_flux_peaks_at_an_onset():
    samples = np.concatenate([
        np.zeros(int(SR)), tone(441.0, seconds=1.0).samples])
    frames = analyze_frames(AudioSignal(samples, SR))
    dists = np.linalg.norm(np.diff(frames.magnitudes, axis=0), axis=1)
    onset_frame = int(SR) // 1024
    assert onset_frame - 2 <= np.argmax(dists) <= onset_frame + 2
    assert spectral_flux(frames) > 0


def test_flux_single_frame_is_zero():
    frames = analyze_frames(AudioSignal(np.random.default_rng(0).uniform(-1, 1, 2048), SR))
    assert frames.n_frames == 1
    assert spectral_flux(frames) == 0.0


# --- mfcc ------------------------------------------------------------------------

def test_mfcc_gain_invariance():
    quiet = noise(amp=0.2, seed=1)
    loud = AudioSignal(2.0 * quiet.samples, SR)
    m1, _ = mfcc_mean(analyze_frames(quiet))
    m2, _ = mfcc_mean(analyze_frames(loud))
    assert len(m1) == 13
    assert np.max(np.abs(m1 - m2)) < 1e-6


def test_dmfcc_of_stationary_tone_is_zero():
    _, d = mfcc_mean(analyze_frames(hop_periodic_tone()))
    assert np.max(np.abs(d)) < 1e-6


def test_mfcc_separates_noise_from_tone_and_matches_direct_pipeline():
    tone_audio = hop_periodic_tone()
    noise_audio = noise(seed=2)
    m_tone, d_tone = mfcc_mean(analyze_frames(tone_audio))
    m_noise, _ = mfcc_mean(analyze_frames(noise_audio))
    assert abs(m_tone[0] - m_noise[0]) > 0.1

    o_tone, o_dtone = mfcc_direct(tone_audio.samples, SR)
    o_noise, _ = mfcc_direct(noise_audio.samples, SR)
    assert abs(o_tone[0] - o_noise[0]) > 0.1
    assert np.max(np.abs(m_tone - o_tone)) < 1e-8
    assert np.max(np.abs(m_noise - o_noise)) < 1e-8
    assert np.max(np.abs(d_tone - o_dtone)) < 1e-8


def test_mfcc_needs_two_frames():
    with pytest.raises(TooFewFrames):
        mfcc_mean(analyze_frames(AudioSignal(np.ones(2048), SR)))


# --- roughness ------------------------------------------------------------------------

def test_single_sine_roughness_zero():
    # bin-aligned frequency: one spectral peak, no pairs
    assert roughness_mean(analyze_frames(tone(64 * SR / 2048))) == 0.0


def test_silence_roughness_zero():
    assert roughness_mean(analyze_frames(silence())) == 0.0


def test_narrow_interval_rougher_than_octave():
    cfg = FrameConfig(frame_len=16384, hop=8192)
    t = np.arange(int(2 * SR)) / SR
    pair = lambda f2: AudioSignal(
        0.4 * np.sin(2 * np.pi * 440 * t) + 0.4 * np.sin(2 * np.pi * f2 * t), SR)
    rough_narrow = roughness_mean(analyze_frames(pair(460.0), cfg))
    rough_octave = roughness_mean(analyze_frames(pair(880.0), cfg))
    assert rough_narrow > rough_octave
    assert plomp_levelt_direct(440, 460) > plomp_levelt_direct(440, 880)


def test_dissonance_curve_matches_direct_formula():
    rng = np.random.default_rng(3)
    for _ in range(50):
        f1, f2 = rng.uniform(50, 2000, 2)
        a1, a2 = rng.uniform(0.1, 1.0, 2)
        assert plomp_levelt_dissonance(f1, f2, a1, a2) == pytest.approx(
            plomp_levelt_direct(f1, f2, a1, a2), rel=1e-12)


# --- tempo ------------------------------------------------------------------------

def test_tempo_120_bpm():
    bpm, flagged = tempo_estimate(click_train(120.0), TEMPO_CFG)
    assert not flagged
    assert bpm == pytest.approx(120.0, abs=3.0)


def test_tempo_90_bpm():
    bpm, flagged = tempo_estimate(click_train(90.0), TEMPO_CFG)
    assert not flagged
    assert bpm == pytest.approx(90.0, abs=3.0)


def test_tempo_of_silence_flagged_neutral():
    bpm, flagged = tempo_estimate(silence(12.0), TEMPO_CFG)
    assert flagged
    assert bpm == 120.0


def test_tempo_shift_robustness():
    base = click_train(120.0)
    shifted = AudioSignal(np.roll(base.samples, 4321), SR)
    bpm, _ = tempo_estimate(shifted, TEMPO_CFG)
    assert bpm == pytest.approx(120.0, abs=3.0)


def test_tempo_window_too_short():
    with pytest.raises(TooShort):
        tempo_estimate(tone(440.0, seconds=1.0))


# --- attack ------------------------------------------------------------------------

def fade_in_tone(ramp_s=0.05, seconds=2.0):
    f = 16 * SR / 1024
    t = np.arange(int(seconds * SR)) / SR
    carrier = 0.8 * np.sin(2 * np.pi * f * t)
    n_ramp = int(ramp_s * SR)
    env = np.ones(len(t))
    env[:n_ramp] = np.linspace(0.0, 1.0, n_ramp, endpoint=False)
    return AudioSignal(carrier * env, SR)


def test_attack_time_of_linear_fade():
    attack_time, slope, flagged = attack_features(fade_in_tone())
    assert not flagged
    assert attack_time == pytest.approx(0.05, abs=0.025)
    assert slope > 0


def test_attack_of_silence_flagged():
    attack_time, slope, flagged = attack_features(silence())
    assert flagged
    assert (attack_time, slope) == (0.0, 0.0)


def test_two_identical_onsets_average_to_single_onset_values():
    # hop-aligned event with zero padding so both onsets see identical frames
    hop = 1024
    event = fade_in_tone(seconds=2.0).samples[: 84 * hop].copy()
    event[-4096:] *= np.linspace(1.0, 0.0, 4096)  # release back to silence
    pad = np.zeros(8 * hop)
    single = np.concatenate([pad, event, pad])
    double = np.concatenate([pad, event, pad, event, pad])
    t1, s1, f1 = attack_features(AudioSignal(single, SR))
    t2, s2, f2 = attack_features(AudioSignal(double, SR))
    assert not f1 and not f2
    assert t2 == pytest.approx(t1, abs=1e-9)
    assert s2 == pytest.approx(s1, rel=1e-9)


# --- chromagram ------------------------------------------------------------------------

def test_chroma_concentrates_on_pitch_class_a():
    chroma = chromagram(analyze_frames(tone(440.0)))
    mean = chroma.mean(axis=0)
    assert mean[0] >= 0.8 * mean.sum()


def test_chroma_of_silence_is_zero():
    chroma = chromagram(analyze_frames(silence()))
    assert np.all(chroma == 0.0)


def test_chroma_octave_equivalence():
    t = np.arange(int(2 * SR)) / SR
    audio = AudioSignal(
        0.4 * np.sin(2 * np.pi * 440 * t) + 0.4 * np.sin(2 * np.pi * 880 * t), SR)
    mean = chromagram(analyze_frames(audio)).mean(axis=0)
    assert mean[0] >= 0.8 * mean.sum()


# --- key clarity and mode ------------------------------------------------------------

def c_major_chroma():
    # K-K profiles are tonic-relative; classes here are A-based, C sits at 3.
    return np.roll(KK_MAJOR, 3) / np.roll(KK_MAJOR, 3).sum()


def test_c_major_profile_self_correlation():
    clarity, mode, flagged = key_clarity_mode(c_major_chroma())
    assert not flagged
    assert clarity == pytest.approx(1.0, abs=1e-9)
    assert mode > 0


def test_a_minor_profile_is_minor():
    chroma = KK_MINOR / KK_MINOR.sum()
    clarity, mode, flagged = key_clarity_mode(chroma)
    o_clarity, o_mode = key_mode_direct(chroma)
    assert not flagged
    assert mode < 0
    assert clarity == pytest.approx(o_clarity, abs=1e-12)
    assert mode == pytest.approx(o_mode, abs=1e-12)


def test_uniform_chroma_flagged_flat():
    clarity, mode, flagged = key_clarity_mode(np.full(12, 1 / 12))
    assert flagged
    assert (clarity, mode) == (0.0, 0.0)


# --- hcdf ------------------------------------------------------------------------

def triad_chroma(classes):
    v = np.zeros(12)
    v[list(classes)] = 1 / 3
    return v


C_MAJOR_TRIAD = triad_chroma([3, 7, 10])   # C, E, G in A-based classes
G_MAJOR_TRIAD = triad_chroma([10, 2, 5])   # G, B, D


def test_constant_chroma_hcdf_zero():
    assert hcdf_mean(np.tile(C_MAJOR_TRIAD, (10, 1))) == 0.0


def test_chord_change_hcdf_positive():
    chroma = np.vstack([np.tile(C_MAJOR_TRIAD, (5, 1)), np.tile(G_MAJOR_TRIAD, (5, 1))])
    assert hcdf_mean(chroma) > 0.0


def test_hcdf_needs_three_frames():
    assert hcdf_mean(np.vstack([C_MAJOR_TRIAD, G_MAJOR_TRIAD])) == 0.0


# --- full vector ------------------------------------------------------------------------

def test_any_valid_window_yields_37_finite_values():
    vec = extract_music_features(noise(seed=4))
    assert len(vec.values) == 37
    assert np.all(np.isfinite(vec.values))
    assert len(MUSIC_FEATURE_NAMES) == 37


def test_silence_window_neutral_values_and_flags():
    vec = extract_music_features(silence())
    assert vec.rms == 0.0
    assert vec.zero_cross_rate == 0.0
    assert vec.roughness == 0.0
    assert vec.spectral_flux == 0.0
    assert vec.tempo_bpm == 120.0
    assert (vec.attack_time_s, vec.attack_slope) == (0.0, 0.0)
    assert (vec.key_clarity, vec.mode, vec.hcdf) == (0.0, 0.0, 0.0)
    assert {"no_onsets_tempo", "no_onsets_attack", "flat_chroma"} <= set(vec.flags)


def test_extraction_deterministic():
    audio = noise(seed=5)
    v1 = extract_music_features(audio)
    v2 = extract_music_features(audio)
    assert np.array_equal(v1.values, v2.values)
    assert v1.flags == v2.flags


def test_gain_behavior_of_full_vector():
    base = noise(amp=0.3, seed=6)
    doubled = AudioSignal(2.0 * base.samples, SR)
    v1 = extract_music_features(base)
    v2 = extract_music_features(doubled)
    assert v2.rms == pytest.approx(2.0 * v1.rms, rel=1e-9)
    assert v2.zero_cross_rate == v1.zero_cross_rate
    assert np.max(np.abs(v2.mfcc - v1.mfcc)) < 1e-6
    assert np.max(np.abs(v2.dmfcc - v1.dmfcc)) < 1e-6
    assert v2.key_clarity == pytest.approx(v1.key_clarity, abs=1e-9)
    assert v2.mode == pytest.approx(v1.mode, abs=1e-9)
    assert v2.hcdf == pytest.approx(v1.hcdf, abs=1e-9)


def test_range_invariants_on_random_noise_windows():
    sr = 8000.0
    n = int(2 * sr)
    rng = np.random.default_rng(7)
    for _ in range(1000):
        vec = extract_music_features(AudioSignal(rng.uniform(-0.9, 0.9, n), sr))
        assert vec.rms >= 0
        assert 40.0 <= vec.tempo_bpm <= 200.0
        assert 0.0 <= vec.zero_cross_rate <= 1.0
        assert 0.0 <= vec.low_energy_rate <= 1.0
        assert -1.0 <= vec.key_clarity <= 1.0
        assert vec.spectral_flux >= 0
        assert vec.hcdf >= 0
        assert np.all(np.isfinite(vec.values))
