"""Feature extraction pipeline: windowing, disk cache, and reload fidelity."""

import numpy as np
import pytest

from emofuse import dataset as ds
from emofuse import extraction as ex
from emofuse.eeg_features import EegFeatureConfig

from test_dataset import make_manifest, make_trial_files, write_annotations


@pytest.fixture()
def small_manifest(tmp_path):
    t1 = make_trial_files(tmp_path / "raw", "s01", "songA")
    t2 = make_trial_files(tmp_path / "raw", "s01", "songB")
    t3 = make_trial_files(tmp_path / "raw", "s02", "songA")
    return ds.load_manifest(make_manifest(tmp_path, [
        ("s01", "songA", *t1), ("s01", "songB", *t2), ("s02", "songA", *t3)]))


def test_extract_trial_shapes_and_labels(small_manifest):
    trial = ds.load_trial(small_manifest.all_trials()[0])
    tf = ex.extract_trial(trial, 2.0)
    assert tf.n_windows == 2  # 4 s trial, 2 s windows
    assert tf.eeg.shape == (2, 17)
    assert tf.music.shape == (2, 37)
    assert np.array_equal(tf.starts_s, [0.0, 2.0])
    assert set(tf.arousal_class) <= {1, 2} and set(tf.valence_class) <= {1, 2}
    # annotations: (0s: .5,.5) then (2s: -.5,0) held piecewise constant
    assert tf.mean_valence[0] == pytest.approx(0.5)
    assert tf.mean_valence[1] == pytest.approx(-0.5)
    assert tf.valence_class[0] == 1 and tf.valence_class[1] == 2


def test_assemble_concatenates_trials(small_manifest):
    trials = [ex.extract_trial(ds.load_trial(r), 2.0)
              for r in small_manifest.all_trials()]
    windows = ex.assemble_windowed(trials, 2.0)
    assert windows.n_windows == sum(t.n_windows for t in trials)
    assert windows.subject_list() == ("s01", "s02")
    assert windows.song_ids[:2] == ("songA", "songA")
    assert windows.eeg.shape == (windows.n_windows, 17)


def test_extract_dataset_equals_manual_assembly(small_manifest):
    whole = ex.extract_dataset(small_manifest, 2.0)
    manual = ex.assemble_windowed(
        [ex.extract_trial(ds.load_trial(r), 2.0) for r in small_manifest.all_trials()],
        2.0)
    assert np.array_equal(whole.eeg, manual.eeg)
    assert np.array_equal(whole.music, manual.music)
    assert whole.subjects == manual.subjects


def test_cache_round_trip_is_exact(small_manifest, tmp_path):
    ref = small_manifest.all_trials()[0]
    out = tmp_path / "out"
    assert ex.ensure_trial_features(ref, out, 2.0) is False  # cold cache
    assert ex.ensure_trial_features(ref, out, 2.0) is True   # warm cache

    direct = ex.extract_trial(ds.load_trial(ref), 2.0)
    cached = ex.read_trial_features(
        ex.features_dir(out, 2.0), ref.subject_id, ref.song_id, 2.0)
    assert np.array_equal(cached.eeg, direct.eeg)          # %.17g round-trips
    assert np.array_equal(cached.music, direct.music)
    assert np.array_equal(cached.starts_s, direct.starts_s)
    assert np.array_equal(cached.arousal_class, direct.arousal_class)
    assert np.array_equal(cached.mean_valence, direct.mean_valence)


def test_cache_files_use_sanitized_names(small_manifest, tmp_path):
    ref = small_manifest.all_trials()[0]
    tf = ex.extract_trial(ds.load_trial(ref), 2.0)
    odd = ex.TrialFeatures(**{**tf.__dict__, "subject_id": "s 01/x",
                              "song_id": "a:b"})
    directory = tmp_path / "feat"
    ex.write_trial_features(directory, odd, "digest")
    assert (directory / "s-01-x__a-b.eeg.csv").exists()
    back = ex.read_trial_features(directory, "s 01/x", "a:b", 2.0)
    assert np.array_equal(back.eeg, tf.eeg)


def test_cache_invalidated_by_changed_annotations(small_manifest, tmp_path):
    ref = small_manifest.all_trials()[0]
    out = tmp_path / "out"
    ex.ensure_trial_features(ref, out, 2.0)
    write_annotations(ref.annotation_path,
                      [(0, 0.5, 0.5), (1000, 0.1, 0.1), (2000, -0.5, 0.0)])
    assert ex.ensure_trial_features(ref, out, 2.0) is False  # hash moved
    assert ex.ensure_trial_features(ref, out, 2.0) is True


def test_cache_invalidated_by_changed_parameters(small_manifest, tmp_path):
    ref = small_manifest.all_trials()[0]
    out = tmp_path / "out"
    ex.ensure_trial_features(ref, out, 2.0)
    stale = ex.ensure_trial_features(ref, out, 2.0, eeg_cfg=EegFeatureConfig(k_max=16))
    assert stale is False
    # and the k_max=16 run replaced the cache entry for this window size
    assert ex.ensure_trial_features(ref, out, 2.0, eeg_cfg=EegFeatureConfig(k_max=16))


def test_window_sizes_use_separate_cache_directories(tmp_path):
    assert ex.features_dir(tmp_path, 2.0) != ex.features_dir(tmp_path, 3.0)
    assert ex.features_dir(tmp_path, 2.0).name == "w2000ms"
    assert ex.features_dir(tmp_path, 0.5).name == "w500ms"


def test_ensure_features_reports_per_trial_status(small_manifest, tmp_path):
    out = tmp_path / "out"
    first = ex.ensure_features(small_manifest, out, 2.0)
    assert [cached for _, cached in first] == [False, False, False]
    second = ex.ensure_features(small_manifest, out, 2.0)
    assert [cached for _, cached in second] == [True, True, True]


def test_load_windowed_equals_in_memory_extraction(small_manifest, tmp_path):
    out = tmp_path / "out"
    ex.ensure_features(small_manifest, out, 2.0)
    loaded = ex.load_windowed(small_manifest, out, 2.0)
    direct = ex.extract_dataset(small_manifest, 2.0)
    assert loaded.subjects == direct.subjects
    assert loaded.song_ids == direct.song_ids
    assert np.array_equal(loaded.eeg, direct.eeg)
    assert np.array_equal(loaded.music, direct.music)
    assert np.array_equal(loaded.arousal, direct.arousal)
    assert np.array_equal(loaded.valence, direct.valence)
