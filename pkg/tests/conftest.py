"""Shared fixtures plus a terminal summary of the acceptance criteria.

The acceptance tests live in test_acceptance.py as one test per criterion
(test_criterion_NN_*). After the run, a dedicated section prints one
PASS/FAIL/SKIP line per criterion.
"""

import re

import pytest

from emofuse import dataset, extraction, synth

CRITERIA = {
    1: "Higuchi oracle suite",
    2: "music feature suite",
    3: "SVM suite",
    4: "metric suite",
    5: "fusion suite",
    6: "end-to-end synthetic run",
    7: "sweep structure and determinism",
    8: "normalization leakage canary",
    9: "annotator export round-trip",
}

_ACCEPTANCE = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


@pytest.fixture(scope="session")
def demo_dataset_dir(tmp_path_factory):
    """A synthetic demo dataset generated once per session."""
    out = tmp_path_factory.mktemp("demo_dataset")
    synth.generate_dataset(out, synth.SynthConfig(seed=42))
    return out


@pytest.fixture(scope="session")
def demo_manifest(demo_dataset_dir):
    return dataset.load_manifest(demo_dataset_dir / "manifest.json")


@pytest.fixture(scope="session")
def demo_windows_2s(demo_manifest):
    """Feature matrices for 2 s windows over the demo dataset."""
    return extraction.extract_dataset(demo_manifest, 2.0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    ranks = {"passed": 0, "skipped": 1, "failed": 2, "error": 2}
    worst: dict[int, int] = {}
    seen = False
    for status, rank in ranks.items():
        for report in terminalreporter.stats.get(status, ()):
            match = _ACCEPTANCE.search(getattr(report, "nodeid", ""))
            if not match:
                continue
            seen = True
            num = int(match.group(1))
            worst[num] = max(worst.get(num, 0), rank)
    if not seen:
        return
    terminalreporter.section("acceptance criteria")
    words = {0: "PASS", 1: "SKIP", 2: "FAIL"}
    for num in sorted(CRITERIA):
        word = words[worst[num]] if num in worst else "NOT RUN"
        terminalreporter.write_line(f"criterion {num} ({CRITERIA[num]}): {word}")
