import functools

import numpy as np
import pytest

from gaitfusion.pipeline import analyze_session
from gaitfusion.synth import generate, profile_by_name


@functools.lru_cache(maxsize=None)
def synth_session(profile: str = "normal", duration: float = 20.0, seed: int = 0, noiseless: bool = False,
                  sample_rate_hz: float = 66.0):
    p = profile_by_name(profile, seed=seed)
    if noiseless:
        p = p.noiseless()
    return generate(p, duration, sample_rate_hz)


@functools.lru_cache(maxsize=None)
def synth_analysis(profile: str = "normal", duration: float = 20.0, seed: int = 0, noiseless: bool = False):
    session, _ = synth_session(profile, duration, seed, noiseless)
    return analyze_session(session)


def match_rate(detected, truth, tol: int = 2) -> float:
    """Fraction of truth indices with a detected index within ``tol`` samples."""
    if not truth:
        return 1.0
    d = np.sort(np.asarray(detected, dtype=np.int64))
    if len(d) == 0:
        return 0.0
    hits = 0
    for t in truth:
        j = np.searchsorted(d, t)
        near = [d[k] for k in (j - 1, j) if 0 <= k < len(d)]
        hits += any(abs(x - t) <= tol for x in near)
    return hits / len(truth)


def evaluable_truth(truth, side: str, kind: str, rate: float) -> list[int]:
    """True indices of ``kind`` for stances that lie entirely inside the record."""
    attr = {"HeelStrike": "hs", "ToeOff": "toe_off", "ToeOn": "toe_on", "HeelOff": "heel_off"}[kind]
    return [int(round(getattr(s, attr) * rate)) for s in truth.complete_stances(side)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def acceptance(criterion: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
