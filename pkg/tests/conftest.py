import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from morphlab import MadScoreSet, MatedMorph, MatedScoreSet, SubjectScores


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_mated(rng, n_morphs=None, n_subjects=None, n_probes=None, grid=None):
    """A random mated score structure as (MatedScoreSet, nested lists)."""
    m = int(n_morphs if n_morphs is not None else rng.integers(1, 6))
    n = int(n_subjects if n_subjects is not None else rng.integers(2, 5))
    p = int(n_probes if n_probes is not None else rng.integers(1, 5))
    raw = []
    morphs = []
    for i in range(m):
        subjects = []
        raw_subjects = []
        for j in range(n):
            if grid:
                scores = tuple(float(rng.integers(0, grid)) / grid for _ in range(p))
            else:
                scores = tuple(float(s) for s in rng.uniform(-1, 1, p))
            subjects.append(SubjectScores(f"s{j}", scores))
            raw_subjects.append(list(scores))
        morphs.append(MatedMorph(f"m{i}", tuple(subjects)))
        raw.append(raw_subjects)
    return MatedScoreSet(tuple(morphs)), raw


def random_mad(rng, grid=None, polarity=None):
    nb = int(rng.integers(1, 30))
    na = int(rng.integers(1, 30))
    if grid:
        bf = [float(rng.integers(0, grid)) / grid for _ in range(nb)]
        atk = [float(rng.integers(0, grid)) / grid for _ in range(na)]
    else:
        bf = [float(s) for s in rng.normal(0.3, 0.4, nb)]
        atk = [float(s) for s in rng.normal(0.7, 0.4, na)]
    if polarity is None:
        polarity = "higher_is_attack" if rng.integers(2) else "higher_is_bonafide"
    return MadScoreSet(tuple(bf), tuple(atk), polarity)
