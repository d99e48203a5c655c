import os

import hypothesis
import numpy as np
import pytest

np.seterr(all="warn")

hypothesis.settings.register_profile("default", max_examples=50, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=5, deadline=None)
hypothesis.settings.register_profile("ci", max_examples=200, deadline=None, derandomize=True)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _no_color(monkeypatch):
    """Plain output in every test regardless of the terminal."""
    monkeypatch.setenv("NO_COLOR", "1")
    monkeypatch.delenv("PYRAGAS_LAB_SEED", raising=False)
