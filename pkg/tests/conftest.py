"""Shared fixtures: compact radial test bumps and an isolated cache."""

import numpy as np
import pytest

from extsobolev.domain import RadialFunction


def make_bump(center=3.0, width=1.0, d=3, ell=0, amp=1.0):
    """Smooth compactly supported radial bump exp(-1/(1-x^2))."""

    def func(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        m = np.abs(r - center) < width
        x = (r[m] - center) / width
        out[m] = amp * np.exp(-1.0 / (1.0 - x * x))
        return out

    return RadialFunction(func=func, d=d, ell=ell,
                          support=(center - width, center + width),
                          decay="gaussian",
                          label=f"bump({center},{width})")


@pytest.fixture
def bump():
    return make_bump()


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    """Keep every test's disk cache private and empty."""
    monkeypatch.setenv("EXTSOBOLEV_CACHE", str(tmp_path / "cache"))
