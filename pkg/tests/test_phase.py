from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maslovgerbe.errors import AliasingError, StepBoundError
from maslovgerbe.phase import continuous_arg, phase_increments, snap_root_of_unity, winding_number


@given(st.integers(-6, 6), st.integers(64, 400), st.floats(0.2, 5.0))
@settings(max_examples=50, deadline=None)
def test_winding_of_circle_power(k, m, radius):
    t = np.linspace(0, 2 * np.pi, m, endpoint=False)
    assert winding_number(radius * np.exp(1j * k * t)) == k


def test_winding_matches_argument_principle_count():
    # z -> (z - 0.3)(z + 0.2i)/(z - 3) on the unit circle: two zeros inside, pole outside
    t = np.linspace(0, 2 * np.pi, 2000, endpoint=False)
    z = np.exp(1j * t)
    assert winding_number((z - 0.3) * (z + 0.2j) / (z - 3)) == 2


def test_aliasing_raises():
    with pytest.raises(AliasingError):
        phase_increments([1, -1])
    with pytest.raises(StepBoundError):  # aliasing is a step-bound failure
        winding_number([1, 1j, -1])


def test_continuous_arg_lifts():
    t = np.linspace(0, 6 * np.pi, 500)
    assert np.allclose(continuous_arg(np.exp(1j * t)), t)


@given(st.sampled_from([1, 2, 4]), st.integers(0, 3), st.floats(-5e-7, 5e-7))
def test_snap_near_roots(k, j, eps):
    root = np.exp(2j * np.pi * j / k)
    assert snap_root_of_unity(root * (1 + eps), k) == pytest.approx(root, abs=1e-15)


def test_snap_rejects_far_values():
    assert snap_root_of_unity(1j, 2) is None
    assert snap_root_of_unity(1.001, 4) is None
    assert snap_root_of_unity(np.exp(0.25j * np.pi), 4) is None
