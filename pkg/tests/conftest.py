from __future__ import annotations

import numpy as np
import pytest

from maslovgerbe.bundles import build_cp1_cover


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def cp1_covers():
    return {d: build_cp1_cover(d) for d in range(-3, 4)}


def line_angle_oracle(loop) -> int:
    """Independent index oracle for loops of real lines in the plane.

    The angle of each line is read off with arctan2 on the spanning vector,
    doubled (so that the sign ambiguity of the vector disappears) and
    unwrapped with numpy; the total turn divided by 2 pi is the index.
    """
    v = np.array([f.Z[:, 0] for f in loop.samples])
    doubled = np.unwrap(2 * np.arctan2(v[:, 1], v[:, 0]))
    return int(round((doubled[-1] - doubled[0]) / (2 * np.pi)))


def unitary_oracle(loop) -> int:
    """Index as winding of det(U)^2 with U = X + iY from an orthonormal frame, via numpy.unwrap."""
    n = loop.space.n
    phases = []
    for f in loop.samples:
        q, _ = np.linalg.qr(f.Z)
        phases.append(2 * np.angle(np.linalg.det(q[:n] + 1j * q[n:])))
    total = np.unwrap(np.array(phases))
    return int(round((total[-1] - total[0]) / (2 * np.pi)))
