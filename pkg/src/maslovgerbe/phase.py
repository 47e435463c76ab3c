"""Continuous phase tracking along sampled paths."""

from __future__ import annotations

import numpy as np

from .errors import AliasingError

# an increment this close to pi has no unique principal-branch lift
ALIAS_LIMIT = np.pi * (1 - 1e-9)


def phase_increments(values, closed: bool = False, where: str = "path") -> np.ndarray:
    """Principal-branch argument increments between consecutive nonzero values.

    With ``closed=True`` the increment from the last value back to the first
    is appended.
    """
    z = np.asarray(values, dtype=complex)
    if closed:
        z = np.append(z, z[0])
    inc = np.angle(z[1:] * np.conj(z[:-1]))
    bad = np.flatnonzero(np.abs(inc) >= ALIAS_LIMIT)
    if bad.size:
        i = int(bad[0])
        raise AliasingError(f"{where}: phase jumps by {inc[i]:.4f} rad between samples {i} and {i + 1}")
    return inc


def winding_number(values, where: str = "loop") -> int:
    """Number of turns of a closed sampled path of nonzero complex numbers."""
    total = phase_increments(values, closed=True, where=where).sum() / (2 * np.pi)
    return int(np.rint(total))


def continuous_arg(values, where: str = "path") -> np.ndarray:
    """Argument lifted continuously, starting from the principal value."""
    z = np.asarray(values, dtype=complex)
    inc = phase_increments(z, where=where)
    return np.angle(z[0]) + np.concatenate([[0.0], np.cumsum(inc)])


def snap_root_of_unity(z: complex, k: int, tol: float = 1e-6) -> complex | None:
    """Nearest ``k``-th root of unity to ``z``, or ``None`` if farther than ``tol``."""
    j = int(np.rint(np.angle(z) * k / (2 * np.pi))) % k
    root = _ROOTS[k][j] if k in _ROOTS else np.exp(2j * np.pi * j / k)
    return root if abs(z - root) < tol else None


_ROOTS = {
    1: (1 + 0j,),
    2: (1 + 0j, -1 + 0j),
    4: (1 + 0j, 1j, -1 + 0j, -1j),
}
