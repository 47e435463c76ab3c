"""Symplectic vector spaces, lagrangian frames and sampled loops of them.

Coordinates are always the standard ones, ``(q_1..q_n, p_1..p_n)``, with
``omega(x, y) = x^T J y`` and ``J = [[0, I], [-I, 0]]``.  A lagrangian
subspace is carried around as a ``2n x n`` frame whose columns span it; two
frames with the same column span are the same point of the grassmannian.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import subspace_angles

from .errors import (
    FieldMismatchError,
    MaslovError,
    NotLagrangianError,
    RankError,
    ShapeError,
    StepBoundError,
)

FIELDS = ("real", "complex")

RANK_RTOL = 1e-8
ISOTROPY_TOL = 1e-9
STEP_BOUND = 0.4
CLOSURE_TOL = 1e-7


@dataclass(frozen=True)
class SymplecticSpace:
    n: int
    field: str = "real"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise MaslovError(f"half-dimension must be a positive integer, got {self.n!r}")
        if self.field not in FIELDS:
            raise MaslovError(f"field must be one of {FIELDS}, got {self.field!r}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def dtype(self):
        return np.float64 if self.field == "real" else np.complex128

    @property
    def J(self) -> np.ndarray:
        n = self.n
        eye = np.eye(n)
        zero = np.zeros((n, n))
        return np.block([[zero, eye], [-eye, zero]]).astype(self.dtype)

    def omega(self, x, y):
        return np.asarray(x).T @ self.J @ np.asarray(y)


def standard_space(n: int, field: str = "real") -> SymplecticSpace:
    """The standard ``2n``-dimensional symplectic space over ``field``."""
    if n == 0:
        raise MaslovError("n = 0 gives the zero space, which has no lagrangians")
    return SymplecticSpace(int(n), field)


def numerical_rank(Z: np.ndarray, rtol: float = RANK_RTOL) -> int:
    s = np.linalg.svd(Z, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def is_lagrangian(Z, space: SymplecticSpace, tol: float = ISOTROPY_TOL) -> tuple[bool, dict]:
    """Check that ``Z`` spans a lagrangian subspace of ``space``.

    Returns the verdict and a diagnostic dict with the numerical rank and
    the max-norm of ``Z^T J Z`` after normalizing the columns.
    """
    Z = np.asarray(Z)
    if Z.shape != (space.dim, space.n):
        raise ShapeError(f"frame must be {space.dim}x{space.n}, got {Z.shape}")
    rank = numerical_rank(Z)
    norms = np.linalg.norm(Z, axis=0)
    if np.any(norms == 0):
        return False, {"rank": rank, "isotropy": float("nan"), "reason": "zero column"}
    Zn = Z / norms
    iso = float(np.max(np.abs(Zn.T @ space.J @ Zn)))
    ok = rank == space.n and iso < tol
    reason = "ok" if ok else ("rank deficient" if rank != space.n else "not isotropic")
    return ok, {"rank": rank, "isotropy": iso, "reason": reason}


@dataclass(frozen=True, eq=False)
class LagrangianFrame:
    Z: np.ndarray
    space: SymplecticSpace

    def __post_init__(self):
        Z = np.array(self.Z, dtype=self.space.dtype)
        if Z.ndim == 1:
            Z = Z.reshape(-1, 1)
        ok, diag = is_lagrangian(Z, self.space)
        if not ok:
            if diag["reason"] == "rank deficient":
                raise RankError(f"frame has numerical rank {diag['rank']} < {self.space.n}")
            raise NotLagrangianError(f"frame is not lagrangian: {diag}")
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def X(self) -> np.ndarray:
        return self.Z[: self.n]

    @property
    def Y(self) -> np.ndarray:
        return self.Z[self.n :]

    def orthonormal(self) -> np.ndarray:
        q, _ = np.linalg.qr(self.Z)
        return q

    def angles_to(self, other: "LagrangianFrame") -> np.ndarray:
        """Principal angles between the two column spans."""
        if other.space != self.space:
            raise FieldMismatchError("frames live in different spaces")
        return subspace_angles(self.Z, other.Z)

    def same_subspace(self, other: "LagrangianFrame", tol: float = CLOSURE_TOL) -> bool:
        return bool(np.max(self.angles_to(other)) < tol)

    def with_gauge(self, g) -> "LagrangianFrame":
        """Same subspace, frame multiplied on the right by an invertible ``g``."""
        return LagrangianFrame(self.Z @ np.asarray(g), self.space)


@dataclass(frozen=True, eq=False)
class LagrangianLoop:
    samples: tuple
    closed: bool = True
    step_bound: float = field(default=STEP_BOUND, repr=False)

    def __post_init__(self):
        samples = tuple(self.samples)
        object.__setattr__(self, "samples", samples)
        if len(samples) < 2:
            raise MaslovError("a loop needs at least two samples")
        space = samples[0].space
        if any(s.space != space for s in samples):
            raise FieldMismatchError("all samples of a loop must share one space")
        steps = self.step_angles()
        if steps.size and steps.max() >= self.step_bound:
            i = int(np.argmax(steps))
            raise StepBoundError(
                f"samples {i} and {i + 1} are {steps[i]:.3f} rad apart (bound {self.step_bound})"
            )
        if self.closed and not samples[0].same_subspace(samples[-1]):
            raise MaslovError("closed loop must end on the subspace it starts from")

    @property
    def space(self) -> SymplecticSpace:
        return self.samples[0].space

    def __len__(self):
        return len(self.samples)

    def step_angles(self) -> np.ndarray:
        s = self.samples
        return np.array([np.max(s[i].angles_to(s[i + 1])) for i in range(len(s) - 1)])

    def reversed(self) -> "LagrangianLoop":
        return LagrangianLoop(self.samples[::-1], self.closed, self.step_bound)

    def concat(self, other: "LagrangianLoop") -> "LagrangianLoop":
        """Traverse ``self`` then ``other``; the junction sample is kept once."""
        if not self.samples[-1].same_subspace(other.samples[0]):
            raise MaslovError("loops do not meet at the junction")
        return LagrangianLoop(self.samples + other.samples[1:], True, self.step_bound)

    def rotated(self, shift: int) -> "LagrangianLoop":
        """Same closed loop, starting from sample ``shift``."""
        if not self.closed:
            raise MaslovError("only closed loops can be rotated")
        body = list(self.samples[:-1])
        shift %= len(body)
        body = body[shift:] + body[:shift]
        return LagrangianLoop(tuple(body) + (body[0],), True, self.step_bound)

    def gauged(self, gauges: Sequence) -> "LagrangianLoop":
        return LagrangianLoop(
            tuple(f.with_gauge(g) for f, g in zip(self.samples, gauges)), self.closed, self.step_bound
        )

    def refined(self) -> "LagrangianLoop":
        """Insert the geodesic midpoint between every pair of consecutive samples.

        Real loops only: midpoints are taken in U(n)/O(n) after aligning the
        gauge of the second frame to the first.
        """
        if self.space.field != "real":
            raise FieldMismatchError("refinement is implemented for real loops")
        out = [self.samples[0]]
        for a, b in zip(self.samples[:-1], self.samples[1:]):
            out.append(_midpoint(a, b))
            out.append(b)
        return LagrangianLoop(tuple(out), self.closed, self.step_bound)


def _unitary(frame: LagrangianFrame) -> np.ndarray:
    Q = frame.orthonormal()
    return Q[: frame.n] + 1j * Q[frame.n :]


def _midpoint(a: LagrangianFrame, b: LagrangianFrame) -> LagrangianFrame:
    from scipy.linalg import expm, logm, polar

    Ua, Ub = _unitary(a), _unitary(b)
    # real orthogonal gauge on b closest to a (Procrustes)
    O, _ = polar(np.real(Ub.conj().T @ Ua))
    W = Ua.conj().T @ (Ub @ O)
    Um = Ua @ expm(0.5 * logm(W))
    Zm = np.vstack([Um.real, Um.imag])
    return LagrangianFrame(Zm, a.space)


def direct_sum_frames(a: LagrangianFrame, b: LagrangianFrame) -> LagrangianFrame:
    """Block-diagonal frame of ``a + b`` in standard coordinates of the sum."""
    if a.space.field != b.space.field:
        raise FieldMismatchError("direct sum needs a common field")
    na, nb = a.n, b.n
    space = SymplecticSpace(na + nb, a.space.field)
    Z = np.zeros((2 * (na + nb), na + nb), dtype=space.dtype)
    Z[:na, :na] = a.X
    Z[na : na + nb, na:] = b.X
    Z[na + nb : 2 * na + nb, :na] = a.Y
    Z[2 * na + nb :, na:] = b.Y
    return LagrangianFrame(Z, space)


def line_frame(angle: float, field: str = "real") -> LagrangianFrame:
    """The line through ``(cos angle, sin angle)`` in the standard plane."""
    return LagrangianFrame(np.array([[np.cos(angle)], [np.sin(angle)]]), SymplecticSpace(1, field))


def min_rotation_samples(k: int) -> int:
    if k == 0:
        return 2
    step_needed = int(np.floor(abs(k) * np.pi / STEP_BOUND)) + 2
    return max(4 * abs(k) + 2, step_needed)


def rotation_line_loop(k: int, m: int = 720, field: str = "real") -> LagrangianLoop:
    """Line rotating counterclockwise through ``k`` half-turns, ``m`` samples.

    ``k < 0`` rotates clockwise; ``k = 0`` is the constant loop at the q-axis.
    """
    k = int(k)
    need = min_rotation_samples(k)
    if m < need:
        raise StepBoundError(f"rotation by {k} half-turns needs at least {need} samples, got {m}")
    t = np.linspace(0.0, 1.0, m)
    return LagrangianLoop(tuple(line_frame(k * np.pi * s, field) for s in t))


def constant_loop(frame: LagrangianFrame, m: int = 2) -> LagrangianLoop:
    return LagrangianLoop((frame,) * m)


def direct_sum_loop(planar: LagrangianLoop, fixed: LagrangianFrame) -> LagrangianLoop:
    if planar.space.n != 1:
        raise ShapeError("the moving factor must live in a symplectic plane")
    if planar.space.field != fixed.space.field:
        raise FieldMismatchError("planar loop and fixed frame use different fields")
    return LagrangianLoop(
        tuple(direct_sum_frames(s, fixed) for s in planar.samples), planar.closed, planar.step_bound
    )


def graph_frame(A: np.ndarray) -> LagrangianFrame:
    """Lagrangian of ``V + Vbar`` attached to a symplectic map ``A`` of the plane ``V``.

    ``Vbar`` carries ``-omega``.  The subspace is ``{(A v, v)}``; it is
    written in standard coordinates of R^4 via ``(q, p, q', p') -> (q, q', p, -p')``.
    """
    A = np.asarray(A, dtype=float)
    cols = []
    for v in np.eye(2):
        w = A @ v
        cols.append([w[0], v[0], w[1], -v[1]])
    return LagrangianFrame(np.array(cols).T, SymplecticSpace(2, "real"))


def rotation_matrix(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


def sp_graph_loop(m: int = 720) -> LagrangianLoop:
    """Graphs of the rotations by ``2 pi t`` of the plane, ``t`` in ``[0, 1]``."""
    if m < 8:
        raise StepBoundError(f"sp_graph_loop needs at least 8 samples, got {m}")
    t = np.linspace(0.0, 1.0, m)
    return LagrangianLoop(tuple(graph_frame(rotation_matrix(2 * np.pi * s)) for s in t))


# random generators used by property checks


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 0.5) -> np.ndarray:
    """A random real symplectic ``2n x 2n`` matrix of moderate condition number."""
    eye, zero = np.eye(n), np.zeros((n, n))
    A = rng.normal(size=(n, n)) * scale
    B = rng.normal(size=(n, n)) * scale
    G = np.eye(n) + rng.normal(size=(n, n)) * scale / 2
    while abs(np.linalg.det(G)) < 0.2:
        G = np.eye(n) + rng.normal(size=(n, n)) * scale / 2
    upper = np.block([[eye, A + A.T], [zero, eye]])
    lower = np.block([[eye, zero], [B + B.T, eye]])
    diag = np.block([[G, zero], [zero, np.linalg.inv(G).T]])
    return upper @ lower @ diag


def random_gauge(n: int, rng: np.random.Generator, field: str = "real") -> np.ndarray:
    while True:
        g = np.eye(n) + rng.normal(size=(n, n)) * 0.5
        if field == "complex":
            g = g + 1j * rng.normal(size=(n, n)) * 0.5
        if abs(np.linalg.det(g)) > 0.2:
            return g


def random_lagrangian(n: int, rng: np.random.Generator, field: str = "real") -> LagrangianFrame:
    space = SymplecticSpace(n, field)
    S = rng.normal(size=(n, n))
    if field == "complex":
        S = S + 1j * rng.normal(size=(n, n))
    Z = np.vstack([np.eye(n), S + S.T])
    M = random_symplectic(n, rng)
    return LagrangianFrame(M @ Z @ random_gauge(n, rng, field), space)


def lagrangian_meeting(L0: LagrangianFrame, k: int, rng: np.random.Generator) -> LagrangianFrame:
    """A random lagrangian whose intersection with ``L0`` has dimension exactly ``k``."""
    n, field = L0.n, L0.space.field
    if not 0 <= k <= n:
        raise MaslovError(f"intersection dimension {k} out of range for n={n}")
    # symplectic M sending the q-plane onto L0: complete L0 by a transverse lagrangian
    Q = L0.orthonormal()
    J = L0.space.J
    # J^T conj(Q) spans a lagrangian complement paired to Q by omega
    P = J.T @ Q.conj()
    pairing = Q.T @ J @ P
    M = np.hstack([Q, P @ np.linalg.inv(pairing)])
    m = n - k
    Zq = np.zeros((2 * n, n), dtype=L0.space.dtype)
    for i in range(k):
        Zq[i, i] = 1.0
    if m:
        S = rng.normal(size=(m, m))
        if field == "complex":
            S = S + 1j * rng.normal(size=(m, m))
        S = S + S.T
        while abs(np.linalg.det(S)) < 0.1:
            S = S + np.eye(m)
        Zq[k:n, k:] = S
        Zq[n + k :, k:] = np.eye(m)
    Z = M @ Zq @ random_gauge(n, rng, field)
    return LagrangianFrame(Z, L0.space)


def random_line_loop(rng: np.random.Generator, steps: int | None = None, max_step: float = 0.3) -> LagrangianLoop:
    """Closed random walk of real lines in the plane.

    The angle performs a bounded random walk and is then bent linearly so
    that it ends a whole number of half-turns away from where it started.
    """
    steps = int(steps or rng.integers(60, 300))
    inc = np.clip(rng.normal(0.0, 0.12, size=steps), -max_step, max_step)
    inc += rng.normal(0.0, 0.02)  # drift, so that loops wind both ways
    angles = rng.uniform(0, np.pi) + np.concatenate([[0.0], np.cumsum(inc)])
    total = angles[-1] - angles[0]
    k = np.rint(total / np.pi)
    angles += (k * np.pi - total) * np.linspace(0.0, 1.0, steps + 1)
    return LagrangianLoop(tuple(line_frame(a) for a in angles))


# JSON


def _encode_matrix(Z: np.ndarray) -> list:
    return [[[float(np.real(x)), float(np.imag(x))] for x in row] for row in np.asarray(Z)]


def _decode_matrix(rows, n: int, field: str) -> np.ndarray:
    arr = np.asarray(rows, dtype=float)
    if arr.shape != (2 * n, n, 2):
        raise ShapeError(f"sample must be {2 * n}x{n} of [re, im] pairs, got shape {arr.shape}")
    Z = arr[..., 0] + 1j * arr[..., 1]
    if field == "real":
        if np.any(arr[..., 1] != 0):
            raise FieldMismatchError("real frame with nonzero imaginary part")
        return Z.real
    return Z


def loop_to_json(loop: LagrangianLoop) -> dict:
    sp = loop.space
    return {
        "field": sp.field,
        "n": sp.n,
        "samples": [_encode_matrix(f.Z) for f in loop.samples],
        "closed": bool(loop.closed),
    }


def frame_to_json(frame: LagrangianFrame) -> dict:
    return {"field": frame.space.field, "n": frame.n, "samples": [_encode_matrix(frame.Z)], "closed": False}


def frames_from_json(doc: dict) -> tuple[list[LagrangianFrame], bool]:
    try:
        field_tag, n, samples = doc["field"], int(doc["n"]), doc["samples"]
        closed = bool(doc.get("closed", False))
    except (KeyError, TypeError, ValueError) as exc:
        raise ShapeError(f"malformed frame/loop document: {exc}") from exc
    space = SymplecticSpace(n, field_tag)
    return [LagrangianFrame(_decode_matrix(s, n, field_tag), space) for s in samples], closed


def loop_from_json(doc: dict) -> LagrangianLoop:
    frames, closed = frames_from_json(doc)
    return LagrangianLoop(tuple(frames), closed)


def frame_from_json(doc: dict) -> LagrangianFrame:
    frames, _ = frames_from_json(doc)
    if len(frames) != 1:
        raise ShapeError(f"expected a single frame, got {len(frames)}")
    return frames[0]
