"""The Maslov line bundle over real Lag and the Maslov gerbe over Lag(C^2).

Sign conventions, fixed here once:

* the counterclockwise rotation loop of a line in the plane has Maslov
  index +1;
* ``BranchConvention()`` takes ``sqrt(arg a) = +i`` for ``a < 0``, so the
  same loop has holonomy ``+i``; the transport leaves a chart once the
  current coordinate exceeds 1 in modulus;
* on ``Lag(C^2) = CP^1`` the point ``L = span(1, a)`` has Cayley coordinate
  ``w = (a - i)/(a + i)``.  The real lines form the unit circle, the
  northern hemisphere is ``|w| <= 1`` with north pole ``a = i`` and the
  orientation is the complex one.  The equator is run with ``a``
  increasing, which is the counterclockwise rotation loop;
* the hemisphere object ``O+`` is trivialized by the covector killing the
  south-pole line ``(1, -i)``, ``O-`` by the section of ``U0``.  With these
  choices the dual tautological bundle has Chern number +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .cech import (
    CoverNerve,
    Face,
    OverlapPath,
    TransitionData,
    TripleSample,
    check_transition_cocycle,
    chern_cocycle,
    evaluate_fundamental,
    lift_logs,
    perturb_by_coboundary,
    unitarize,
)
from .charts import default_phi, maslov_index, slope_coords
from .errors import FieldMismatchError, MaslovError, ShapeError, StepBoundError
from .gerbe import (
    GerbeObject,
    equator_transport,
    flip_isos,
    giraud_cocycle,
    sqrt_gerbe_isos,
)
from .phase import snap_root_of_unity
from .symplectic import LagrangianFrame, LagrangianLoop, SymplecticSpace, rotation_line_loop

Z4 = (1 + 0j, 1j, -1 + 0j, -1j)
Z4_NAMES = {0: "1", 1: "i", 2: "-1", 3: "-i"}


def z4_power(z: complex) -> int:
    root = snap_root_of_unity(z, 4)
    if root is None:
        raise MaslovError(f"{z} is not a fourth root of unity")
    return Z4.index(root)


def z4_name(z: complex) -> str:
    return Z4_NAMES[z4_power(z)]


@dataclass(frozen=True)
class BranchConvention:
    """Square root of ``arg(a)``: ``1`` for ``a > 0``, ``sqrt_on_negative`` for ``a < 0``."""

    sqrt_on_negative: complex = 1j

    def __post_init__(self):
        if self.sqrt_on_negative not in (1j, -1j):
            raise MaslovError("the square root of -1 must be +i or -i")

    @classmethod
    def parse(cls, text: str) -> "BranchConvention":
        t = text.strip().replace("−", "-")
        if t in ("+i", "i"):
            return cls(1j)
        if t == "-i":
            return cls(-1j)
        raise MaslovError(f"branch must be '+i' or '-i', got {text!r}")

    def sqrt_arg(self, a: float) -> complex:
        if a > 0:
            return 1 + 0j
        if a < 0:
            return self.sqrt_on_negative
        raise MaslovError("arg(a) is undefined at a = 0")


@dataclass(frozen=True)
class Jump:
    sample: int
    source: str  # chart we leave: "q" (basis sqrt arg dq) or "p"
    target: str
    slope: float
    factor: complex


@dataclass
class HolonomyResult:
    value: complex
    jump_log: list = field(default_factory=list)
    index: int | None = None

    @property
    def power(self) -> int:
        return z4_power(self.value)

    @property
    def name(self) -> str:
        return Z4_NAMES[self.power]

    def to_json(self) -> dict:
        return {
            "value": [float(self.value.real), float(self.value.imag)],
            "z4": self.name,
            "index": self.index,
            "jumps": [
                {"sample": j.sample, "from": j.source, "to": j.target, "slope": j.slope,
                 "factor": [float(j.factor.real), float(j.factor.imag)]}
                for j in self.jump_log
            ],
        }


def maslov_holonomy(loop: LagrangianLoop, convention: BranchConvention = BranchConvention(),
                    squared: bool = False) -> HolonomyResult:
    """Transport a parallel section of ``sqrt(arg(eta*))`` around a loop of real lines.

    The section is written as ``f sqrt(arg dq)`` in the slope chart and
    ``g sqrt(arg dp)`` in the inverse-slope chart; within a chart the
    coefficient is constant.  Crossing charts at slope ``a`` uses
    ``sqrt(arg dp) = sqrt(arg a) sqrt(arg dq)``.  Charts are switched once
    the current coordinate exceeds 1 in modulus.  With ``squared=True`` the
    underlying bundle ``arg(eta*)`` is transported instead (factor ``arg a``).
    """
    if loop.space.field != "real" or loop.space.n != 1:
        raise ShapeError("chart transport is defined for loops of real lines in a plane")
    if not loop.closed:
        raise MaslovError("holonomy needs a closed loop")
    coords = [slope_coords(f) for f in loop.samples]

    def factor(a: float) -> complex:
        return (1.0 if a > 0 else -1.0) + 0j if squared else convention.sqrt_arg(a)

    jumps: list = []
    coef = 1 + 0j

    def switch(at: int, chart: str) -> str:
        nonlocal coef
        a, b = coords[at]
        if not (a.valid and b.valid):
            raise StepBoundError(f"samples {at} and {at + 1} share no chart")
        s = factor(float(a.value))
        f = 1 / s if chart == "q" else s
        coef *= f
        target = "p" if chart == "q" else "q"
        jumps.append(Jump(at, chart, target, float(a.value), complex(f)))
        return target

    a0, b0 = coords[0]
    chart = "q" if a0.valid and (abs(a0.value) <= 1 or not b0.valid) else "p"
    start = chart
    for k in range(1, len(coords)):
        a, b = coords[k]
        here = a if chart == "q" else b
        if not here.valid:
            chart = switch(k - 1, chart)
        elif abs(here.value) > 1:
            chart = switch(k, chart)
    if chart != start:
        switch(len(coords) - 1, chart)
    value = snap_root_of_unity(coef, 4)
    if value is None:
        raise MaslovError(f"transported coefficient {coef} left Z4")
    return HolonomyResult(value, jumps)


def maslov_holonomy_general(loop: LagrangianLoop, convention: BranchConvention = BranchConvention()) -> HolonomyResult:
    """``Z4`` holonomy of the Maslov line bundle along a real loop in any dimension.

    For a line in the plane this is the chart transport; otherwise it is the
    branch value raised to the Maslov index, which is what the reduction to
    a moving line in one symplectic plane gives.
    """
    if loop.space.field != "real":
        raise FieldMismatchError("the Maslov line bundle lives over the real grassmannian")
    idx = maslov_index(loop)
    if loop.space.n == 1:
        res = maslov_holonomy(loop, convention)
        res.index = idx
        return res
    value = Z4[(idx * (1 if convention.sqrt_on_negative == 1j else -1)) % 4]
    return HolonomyResult(value, [], idx)


# ---- the tetrahedral cover of CP^1 ----------------------------------------

R_SOUTH = 0.5  # U0 = {|w| > R_SOUTH} plus the south pole
R_NORTH = 2.0  # northern sectors lie in |w| < R_NORTH
R_CORE = 0.1  # every northern sector contains |w| < R_CORE
HALF_WIDTH = np.deg2rad(80.0)
SECTOR_CENTERS = {"1": np.pi, "2": np.pi + 2 * np.pi / 3, "3": np.pi + 4 * np.pi / 3}
SET_IDS = ("0", "1", "2", "3")
FACES = (("1", "2", "3"), ("0", "3", "2"), ("0", "1", "3"), ("0", "2", "1"))


def a_from_w(w):
    w = np.asarray(w, dtype=complex)
    return 1j * (1 + w) / (1 - w)


def w_from_a(a):
    a = np.asarray(a, dtype=complex)
    return (a - 1j) / (a + 1j)


def frame_vectors(w) -> np.ndarray:
    """Spanning vectors ``(1 - w, i(1 + w))`` of the lines with Cayley coordinate ``w``; shape (2, m)."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    return np.vstack([1 - w, 1j * (1 + w)])


def _angle_diff(x, y):
    return np.angle(np.exp(1j * (x - y)))


def in_set(set_id: str, w) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    r = np.abs(w)
    if set_id == "0":
        return r > R_SOUTH
    c = SECTOR_CENTERS[set_id]
    sector = (r < R_NORTH) & (np.abs(_angle_diff(np.angle(w), c)) < HALF_WIDTH)
    return sector | (r < R_CORE)


def _wedge_center(i: str, j: str) -> float:
    ci, cj = SECTOR_CENTERS[i], SECTOR_CENTERS[j]
    return float(np.angle(np.exp(1j * (ci + _angle_diff(cj, ci) / 2))))


def _excluded_line(set_id: str) -> np.ndarray:
    """A line outside the closure of the set; its annihilator trivializes the bundle there."""
    if set_id == "0":
        return frame_vectors(0.0)[:, 0]  # north pole a = i
    return frame_vectors(np.exp(1j * (SECTOR_CENTERS[set_id] + np.pi)))[:, 0]


def _covector(v: np.ndarray) -> np.ndarray:
    return default_phi(LagrangianFrame(v.reshape(2, 1), SymplecticSpace(1, "complex")))[0]


def section_function(covector: np.ndarray, degree: int = 1) -> Callable:
    """``w -> covector(v(w))**degree``, a local section of the ``degree``-th power of ``eta*``."""

    def e(w):
        return (covector @ frame_vectors(w)) ** degree

    return e


def _polyline(waypoints, density: float) -> tuple[np.ndarray, list[int]]:
    pts = [complex(waypoints[0])]
    marks = [0]
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        steps = max(8, int(np.ceil(abs(b - a) * density)))
        seg = a + (b - a) * np.linspace(0, 1, steps + 1)[1:]
        pts.extend(seg)
        marks.append(len(pts) - 1)
    return np.array(pts), marks


@dataclass
class CP1Cover:
    nerve: CoverNerve
    transition: TransitionData
    equator: LagrangianLoop
    sections: dict
    obj_plus: GerbeObject
    obj_minus: GerbeObject
    degree: int = 1

    @property
    def equator_points(self) -> np.ndarray:
        return np.array([w_of_frame(f) for f in self.equator.samples])


def w_of_frame(frame: LagrangianFrame) -> complex:
    x, y = frame.Z[0, 0], frame.Z[1, 0]
    return complex((y - 1j * x) / (y + 1j * x))


@lru_cache(maxsize=8)
def _cp1_nerve(density: float) -> CoverNerve:
    core = [0.04 * np.exp(1j * t) for t in (0.3, 2.5, 4.4)] + [0j]
    radii = (0.7, 1.0, 1.4)
    rays = {pair: _wedge_center(*pair) for pair in (("1", "2"), ("1", "3"), ("2", "3"))}
    triple_pts = {("1", "2", "3"): core}
    for (i, j), ang in rays.items():
        triple_pts[("0", i, j)] = [r * np.exp(1j * ang) for r in radii]

    # waypoint lists for every pair path; triple points must appear among the waypoints
    way = {}
    for (i, j), ang in rays.items():
        way[(i, j)] = core + [r * np.exp(1j * ang) for r in radii]
    for k in ("1", "2", "3"):
        others = [p for p in rays if k in p]
        first = [r * np.exp(1j * rays[others[0]]) for r in radii]
        second = [r * np.exp(1j * rays[others[1]]) for r in reversed(radii)]
        way[("0", k)] = first + second

    paths, index_of = [], {}
    for pair, wps in way.items():
        pts, marks = _polyline(wps, density)
        paths.append(OverlapPath(pair, 0, pts))
        for wp, m in zip(wps, marks):
            index_of[(pair, complex(wp))] = m

    triples = []
    for tri, pts in triple_pts.items():
        i, j, k = tri
        for p in pts:
            refs = tuple((pair, 0, index_of[(pair, complex(p))]) for pair in ((i, j), (i, k), (j, k)))
            triples.append(TripleSample(tri, 0, complex(p), refs))
    faces = [Face(f, 1) for f in FACES]
    return CoverNerve(SET_IDS, paths, triples, faces, name="CP1 tetrahedral cover")


def build_cp1_cover(degree: int = 1, samples: int = 720, density: float = 60.0) -> CP1Cover:
    """The tetrahedral cover of ``Lag(C^2) = CP^1`` with the bundle ``(eta*)^degree``.

    ``U0`` is the southern set, ``U1, U2, U3`` are northern sectors numbered
    counterclockwise around the north pole.  Each set is trivialized by the
    annihilator of a line lying outside it; ``U1`` excludes the vertical
    line, so its trivialization is ``dq`` and its transition to the
    ``dp``-trivialization of the inverse-slope chart is ``r = a``.
    """
    nerve = _cp1_nerve(density)
    sections = {s: section_function(_covector(_excluded_line(s)), degree) for s in SET_IDS}
    transition = TransitionData.from_sections(nerve, sections)
    equator = rotation_line_loop(1, samples, field="complex")
    ev = np.hstack([f.Z for f in equator.samples])
    plus = _covector(np.array([1.0, -1j]))  # south pole a = -i
    minus = _covector(_excluded_line("0"))
    obj_plus = GerbeObject("+", (plus @ ev) ** degree)
    obj_minus = GerbeObject("-", (minus @ ev) ** degree)
    return CP1Cover(nerve, transition, equator, sections, obj_plus, obj_minus, degree)


def build_cp1_maslov_cover(samples: int = 720) -> CP1Cover:
    return build_cp1_cover(1, samples)


def random_sphere_function(rng: np.random.Generator, amplitude: float = 0.7) -> Callable:
    """``exp`` of a random complex affine function of the sphere embedding; never vanishes."""
    c = (rng.normal(size=4) + 1j * rng.normal(size=4)) * amplitude

    def b(w):
        w = np.asarray(w, dtype=complex)
        r2 = np.abs(w) ** 2
        x, y, z = 2 * w.real / (1 + r2), 2 * w.imag / (1 + r2), (1 - r2) / (1 + r2)
        return np.exp(c[0] + c[1] * x + c[2] * y + c[3] * z)

    return b


def regauge_cover(cover: CP1Cover, rng: np.random.Generator) -> tuple[CP1Cover, dict]:
    """Randomly re-gauge objects and isomorphisms of a cover.

    Local sections are multiplied by random nonvanishing functions (a
    coboundary), the hemisphere sections likewise, and the square roots
    ``sigma`` are flipped on random overlaps.  Returns the new cover and
    the flipped isomorphisms.
    """
    b = {s: random_sphere_function(rng) for s in SET_IDS}
    transition = perturb_by_coboundary(cover.transition, b)
    sections = {s: (lambda w, e=cover.sections[s], f=b[s]: e(w) / f(w)) for s in SET_IDS}
    eq_w = cover.equator_points
    bp, bm = random_sphere_function(rng), random_sphere_function(rng)
    obj_plus = GerbeObject("+", cover.obj_plus.section * bp(eq_w) * rng.choice([-1, 1]))
    obj_minus = GerbeObject("-", cover.obj_minus.section * bm(eq_w) * rng.choice([-1, 1]))
    new = CP1Cover(cover.nerve, transition, cover.equator, sections, obj_plus, obj_minus, cover.degree)
    isos = sqrt_gerbe_isos(lift_logs(transition))
    signs = {k: int(rng.choice([-1, 1])) for k in isos}
    return new, flip_isos(isos, signs)


@dataclass
class GerbeClassReport:
    value: complex
    chern_evaluation: int
    giraud_evaluation: complex
    giraud_evaluation_unitarized: complex
    equator_holonomy: complex
    equator_maslov_holonomy: HolonomyResult | None
    cocycle_deviation: float
    chern_table: list
    giraud_table: list
    nerve_summary: dict
    degree: int

    @property
    def equal(self) -> bool:
        return self.giraud_evaluation == self.equator_holonomy == self.giraud_evaluation_unitarized

    @property
    def structure_group_relation(self) -> bool | None:
        if self.equator_maslov_holonomy is None:
            return None
        return snap_root_of_unity(self.equator_maslov_holonomy.value ** 2, 2) == self.equator_holonomy

    def to_json(self) -> dict:
        def c(z):
            return [float(np.real(z)), float(np.imag(z))]

        out = {
            "degree": self.degree,
            "value": c(self.value),
            "chern_evaluation": self.chern_evaluation,
            "giraud_evaluation": c(self.giraud_evaluation),
            "giraud_evaluation_unitarized": c(self.giraud_evaluation_unitarized),
            "equator_holonomy": c(self.equator_holonomy),
            "equal": self.equal,
            "cocycle_deviation": self.cocycle_deviation,
            "nerve": self.nerve_summary,
            "chern_cocycle": self.chern_table,
            "giraud_cocycle": self.giraud_table,
        }
        if self.equator_maslov_holonomy is not None:
            out["equator_maslov_holonomy"] = self.equator_maslov_holonomy.to_json()
            out["structure_group_relation"] = self.structure_group_relation
        return out


def maslov_gerbe_class(degree: int = 1, samples: int = 720, cover: CP1Cover | None = None,
                       isos: dict | None = None) -> GerbeClassReport:
    """Giraud class of the square-root gerbe on ``CP^1`` by two independent routes.

    Route one lifts the transition logs on the tetrahedral cover, forms
    ``sigma = exp(pi i theta)`` and evaluates ``gamma`` on the fundamental
    cycle (also for the unitarized bundle).  Route two transports a square
    root of ``e-/e+`` around the equator.  For ``degree = 1`` this is the
    Maslov gerbe and the equator holonomy is compared with the square of
    the ``Z4`` Maslov holonomy of the real equator loop.
    """
    cover = cover or build_cp1_cover(degree, samples)
    nerve, t = cover.nerve, cover.transition
    report = check_transition_cocycle(t, nerve)
    lift = lift_logs(t)
    chern = chern_cocycle(lift, nerve)
    isos = isos if isos is not None else sqrt_gerbe_isos(lift)
    gamma = giraud_cocycle(isos, nerve)
    giraud = evaluate_fundamental(gamma, nerve)
    giraud_u = evaluate_fundamental(giraud_cocycle(sqrt_gerbe_isos(lift_logs(unitarize(t))), nerve), nerve)
    transport = equator_transport(cover.obj_plus, cover.obj_minus, cover.equator)
    mh = None
    if cover.degree == 1:
        real_equator = LagrangianLoop(
            tuple(LagrangianFrame(f.Z.real, SymplecticSpace(1, "real")) for f in cover.equator.samples)
        )
        mh = maslov_holonomy_general(real_equator)
    return GerbeClassReport(
        value=giraud,
        chern_evaluation=evaluate_fundamental(chern, nerve),
        giraud_evaluation=giraud,
        giraud_evaluation_unitarized=giraud_u,
        equator_holonomy=transport.value,
        equator_maslov_holonomy=mh,
        cocycle_deviation=report.max_deviation,
        chern_table=chern.table(),
        giraud_table=gamma.table(),
        nerve_summary=nerve.summary(),
        degree=cover.degree,
    )
