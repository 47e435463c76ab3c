"""Sampled Čech data for line bundles over a finite cover.

A :class:`CoverNerve` records, for every pair of sets, sample paths through
the connected components of their overlap, and for every triple of sets a
few sample points, each located on the three relevant pair paths.  Line
bundles enter only through their transition functions sampled along those
paths (:class:`TransitionData`); logarithms are lifted continuously along
each path, and the integer 2-cocycle ``theta_ij + theta_jk + theta_ki`` is
read off at the triple samples.

Pair data is stored once per unordered pair, keyed in the order of
``set_ids``; values for the reversed pair are derived (``r_ji = 1/r_ij``,
``theta_ji = -theta_ij``).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import (
    CocycleError,
    ConnectivityError,
    IntegralityError,
    MaslovError,
    NoFundamentalCycleError,
    SnapError,
    StructuralError,
)
from .phase import continuous_arg, snap_root_of_unity

COCYCLE_TOL = 1e-9
INTEGER_TOL = 1e-6
UNIT_TOL = 1e-9
SNAP_TOL = 1e-6
POINT_TOL = 1e-9

GROUPS = ("Z", "Z2", "Z4", "U1")


@dataclass(frozen=True, eq=False)
class OverlapPath:
    """Ordered samples through one connected component of the overlap of ``U_i`` and ``U_j``."""

    pair: tuple
    component: int
    points: np.ndarray

    @property
    def key(self):
        return (*self.pair, self.component)

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class TripleSample:
    """A point common to ``U_i``, ``U_j``, ``U_k`` and where it sits on the three pair paths.

    ``refs`` maps each unordered pair of the triple (in canonical order) to
    ``(component, index)`` of the pair path passing through the point.
    """

    triple: tuple
    component: int
    point: complex
    refs: tuple  # ((pair, component, index), ...) for the three pairs


@dataclass(frozen=True)
class Face:
    ids: tuple
    sign: int = 1
    component: int = 0


def permutation_parity(seq, ordered) -> int:
    """+1 if ``seq`` is an even permutation of ``ordered``, else -1."""
    pos = [list(ordered).index(x) for x in seq]
    sign = 1
    for i in range(len(pos)):
        for j in range(i + 1, len(pos)):
            if pos[i] > pos[j]:
                sign = -sign
    return sign


class CoverNerve:
    def __init__(self, set_ids: Iterable, paths: Iterable[OverlapPath], triples: Iterable[TripleSample],
                 faces: Iterable[Face] = (), name: str = ""):
        self.set_ids = tuple(str(s) for s in set_ids)
        if len(set(self.set_ids)) != len(self.set_ids):
            raise StructuralError("set ids must be distinct")
        self.name = name
        self.paths: dict = {}
        for p in paths:
            pair = self.canonical(p.pair)
            if tuple(pair) != tuple(p.pair):
                p = OverlapPath(pair, p.component, p.points)
            pts = np.asarray(p.points, dtype=complex)
            pts.setflags(write=False)
            p = OverlapPath(tuple(pair), int(p.component), pts)
            if p.key in self.paths:
                raise StructuralError(f"duplicate overlap component {p.key}")
            self.paths[p.key] = p
        self.triples = tuple(self._normalize_triple(t) for t in triples)
        self.faces = tuple(Face(tuple(str(x) for x in f.ids), int(f.sign), int(f.component)) for f in faces)
        self._validate()

    # ordering helpers

    def canonical(self, ids) -> tuple:
        try:
            return tuple(sorted((str(x) for x in ids), key=self.set_ids.index))
        except ValueError as exc:
            raise StructuralError(f"unknown set id in {ids}") from exc

    def _normalize_triple(self, t: TripleSample) -> TripleSample:
        tri = self.canonical(t.triple)
        refs = tuple(sorted(((self.canonical(pair), int(c), int(idx)) for pair, c, idx in t.refs),
                            key=lambda r: r[0]))
        return TripleSample(tri, int(t.component), complex(t.point), refs)

    def _validate(self):
        missing = []
        for t in self.triples:
            i, j, k = t.triple
            want = {(i, j), (i, k), (j, k)}
            have = {r[0] for r in t.refs}
            if have != want:
                raise StructuralError(f"triple sample {t.triple} must reference exactly its three pairs")
            for pair, comp, idx in t.refs:
                path = self.paths.get((*pair, comp))
                if path is None:
                    missing.append((*pair, comp))
                    continue
                if not 0 <= idx < len(path):
                    raise StructuralError(f"triple {t.triple} points past the end of path {path.key}")
                if abs(path.points[idx] - t.point) > POINT_TOL * max(1.0, abs(t.point)):
                    raise StructuralError(f"triple {t.triple} sample is not on path {path.key} at index {idx}")
        if missing:
            raise StructuralError("triple samples reference absent overlap components", missing)
        known = {(t.triple, t.component) for t in self.triples}
        for f in self.faces:
            if (self.canonical(f.ids), f.component) not in known:
                raise StructuralError(f"face {f.ids} has no triple samples")
        if self.faces and not self.faces_closed():
            raise StructuralError("oriented faces do not form a cycle")

    def faces_closed(self) -> bool:
        """The simplicial boundary of the oriented faces vanishes."""
        boundary: dict = {}
        for f in self.faces:
            i, j, k = f.ids
            for a, b in ((i, j), (j, k), (k, i)):
                pair = self.canonical((a, b))
                s = f.sign * (1 if (a, b) == pair else -1)
                boundary[pair] = boundary.get(pair, 0) + s
        return all(v == 0 for v in boundary.values())

    def triple_components(self) -> list:
        return sorted({(t.triple, t.component) for t in self.triples})

    def summary(self) -> dict:
        return {
            "name": self.name,
            "sets": list(self.set_ids),
            "overlap_components": [list(k) for k in sorted(self.paths)],
            "path_samples": int(sum(len(p) for p in self.paths.values())),
            "triple_components": [[list(t), c] for t, c in self.triple_components()],
            "triple_samples": len(self.triples),
            "faces": [{"ids": list(f.ids), "sign": f.sign} for f in self.faces],
        }


def _check_keys(nerve: CoverNerve, values: Mapping, what: str):
    missing = [k for k in nerve.paths if k not in values]
    extra = [k for k in values if k not in nerve.paths]
    if missing or extra:
        raise StructuralError(f"{what} keys do not match the nerve", missing + extra)
    for k, v in values.items():
        if len(v) != len(nerve.paths[k]):
            raise StructuralError(f"{what} on {k} has {len(v)} samples, path has {len(nerve.paths[k])}", [k])


class TransitionData:
    """Transition values ``r_ij`` of a line bundle along every overlap path.

    ``kind`` is ``"GL1"`` for general nonzero values and ``"U1"`` for unit
    values (hermitian case).
    """

    def __init__(self, nerve: CoverNerve, values: Mapping, kind: str = "GL1"):
        if kind not in ("GL1", "U1"):
            raise MaslovError(f"unknown transition kind {kind!r}")
        vals = {}
        for k, v in values.items():
            key = (*nerve.canonical(k[:2]), int(k[2]))
            arr = np.array(v, dtype=complex)
            if tuple(key[:2]) != tuple(str(x) for x in k[:2]):
                arr = 1.0 / arr
            vals[key] = arr
        _check_keys(nerve, vals, "transition data")
        for k, arr in vals.items():
            if np.any(arr == 0) or not np.all(np.isfinite(arr)):
                raise MaslovError(f"transition values on {k} must be finite and nonzero")
            if kind == "U1" and np.max(np.abs(np.abs(arr) - 1)) > UNIT_TOL:
                raise MaslovError(f"U1 transition values on {k} are not unit modulus")
            arr.setflags(write=False)
        self.nerve = nerve
        self.values = vals
        self.kind = kind

    @classmethod
    def from_sections(cls, nerve: CoverNerve, sections: Mapping[str, Callable], kind: str = "GL1"):
        """``r_ij = e_j / e_i`` from nonvanishing local sections ``e_i`` of the bundle.

        The trivialization ``eps_i`` divides by ``e_i``, so ``eps_i eps_j^-1``
        is multiplication by ``e_j / e_i``.
        """
        vals = {}
        for key, path in nerve.paths.items():
            i, j, _ = key
            vals[key] = np.asarray(sections[j](path.points)) / np.asarray(sections[i](path.points))
        return cls(nerve, vals, kind)

    def r(self, i, j, component: int = 0) -> np.ndarray:
        pair = self.nerve.canonical((i, j))
        v = self.values[(*pair, component)]
        return v if pair == (str(i), str(j)) else 1.0 / v

    def with_values(self, values: Mapping, kind: str | None = None) -> "TransitionData":
        return TransitionData(self.nerve, values, kind or self.kind)


@dataclass
class CocycleReport:
    max_deviation: float
    worst: tuple | None  # (triple, component, sample point)
    tolerance: float = COCYCLE_TOL

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tolerance

    def to_json(self) -> dict:
        return {
            "max_deviation": self.max_deviation,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst": None if self.worst is None else
            {"triple": list(self.worst[0]), "component": self.worst[1],
             "point": [self.worst[2].real, self.worst[2].imag]},
        }


def _edge_values(t: TripleSample, getter):
    """``f_ij, f_jk, f_ik`` at a triple sample from a per-path array getter."""
    i, j, k = t.triple
    refs = {pair: (c, idx) for pair, c, idx in t.refs}
    out = []
    for pair in ((i, j), (j, k), (i, k)):
        c, idx = refs[pair]
        out.append(getter((*pair, c))[idx])
    return out


def check_transition_cocycle(t: TransitionData, nerve: CoverNerve | None = None,
                             tol: float = COCYCLE_TOL, strict: bool = False) -> CocycleReport:
    """Max of ``|r_ij r_jk r_ki - 1|`` over all triple samples.

    With ``strict=True`` a failing check raises :class:`CocycleError`
    carrying the worst triple instead of returning the report.
    """
    nerve = nerve or t.nerve
    _check_keys(nerve, t.values, "transition data")
    worst, dev = None, 0.0
    for s in nerve.triples:
        rij, rjk, rik = _edge_values(s, t.values.__getitem__)
        d = abs(rij * rjk / rik - 1.0)
        if d > dev or worst is None:
            dev, worst = float(d), (s.triple, s.component, s.point)
    report = CocycleReport(dev, worst, tol)
    if strict and not report.passed:
        raise CocycleError(f"cocycle identity fails by {dev:.3g} at triple {worst[0]}", worst, dev)
    return report


class LogLift:
    """Continuous logarithms ``theta_ij`` with ``r_ij = exp(2 pi i theta_ij)``."""

    def __init__(self, nerve: CoverNerve, values: Mapping, kind: str = "GL1"):
        _check_keys(nerve, values, "log lift")
        self.nerve = nerve
        self.values = dict(values)
        self.kind = kind

    def theta(self, i, j, component: int = 0) -> np.ndarray:
        pair = self.nerve.canonical((i, j))
        v = self.values[(*pair, component)]
        return v if pair == (str(i), str(j)) else -v

    def exp(self) -> dict:
        return {k: np.exp(2j * np.pi * v) for k, v in self.values.items()}


def lift_logs(t: TransitionData, offsets: Mapping | None = None) -> LogLift:
    """Lift ``log(r_ij) / 2 pi i`` continuously along each overlap path.

    The first sample of each path takes the principal branch, shifted by an
    optional integer ``offsets[key]``.
    """
    offsets = offsets or {}
    vals = {}
    for key, r in t.values.items():
        arg = continuous_arg(r, where=f"overlap {key}")
        theta = arg / (2 * np.pi)
        if t.kind == "GL1":
            theta = theta - 1j * np.log(np.abs(r)) / (2 * np.pi)
        shift = offsets.get(key, 0)
        if int(shift) != shift:
            raise MaslovError("branch offsets must be integers")
        vals[key] = theta + int(shift)
    return LogLift(t.nerve, vals, t.kind)


class CechCocycle:
    """Values on oriented triple-overlap components in ``Z``, ``Z2``, ``Z4`` or ``U1``.

    ``values`` is keyed by ``(i, j, k, component)`` with ``(i, j, k)`` in
    canonical order; other orderings follow by antisymmetry.  Finite groups
    are stored as roots of unity.
    """

    def __init__(self, group: str, values: Mapping, nerve: CoverNerve):
        if group not in GROUPS:
            raise MaslovError(f"unknown coefficient group {group!r}")
        self.group = group
        self.values = dict(values)
        self.nerve = nerve

    @property
    def additive(self) -> bool:
        return self.group == "Z"

    def identity(self):
        return 0 if self.additive else 1 + 0j

    def value(self, i, j, k, component: int = 0):
        ids = (str(i), str(j), str(k))
        tri = self.nerve.canonical(ids)
        v = self.values[(*tri, component)]
        if permutation_parity(ids, tri) > 0:
            return v
        return -v if self.additive else 1 / v

    def combine(self, a, b):
        return a + b if self.additive else a * b

    def power(self, v, s: int):
        return v * s if self.additive else v ** s

    def table(self) -> list:
        rows = []
        for (i, j, k, c), v in sorted(self.values.items()):
            val = int(v) if self.additive else [float(np.real(v)), float(np.imag(v))]
            rows.append({"ids": [i, j, k], "component": c, "value": val})
        return rows

    def alternating_sum(self, quad, component: int = 0):
        """``(delta c)(i,j,k,l) = c_jkl - c_ikl + c_ijl - c_ijk`` (multiplicatively for finite groups)."""
        i, j, k, l = quad
        terms = [((j, k, l), 1), ((i, k, l), -1), ((i, j, l), 1), ((i, j, k), -1)]
        acc = self.identity()
        for ids, s in terms:
            acc = self.combine(acc, self.power(self.value(*ids, component=component), s))
        return acc

    def is_antisymmetric(self) -> bool:
        for (i, j, k, c), v in self.values.items():
            for perm in permutations((i, j, k)):
                w = self.value(*perm, component=c)
                expect = v if permutation_parity(perm, (i, j, k)) > 0 else (-v if self.additive else 1 / v)
                if w != expect:
                    return False
        return True


def chern_cocycle(lift: LogLift, nerve: CoverNerve | None = None, tol: float = INTEGER_TOL) -> CechCocycle:
    """The integer cocycle ``c_ijk = theta_ij + theta_jk + theta_ki``.

    Raises :class:`IntegralityError` when the sum is not an integer at some
    triple sample and :class:`ConnectivityError` when it is not constant on
    a triple-overlap component.
    """
    nerve = nerve or lift.nerve
    values: dict = {}
    for s in nerve.triples:
        tij, tjk, tik = _edge_values(s, lift.values.__getitem__)
        total = complex(tij + tjk - tik)
        c = int(np.rint(total.real))
        if abs(total - c) > tol:
            raise IntegralityError(f"theta sum {total:.6g} at triple {s.triple} is not an integer")
        key = (*s.triple, s.component)
        if key in values and values[key] != c:
            raise ConnectivityError(f"c{s.triple} takes values {values[key]} and {c} on component {s.component}")
        values[key] = c
    return CechCocycle("Z", values, nerve)


def evaluate_fundamental(c: CechCocycle, nerve: CoverNerve | None = None):
    """Signed sum (or product) of the cocycle over the nerve's oriented faces."""
    nerve = nerve or c.nerve
    if not nerve.faces:
        raise NoFundamentalCycleError("the nerve carries no fundamental 2-cycle")
    acc = c.identity()
    for f in nerve.faces:
        acc = c.combine(acc, c.power(c.value(*f.ids, component=f.component), f.sign))
    if c.additive:
        return int(acc)
    if c.group in ("Z2", "Z4"):
        snapped = snap_root_of_unity(acc, 2 if c.group == "Z2" else 4, SNAP_TOL)
        if snapped is None:
            raise SnapError(f"evaluation {acc} is not in {c.group}")
        return snapped
    return complex(acc)


def reduce_mod(c: CechCocycle, k: int) -> CechCocycle:
    """Image of an integer cocycle under ``Z -> Z_k``, ``n -> exp(2 pi i n / k)``."""
    if not c.additive:
        raise MaslovError("only integer cocycles can be reduced")
    group = {2: "Z2", 4: "Z4"}[k]
    vals = {key: snap_root_of_unity(np.exp(2j * np.pi * v / k), k) for key, v in c.values.items()}
    return CechCocycle(group, vals, c.nerve)


def perturb_by_coboundary(t: TransitionData, b: Mapping[str, Callable]) -> TransitionData:
    """``r'_ij = b_i r_ij / b_j`` for nonvanishing functions ``b_i`` on each set."""
    vals = {}
    for key, r in t.values.items():
        i, j, _ = key
        pts = t.nerve.paths[key].points
        bi, bj = np.asarray(b[i](pts), dtype=complex), np.asarray(b[j](pts), dtype=complex)
        if np.any(bi == 0) or np.any(bj == 0):
            raise MaslovError(f"coboundary function vanishes on overlap {key}")
        vals[key] = bi * r / bj
    kind = t.kind
    if kind == "U1" and any(np.max(np.abs(np.abs(v) - 1)) > UNIT_TOL for v in vals.values()):
        kind = "GL1"
    return TransitionData(t.nerve, vals, kind)


def unitarize(t: TransitionData) -> TransitionData:
    """Apply ``z -> z/|z|`` to every transition value."""
    return TransitionData(t.nerve, {k: v / np.abs(v) for k, v in t.values.items()}, "U1")


def _same_nerve(t1: TransitionData, t2: TransitionData):
    if t1.nerve is not t2.nerve and set(t1.values) != set(t2.values):
        raise StructuralError("transition data live on different nerves",
                              sorted(set(t1.values) ^ set(t2.values)))


def tensor(t1: TransitionData, t2: TransitionData) -> TransitionData:
    _same_nerve(t1, t2)
    kind = "U1" if t1.kind == t2.kind == "U1" else "GL1"
    return TransitionData(t1.nerve, {k: t1.values[k] * t2.values[k] for k in t1.values}, kind)


def inverse(t: TransitionData) -> TransitionData:
    return TransitionData(t.nerve, {k: 1.0 / v for k, v in t.values.items()}, t.kind)


def square(t: TransitionData) -> TransitionData:
    return tensor(t, t)


def chern_number(t: TransitionData) -> int:
    """Evaluation of the Chern cocycle of ``t`` on the fundamental cycle."""
    return evaluate_fundamental(chern_cocycle(lift_logs(t)))


# JSON


def _pair(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def _unpair(arr) -> np.ndarray:
    a = np.asarray(arr, dtype=float).reshape(-1, 2)
    return a[:, 0] + 1j * a[:, 1]


def nerve_to_json(nerve: CoverNerve) -> dict:
    return {
        "name": nerve.name,
        "sets": list(nerve.set_ids),
        "overlaps": [
            {"pair": list(p.pair), "component": p.component, "samples": [_pair(z) for z in p.points]}
            for p in nerve.paths.values()
        ],
        "triples": [
            {"ids": list(t.triple), "component": t.component, "point": _pair(t.point),
             "refs": [{"pair": list(pair), "component": c, "index": idx} for pair, c, idx in t.refs]}
            for t in nerve.triples
        ],
        "faces": [{"ids": list(f.ids), "sign": f.sign, "component": f.component} for f in nerve.faces],
    }


def nerve_from_json(doc: Mapping) -> CoverNerve:
    try:
        paths = [OverlapPath(tuple(o["pair"]), int(o.get("component", 0)), _unpair(o["samples"]))
                 for o in doc["overlaps"]]
        triples = [
            TripleSample(tuple(t["ids"]), int(t.get("component", 0)), complex(*t["point"]),
                         tuple((tuple(r["pair"]), int(r.get("component", 0)), int(r["index"])) for r in t["refs"]))
            for t in doc.get("triples", [])
        ]
        faces = [Face(tuple(f["ids"]), int(f.get("sign", 1)), int(f.get("component", 0)))
                 for f in doc.get("faces", [])]
        return CoverNerve(doc["sets"], paths, triples, faces, doc.get("name", ""))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MaslovError):
            raise
        raise StructuralError(f"malformed nerve document: {exc!r}") from exc


def transition_to_json(t: TransitionData) -> dict:
    return {
        "kind": t.kind,
        "values": [
            {"pair": [i, j], "component": c, "values": [_pair(z) for z in v]}
            for (i, j, c), v in t.values.items()
        ],
    }


def transition_from_json(doc: Mapping, nerve: CoverNerve) -> TransitionData:
    try:
        vals = {(*e["pair"], int(e.get("component", 0))): _unpair(e["values"]) for e in doc["values"]}
        return TransitionData(nerve, vals, doc.get("kind", "GL1"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, MaslovError):
            raise
        raise StructuralError(f"malformed transition document: {exc!r}") from exc
