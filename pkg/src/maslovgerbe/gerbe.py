"""Square-root gerbes of line bundles, their Giraud cocycles, and equator holonomy.

A gerbe is never built as a sheaf of groupoids.  Objects of the square-root
gerbe over a set are pairs (trivial line ``tau``, ``iota: tau^2 -> lambda``),
and ``iota`` is fixed by a nonvanishing local section ``e`` of ``lambda``;
so an object is stored as the values of ``e`` at its sample points.  An
isomorphism from the object of ``U_j`` to that of ``U_i`` is a scalar
``sigma_ij`` with ``sigma_ij^2 = r_ij``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .cech import (
    SNAP_TOL,
    CechCocycle,
    CoverNerve,
    LogLift,
    TransitionData,
    _edge_values,
    evaluate_fundamental,
)
from .errors import ConnectivityError, MaslovError, SnapError, StructuralError, TheoremViolation
from .phase import phase_increments, snap_root_of_unity


@dataclass(frozen=True, eq=False)
class GerbeObject:
    """Local square root of a line bundle, through its trivializing section.

    ``section[x]`` is the section of the underlying bundle at sample ``x``,
    measured in a fixed reference gauge shared by every object compared
    with this one.
    """

    domain: str
    section: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.section, dtype=complex)
        if np.any(s == 0):
            raise MaslovError(f"object on {self.domain} has a vanishing section")
        object.__setattr__(self, "section", s)

    def roots(self) -> np.ndarray:
        """The ``tau`` side: a continuous choice of ``sqrt(section)`` along the samples."""
        return _continuous_sqrt(self.section, f"object {self.domain}")

    def squares_to(self, values, tol: float = 1e-9) -> bool:
        r = self.roots()
        return bool(np.max(np.abs(r * r - np.asarray(values))) <= tol * np.max(np.abs(values)))


@dataclass(frozen=True, eq=False)
class GerbeIsomorphism:
    """``sigma`` from the object on ``source`` to the object on ``target`` along one overlap path."""

    target: str
    source: str
    component: int
    sigma: np.ndarray

    def intertwines(self, r_values, tol: float = 1e-9) -> bool:
        """``sigma^2`` equals the transition ``r_{target,source}`` at every sample."""
        r = np.asarray(r_values)
        return bool(np.max(np.abs(self.sigma ** 2 - r) / np.abs(r)) <= tol)

    def flipped(self) -> "GerbeIsomorphism":
        return GerbeIsomorphism(self.target, self.source, self.component, -self.sigma)


def _continuous_sqrt(values, where: str) -> np.ndarray:
    z = np.asarray(values, dtype=complex)
    inc = phase_increments(z, where=where)
    arg = np.angle(z[0]) + np.concatenate([[0.0], np.cumsum(inc)])
    return np.sqrt(np.abs(z)) * np.exp(0.5j * arg)


def sqrt_gerbe_isos(lift: LogLift) -> dict:
    """``sigma_ij = exp(pi i theta_ij)`` on every overlap path, keyed like the lift."""
    return {
        key: GerbeIsomorphism(key[0], key[1], key[2], np.exp(1j * np.pi * theta))
        for key, theta in lift.values.items()
    }


def check_isomorphisms(isos: Mapping, transitions: TransitionData, tol: float = 1e-9) -> bool:
    """Every ``sigma_ij`` squares to ``r_ij`` (the canonical objects are intertwined)."""
    if set(isos) != set(transitions.values):
        raise StructuralError("isomorphisms and transition data cover different overlaps",
                              sorted(set(isos) ^ set(transitions.values)))
    return all(isos[k].intertwines(transitions.values[k], tol) for k in isos)


def flip_isos(isos: Mapping, signs: Mapping) -> dict:
    """Multiply ``sigma`` on the listed overlap paths by -1 (a change of automorphism)."""
    return {k: (v.flipped() if signs.get(k, 1) < 0 else v) for k, v in isos.items()}


def giraud_cocycle(isos: Mapping, nerve: CoverNerve, tol: float = SNAP_TOL) -> CechCocycle:
    """``gamma_ijk = sigma_ij sigma_jk sigma_ki`` snapped into ``{+1, -1}``."""
    missing = [k for k in nerve.paths if k not in isos]
    if missing:
        raise StructuralError("isomorphisms missing on some overlaps", missing)
    values: dict = {}
    for s in nerve.triples:
        sij, sjk, sik = _edge_values(s, lambda key: isos[key].sigma)
        g = complex(sij * sjk / sik)
        snapped = snap_root_of_unity(g, 2, tol)
        if snapped is None:
            raise SnapError(f"gamma{s.triple} = {g:.6g} is not a square root of unity")
        key = (*s.triple, s.component)
        if key in values and values[key] != snapped:
            raise ConnectivityError(f"gamma{s.triple} is not constant on component {s.component}")
        values[key] = snapped
    return CechCocycle("Z2", values, nerve)


@dataclass
class TransportResult:
    value: complex
    raw: complex
    path: np.ndarray


def equator_holonomy(obj_plus: GerbeObject, obj_minus: GerbeObject, equator=None) -> complex:
    """Holonomy of ``O+ (x) O-^-1`` around a closed sample loop.

    A local section of ``O+ (x) O-^-1`` is an isomorphism ``O- -> O+``, a
    scalar ``s`` with ``s^2 e+ = e-``.  It is transported by always taking
    the square root of ``e-/e+`` closest to the previous one; the returned
    value is the transported ``s`` back at the start divided by the initial
    ``s``, snapped to a root of unity.  Both objects must be sampled on the
    same closed loop, last sample equal to the first point.
    """
    return equator_transport(obj_plus, obj_minus, equator).value


def equator_transport(obj_plus: GerbeObject, obj_minus: GerbeObject, equator=None) -> TransportResult:
    if len(obj_plus.section) != len(obj_minus.section):
        raise StructuralError("hemisphere objects are sampled at different equator points")
    if equator is not None and len(equator) != len(obj_plus.section):
        raise StructuralError("objects are not defined at every equator sample")
    ratio = obj_minus.section / obj_plus.section
    phase_increments(ratio, where="equator ratio")
    s = np.empty_like(ratio)
    s[0] = np.sqrt(ratio[0])
    for x in range(1, len(ratio)):
        root = np.sqrt(ratio[x])
        s[x] = root if abs(root - s[x - 1]) <= abs(root + s[x - 1]) else -root
    raw = s[-1] / s[0]
    value = snap_root_of_unity(raw, 2, SNAP_TOL)
    if value is None:
        raise SnapError(f"equator holonomy {raw:.6g} is not a square root of unity; loop not closed?")
    return TransportResult(value, raw, s)


@dataclass
class EquatorReport:
    giraud_evaluation: complex
    equator_holonomy: complex
    max_deviation: float

    @property
    def equal(self) -> bool:
        return self.giraud_evaluation == self.equator_holonomy

    def to_json(self) -> dict:
        z = self.giraud_evaluation
        h = self.equator_holonomy
        return {
            "giraud_evaluation": [float(z.real), float(z.imag)],
            "equator_holonomy": [float(h.real), float(h.imag)],
            "equal": self.equal,
            "max_deviation": self.max_deviation,
        }


def verify_equator_theorem(nerve: CoverNerve, isos: Mapping, obj_plus: GerbeObject, obj_minus: GerbeObject,
                           equator=None, strict: bool = True) -> EquatorReport:
    """Evaluate the Giraud cocycle on the fundamental cycle and compare with the equator holonomy."""
    giraud = evaluate_fundamental(giraud_cocycle(isos, nerve), nerve)
    transport = equator_transport(obj_plus, obj_minus, equator)
    report = EquatorReport(giraud, transport.value, float(abs(transport.raw - transport.value)))
    if strict and not report.equal:
        raise TheoremViolation("Giraud evaluation and equator holonomy disagree", report.to_json())
    return report
