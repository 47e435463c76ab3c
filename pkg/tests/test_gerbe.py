from __future__ import annotations

from itertools import product

import numpy as np
import pytest

from maslovgerbe.bundles import regauge_cover
from maslovgerbe.cech import chern_cocycle, evaluate_fundamental, lift_logs, square, unitarize
from maslovgerbe.errors import SnapError, StructuralError, TheoremViolation
from maslovgerbe.gerbe import (
    GerbeObject,
    check_isomorphisms,
    equator_holonomy,
    flip_isos,
    giraud_cocycle,
    sqrt_gerbe_isos,
    verify_equator_theorem,
)


def giraud_value(t, isos=None):
    isos = isos if isos is not None else sqrt_gerbe_isos(lift_logs(t))
    return evaluate_fundamental(giraud_cocycle(isos, t.nerve))


@pytest.mark.parametrize("d", range(-3, 4))
def test_gamma_is_parity_of_chern_on_every_face(d, cp1_covers):
    lift = lift_logs(cp1_covers[d].transition)
    c = chern_cocycle(lift)
    g = giraud_cocycle(sqrt_gerbe_isos(lift), c.nerve)
    for key, n in c.values.items():
        assert g.values[key] == (-1) ** (n % 2)


def test_isomorphisms_square_to_transitions(cp1_covers):
    t = cp1_covers[1].transition
    isos = sqrt_gerbe_isos(lift_logs(t))
    assert check_isomorphisms(isos, t)
    assert check_isomorphisms(flip_isos(isos, {k: -1 for k in isos}), t)


def test_all_sign_flips_leave_class_unchanged(cp1_covers):
    """Brute force over every choice of sign of sigma on the six overlaps."""
    t = cp1_covers[1].transition
    isos = sqrt_gerbe_isos(lift_logs(t))
    keys = sorted(isos)
    assert len(keys) == 6
    seen = set()
    for signs in product((1, -1), repeat=len(keys)):
        seen.add(giraud_value(t, flip_isos(isos, dict(zip(keys, signs)))))
    assert seen == {-1}


def test_single_flip_changes_cocycle_values(cp1_covers):
    t = cp1_covers[1].transition
    isos = sqrt_gerbe_isos(lift_logs(t))
    key = sorted(isos)[0]
    g0 = giraud_cocycle(isos, t.nerve)
    g1 = giraud_cocycle(flip_isos(isos, {key: -1}), t.nerve)
    assert g0.values != g1.values


@pytest.mark.parametrize("d", range(-3, 4))
def test_two_routes_agree(d, cp1_covers):
    cover = cp1_covers[d]
    isos = sqrt_gerbe_isos(lift_logs(cover.transition))
    rep = verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_minus, cover.equator)
    assert rep.equal and rep.giraud_evaluation == (-1) ** (d % 2)
    assert rep.max_deviation < 1e-9


def test_regauged_routes_agree(cp1_covers, rng):
    for _ in range(20):
        cover, isos = regauge_cover(cp1_covers[1], rng)
        rep = verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_minus, cover.equator)
        assert rep.giraud_evaluation == rep.equator_holonomy == -1


def test_squares_and_unitarization(cp1_covers):
    for d in range(-3, 4):
        t = cp1_covers[d].transition
        assert giraud_value(square(t)) == 1
        assert giraud_value(unitarize(t)) == giraud_value(t)


def test_equator_holonomy_of_plain_winding():
    t = np.linspace(0, 2 * np.pi, 400)
    one = GerbeObject("+", np.ones_like(t))
    for k in range(-3, 4):
        assert equator_holonomy(one, GerbeObject("-", np.exp(1j * k * t))) == (-1) ** (k % 2)


def test_mismatched_objects_raise(cp1_covers):
    cover = cp1_covers[1]
    isos = sqrt_gerbe_isos(lift_logs(cover.transition))
    with pytest.raises(TheoremViolation):
        verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_plus, cover.equator)
    rep = verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_plus, cover.equator, strict=False)
    assert not rep.equal and rep.to_json()["equal"] is False


def test_open_equator_does_not_snap():
    t = np.linspace(0, np.pi, 200)
    with pytest.raises(SnapError):
        equator_holonomy(GerbeObject("+", np.ones_like(t)), GerbeObject("-", np.exp(1j * t)))


def test_structure_checks(cp1_covers):
    cover = cp1_covers[1]
    isos = sqrt_gerbe_isos(lift_logs(cover.transition))
    isos.pop(sorted(isos)[0])
    with pytest.raises(StructuralError):
        giraud_cocycle(isos, cover.nerve)
    with pytest.raises(StructuralError):
        equator_holonomy(cover.obj_plus, GerbeObject("-", cover.obj_minus.section[:-1]))


def test_object_roots():
    t = np.linspace(0, 2 * np.pi, 300)
    obj = GerbeObject("x", 2.0 * np.exp(1j * t))
    assert obj.squares_to(obj.section)
    r = obj.roots()
    assert r[-1] == pytest.approx(-r[0])
    with pytest.raises(Exception):
        GerbeObject("y", np.array([1.0, 0.0]))
