from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maslovgerbe.bundles import (
    R_SOUTH,
    SET_IDS,
    a_from_w,
    build_cp1_cover,
    frame_vectors,
    in_set,
    random_sphere_function,
)
from maslovgerbe.cech import (
    CechCocycle,
    CoverNerve,
    Face,
    OverlapPath,
    TransitionData,
    TripleSample,
    check_transition_cocycle,
    chern_cocycle,
    chern_number,
    evaluate_fundamental,
    inverse,
    lift_logs,
    nerve_from_json,
    nerve_to_json,
    perturb_by_coboundary,
    reduce_mod,
    square,
    tensor,
    transition_from_json,
    transition_to_json,
    unitarize,
)
from maslovgerbe.errors import (
    CocycleError,
    IntegralityError,
    MaslovError,
    NoFundamentalCycleError,
    StructuralError,
)

TETRA = ("a", "b", "c", "d")
TETRA_FACES = (("b", "c", "d"), ("a", "d", "c"), ("a", "b", "d"), ("a", "c", "b"))


def tetra_nerve(faces=True) -> CoverNerve:
    """Synthetic nerve of the boundary of a tetrahedron, one triple sample per triple."""
    triples = list(combinations(TETRA, 3))
    point = {t: complex(n + 1, 0.5 * n) for n, t in enumerate(triples)}
    paths, refs = [], {}
    for pair in combinations(TETRA, 2):
        ends = [t for t in triples if set(pair) <= set(t)]
        pts = [point[ends[0]], 0.5 * (point[ends[0]] + point[ends[1]]), point[ends[1]]]
        paths.append(OverlapPath(pair, 0, np.array(pts)))
        refs[(pair, ends[0])] = 0
        refs[(pair, ends[1])] = 2
    samples = []
    for t in triples:
        pairs = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])]
        samples.append(TripleSample(t, 0, point[t], tuple((p, 0, refs[(p, t)]) for p in pairs)))
    return CoverNerve(TETRA, paths, samples, [Face(f, 1) for f in TETRA_FACES] if faces else [], "tetra")


def constant_transitions(nerve, rng) -> TransitionData:
    """A flat coboundary: r_ij = g_j / g_i with constant nonzero g."""
    g = {s: complex(rng.normal(), rng.normal()) for s in nerve.set_ids}
    return TransitionData(nerve, {k: np.full(len(p), g[k[1]] / g[k[0]]) for k, p in nerve.paths.items()})


def test_tetra_faces_are_closed():
    assert tetra_nerve().faces_closed()


def test_open_faces_rejected():
    n = tetra_nerve()
    with pytest.raises(StructuralError):
        CoverNerve(n.set_ids, n.paths.values(), n.triples, [Face(f, 1) for f in TETRA_FACES[:3]])


def test_bad_reference_rejected():
    n = tetra_nerve(faces=False)
    t = n.triples[0]
    refs = tuple((pair, c, 1) for pair, c, _ in t.refs)
    with pytest.raises(StructuralError):
        CoverNerve(n.set_ids, n.paths.values(), [TripleSample(t.triple, 0, t.point, refs)])


def test_missing_path_rejected():
    n = tetra_nerve(faces=False)
    with pytest.raises(StructuralError):
        CoverNerve(n.set_ids, list(n.paths.values())[1:], n.triples)


def test_no_fundamental_cycle(rng):
    n = tetra_nerve(faces=False)
    c = chern_cocycle(lift_logs(constant_transitions(n, rng)))
    with pytest.raises(NoFundamentalCycleError):
        evaluate_fundamental(c)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_flat_coboundary_evaluates_to_zero(seed):
    rng = np.random.default_rng(seed)
    n = tetra_nerve()
    t = constant_transitions(n, rng)
    assert check_transition_cocycle(t).max_deviation < 1e-12
    offsets = {k: int(rng.integers(-4, 5)) for k in t.values}
    c = chern_cocycle(lift_logs(t, offsets))
    # brute force: c is an integer coboundary on a closed surface, so its boundary sum is zero
    assert evaluate_fundamental(c) == 0
    assert c.alternating_sum(TETRA) == 0
    assert c.is_antisymmetric()


@given(st.dictionaries(st.sampled_from(list(combinations(TETRA, 3))), st.integers(-5, 5), min_size=4, max_size=4))
def test_alternating_sum_matches_face_sum(vals):
    """On the tetrahedron the fundamental cycle is the boundary of (abcd), so both sums agree."""
    n = tetra_nerve()
    c = CechCocycle("Z", {(*k, 0): v for k, v in vals.items()}, n)
    direct = vals[("b", "c", "d")] - vals[("a", "c", "d")] + vals[("a", "b", "d")] - vals[("a", "b", "c")]
    assert c.alternating_sum(TETRA) == direct == evaluate_fundamental(c)


def test_antisymmetry_of_values():
    n = tetra_nerve()
    c = CechCocycle("Z", {(*k, 0): i + 1 for i, k in enumerate(combinations(TETRA, 3))}, n)
    assert c.value("a", "b", "c") == 1
    assert c.value("b", "a", "c") == -1
    assert c.value("c", "a", "b") == 1
    z2 = reduce_mod(c, 2)
    assert z2.value("a", "b", "c") == -1 and z2.value("a", "b", "d") == 1


def test_cocycle_failure_is_located(rng):
    n = tetra_nerve()
    t = constant_transitions(n, rng)
    vals = dict(t.values)
    key = ("a", "b", 0)
    vals[key] = vals[key] * np.array([1.0, 1.0, 1.01])
    bad = TransitionData(n, vals)
    rep = check_transition_cocycle(bad)
    assert not rep.passed and set(rep.worst[0]) >= {"a", "b"}
    with pytest.raises(CocycleError):
        check_transition_cocycle(bad, strict=True)


def test_integrality_error_on_inconsistent_data(rng):
    n = tetra_nerve()
    t = constant_transitions(n, rng)
    vals = dict(t.values)
    vals[("a", "b", 0)] = vals[("a", "b", 0)] * np.exp(0.3j)
    with pytest.raises(IntegralityError):
        chern_cocycle(lift_logs(TransitionData(n, vals)))


def test_transition_orientation_is_inverted():
    n = tetra_nerve()
    vals = {k: np.full(len(p), 2.0 + 0j) for k, p in n.paths.items()}
    vals.pop(("a", "b", 0))
    vals[("b", "a", 0)] = np.full(3, 4.0 + 0j)
    t = TransitionData(n, vals)
    assert np.allclose(t.values[("a", "b", 0)], 0.25)
    assert np.allclose(t.r("b", "a"), 4.0)


def test_zero_transition_rejected():
    n = tetra_nerve()
    vals = {k: np.ones(len(p), dtype=complex) for k, p in n.paths.items()}
    vals[("a", "c", 0)] = np.zeros(3)
    with pytest.raises(MaslovError):
        TransitionData(n, vals)


# ---- the CP1 cover -----------------------------------------------------------


def argument_principle_degree(d: int, m: int = 4000) -> int:
    """Winding of e_0 / e_S around the ccw circle |w| = 1, computed directly.

    e_0 annihilates the north-pole line (w = 0), e_S the south-pole line
    (w = infinity); each is the degree-d power of a linear form on v(w).
    """
    w = np.exp(2j * np.pi * np.arange(m + 1) / m)
    v = np.stack([1 - w, 1j * (1 + w)])
    north, south = np.array([1.0, 1j]), np.array([1.0, -1j])
    J = np.array([[0, 1], [-1, 0]])
    e0 = (north @ J @ v) ** d
    es = (south @ J @ v) ** d
    phase = np.unwrap(np.angle(e0 / es))
    return int(round((phase[-1] - phase[0]) / (2 * np.pi)))


def test_cover_geometry():
    # every point of the sphere lies in some set; the poles are where expected
    rng = np.random.default_rng(5)
    w = np.concatenate([rng.normal(size=3000) + 1j * rng.normal(size=3000), [0.0, 1e6, 1.0, -1.0]])
    covered = np.zeros(w.shape, dtype=bool)
    for s in SET_IDS:
        covered |= in_set(s, w)
    assert covered.all()
    assert all(in_set(s, np.array([0j]))[0] for s in ("1", "2", "3"))
    assert not in_set("0", np.array([0.0j]))[0]
    assert in_set("0", np.array([R_SOUTH * 1.01 + 0j]))[0]
    assert a_from_w(0.0) == pytest.approx(1j)


def test_frame_vectors_are_lagrangian_lines():
    for w in (0.3 + 0.2j, np.exp(0.7j), 1.7 - 0.1j):
        v = frame_vectors(w)
        assert v.shape[0] == 2
        a = v[1] / v[0]
        assert a == pytest.approx(a_from_w(w))


def test_path_points_lie_in_both_sets():
    nerve = build_cp1_cover(1).nerve
    for (i, j, _), p in nerve.paths.items():
        assert in_set(i, p.points).all() and in_set(j, p.points).all()
    for t in nerve.triples:
        assert all(in_set(s, np.array([t.point]))[0] for s in t.triple)


@pytest.mark.parametrize("d", range(-3, 4))
def test_cp1_chern_matches_argument_principle(d, cp1_covers):
    t = cp1_covers[d].transition
    assert check_transition_cocycle(t).max_deviation < 1e-9
    assert chern_number(t) == argument_principle_degree(d) == d


def test_argument_principle_oracle_sanity():
    assert argument_principle_degree(1) == 1 and argument_principle_degree(-2) == -2


def test_chern_additive_under_tensor(cp1_covers):
    for d1 in (-2, 1, 3):
        for d2 in (-1, 0, 2):
            assert chern_number(tensor(cp1_covers[d1].transition, cp1_covers[d2].transition)) == d1 + d2
    assert chern_number(inverse(cp1_covers[2].transition)) == -2
    assert chern_number(square(cp1_covers[1].transition)) == 2


def test_relifting_changes_cocycle_not_class(cp1_covers, rng):
    t = cp1_covers[1].transition
    base = chern_cocycle(lift_logs(t))
    offsets = {k: int(rng.integers(-3, 4)) for k in t.values}
    other = chern_cocycle(lift_logs(t, offsets))
    assert any(base.values[k] != other.values[k] for k in base.values) or all(v == 0 for v in offsets.values())
    assert evaluate_fundamental(other) == evaluate_fundamental(base) == 1


def test_coboundary_and_unitarize_preserve_class(cp1_covers, rng):
    t = cp1_covers[1].transition
    for _ in range(5):
        tp = perturb_by_coboundary(t, {s: random_sphere_function(rng) for s in SET_IDS})
        assert check_transition_cocycle(tp).passed
        assert chern_number(tp) == 1
    tu = unitarize(t)
    assert tu.kind == "U1" and chern_number(tu) == 1
    assert all(np.allclose(np.abs(v), 1) for v in tu.values.values())


def test_json_round_trip(cp1_covers):
    t = cp1_covers[2].transition
    nerve = nerve_from_json(nerve_to_json(t.nerve))
    back = transition_from_json(transition_to_json(t), nerve)
    assert nerve.summary() == t.nerve.summary()
    for k, v in t.values.items():
        assert np.array_equal(v, back.values[k])
    assert chern_number(back) == 2


def test_malformed_json_is_structural():
    with pytest.raises(StructuralError):
        nerve_from_json({"sets": ["a"]})
    with pytest.raises(StructuralError):
        transition_from_json({"values": [{"pair": ["a", "b"]}]}, tetra_nerve())
