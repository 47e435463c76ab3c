"""The verification suite behind ``maslov verify``.

Every check is a function of a seeded generator returning ``(passed,
values, tolerances)``.  Each check gets its own generator derived from the
suite seed and its position, so results do not depend on which checks run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .bundles import (
    BranchConvention,
    build_cp1_cover,
    maslov_gerbe_class,
    maslov_holonomy,
    maslov_holonomy_general,
    random_sphere_function,
    regauge_cover,
)
from .cech import (
    INTEGER_TOL,
    TransitionData,
    _edge_values,
    check_transition_cocycle,
    chern_cocycle,
    chern_number,
    evaluate_fundamental,
    lift_logs,
    perturb_by_coboundary,
    square,
    tensor,
    unitarize,
)
from .charts import maslov_index, maslov_section, slope_coords, transversality_defect
from .gerbe import giraud_cocycle, sqrt_gerbe_isos, verify_equator_theorem
from .symplectic import (
    direct_sum_loop,
    lagrangian_meeting,
    line_frame,
    loop_from_json,
    loop_to_json,
    random_gauge,
    random_lagrangian,
    random_line_loop,
    rotation_line_loop,
    sp_graph_loop,
)

SAMPLES = 720


@dataclass
class VerificationReport:
    check_id: str
    title: str
    status: str  # "pass", "fail" or "skipped"
    values: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    runtime: float = 0.0

    def to_json(self) -> dict:
        return {
            "check": self.check_id,
            "title": self.title,
            "status": self.status,
            "values": jsonable(self.values),
            "tolerances": jsonable(self.tolerances),
            "runtime": round(self.runtime, 4),
        }


def jsonable(obj):
    """Recursively replace numpy scalars and complex numbers by JSON types."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _giraud_value(t: TransitionData) -> complex:
    return evaluate_fundamental(giraud_cocycle(sqrt_gerbe_isos(lift_logs(t)), t.nerve))


def _sign(z) -> int:
    return int(np.rint(np.real(z)))


# ---- acceptance criteria ----------------------------------------------------


def check_index_generator(rng):
    values, slow = {}, []
    for k in range(-5, 6):
        start = time.perf_counter()
        loop = loop_from_json(loop_to_json(rotation_line_loop(k, SAMPLES)))
        values[str(k)] = maslov_index(loop)
        if time.perf_counter() - start >= 1.0:
            slow.append(k)
    ok = all(values[str(k)] == k for k in range(-5, 6)) and not slow
    return ok, {"index": values, "slow": slow}, {"runtime_per_loop_s": 1.0}


def check_sp_embedding(rng):
    loop = sp_graph_loop(SAMPLES)
    idx = maslov_index(loop)
    hol = maslov_holonomy_general(loop)
    return idx == 2 and hol.value == -1, {"index": idx, "holonomy": hol.name}, {"exact": True}


def check_holonomy_index_law(rng):
    start = time.perf_counter()
    bad, indices = [], []
    for n in range(50):
        loop = random_line_loop(rng)
        idx = maslov_index(loop)
        indices.append(idx)
        hol = maslov_holonomy(loop).value
        sq = maslov_holonomy(loop, squared=True).value
        if hol != 1j ** (idx % 4) or sq != (-1) ** (idx % 2) or sq != hol ** 2:
            bad.append(n)
    elapsed = time.perf_counter() - start
    return (not bad and elapsed < 5.0), {"failures": bad, "indices": indices, "elapsed_s": elapsed}, {"total_s": 5.0}


def check_rotation_holonomy(rng):
    loop = rotation_line_loop(1, SAMPLES)
    plus = maslov_holonomy(loop, BranchConvention(1j)).value
    minus = maslov_holonomy(loop, BranchConvention(-1j)).value
    return plus == 1j and minus == -1j, {"+i": str(plus), "-i": str(minus)}, {"exact": True}


def check_cp1_chern(rng):
    start = time.perf_counter()
    cover = build_cp1_cover(1)
    report = check_transition_cocycle(cover.transition)
    lift = lift_logs(cover.transition)
    worst = 0.0
    for s in cover.nerve.triples:
        tij, tjk, tik = _edge_values(s, lift.values.__getitem__)
        total = complex(tij + tjk - tik)
        worst = max(worst, abs(total - np.rint(total.real)))
    c = chern_cocycle(lift)
    value = evaluate_fundamental(c)
    elapsed = time.perf_counter() - start
    ok = report.max_deviation < 1e-9 and worst < INTEGER_TOL and value == 1 and elapsed < 2.0
    return ok, {"cocycle_deviation": report.max_deviation, "integrality_deviation": worst,
                "evaluation": value, "elapsed_s": elapsed}, \
        {"cocycle": 1e-9, "integrality": INTEGER_TOL, "runtime_s": 2.0}


def check_gamma_parity(rng):
    mismatches = []
    for d in range(-3, 4):
        cover = build_cp1_cover(d)
        lift = lift_logs(cover.transition)
        c = chern_cocycle(lift)
        g = giraud_cocycle(sqrt_gerbe_isos(lift), cover.nerve)
        for key, n in c.values.items():
            if g.values[key] != (-1) ** (n % 2):
                mismatches.append([d, list(key)])
    return not mismatches, {"mismatches": mismatches}, {"snap": 1e-6}


def check_dual_route(rng):
    values, ok = {}, True
    for d in range(-3, 4):
        cover = build_cp1_cover(d)
        isos = sqrt_gerbe_isos(lift_logs(cover.transition))
        rep = verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_minus, cover.equator, strict=False)
        values[str(d)] = [_sign(rep.giraud_evaluation), _sign(rep.equator_holonomy)]
        ok &= rep.equal and rep.giraud_evaluation == (-1) ** (d % 2)
    base = build_cp1_cover(1)
    regauged = []
    for _ in range(10):
        cover, isos = regauge_cover(base, rng)
        rep = verify_equator_theorem(cover.nerve, isos, cover.obj_plus, cover.obj_minus, cover.equator, strict=False)
        regauged.append([_sign(rep.giraud_evaluation), _sign(rep.equator_holonomy)])
        ok &= rep.equal and rep.giraud_evaluation == -1
    values["regauged"] = regauged
    return ok, values, {"exact_after_snap": 1e-6}


def check_gerbe_class(rng):
    rep = maslov_gerbe_class(1)
    even = {str(d): _sign(maslov_gerbe_class(d).value) for d in (-2, 0, 2)}
    squares = {str(d): _sign(_giraud_value(square(build_cp1_cover(d).transition))) for d in range(-3, 4)}
    ok = (rep.value == -1 and rep.chern_evaluation == 1 and rep.equal and rep.structure_group_relation
          and all(v == 1 for v in even.values()) and all(v == 1 for v in squares.values()))
    return ok, {"value": _sign(rep.value), "chern": rep.chern_evaluation, "even_degrees": even,
                "squares": squares, "structure_group_relation": rep.structure_group_relation}, {"exact": True}


def check_divisor(rng):
    miss, counts = {}, {}
    for n in (1, 2, 3):
        wrong, meeting = 0, 0
        for m in range(200):
            L0 = random_lagrangian(n, rng)
            k = int(rng.integers(0, n + 1)) if m % 2 else 0
            L = lagrangian_meeting(L0, k, rng) if k else random_lagrangian(n, rng)
            sec = maslov_section(L, L0)
            defect = transversality_defect(L, L0)
            meeting += defect > 0
            if sec.vanishes(1e-9) != (defect > 0):
                wrong += 1
        miss[str(n)], counts[str(n)] = wrong, meeting
    return all(v == 0 for v in miss.values()), {"misclassified": miss, "meeting_count": counts}, \
        {"section_rtol": 1e-9}


def check_class_invariance(rng):
    cover = build_cp1_cover(1)
    t = cover.transition
    chern0, giraud0 = chern_number(t), _giraud_value(t)
    changed = 0
    for _ in range(50):
        b = {s: random_sphere_function(rng) for s in cover.nerve.set_ids}
        tp = perturb_by_coboundary(t, b)
        if chern_number(tp) != chern0 or _giraud_value(tp) != giraud0:
            changed += 1
    tu = unitarize(t)
    unit_ok = chern_number(tu) == chern0 and _giraud_value(tu) == giraud0
    return changed == 0 and unit_ok, {"chern": chern0, "giraud": _sign(giraud0), "changed": changed,
                                      "unitarized_same": unit_ok}, {"exact": True}


# ---- module properties ------------------------------------------------------


def check_symplectic_properties(rng):
    cancel = {}
    for k in range(1, 4):
        loop = rotation_line_loop(k, SAMPLES).concat(rotation_line_loop(-k, SAMPLES))
        cancel[str(k)] = maslov_index(loop)
    planar = rotation_line_loop(1, SAMPLES)
    kept = 0
    for _ in range(20):
        n = int(rng.integers(1, 3))
        kept += maslov_index(direct_sum_loop(planar, random_lagrangian(n, rng))) == 1
    ok = all(v == 0 for v in cancel.values()) and kept == 20
    return ok, {"round_trip_index": cancel, "direct_sum_preserved": kept}, {"exact": True}


def check_chart_properties(rng):
    worst = 0.0
    for _ in range(500):
        a_true = rng.normal() * 10 ** rng.uniform(-3, 3) * rng.choice([-1, 1])
        a, b = slope_coords(line_frame(np.arctan(a_true)))
        worst = max(worst, abs(b.value * a.value - 1))
    loop = random_line_loop(rng)
    idx = maslov_index(loop)
    gauged = loop.gauged([random_gauge(1, rng) for _ in loop.samples])
    invariants = {
        "gauge": maslov_index(gauged) == idx,
        "resample": maslov_index(loop.refined()) == idx,
        "cyclic": maslov_index(loop.rotated(int(rng.integers(1, len(loop) - 1)))) == idx,
        "reverse": maslov_index(loop.reversed()) == -idx,
    }
    invariants["concat"] = maslov_index(rotation_line_loop(2, SAMPLES).concat(rotation_line_loop(-3, SAMPLES))) == -1
    ks = {str(k): maslov_index(rotation_line_loop(k, SAMPLES)) for k in range(-5, 6)}
    ok = worst < 1e-12 and all(invariants.values()) and all(int(k) == v for k, v in ks.items())
    return ok, {"chart_rel_error": worst, "invariants": invariants, "index_of_rotation": ks}, {"chart_rel": 1e-12}


def check_cech_properties(rng):
    t = build_cp1_cover(1).transition
    base = chern_number(t)
    relifted = []
    for _ in range(10):
        offsets = {k: int(rng.integers(-3, 4)) for k in t.values}
        relifted.append(evaluate_fundamental(chern_cocycle(lift_logs(t, offsets))))
    additive = True
    covers = {d: build_cp1_cover(d).transition for d in range(-3, 4)}
    for d1 in range(-3, 4):
        for d2 in range(-3, 4):
            if abs(d1 + d2) <= 6 and chern_number(tensor(covers[d1], covers[d2])) != d1 + d2:
                additive = False
    anti = chern_cocycle(lift_logs(t)).is_antisymmetric()
    ok = all(v == base for v in relifted) and additive and anti
    return ok, {"relifted": relifted, "additive": additive, "antisymmetric": anti}, {"exact": True}


def check_gerbe_properties(rng):
    mism = []
    for d in range(-3, 4):
        t = build_cp1_cover(d).transition
        if _giraud_value(t) != (-1) ** (chern_number(t) % 2):
            mism.append(d)
    return not mism, {"parity_mismatch": mism}, {"exact": True}


def check_convention_flip(rng):
    bad = 0
    for _ in range(20):
        loop = random_line_loop(rng)
        plus = maslov_holonomy(loop, BranchConvention(1j)).value
        minus = maslov_holonomy(loop, BranchConvention(-1j)).value
        bad += minus != np.conj(plus)
    return bad == 0, {"violations": bad}, {"exact": True}


def check_fault_injection(rng):
    cover = build_cp1_cover(1)
    key = sorted(cover.transition.values)[int(rng.integers(0, len(cover.transition.values)))]
    vals = dict(cover.transition.values)
    vals[key] = vals[key] * 1.001
    report = check_transition_cocycle(TransitionData(cover.nerve, vals))
    located = report.worst is not None and set(key[:2]) <= set(report.worst[0])
    return (not report.passed) and located, {"perturbed": list(key), "deviation": report.max_deviation,
                                             "located_triple": list(report.worst[0])}, {"cocycle": 1e-9}


CHECKS = (
    ("C1-index-generator", "index of rotation loops equals k", check_index_generator),
    ("C2-sp-embedding", "graph loop of Sp(V) has index 2 and holonomy -1", check_sp_embedding),
    ("C3-holonomy-law", "Z4 holonomy equals i^index, its square the arg holonomy", check_holonomy_index_law),
    ("C4-rotation-holonomy", "half-turn holonomy is +-i by branch", check_rotation_holonomy),
    ("C5-cp1-chern", "Chern cocycle of the CP1 cover evaluates to +1", check_cp1_chern),
    ("C6-gamma-parity", "gamma_ijk = (-1)^c_ijk on every face", check_gamma_parity),
    ("C7-dual-route", "Giraud evaluation equals equator holonomy", check_dual_route),
    ("C8-gerbe-class", "Maslov gerbe class is -1, squares are trivial", check_gerbe_class),
    ("C9-divisor", "section vanishes exactly on the Maslov cycle", check_divisor),
    ("C10-class-invariance", "classes survive coboundaries and unitarization", check_class_invariance),
    ("P-symplectic", "loop constructions and direct sums", check_symplectic_properties),
    ("P-charts", "chart consistency and index invariances", check_chart_properties),
    ("P-cech", "relifting, additivity, antisymmetry", check_cech_properties),
    ("P-gerbe", "Giraud evaluation is the parity of the Chern evaluation", check_gerbe_properties),
    ("P-convention", "flipping the branch conjugates holonomy", check_convention_flip),
    ("F-fault-injection", "perturbed r_ij is caught and located", check_fault_injection),
)


def run_check(position: int, seed: int = 0) -> VerificationReport:
    check_id, title, fn = CHECKS[position]
    rng = np.random.default_rng([seed, position])
    start = time.perf_counter()
    try:
        ok, values, tol = fn(rng)
        status = "pass" if ok else "fail"
    except Exception as exc:  # a crash is a failed check, reported rather than raised
        status, values, tol = "fail", {"error": f"{type(exc).__name__}: {exc}"}, {}
    return VerificationReport(check_id, title, status, values, tol, time.perf_counter() - start)


def run_suite(seed: int = 0, only: list | None = None) -> list:
    """Run every check, or those whose id or leading token (``C3``, ``P``) is in ``only``."""
    reports = []
    for pos, (check_id, title, _) in enumerate(CHECKS):
        if only and not any(o in (check_id, check_id.split("-")[0]) for o in only):
            reports.append(VerificationReport(check_id, title, "skipped"))
            continue
        reports.append(run_check(pos, seed))
    return reports
