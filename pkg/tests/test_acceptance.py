"""Acceptance suite: twelve end-to-end criteria at their stated tolerances.

Each test prints one ``[AC-nn] PASS|FAIL`` line (visible in ``pytest -v``
output) and then asserts.  Run ``python3 tests/test_acceptance.py`` for the
lines alone.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.optimize import bisect

from catenary.blocks import Block, cocycle_check, hit_times
from catenary.discrete import (
    LAMBDA_U,
    DiscreteCatenarySpec,
    PairSuspension,
    SymbolicPoint,
    catenary_roots,
    discrete_catenary_bvp,
    full_shift,
    hausdorff_pair_metric,
    local_metric,
    pair_system,
    recurrence_residuals,
    second_difference,
    shift_metric,
    suspension_catenary_orbit,
)
from catenary.fields import (
    BVPSpec,
    ScalarField,
    catenary_bvp,
    catenary_sum_field,
    exact_decay_lyapunov,
    linear_pseudometric,
    verify_catenary,
)
from catenary.flows import (
    FakeSingularitySpec,
    LinearModelSpec,
    make_fake_singularity,
    make_linear_attractor,
    orbit_trace,
)
from catenary.metric import (
    FinitePointSet,
    LocalMetric,
    farthest_point_refs,
    glue_local_metric,
    hausdorff_distance,
    metric_axioms_check,
    whitney_size,
)
from catenary.scenario import bundled, random_shift_pair, run_scenario, verify_suite
from catenary import sections as sec
from catenary.systems import contraction, l1, saddle, saddle_hit_times, saddle_ode

BLOCK = Block(l1, 1.0, lam=[[0.0, 0.0]], vectorized=True)
SADDLE_L = catenary_sum_field(ScalarField(lambda z: abs(z[0])), ScalarField(lambda z: abs(z[1])))


@pytest.fixture
def report(capsys):
    def emit(n, title, ok, detail, started):
        line = f"[AC-{n:02d}] {'PASS' if ok else 'FAIL'} {title}: {detail} ({time.perf_counter() - started:.2f}s)"
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return emit


def criterion_01():
    g = np.linspace(-0.5, 0.5, 100)
    grid = [np.array([x, y]) for x in g for y in g]
    rep = verify_catenary(SADDLE_L, saddle(), grid, drift_points=[np.array([0.003, 0.9]), np.array([-0.006, 0.5])])
    ok = rep.max_residual <= 1e-6 and not rep.hyperbolicity_violations and rep.drift <= 1e-8
    return ok, (f"max|L''-L|={rep.max_residual:.2e} <= 1e-6, hyperbolicity violations={len(rep.hyperbolicity_violations)}, "
                f"drift={rep.drift:.2e} <= 1e-8 on 100x100")


def _bisect_hit(x, direction):
    g = lambda t: abs(x[0]) * math.exp(direction * t) + abs(x[1]) * math.exp(-direction * t) - 1.0  # noqa: E731
    return direction * bisect(g, 0.0, 60.0, xtol=1e-14)


def criterion_02():
    sys = saddle()
    spec = BVPSpec(lambda z: 1.0)
    rng = np.random.default_rng(20)
    transient = list(rng.uniform(-0.5, 0.5, size=(40, 2)))
    ws = [np.array([0.0, v]) for v in (0.1, 0.5, -0.9)]
    wu = [np.array([v, 0.0]) for v in (0.2, -0.6, 0.95)]
    lam = [np.zeros(2)]
    err = max(abs(catenary_bvp(sys, BLOCK, spec, z) - l1(z)) for z in transient + ws + wu + lam)
    hit_err = 0.0
    for z in transient:
        ts, tu = saddle_hit_times(z)
        ht = hit_times(sys, BLOCK, z)
        hit_err = max(hit_err, abs(tu - _bisect_hit(z, 1)), abs(ts - _bisect_hit(z, -1)),
                      abs(ht.t_u - tu), abs(ht.t_s - ts))
    ok = err <= 1e-6 and hit_err <= 1e-8
    return ok, f"max|bvp-|x|-|y||={err:.2e} <= 1e-6 over transient/Ws/Wu/Lambda, hit-time oracle gap={hit_err:.2e} <= 1e-8"


def criterion_03():
    x = np.array([0.1, 0.5])
    tu_want = math.log((1 + math.sqrt(0.8)) / 0.2)
    ts_want = math.log((1 - math.sqrt(0.8)) / 0.2)
    ht = hit_times(saddle(), BLOCK, x)
    gap = max(abs(ht.t_u - tu_want), abs(ht.t_s - ts_want))
    ts_ = (-0.5, 0.3, 1.0)
    coc = max(cocycle_check(saddle(), BLOCK, x, t) for t in ts_)
    coc_rk4 = max(cocycle_check(saddle_ode(1e-3), BLOCK, x, t) for t in ts_)
    ok = gap <= 1e-8 and coc <= 1e-8 and coc_rk4 <= 1e-6
    return ok, f"hit-time gap={gap:.2e} <= 1e-8, cocycle closed form={coc:.2e} <= 1e-8, RK4 h=1e-3={coc_rk4:.2e} <= 1e-6"


def criterion_04():
    rng = np.random.default_rng(40)
    ps = pair_system(full_shift())
    metric = lambda p: shift_metric(*p)  # noqa: E731
    worst = 0.0
    for _ in range(200):
        pair = random_shift_pair(rng, 1.0)
        worst = max(worst, abs(second_difference(metric, ps, pair) - metric(pair)))
    ls, lu = catenary_roots()
    roots = max(abs(ls * lu - 1), abs(ls + lu - 3))
    ok = worst <= 1e-12 and roots <= 1e-15 and lu == pytest.approx((3 + math.sqrt(5)) / 2, abs=1e-15)
    return ok, f"200 pairs max|sd-d|={worst:.2e} <= 1e-12, root identities={roots:.1e} <= 1e-15"


def criterion_05():
    rng = np.random.default_rng(50)
    spec = DiscreteCatenarySpec(delta=0.5, N_max=40)
    worst = 0.0
    for _ in range(100):
        res = discrete_catenary_bvp(full_shift(), spec, random_shift_pair(rng, 0.5, strict=False))
        rr = recurrence_residuals(res.values)
        if len(rr):
            worst = max(worst, float(np.max(np.abs(rr))))
    return worst <= 1e-10, f"100 pairs max|u+ - 3u + u-|={worst:.2e} <= 1e-10"


def criterion_06():
    rng = np.random.default_rng(60)
    lin = make_linear_attractor(LinearModelSpec([[1.0, 0.0], [1.0, 2.0], [1.0, -1.0], [1.0, 0.5]]))
    lin_err = 0.0
    for _ in range(50):
        x, y = (rng.uniform(0, 1), int(rng.integers(4))), (rng.uniform(0, 1), int(rng.integers(4)))
        d = linear_pseudometric(lin, x, y)
        t = float(rng.uniform(0, 5))
        rx, ry = lin.advance(x, t), lin.advance(y, t)
        if rx.interior and ry.interior:
            lin_err = max(lin_err, abs(linear_pseudometric(lin, rx.point, ry.point) - math.exp(-t) * d))
    sys = contraction()
    V = lambda z: float(np.linalg.norm(z))  # noqa: E731
    decay_err, quad_excess = 0.0, -math.inf
    for _ in range(100):
        x = rng.uniform(-2, 2, 2)
        t = float(rng.uniform(0, 5))
        L0 = exact_decay_lyapunov(sys, V, 1.0, 2.0, x)
        Lt = exact_decay_lyapunov(sys, V, 1.0, 2.0, sys(x, t))
        decay_err = max(decay_err, abs(Lt - math.exp(-2 * t) * L0) / max(L0, 1.0))
        # with level 1 and a = 2 the bound constant is l = 1
        quad_excess = max(quad_excess, L0 - float(x @ x) * (1 + 1e-12))
    ok = lin_err <= 1e-12 and decay_err <= 1e-8 and quad_excess <= 0
    return ok, (f"linear pseudo-metric err={lin_err:.2e} <= 1e-12, exact decay err={decay_err:.2e} <= 1e-8, "
                f"L - |x|^2 max={quad_excess:.2e} <= 0 on 100 samples")


def criterion_07():
    rng = np.random.default_rng(70)
    counts = {}
    sets = [tuple(map(tuple, rng.uniform(-1, 1, size=(rng.integers(1, 5), 2)))) for _ in range(14)]
    rep = metric_axioms_check(hausdorff_distance, sets, tol=1e-12, same=lambda a, b: set(a) == set(b))
    counts["hausdorff"] = (sum(rep.counts.values()), rep.triples_checked)

    pts = rng.uniform(0, 1, size=(40, 2))
    D = LocalMetric(lambda x, y, z: float(np.linalg.norm(np.array([[2.0, 0.5], [0.0, 1.0]]) @ (np.asarray(y) - np.asarray(z)))),
                    radius=0.35)
    rho = glue_local_metric(list(pts), 0.35, D)
    idx = list(range(len(pts)))
    rep = metric_axioms_check(lambda i, j: rho[i, j], idx, tol=1e-12, triples=600, rng=rng, same=lambda i, j: i == j)
    counts["glued"] = (sum(rep.counts.values()), rep.triples_checked)

    dp = hausdorff_pair_metric(shift_metric)
    x = random_shift_pair(rng, 0.5)[0]
    near = []
    while len(near) < 14:
        c = SymbolicPoint(x.support ^ {int(n) for n in rng.integers(2, 9, size=rng.integers(0, 3))})
        if c not in near:
            near.append(c)
    rep = metric_axioms_check(lambda a, b: local_metric(dp, x, a, b), near, triples=600, rng=rng, same=lambda a, b: a == b)
    counts["local"] = (sum(rep.counts.values()), rep.triples_checked)

    susp, spec, base, pts_s = _sectional_setup(12)
    dpair = sec.suspension_section_pseudometric(susp.period)
    dist = sec.suspension_shift_distance(susp.period)
    rep = metric_axioms_check(lambda a, b: sec.sectional_metric(dpair, base, a, b), pts_s, triples=600, rng=rng,
                              same=lambda a, b: dist(a, b) == 0)
    counts["sectional"] = (sum(rep.counts.values()), rep.triples_checked)

    sample = [tuple(p) for p in rng.uniform(-1, 1, size=(30, 2))]
    wspec = farthest_point_refs(sample, depth=16)
    mono = 0
    for _ in range(1000):
        B = [sample[i] for i in rng.choice(30, size=int(rng.integers(2, 10)), replace=False)]
        A = B[: int(rng.integers(1, len(B) + 1))]
        if not whitney_size(A, wspec) <= whitney_size(B, wspec):
            mono += 1
    ok = all(v == 0 and n >= 500 for v, n in counts.values()) and mono == 0
    parts = ", ".join(f"{k} {v} violations/{n} triples" for k, (v, n) in counts.items())
    return ok, f"{parts}; Whitney monotonicity failures={mono}/1000"


def criterion_08():
    rng = np.random.default_rng(80)
    pts = rng.uniform(0, 1, size=(200, 2))
    delta = 0.15
    A = np.array([[1.5, 0.3], [0.0, 0.8]])
    D = LocalMetric(lambda x, y, z: float(np.linalg.norm(A @ (np.asarray(y) - np.asarray(z)))), radius=delta)
    mins = D.minimizing_violations(list(pts))
    rho = glue_local_metric(list(pts), delta, D)
    P = FinitePointSet(list(pts))
    M = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    mism = 0
    for i, j in zip(*np.nonzero(M < delta)):
        if rho[i, j] != D(P[i], P[i], P[j]):
            mism += 1
    tri = rho[:, None, :] - (rho[:, :, None] + rho[None, :, :])
    worst = float(np.max(tri))
    ok = not mins and mism == 0 and worst <= 0.0
    return ok, (f"locally-minimizing violations={len(mins)}, rho != D_x(x,y) on {mism} close pairs, "
                f"max triangle excess={worst:.2e} <= 0 on 200 points")


def criterion_09():
    rng = np.random.default_rng(90)
    susp = PairSuspension(full_shift(), delta=0.5)
    worst, lens = 0.0, []
    for _ in range(20):
        pair = random_shift_pair(rng, 0.5, strict=False)
        _, vals = suspension_catenary_orbit(susp, pair, 15)
        lens.append(len(vals))
        if len(vals) >= 3:
            worst = max(worst, float(np.max(np.abs(recurrence_residuals(vals)))))
    ok = worst <= 1e-6 and math.exp(susp.flow.period) == pytest.approx(LAMBDA_U, rel=1e-14)
    return ok, f"20 orbits (lengths {min(lens)}-{max(lens)}) max recurrence residual={worst:.2e} <= 1e-6, e^T=lambda_u"


def _sectional_setup(n):
    rng = np.random.default_rng(100)
    susp = sec.suspended_shift()
    T = susp.period
    dist = sec.suspension_shift_distance(T)
    base = sec.shift_state(0.4, 1, -2, 5)
    pairs = []
    for _ in range(200):
        flips = {int(rng.choice([-1, 1]) * rng.integers(3, 9))} if rng.random() < 0.8 else set()
        y = (float(np.mod(0.4 + rng.uniform(-0.1, 0.1), T)), SymbolicPoint(base[1].support ^ flips))
        pairs.append((base, y))
    spec = sec.fit_section_spec(susp, dist, pairs, delta=0.2, eps=0.4)
    pts, res = [], []
    while len(pts) < n:
        flips = {int(rng.choice([-1, 1]) * rng.integers(3, 8)) for _ in range(rng.integers(1, 3))}
        pr = sec._project(susp, base, (base[0], SymbolicPoint(base[1].support ^ flips)), 0.0, spec)
        res.append(pr.residual)
        if all(dist(pr.point, q) > 0 for q in pts):
            pts.append(pr.point)
    _sectional_setup.residuals = res
    return susp, spec, base, pts


def criterion_10():
    susp, spec, base, pts = _sectional_setup(10)
    dpair = sec.suspension_section_pseudometric(susp.period)
    proj = max(_sectional_setup.residuals)
    cat = 0.0
    for i in range(5):
        chk = sec.sectional_catenary_residual(susp, dpair, base, pts[2 * i], pts[2 * i + 1], spec)
        cat = max(cat, chk.residual)
        proj = max(proj, chk.max_projection_residual)
    inc = True
    for y in pts[:2]:
        tr = sec.reparametrize(susp, base, y, 1.2, spec)
        inc = inc and tr.increasing and abs(tr.hs[0]) <= 1e-9
        proj = max(proj, float(np.max(tr.residuals)))
    ok = proj <= 1e-9 and inc and cat <= 1e-3
    return ok, f"projection residual={proj:.2e} <= 1e-9, h strictly increasing={inc}, sectional |D''-D|={cat:.2e} <= 1e-3"


def criterion_11():
    sigma = FinitePointSet([0.0, 0.5, -0.5], lambda p, q: abs(p - q))
    fake = make_fake_singularity(FakeSingularitySpec(sigma, 0, lambda s, x: abs(s) + abs(x)))
    u, _ = fake.advance((-1.0, 0), 10.0).point
    rel = abs(u + math.exp(-10)) / math.exp(-10)
    tr = orbit_trace(fake, (-1.0, 0), 0.0, 10.0, 0.01)
    us = np.array([s[0] for s in tr.states])
    ok = rel <= 1e-6 and bool(np.all(us < 0))
    return ok, f"u(10)={u:.10e}, relative error vs -e^-10={rel:.2e} <= 1e-6, sign changes={int(np.sum(us >= 0))}"


def criterion_12(tmp_path):
    a = verify_suite(bundled("suite.json"), tmp_path / "a")
    b = verify_suite(bundled("suite.json"), tmp_path / "b")
    same = True
    for f in sorted((tmp_path / "a").glob("*.report.json")):
        ra, rb = json.loads(f.read_text()), json.loads((tmp_path / "b" / f.name).read_text())
        ra.pop("wall_time"), rb.pop("wall_time")
        same = same and ra == rb
    bad = run_scenario(bundled("corrupted_sum.json"), tmp_path / "c")
    wit = bad.witness()
    ok = a.exit_code == 0 and b.exit_code == 0 and same and bad.exit_code == 1 and wit is not None
    return ok, (f"suite exit={a.exit_code} ({len(a.rows)} scenarios), reports identical apart from wall_time={same}, "
                f"corrupted exit={bad.exit_code} witness={wit['witness']['point'] if wit else None}")


CRITERIA = [
    (1, "saddle ground truth", criterion_01),
    (2, "BVP uniqueness oracle", criterion_02),
    (3, "hit-time closed form and cocycle", criterion_03),
    (4, "shift catenary metric", criterion_04),
    (5, "discrete BVP recurrence", criterion_05),
    (6, "exact decay laws", criterion_06),
    (7, "metric axiom suites", criterion_07),
    (8, "gluing consistency", criterion_08),
    (9, "suspension consistency", criterion_09),
    (10, "sectional pipeline", criterion_10),
    (11, "fake singularity", criterion_11),
    (12, "end-to-end suite", criterion_12),
]


@pytest.mark.parametrize("n,title,fn", CRITERIA[:-1], ids=[f"AC{n:02d}" for n, _, _ in CRITERIA[:-1]])
def test_criterion(n, title, fn, report):
    t0 = time.perf_counter()
    ok, detail = fn()
    report(n, title, ok, detail, t0)


def test_criterion_12(tmp_path, report):
    t0 = time.perf_counter()
    ok, detail = criterion_12(tmp_path)
    report(12, "end-to-end suite", ok, detail, t0)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    failed = 0
    for n, title, fn in CRITERIA:
        t0 = time.perf_counter()
        if n == 12:
            with tempfile.TemporaryDirectory() as d:
                ok, detail = fn(Path(d))
        else:
            ok, detail = fn()
        failed += not ok
        print(f"[AC-{n:02d}] {'PASS' if ok else 'FAIL'} {title}: {detail} ({time.perf_counter() - t0:.2f}s)")
    raise SystemExit(1 if failed else 0)
