import math

import numpy as np
import pytest
from scipy.integrate import quad

from catenary.blocks import Block
from catenary.errors import BasinError, DomainError, SpecError, TruncationError
from catenary.fields import (
    BVPSpec,
    ScalarField,
    attractor_lyapunov,
    catenary_bvp,
    catenary_bvp_field,
    catenary_sum_field,
    catenary_sum_function,
    catenary_sum_pseudometric,
    derived_decreasing,
    exact_decay_lyapunov,
    exact_growth_lyapunov,
    export_grid_csv,
    linear_pseudometric,
    smooth_lyapunov,
    verify_catenary,
)
from catenary.flows import ClosedFormFlow, LinearModelSpec, make_linear_attractor
from catenary.metric import SizeFunctionSpec, farthest_point_refs
from catenary.systems import contraction, l1, saddle, saddle_hit_times

BLOCK = Block(l1, 1.0, lam=[[0.0, 0.0]], vectorized=True)
L_ALPHA = ScalarField(lambda z: abs(z[0]), name="alpha")
L_OMEGA = ScalarField(lambda z: abs(z[1]), name="omega")
SADDLE_L = catenary_sum_field(L_ALPHA, L_OMEGA)


def grid(n=100, r=0.5):
    # square grid inside the diamond |x|+|y| <= 1
    g = np.linspace(-r, r, n)
    return [np.array([x, y]) for x in g for y in g]


def sinh_oracle(z, a=1.0):
    # independent evaluation with closed-form hit times and plain sinh
    ts, tu = saddle_hit_times(z)
    if math.isinf(tu) and math.isinf(ts):
        return 0.0
    if math.isinf(tu):
        return math.exp(a * ts)
    if math.isinf(ts):
        return math.exp(-a * tu)
    if tu == ts:
        return 1.0
    return (math.sinh(a * tu) - math.sinh(a * ts)) / math.sinh(a * (tu - ts))


def test_saddle_sum_field_is_l1():
    assert catenary_sum_function(L_ALPHA, L_OMEGA, [0.1, -0.5]) == pytest.approx(0.6)
    assert catenary_sum_function(L_ALPHA, L_OMEGA, [0.0, 0.0]) == 0.0


def test_sum_exponent_mismatch():
    with pytest.raises(SpecError):
        catenary_sum_field(L_ALPHA, ScalarField(lambda z: abs(z[1]), a=2.0))


def test_verify_saddle_ground_truth():
    rep = verify_catenary(SADDLE_L, saddle(), grid(), drift_points=[np.array([0.003, 0.9]), np.array([-0.006, 0.5])])
    assert rep.max_residual <= 1e-6
    assert rep.hyperbolicity_violations == []
    assert rep.drift <= 1e-8
    assert rep.passed


def test_verify_vacuous_on_lambda():
    zero = ScalarField(lambda z: 0.0)
    rep = verify_catenary(zero, saddle(), [np.zeros(2)])
    assert rep.passed and rep.max_residual == 0.0


def test_verify_corrupted_field_names_witness_cells():
    c = np.array([0.2, 0.2])
    bad = ScalarField(lambda z: l1(z) + 0.1 * math.exp(-np.sum((z - c) ** 2) / 0.01))
    rep = verify_catenary(bad, saddle(), grid(21))
    assert not rep.passed
    assert rep.residual_cells
    assert np.linalg.norm(rep.residual_witness - c) < 0.2


def test_derived_decreasing():
    x = np.array([0.1, 0.5])
    # L' = |x| - |y| along the saddle, so -L' = 0.4 at this point
    assert derived_decreasing(SADDLE_L, saddle(), x) == pytest.approx(0.4, abs=1e-9)
    assert derived_decreasing(SADDLE_L, saddle(), np.zeros(2)) == 0.0
    L1 = ScalarField(lambda z: derived_decreasing(SADDLE_L, saddle(), z))
    for z in grid(7, 0.4):
        if l1(z) > 0:
            # L1' = -L'' = -L < 0
            assert L1.ldot(saddle(), z) == pytest.approx(-l1(z), abs=1e-4)


def test_bvp_matches_l1_everywhere():
    sys = saddle()
    spec = BVPSpec(lambda z: 1.0, a=1.0)
    samples = [[0.1, 0.5], [0.0, 0.5], [-0.3, 0.0], [0.0, 0.0], [0.25, -0.25], [1e-6, 1e-6], [0.5, 0.5], [0.0, 1.0]]
    rng = np.random.default_rng(0)
    samples += list(rng.uniform(-0.5, 0.5, size=(100, 2)))
    for z in samples:
        got = catenary_bvp(sys, BLOCK, spec, z)
        assert got == pytest.approx(l1(z), abs=1e-6)
        assert got == pytest.approx(sinh_oracle(z), abs=1e-9)


def test_bvp_stable_axis_branch():
    assert catenary_bvp(saddle(), BLOCK, BVPSpec(lambda z: 1.0), [0.0, 0.5]) == pytest.approx(0.5, abs=1e-10)


def test_bvp_general_exponent_and_data():
    # with a=2 and f = 2 + x the solution is still A e^{2t} + B e^{-2t} along orbits
    spec = BVPSpec(lambda z: 2.0 + z[0], a=2.0)
    field = catenary_bvp_field(saddle(), BLOCK, spec)
    rep = verify_catenary(field, saddle(), grid(15, 0.45))
    assert rep.max_residual <= 1e-6
    for z in ([1.0, 0.0], [0.0, -1.0], [0.3, 0.7]):
        assert catenary_bvp(saddle(), BLOCK, spec, z) == pytest.approx(2.0 + z[0], abs=1e-8)


def test_bvp_positivity():
    with pytest.raises(SpecError):
        catenary_bvp(saddle(), BLOCK, BVPSpec(lambda z: -1.0), [0.1, 0.5])
    assert catenary_bvp(saddle(), BLOCK, BVPSpec(lambda z: -1.0, positive=False), [0.1, 0.5]) < 0


def test_bvp_large_T_no_overflow():
    z = [1e-300, 1e-300]
    assert catenary_bvp(saddle(), BLOCK, BVPSpec(lambda z: 1.0), z, T_max=1000) == pytest.approx(2e-300, rel=1e-6)


def test_sum_pseudometric():
    da = lambda p, q: abs(p[0] - q[0])  # noqa: E731
    dw = lambda p, q: abs(p[1] - q[1])  # noqa: E731
    sys = saddle()
    x, y = np.array([0.1, 0.3]), np.array([-0.2, 0.25])
    assert catenary_sum_pseudometric(da, dw, x, x) == 0.0
    for t in (-1, -0.5, 0.5, 1):
        got = catenary_sum_pseudometric(da, dw, sys(x, t), sys(y, t))
        assert got == pytest.approx(da(x, y) * math.exp(t) + dw(x, y) * math.exp(-t), rel=1e-14)


def test_smooth_lyapunov():
    sys = contraction()
    L1, dL1 = smooth_lyapunov(lambda z: abs(z[0]), sys, 1.0, np.array([1.0]))
    assert L1 == pytest.approx(1 - math.exp(-1), abs=1e-9)
    assert dL1 == pytest.approx(math.exp(-1) - 1, abs=1e-15)
    c1, c2 = smooth_lyapunov(lambda z: 3.0, sys, 2.0, np.array([0.4]))
    assert c1 == pytest.approx(6.0) and c2 == 0.0
    boxed = ClosedFormFlow(saddle().func, domain=lambda z: l1(z) - 1.0)
    with pytest.raises(TruncationError):
        smooth_lyapunov(l1, boxed, 5.0, np.array([0.1, 0.5]))


def test_smooth_lyapunov_matches_quad():
    sys = contraction(0.7)
    L = lambda z: float(np.sum(z**2)) ** 0.25  # noqa: E731
    x = np.array([0.3, -0.8])
    got, _ = smooth_lyapunov(L, sys, 1.5, x)
    want = quad(lambda t: L(x * math.exp(-0.7 * t)), 0, 1.5)[0]
    assert got == pytest.approx(want, abs=1e-8)


def test_exact_decay_closed_form_and_decay_law():
    sys = contraction()
    V = lambda z: abs(float(z[0]))  # noqa: E731
    c = 0.5
    for x in (0.1, 0.5, 0.9, -0.7):
        assert exact_decay_lyapunov(sys, V, c, 2.0, np.array([x])) == pytest.approx((abs(x) / c) ** 2, rel=1e-12)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = np.array([rng.uniform(0.05, 2)])
        t = rng.uniform(0, 5)
        L0 = exact_decay_lyapunov(sys, V, c, 2.0, x)
        Lt = exact_decay_lyapunov(sys, V, c, 2.0, sys(x, t))
        assert abs(Lt - math.exp(-2 * t) * L0) <= 1e-8 * max(L0, 1)
    assert exact_decay_lyapunov(sys, V, c, 2.0, np.array([0.5])) == 1.0


def test_exact_decay_misses_section():
    with pytest.raises(DomainError):
        exact_decay_lyapunov(contraction(), lambda z: abs(z[0]), 0.5, 1.0, np.array([0.0]))


def test_exact_growth_repeller():
    sys = contraction(-1.0)  # x' = x
    V = lambda z: abs(float(z[0]))  # noqa: E731
    x = np.array([0.3])
    L0 = exact_growth_lyapunov(sys, V, 1.0, 1.0, x)
    assert L0 == pytest.approx(0.3, rel=1e-12)
    assert exact_growth_lyapunov(sys, V, 1.0, 1.0, sys(x, 0.5)) == pytest.approx(math.exp(0.5) * L0, rel=1e-10)


def test_linear_pseudometric():
    lin = make_linear_attractor(LinearModelSpec([[1.0, 0.0], [1.0, 2.0], [1.0, -1.0]]))
    x, y = (0.8, 1), (0.3, 2)
    assert linear_pseudometric(lin, x, x) == 0.0
    rng = np.random.default_rng(2)
    d = linear_pseudometric(lin, x, y)
    for t in rng.uniform(0, 5, 20):
        got = linear_pseudometric(lin, lin(x, t), lin(y, t))
        assert abs(got - math.exp(-t) * d) <= 1e-12
    one = make_linear_attractor(LinearModelSpec([[1.0]]))
    assert linear_pseudometric(one, (0.7, 0), (0.2, 0)) == pytest.approx(0.5)
    assert linear_pseudometric(lin, (0.0, 1), (0.0, 2)) == 0.0


def test_attractor_lyapunov_examples():
    sys = contraction()
    spec = SizeFunctionSpec((0.0, 1.0), lambda p, q: abs(float(np.ravel(p)[0]) - float(np.ravel(q)[0])))
    assert attractor_lyapunov(sys, [0.0], spec, np.array([0.0])) == 0.0
    L1 = attractor_lyapunov(sys, [0.0], spec, np.array([1.0]))
    assert L1 == pytest.approx(0.75, abs=1e-3)
    assert attractor_lyapunov(sys, [0.0], spec, np.array([math.exp(-1)])) < L1


def test_attractor_lyapunov_monotone_on_basin_samples():
    sys = contraction()
    rng = np.random.default_rng(3)
    pts = rng.uniform(-1, 1, size=(100, 2))
    spec = farthest_point_refs([tuple(p) for p in np.vstack([pts, [[0.0, 0.0]]])], depth=16)
    for x in pts[:25]:
        base = attractor_lyapunov(sys, [0, 0], spec, x)
        for t in (0.1, 1.0, 5.0):
            assert attractor_lyapunov(sys, [0, 0], spec, sys(x, t)) < base


def test_attractor_lyapunov_basin_error():
    with pytest.raises(BasinError):
        attractor_lyapunov(saddle(), [0, 0], SizeFunctionSpec(((0.0, 0.0), (1.0, 0.0))), np.array([0.1, 0.1]), horizon=5)


def test_export_csv(tmp_path):
    path = tmp_path / "g.csv"
    export_grid_csv(path, SADDLE_L, saddle(), grid(3, 0.3))
    rows = path.read_text().splitlines()
    assert rows[0] == "x0,x1,L,Ldot,Lddot,residual"
    assert len(rows) == 10
