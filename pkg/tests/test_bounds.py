import csv
import io
import math

import numpy as np
import pytest

from oneshot.bounds import (
    BoundParams,
    ScenarioSpec,
    approx_eat_bound,
    approx_eat_optimize,
    approx_eat_testing_bound,
    approx_indep_bound,
    approx_indep_from_trace,
    classical_eat_bound,
    classical_eat_optimal_alpha,
    param_scan,
    preset_per_round_loss,
    preset_scaling_core,
    scalar_g0,
    scalar_g1,
    scalar_g2,
    scalar_k_alpha,
    scalar_z_beta,
    triangle_hmin_bound,
    vn_triangle_bound,
    weak_aep_bound,
)
from oneshot.divergences import smooth_dmax_classical
from oneshot.entropies import h_up_alpha, smooth_hmin_classical, vn_conditional
from oneshot.linalg import ClassicalJoint, RegisterSpace
from oneshot.rand import random_classical, random_density
from oneshot.simulate import MinTradeoffFunction


def test_scalar_functions():
    assert scalar_g0(1.0) == pytest.approx(0.0)
    assert scalar_g1(0.5, 0.0) == pytest.approx(scalar_g0(0.5))
    assert scalar_g2(0.5) == pytest.approx(1.5 * math.log2(1.5) + 0.5)
    assert scalar_g2(0.0) == 0.0
    assert scalar_z_beta(0.0, 0.5, 2.0) == 0.0
    assert scalar_z_beta(0.0, 0.5, 1.3) == 0.0
    with pytest.raises(ValueError):
        scalar_g0(0.0)
    with pytest.raises(ValueError):
        scalar_z_beta(0.1, 0.5, 1.0)
    # K_alpha has a finite alpha -> 1 limit
    limit = scalar_k_alpha(1.0, 2)
    expect = math.log(2.0 ** (2.0) + math.e**2) ** 3 / (6 * math.log(2))
    assert limit == pytest.approx(expect)
    assert scalar_k_alpha(1.3, 2) > limit


def test_z_beta_preset_inequalities():
    for eps in (1e-3, 1e-6, 1e-9):
        delta = eps**0.125
        assert scalar_z_beta(eps, delta, 2.0) <= 3 * math.log2(
            (1 + math.sqrt(eps)) ** (2 / 3) + eps ** (1 / 12)
        ) + 1e-12
        for alpha in (1.05, 1.2, 1.4):
            mixing = math.log2(1 + delta * (4 ** ((alpha - 1) / alpha * math.log2(4)) - 1))
            assert mixing <= 16 * eps**0.125 + 1e-12


def test_triangle_hmin_bound_report():
    rep = triangle_hmin_bound(3.0, 0.5, 1.5, 0.05, 0.05)
    assert rep.smoothing == pytest.approx(0.1)
    assert rep.value == pytest.approx(sum(rep.decomposition.values()), abs=1e-10)
    assert rep.value == pytest.approx(3.0 - 3 * 0.5 - scalar_g1(0.05, 0.05) / 0.5)
    zero = triangle_hmin_bound(2.0, 0.0, 2.0, 0.0, 0.3)
    assert zero.value == pytest.approx(2.0 - scalar_g1(0.3, 0.0))
    with pytest.raises(ValueError):
        triangle_hmin_bound(1.0, 0.0, 2.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        triangle_hmin_bound(1.0, 0.0, 1.5, 0.6, 0.6)


def test_triangle_bound_classical_end_to_end(rng):
    # random 5-symbol joints: the evaluator never exceeds the LP oracle
    space = RegisterSpace([("A", 5), ("B", 2)])
    alpha, eps, delta = 1.5, 0.1, 0.1
    for _ in range(10):
        p = random_classical(space, rng)
        eta = random_classical(space, rng)
        eta = ClassicalJoint(space, 0.8 * eta.probs + 0.2 / 10.0)
        # upper-bound the purified-ball smoothed D_max via a trace-ball
        # witness at budget eps^2/2 (removal mass), i.e. oracle radius eps^2/4
        try:
            dmax = smooth_dmax_classical(p, eta, eps * eps / 4.0)
        except ValueError:
            continue
        h_eta = h_up_alpha(eta.to_density(), ["A"], ["B"], alpha).value
        rep = triangle_hmin_bound(h_eta, dmax, alpha, eps, delta)
        lp, _ = smooth_hmin_classical(p, ["A"], ["B"], eps + delta)
        assert lp >= rep.value - 1e-8


def test_triangle_bound_impossibility_family():
    # conditioning a spike distribution shows the alpha factor is needed
    from oneshot.simulate import triangle_p_family

    alpha, eps = 1.5, 0.1
    for n in (8, 16):
        p, p_e = triangle_p_family(n, eps)
        # closed-form Arimoto value of the spike distribution
        inner = eps + (1 - eps) * 2.0 ** (-n * (alpha - 1) / alpha)
        h_eta = alpha / (1 - alpha) * math.log2(inner)
        dmax = math.log2(1 / eps)
        rep = triangle_hmin_bound(h_eta, dmax, alpha, 0.0, 0.25)
        lp_cond, _ = smooth_hmin_classical(p_e, ["A"], ["B"], 0.25, mode="normalized")
        assert lp_cond >= rep.value - 1e-9
        # the bound collapses to O(1) slack, not O(n)
        assert rep.value <= 1.0


def test_vn_triangle_bound(rng):
    space = RegisterSpace([("A", 2), ("B", 2)])
    for _ in range(50):
        rho = random_density(space, rng, floor=0.03)
        eta = random_density(space, rng, floor=0.03)
        from oneshot.divergences import relative_entropy

        h_eta = h_up_alpha(eta, ["A"], ["B"], 1.5).value
        bound = vn_triangle_bound(h_eta, relative_entropy(rho, eta).value, 1.5)
        assert vn_conditional(rho, ["A"], ["B"]).value >= bound - 1e-9
    # rho = eta reduces to alpha-monotonicity
    rho = random_density(space, rng)
    assert vn_conditional(rho, ["A"], ["B"]).value >= vn_triangle_bound(
        h_up_alpha(rho, ["A"], ["B"], 1.5).value, 0.0, 1.5
    ) - 1e-9


def test_vn_triangle_counterexample_n20():
    # H(A|B) of the spike family and the failure of a dimension-free form
    n, eps, alpha = 20, 0.1, 1.5
    h_cond = (1 - eps) * n  # exact closed form for the spike distribution
    d_cond = math.log2(1 / eps)  # D(p_{|E} || p)
    # hypothetical improved bound H >= H - O(D) fails:
    assert 0.0 < h_cond - d_cond
    # the actual theorem holds with the alpha/(alpha-1) factor
    inner = eps + (1 - eps) * 2.0 ** (-n * (alpha - 1) / alpha)
    h_eta = alpha / (1 - alpha) * math.log2(inner)
    assert 0.0 >= vn_triangle_bound(h_eta, d_cond, alpha) - 1e-9


def test_approx_indep_bound_shapes():
    spec = ScenarioSpec(n=10, dim_a=2, eps=0.01, per_round_entropy=0.9)
    rep = approx_indep_bound(spec)
    big_l = math.log2(5.0)
    q = 0.01**0.25
    assert rep.smoothing == pytest.approx(q + 0.01)
    assert rep.decomposition["entropy_sum"] == pytest.approx(9.0)
    assert rep.decomposition["rate_penalty"] == pytest.approx(-3 * 10 * q * big_l)
    assert rep.decomposition["tail_inverse"] == pytest.approx(-2 * big_l / 0.01**0.75)
    assert rep.decomposition["tail_log"] == pytest.approx(
        -(2 * big_l / q) * (math.log2(1 - math.sqrt(0.01)) + scalar_g1(0.01, q))
    )
    # identical marginals shortcut equals the list version
    spec_list = ScenarioSpec(n=10, dim_a=2, eps=0.01, per_round_entropies=[0.9] * 10)
    assert approx_indep_bound(spec_list).value == pytest.approx(rep.value)
    # eps = 0 limit report carries no penalties
    rep0 = approx_indep_bound(ScenarioSpec(n=10, dim_a=2, eps=0.0, per_round_entropy=0.9))
    assert rep0.value == pytest.approx(9.0)
    assert rep0.smoothing == 0.0


def test_approx_indep_asymptotics():
    # per-round rate approaches H(A_1) and the tail washes out at large n
    spec = ScenarioSpec(n=10**6, dim_a=2, eps=1e-8, per_round_entropy=1.0)
    rep = approx_indep_bound(spec)
    per_round = rep.value / spec.n
    assert per_round == pytest.approx(1.0, abs=0.05)
    tail = rep.decomposition["tail_inverse"] + rep.decomposition["tail_log"]
    assert abs(tail) / spec.n < 1e-2


def test_approx_indep_from_trace():
    spec = ScenarioSpec(n=10, dim_a=2, eps=0.01, per_round_entropy=1.0)
    rep = approx_indep_from_trace(spec)
    assert rep.extras["afw_delta"] == pytest.approx(0.01 + scalar_g2(0.005))
    # eps = 0 boundary returns the limit report with zero penalties
    rep0 = approx_indep_from_trace(ScenarioSpec(n=10, dim_a=2, eps=0.0, per_round_entropy=1.0))
    assert rep0.value == pytest.approx(10.0)
    # monotone nonincreasing in eps at large n
    values = []
    for eps in np.linspace(1e-4, 1e-2, 20):
        spec = ScenarioSpec(n=10**6, dim_a=2, eps=float(eps), per_round_entropy=1.0)
        values.append(approx_indep_from_trace(spec).value)
    assert all(values[i + 1] <= values[i] + 1e-9 for i in range(len(values) - 1))


def test_weak_aep_bound():
    # |B| = 1 reduces exactly to the trace-distance variant
    s1 = ScenarioSpec(n=20, dim_a=2, dim_b=1, eps=0.01, per_round_entropy=0.8)
    assert weak_aep_bound(s1).value == pytest.approx(approx_indep_from_trace(s1).value)
    # iid limit: per-round rate H(A|B)
    s0 = ScenarioSpec(n=100, dim_a=2, dim_b=2, eps=0.0, per_round_entropy=0.8)
    assert weak_aep_bound(s0).value == pytest.approx(80.0)
    # side information enters the continuity step
    s2 = ScenarioSpec(n=20, dim_a=2, dim_b=4, eps=0.01, per_round_entropy=0.8)
    assert weak_aep_bound(s2).extras["afw_delta"] == pytest.approx(
        0.01 * 3 + scalar_g2(0.005)
    )
    assert weak_aep_bound(s2).value < weak_aep_bound(
        ScenarioSpec(n=20, dim_a=2, dim_b=2, eps=0.01, per_round_entropy=0.8)
    ).value


def test_approx_eat_bound_terms():
    spec = ScenarioSpec(n=100, dim_a=2, dim_b=2, eps=0.0)
    params = BoundParams(alpha=1.2, beta=2.0, delta=0.0, eps1=0.01, eps2=0.01)
    rep = approx_eat_bound(spec, 0.7, params)
    # eps = 0 recovers the pure accumulation shape
    assert rep.decomposition["mixing_penalty"] == 0.0
    assert rep.decomposition["channel_divergence"] == 0.0
    assert rep.value == pytest.approx(
        70.0
        - 100 * 0.2 * math.log2(5) ** 2
        - (scalar_g1(0.01, 0.01) + 1.2 * scalar_g0(0.01)) / 0.2
    )
    with pytest.raises(ValueError):
        approx_eat_bound(spec, 0.7, BoundParams(alpha=1.6, eps1=0.01, eps2=0.01))
    with pytest.raises(ValueError):
        approx_eat_bound(
            ScenarioSpec(n=100, dim_a=2, dim_b=2, eps=0.01),
            0.7,
            BoundParams(alpha=1.2, delta=0.0, eps1=0.01, eps2=0.01),
        )


def test_approx_eat_optimize():
    spec = ScenarioSpec(n=10**4, dim_a=2, dim_b=2, eps=1e-10)
    preset_like = approx_eat_bound(
        spec, 0.8, BoundParams(alpha=1.05, beta=2.0, delta=1e-10**0.125, eps1=0.005, eps2=0.005)
    )
    best = approx_eat_optimize(spec, 0.8, total_smoothing=0.01)
    assert best.value >= preset_like.value - 1e-9
    # optimizer grid: never worse than the preset on a 3x3 grid
    for n in (10**3, 10**4, 10**5):
        for eps in (1e-12, 1e-10, 1e-8):
            s = ScenarioSpec(n=n, dim_a=2, dim_b=2, eps=eps)
            from oneshot.bounds import _preset_params

            preset = approx_eat_bound(s, 0.8, _preset_params(s, 0.01))
            opt = approx_eat_optimize(s, 0.8, total_smoothing=0.01)
            assert opt.value >= preset.value - 1e-9
    # eps = 0 pushes delta to the boundary and matches the closed form
    s0 = ScenarioSpec(n=10**4, dim_a=2, dim_b=2, eps=0.0)
    opt0 = approx_eat_optimize(s0, 0.8, total_smoothing=0.01)
    assert opt0.params_used.delta == 0.0
    closed = approx_eat_bound(s0, 0.8, opt0.params_used)
    assert opt0.value == pytest.approx(closed.value, abs=1e-6)


def test_preset_scaling_slope():
    eps_grid = np.logspace(-12, -6, 25)
    losses = [math.sqrt(preset_scaling_core(e)) for e in eps_grid]
    slope = np.polyfit(np.log10(eps_grid), np.log10(losses), 1)[0]
    assert abs(slope - 1 / 24) <= 0.01
    # the dimension-carrying amplitude preserves positivity and ordering
    assert preset_per_round_loss(1e-8, 2, 2) > preset_per_round_loss(1e-10, 2, 2) > 0


def test_approx_eat_testing_bound():
    f = MinTradeoffFunction([0.2, 0.8])
    spec = ScenarioSpec(n=10**6, dim_a=2, dim_b=2, eps=1e-40)
    params = BoundParams(alpha=1.02, beta=2.0, delta=1e-5, eps1=1e-4, eps3=0.01)
    rep = approx_eat_testing_bound(spec, f, 0.5, 0.99, params)
    assert rep.value == pytest.approx(sum(rep.decomposition.values()), abs=1e-9)
    assert rep.params_used.eps2 == pytest.approx(2 * math.sqrt(1e-4 / 0.99))
    assert rep.smoothing == pytest.approx(rep.params_used.eps2 + 0.01)
    assert rep.value > 0  # accumulation wins at tiny approximation error
    # constant tradeoff collapses the D-register term to the plain one
    fc = MinTradeoffFunction([0.5, 0.5])
    rep_c = approx_eat_testing_bound(spec, fc, 0.5, 0.99, params)
    alpha = params.alpha
    plain_exp = math.log2(4) + 0.0 + 1.0
    expect = -(alpha / (alpha - 1)) * spec.n * math.log2(
        1 + params.delta * (4 ** ((alpha - 1) / alpha * plain_exp) - 1)
    )
    assert rep_c.decomposition["mixing_penalty"] == pytest.approx(expect)
    assert fc.var_f == 0.0 and fc.max_f == fc.min_f
    with pytest.raises(ValueError):
        approx_eat_testing_bound(spec, f, 0.5, 0.99, BoundParams(alpha=2.0, eps1=1e-4, eps3=0.01))


def test_k_alpha_statistics():
    f = MinTradeoffFunction([0.0, 1.0], min_sigma_override=0.25, var_override=0.1)
    assert f.max_f == 1.0 and f.min_f == 0.0
    assert f.min_sigma_f == 0.25 and f.var_f == 0.1
    assert f.d_register_dim == 2
    assert f([0.5, 0.5]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        f([0.5, 0.6])


def test_classical_eat_bound():
    spec = ScenarioSpec(n=100, dim_a=2, dim_b=2, eps=0.0)
    alpha = 1.2
    rep = classical_eat_bound(spec, 0.9, alpha, 0.01)
    assert rep.value == pytest.approx(
        90.0 - 100 * 0.2 * math.log2(5) ** 2 - scalar_g0(0.01) / 0.2
    )
    # preset per-round loss ceiling at alpha = 1 + sqrt(eps)
    eps = 0.01
    spec_e = ScenarioSpec(n=1000, dim_a=2, dim_b=2, eps=eps)
    alpha_p = 1 + math.sqrt(eps)
    rep_e = classical_eat_bound(spec_e, 1.0, alpha_p, 0.01)
    loss = (
        -rep_e.decomposition["renyi_correction"] - rep_e.decomposition["markov_penalty"]
    ) / spec_e.n
    assert loss <= math.sqrt(eps) * (math.log2(5) ** 2 + 2 * 4) + 1e-12
    # classical never below quantum at equal inputs (each own optimum)
    for n, eps in ((100, 1e-6), (1000, 1e-4)):
        s = ScenarioSpec(n=n, dim_a=2, dim_b=2, eps=eps)
        q = approx_eat_optimize(s, 1.0, total_smoothing=0.01)
        c = classical_eat_bound(s, 1.0, classical_eat_optimal_alpha(s, 0.01), 0.01)
        assert c.value >= q.value - 1e-9


def test_monotone_in_hk():
    spec = ScenarioSpec(n=10, dim_a=2, dim_b=2, eps=1e-6)
    params = BoundParams(alpha=1.1, beta=2.0, delta=0.05, eps1=0.01, eps2=0.01)
    base = approx_eat_bound(spec, [0.5] * 10, params).value
    better = approx_eat_bound(spec, [0.5] * 9 + [0.6], params).value
    assert better >= base
    assert classical_eat_bound(spec, [0.6] * 10, 1.2, 0.01).value >= classical_eat_bound(
        spec, [0.5] * 10, 1.2, 0.01
    ).value
    rep = approx_indep_bound(
        ScenarioSpec(n=10, dim_a=2, eps=0.01, per_round_entropies=[0.9] * 10)
    )
    rep2 = approx_indep_bound(
        ScenarioSpec(n=10, dim_a=2, eps=0.01, per_round_entropies=[0.9] * 9 + [1.0])
    )
    assert rep2.value >= rep.value


def test_param_scan_csv():
    base = ScenarioSpec(n=2, dim_a=2, dim_b=2, eps=0.0, per_round_entropy=1.0)
    text = param_scan(approx_indep_bound, [10], [0.01], base)
    rows = list(csv.reader(io.StringIO(text)))
    assert len(rows) == 2
    header = rows[0]
    assert header[:5] == ["n", "eps", "smoothing", "value", "per_round"]
    assert "entropy_sum" in header
    direct = approx_indep_bound(
        ScenarioSpec(n=10, dim_a=2, dim_b=2, eps=0.01, per_round_entropy=1.0)
    )
    assert float(rows[1][3]) == pytest.approx(direct.value)
    # 10x10 grid: 100 rows; value decreases along the eps axis at fixed n
    text = param_scan(
        approx_indep_bound,
        [10**6, 10**7],
        list(np.linspace(1e-4, 1e-2, 10)),
        base,
    )
    rows = list(csv.reader(io.StringIO(text)))[1:]
    assert len(rows) == 20
    by_n = {}
    for row in rows:
        by_n.setdefault(row[0], []).append(float(row[3]))
    for vals in by_n.values():
        assert all(vals[i + 1] <= vals[i] + 1e-9 for i in range(len(vals) - 1))
