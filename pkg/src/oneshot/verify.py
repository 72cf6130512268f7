"""Randomised property suites behind the ``verify`` CLI subcommand.

Each suite returns ``{property_name: {"count": int, "worst_slack": float,
"passed": bool}}``.  Slack is oriented so nonnegative means the property
holds; the stated tolerances are the package-wide acceptance values.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from oneshot import bounds as bd
from oneshot import divergences as dv
from oneshot import entropies as en
from oneshot import simulate as sm
from oneshot.linalg import (
    ClassicalJoint,
    DensityOperator,
    HermitianObservable,
    RegisterSpace,
    asymmetric_pinching_witness,
    hermitianize,
    partial_trace,
    tensor_product,
    trace_distance,
)
from oneshot.rand import (
    random_classical,
    random_close_pair,
    random_cq,
    random_density,
    random_pure,
    random_subnormalized,
)

SUITE_NAMES = (
    "triangle",
    "divergences",
    "entropies",
    "chain-rules",
    "dimension-bounds",
    "pinching",
    "sharp",
    "counterexamples",
    "eat-smoke",
)


class _Prop:
    def __init__(self):
        self.count = 0
        self.worst = math.inf

    def record(self, slack: float):
        self.count += 1
        self.worst = min(self.worst, float(slack))

    def result(self, tol: float) -> dict:
        return {
            "count": self.count,
            "worst_slack": self.worst if self.count else math.nan,
            "passed": bool(self.count and self.worst >= -tol),
        }


def _single_register_space(rng, lo=2, hi=4, label="A") -> RegisterSpace:
    return RegisterSpace([(label, int(rng.integers(lo, hi + 1)))])


def suite_triangle(seed: int = 0, samples: int = 300) -> dict:
    """Divergence triangle inequality, both Rényi-order branches."""
    rng = np.random.default_rng(seed)
    above = _Prop()
    below = _Prop()
    for _ in range(samples):
        space = _single_register_space(rng)
        rho = random_subnormalized(space, rng)
        eta = random_subnormalized(space, rng)
        q_op = random_density(space, rng, floor=0.05)
        q = DensityOperator(space, q_op.matrix * rng.uniform(0.5, 1.0))
        dmax = dv.max_relative_entropy(rho, eta).value
        log_ratio = math.log2(eta.trace / rho.trace)
        for alpha in (1.2, 1.5, 2.0):
            lhs = dv.sandwiched_renyi(rho, q, alpha).value
            rhs = (
                dv.sandwiched_renyi(eta, q, alpha).value
                + alpha / (alpha - 1.0) * dmax
                + log_ratio / (alpha - 1.0)
            )
            above.record(rhs - lhs)
        alpha = 0.7
        lhs = dv.sandwiched_renyi(rho, q, alpha).value
        rhs = (
            dv.sandwiched_renyi(eta, q, alpha).value
            - alpha / (1.0 - alpha) * dmax
            - log_ratio / (1.0 - alpha)
        )
        below.record(lhs - rhs)
    return {
        "triangle_above_one": above.result(1e-8),
        "triangle_below_one": below.result(1e-8),
    }


def suite_divergences(seed: int = 0, samples: int = 300) -> dict:
    rng = np.random.default_rng(seed)
    mono = _Prop()
    petz_vs_sand = _Prop()
    dpi = _Prop()
    limits = _Prop()
    large_alpha = _Prop()
    blowup = _Prop()

    for _ in range(samples):
        space = _single_register_space(rng)
        p = random_density(space, rng, floor=0.02)
        q = random_density(space, rng, floor=0.02)
        vals = [dv.sandwiched_renyi(p, q, a).value for a in (0.6, 1.5, 2.0, 5.0, math.inf)]
        mono.record(min(vals[i + 1] - vals[i] for i in range(len(vals) - 1)))
        alpha = float(rng.uniform(1.05, 1.95))
        petz_vs_sand.record(
            dv.petz_renyi(p, q, alpha).value - dv.sandwiched_renyi(p, q, alpha).value
        )

    for _ in range(samples):
        space = RegisterSpace([("A", 2), ("B", 2), ("C", 2)])
        p = random_density(space, rng, floor=0.02)
        q = random_density(space, rng, floor=0.02)
        pr = partial_trace(p, ["A", "B"])
        qr = partial_trace(q, ["A", "B"])
        dpi.record(dv.relative_entropy(p, q).value - dv.relative_entropy(pr, qr).value)
        dpi.record(dv.max_relative_entropy(p, q).value - dv.max_relative_entropy(pr, qr).value)
        for alpha in (0.6, 1.5, 2.0):
            dpi.record(
                dv.sandwiched_renyi(p, q, alpha).value - dv.sandwiched_renyi(pr, qr, alpha).value
            )

    for _ in range(max(1, samples // 3)):
        space = _single_register_space(rng)
        p = random_density(space, rng, floor=0.05)
        q = random_density(space, rng, floor=0.05)
        base = dv.relative_entropy(p, q).value
        for alpha in (1.0 + 1e-4, 1.0 - 1e-4):
            limits.record(1e-3 - abs(dv.petz_renyi(p, q, alpha).value - base))
            limits.record(1e-3 - abs(dv.sandwiched_renyi(p, q, alpha).value - base))
        large_alpha.record(
            1e-4
            - abs(dv.sandwiched_renyi(p, q, 1e6).value - dv.max_relative_entropy(p, q).value)
        )

    space2 = RegisterSpace([("A", 2)])
    pure0 = DensityOperator(space2, np.diag([1.0, 0.0]))
    delta = 0.1
    for eps in (1e-2, 1e-4, 1e-6):
        psi = np.array([math.sqrt(1.0 - eps), math.sqrt(eps)])
        sigma_eps = DensityOperator(
            space2, (1.0 - delta) * np.outer(psi, psi) + delta * np.diag([1.0, 0.0])
        )
        for alpha in (1.3, 2.0, 4.0):
            blowup.record(
                1e-9 - abs(dv.geometric_renyi(pure0, sigma_eps, alpha).value - math.log2(10.0))
            )

    return {
        "sandwiched_alpha_monotone": mono.result(1e-8),
        "petz_dominates_sandwiched": petz_vs_sand.result(1e-8),
        "data_processing": dpi.result(1e-8),
        "renyi_limits": limits.result(0.0),
        "large_alpha_dmax": large_alpha.result(0.0),
        "geometric_blowup": blowup.result(0.0),
    }


def suite_sharp(seed: int = 0, samples: int = 300) -> dict:
    rng = np.random.default_rng(seed)
    sandwich = _Prop()
    witness_psd = _Prop()
    pure_identity = _Prop()
    for _ in range(samples):
        space = _single_register_space(rng, 2, 4)
        p, q = random_close_pair(space, rng, tv_cap=0.05)
        for alpha in (1.5, 2.0, 3.0):
            res, witness = dv.sharp_upper_bound(p, q, alpha)
            lower = dv.sandwiched_renyi(p, q, alpha).value
            eps = trace_distance(p, q)
            d = dv.max_relative_entropy(p, q).value
            upper = dv.sharp_closed_form(eps, d, alpha)
            sandwich.record(min(res.value - lower, upper - res.value + 1e-12))
            gap = float(np.linalg.eigvalsh(witness.matrix - p.matrix).min())
            witness_psd.record(gap)
    for _ in range(max(1, samples // 3)):
        space = _single_register_space(rng, 2, 4)
        psi = random_pure(space, rng)
        sigma = random_density(space, rng, floor=0.1)
        inv = np.linalg.inv(sigma.matrix)
        direct = math.log2(float(np.real(np.trace(psi.matrix @ inv))))
        dmax = dv.max_relative_entropy(psi, sigma).value
        for alpha in (1.5, 2.0, 5.0):
            geo = dv.geometric_renyi(psi, sigma, alpha).value
            pure_identity.record(1e-8 - max(abs(geo - direct), abs(geo - dmax)))
    return {
        "sharp_sandwich": sandwich.result(1e-8),
        "sharp_witness_dominates": witness_psd.result(1e-9),
        "geometric_pure_state_identity": pure_identity.result(0.0),
    }


def suite_pinching(seed: int = 0, samples: int = 200) -> dict:
    rng = np.random.default_rng(seed)
    psd = _Prop()
    for _ in range(samples):
        space = _single_register_space(rng, 2, 8, label="X")
        d = space.total_dim
        g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        x = HermitianObservable(space, g @ g.conj().T)
        rank = int(rng.integers(1, d))
        vecs = np.linalg.qr(rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank)))[0]
        pi = HermitianObservable(space, vecs @ vecs.conj().T)
        t = float(10.0 ** rng.uniform(-3, 3))
        gap = asymmetric_pinching_witness(x, pi, t)
        psd.record(float(gap.eigvals().min()) / max(1.0, float(np.abs(x.matrix).max())))
    return {"pinching_witness_psd": psd.result(1e-9)}


def suite_entropies(seed: int = 0, samples: int = 30) -> dict:
    rng = np.random.default_rng(seed)
    two_solvers = _Prop()
    smooth_mono = _Prop()
    mi_identities = _Prop()
    hup_mono = _Prop()
    smooth_renyi = _Prop()

    for _ in range(samples):
        space = RegisterSpace([("A", int(rng.integers(2, 4))), ("B", int(rng.integers(2, 4)))])
        rho = random_density(space, rng, floor=0.02)
        hm = en.h_min(rho, ["A"], ["B"]).value
        hd = en.h_up_alpha(rho, ["A"], ["B"], math.inf).value
        two_solvers.record(1e-5 - abs(hm - hd))
        vals = [en.h_up_alpha(rho, ["A"], ["B"], a).value for a in (1.2, 1.5, 2.0)] + [hm]
        hup_mono.record(min(vals[i] - vals[i + 1] for i in range(len(vals) - 1)) + 1e-6)

    for _ in range(samples):
        space = RegisterSpace([("A", 3), ("B", 3)])
        p = random_classical(space, rng)
        base, _ = en.smooth_hmin_classical(p, ["A"], ["B"], 0.0)
        hq = en.h_min(p.to_density(), ["A"], ["B"]).value
        smooth_mono.record(1e-6 - abs(base - hq))
        prev = base
        for eps in (0.02, 0.05, 0.1):
            val, cert = en.smooth_hmin_classical(p, ["A"], ["B"], eps)
            smooth_mono.record(val - prev)
            smooth_mono.record(cert.budget - cert.distance)
            prev = val

    for _ in range(samples):
        space = RegisterSpace([("X", 2), ("Y", 2), ("Z", 2)])
        rho = random_density(space, rng)
        mi = en.multipartite_mi(rho, [["X"], ["Y"], ["Z"]])
        # definition as a relative entropy from the product of marginals
        product = tensor_product(
            tensor_product(partial_trace(rho, ["X"]), partial_trace(rho, ["Y"])),
            partial_trace(rho, ["Z"]),
        )
        rel = dv.relative_entropy(rho, product).value
        mi_identities.record(1e-8 - abs(mi - rel))
        # telescoping identity sum_k I(X_k : X_1^{k-1})
        i2 = en.multipartite_mi(partial_trace(rho, ["X", "Y"]), [["X"], ["Y"]])
        i3 = en.multipartite_mi(rho, [["X", "Y"], ["Z"]])
        mi_identities.record(1e-8 - abs(mi - (i2 + i3)))

    for _ in range(samples):
        # classical witness chain for the smoothed Rényi relation
        space = RegisterSpace([("A", 3), ("B", 2)])
        p = random_classical(space, rng)
        eta = random_classical(space, rng)
        eta = ClassicalJoint(space, 0.7 * eta.probs + 0.3 / 6.0)
        eps = 0.2
        budget = eps * eps / 2.0  # trace budget certifying the purified ball
        try:
            lam = dv.smooth_dmax_classical(p, eta, budget / 2.0)
        except ValueError:
            continue
        trimmed = np.minimum(p.probs, 2.0**lam * eta.probs)
        p_tilde = ClassicalJoint(space, trimmed)
        if p_tilde.total_mass < 1.0 - eps * eps - 1e-12:
            continue
        for alpha in (1.5, 2.0):
            lhs = en.h_up_alpha(p_tilde.to_density(), ["A"], ["B"], alpha).value
            rhs = (
                en.h_up_alpha(eta.to_density(), ["A"], ["B"], alpha).value
                - alpha / (alpha - 1.0) * lam
                - math.log2(1.0 / (1.0 - eps * eps)) / (alpha - 1.0)
            )
            smooth_renyi.record(lhs - rhs)

    return {
        "hmin_two_solvers_agree": two_solvers.result(0.0),
        "hup_alpha_monotone": hup_mono.result(1e-6),
        "smooth_hmin_monotone": smooth_mono.result(1e-9),
        "mutual_information_identities": mi_identities.result(0.0),
        "smoothed_renyi_relation": smooth_renyi.result(1e-8),
    }


def suite_chain_rules(seed: int = 0, samples: int = 100) -> dict:
    rng = np.random.default_rng(seed)
    identity = _Prop()
    corollary = _Prop()
    for _ in range(samples):
        space = RegisterSpace([("A1", 2), ("A2", 2), ("B", 2)])
        rho = random_density(space, rng, floor=0.02)
        sigma_b = random_density(RegisterSpace([("B", 2)]), rng, floor=0.05)
        for alpha in (1.3, 2.0):
            try:
                en.chain_rule_nu_state(rho, ["A1"], ["A2"], ["B"], sigma_b, alpha)
                identity.record(1.0)
            except ArithmeticError:
                identity.record(-1.0)
    for _ in range(max(1, samples // 4)):
        space = RegisterSpace([("A1", 2), ("A2", 2), ("B", 2)])
        rho = random_density(space, rng, floor=0.02)
        for alpha in (1.3, 1.5):
            up1 = en.h_up_alpha(rho, ["A1"], ["B"], alpha)
            nu = en.chain_rule_nu_state(
                rho, ["A1"], ["A2"], ["B"], up1.optimizer_sigma, alpha
            )
            down = en.h_down_alpha(nu, ["A2"], ["A1", "B"], alpha).value
            up12 = en.h_up_alpha(rho, ["A1", "A2"], ["B"], alpha).value
            corollary.record(up12 - (up1.value + down))
    return {
        "chain_rule_identity": identity.result(0.0),
        "chain_rule_up_corollary": corollary.result(1e-7),
    }


def suite_dimension_bounds(seed: int = 0, samples: int = 200) -> dict:
    rng = np.random.default_rng(seed)
    lower = _Prop()
    upper = _Prop()
    conditioning = _Prop()
    conditioning_classical = _Prop()

    def up(rho, a, b, alpha):
        if alpha == math.inf:
            return en.h_min(rho, a, b).value
        return en.h_up_alpha(rho, a, b, alpha).value

    for i in range(samples):
        space = RegisterSpace(
            [("A1", 2), ("A2", int(rng.integers(2, 4))), ("B", int(rng.integers(2, 4)))]
        )
        rho = random_density(space, rng, floor=0.02)
        log_a2 = math.log2(space.dim("A2"))
        for alpha in (1.3, 2.0, math.inf):
            h12 = up(rho, ["A1", "A2"], ["B"], alpha)
            h1 = up(rho, ["A1"], ["B"], alpha)
            lower.record(h12 - (h1 - log_a2))
            upper.record((h1 + log_a2) - h12)

    for i in range(samples):
        space = RegisterSpace([("A", 2), ("B", 2), ("C", 2)])
        rho = random_density(space, rng, floor=0.02)
        for alpha in (1.3, 2.0, math.inf):
            habc = up(rho, ["A"], ["B", "C"], alpha)
            hab = up(rho, ["A"], ["B"], alpha)
            conditioning.record(habc - (hab - 2.0))

    for i in range(samples):
        qspace = RegisterSpace([("A", 2), ("B", 2)])
        rho = random_cq(2, qspace, rng, label="C")
        for alpha in (1.3, 2.0, math.inf):
            habc = up(rho, ["A"], ["B", "C"], alpha)
            hab = up(rho, ["A"], ["B"], alpha)
            conditioning_classical.record(habc - (hab - 1.0))

    return {
        "dim_bound_lower": lower.result(1e-7),
        "dim_bound_upper": upper.result(1e-7),
        "conditioning_register_bound": conditioning.result(1e-7),
        "conditioning_register_bound_classical": conditioning_classical.result(1e-7),
    }


def suite_counterexamples(seed: int = 0) -> dict:
    del seed  # constructions are deterministic
    p_value = _Prop()
    cond_value = _Prop()
    side_info = _Prop()
    det_bound = _Prop()

    for n in (8, 12):
        eps, eps_prime = 0.1, 0.25
        p, p_given_e = sm.triangle_p_family(n, eps)
        val, _ = en.smooth_hmin_classical(p, ["A"], ["B"], eps, mode="normalized")
        p_value.record(1e-9 - abs(val - n))
        val_c, _ = en.smooth_hmin_classical(
            p_given_e, ["A"], ["B"], eps_prime, mode="normalized"
        )
        cond_value.record(1e-9 - abs(val_c - math.log2(1.0 / (1.0 - eps_prime))))

    rep = sm.counterexample_side_info(8, 0.5, 0.25)
    side_info.record(1e-12 - abs(rep["hmin_primed"] - 8.0))
    side_info.record(rep["upper_bound"] - rep["lp_real_smoothed"])

    # deterministic-function ceiling: A = f(B) forces a small smoothed value
    rng = np.random.default_rng(5)
    nb = 6
    f_map = rng.integers(0, 3, size=nb)
    table = np.zeros((3, nb))
    weights = rng.dirichlet(np.ones(nb)) * 0.9
    for b in range(nb):
        table[f_map[b], b] = weights[b]
    joint = ClassicalJoint(RegisterSpace([("A", 3), ("B", nb)]), table)
    for eps in (0.01, 0.04):
        val, _ = en.smooth_hmin_classical(joint, ["A"], ["B"], eps)
        ceiling = math.log2(1.0 / (joint.total_mass - math.sqrt(2.0 * eps)))
        det_bound.record(ceiling - val)

    return {
        "spike_family_value": p_value.result(0.0),
        "conditioned_family_value": cond_value.result(0.0),
        "side_information_gap": side_info.result(0.0),
        "deterministic_function_ceiling": det_bound.result(1e-9),
    }


def suite_eat_smoke(seed: int = 0) -> dict:
    rep = sm.quantum_eat_smoke(n=2, eps=0.05, delta=0.2, alpha=1.25, beta=2.0, seed=seed)
    ceiling = _Prop()
    recursion = _Prop()
    ceiling.record(rep["z_ceiling"] - rep["divergence"])
    ceiling.record(rep["sharp_sum"] - rep["divergence"])
    recursion.record(rep["theta_worst_slack"])
    return {
        "smoke_divergence_ceilings": ceiling.result(1e-9),
        "smoke_theta_recursion": recursion.result(1e-7),
    }


SUITES: dict[str, Callable[..., dict]] = {
    "triangle": suite_triangle,
    "divergences": suite_divergences,
    "entropies": suite_entropies,
    "chain-rules": suite_chain_rules,
    "dimension-bounds": suite_dimension_bounds,
    "pinching": suite_pinching,
    "sharp": suite_sharp,
    "counterexamples": suite_counterexamples,
    "eat-smoke": suite_eat_smoke,
}


def run_suite(name: str, seed: int = 0, scale: float = 1.0) -> dict:
    """Run one named suite (or ``all``); returns the merged property map."""
    if name == "all":
        merged = {}
        for suite_name in SUITE_NAMES:
            merged.update(run_suite(suite_name, seed=seed, scale=scale))
        return merged
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {SUITE_NAMES + ('all',)}")
    fn = SUITES[name]
    if name in ("counterexamples", "eat-smoke"):
        return fn(seed=seed)
    defaults = {
        "triangle": 300,
        "divergences": 300,
        "entropies": 30,
        "chain-rules": 100,
        "dimension-bounds": 200,
        "pinching": 200,
        "sharp": 300,
    }
    samples = max(2, int(defaults[name] * scale))
    return fn(seed=seed, samples=samples)
