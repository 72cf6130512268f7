"""Sequential device-independent key-rate chain built on the CHSH game.

The per-round winning probability ω pins down Alice's conditional
entropy through the single-round curve f(ω); demanding
1 - f(ω_exp - δ) ≤ ε⁴ turns the von Neumann bound into a
mutual-information level of n ε⁴, which the approximately-independent-
registers evaluator converts into a smooth min-entropy rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from oneshot.bounds import (
    BoundReport,
    ScenarioSpec,
    approx_indep_bound,
    binary_entropy,
)

TSIRELSON = (2.0 + math.sqrt(2.0)) / 4.0


@dataclass(frozen=True)
class DiqkdSpec:
    """Protocol-level inputs for the key-rate evaluation.

    ``test_fraction`` (the γ of the protocol description) is recorded for
    documentation only; the rate formula assumes the expected winning
    probability is met.
    """

    # the sampling slack must fit inside the (tiny) feasibility window
    # between the required winning probability and the Tsirelson point;
    # at eps_target = 0.05 the window is already below 1e-7
    n: float
    omega_exp: float
    delta_w: float = 1e-9
    eps_target: float = 0.1
    test_fraction: float = 0.1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n={self.n} must be at least 1")
        if not (0.0 < self.eps_target < 1.0):
            raise ValueError(f"eps_target={self.eps_target} outside (0, 1)")
        if not (0.75 + self.delta_w <= self.omega_exp <= TSIRELSON + 1e-12):
            raise ValueError(
                f"omega_exp={self.omega_exp} outside [3/4 + delta_w, (2+sqrt(2))/4]"
            )


def chsh_rate_function(omega: float) -> float:
    """Single-round entropy floor 1 - h(1/2 + sqrt(16 ω(ω-1) + 3)/2).

    Zero below the classical threshold 3/4, one at the Tsirelson point;
    convex and continuous on [0, (2+sqrt(2))/4].
    """
    if omega < 0.0 or omega > TSIRELSON + 1e-12:
        raise ValueError(f"omega={omega} outside [0, (2+sqrt(2))/4]")
    if omega < 0.75:
        return 0.0
    disc = 16.0 * omega * (omega - 1.0) + 3.0
    disc = min(max(disc, 0.0), 1.0)
    return 1.0 - binary_entropy(0.5 + 0.5 * math.sqrt(disc))


def required_omega(eps: float, delta_w: float, tol: float = 1e-10) -> float:
    """Least ω_exp with 1 - f(ω_exp - δ) ≤ ε⁴, found by bisection.

    The defect 1 - f is continuous and strictly decreasing on
    [3/4, Tsirelson], so bisection to ``tol`` is exact for our purposes.
    Raises when even the Tsirelson point cannot meet the target.
    """
    target = eps**4
    if 1.0 - chsh_rate_function(TSIRELSON) > target + 1e-15:
        raise ValueError("even a perfect device cannot reach the requested defect")
    lo, hi = 0.75, TSIRELSON
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if 1.0 - chsh_rate_function(mid) <= target:
            hi = mid
        else:
            lo = mid
    omega = hi + delta_w
    if omega > TSIRELSON + 1e-12:
        raise ValueError(
            f"no feasible omega_exp: need {hi:.12f} + delta_w {delta_w} ≤ Tsirelson"
        )
    return omega


def diqkd_keyrate_bound(spec: DiqkdSpec) -> BoundReport:
    """Smooth min-entropy floor for the sequential protocol.

    Feeds per-round entropy 1 and mutual-information level ε⁴ into the
    approximately-independent-registers evaluator; the resulting rate per
    round approaches 1 - 3 ε log2(5) with an O(1/ε³) additive tail, at
    smoothing ε + ε⁴.  The report records the minimal round count for a
    positive bound and the ω_exp feasibility solution.
    """
    eps = spec.eps_target
    omega = required_omega(eps, spec.delta_w)
    if spec.omega_exp + 1e-12 < omega:
        raise ValueError(
            f"omega_exp={spec.omega_exp} below the feasibility point {omega:.12f}"
        )
    inner = ScenarioSpec(
        n=int(spec.n), dim_a=2, dim_b=2, eps=eps**4, per_round_entropy=1.0
    )
    report = approx_indep_bound(inner)
    report.extras["omega_required"] = omega
    report.extras["rate_per_round"] = report.value / spec.n
    report.extras["n_star"] = positivity_threshold(eps)
    report.extras["asymptotic_rate"] = 1.0 - 3.0 * eps * math.log2(5.0)
    return report


def positivity_threshold(eps: float) -> float:
    """Least n with a positive key-rate bound, by bisection on the report."""

    def value(n: float) -> float:
        inner = ScenarioSpec(n=max(int(n), 1), dim_a=2, dim_b=2, eps=eps**4, per_round_entropy=1.0)
        return approx_indep_bound(inner).value

    lo, hi = 1.0, 2.0
    while value(hi) <= 0.0:
        hi *= 2.0
        if hi > 1e18:
            raise ArithmeticError("no positive rate below 1e18 rounds")
    while hi - lo > 1.0:
        mid = (lo + hi) / 2.0
        if value(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return math.ceil(hi)
