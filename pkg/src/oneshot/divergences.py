"""Quantum divergences: relative, max, Petz, sandwiched, geometric.

All values are in bits.  Infinite values (support-condition failures) are
represented explicitly via :class:`DivergenceResult`; no float overflow is
ever produced.  Trace functionals are evaluated in the log domain so very
large Rényi orders (used to approach the max-relative entropy) stay
finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.linalg as npl
import scipy.linalg

from oneshot.linalg import (
    ClassicalJoint,
    DensityOperator,
    HermitianObservable,
    SpaceMismatchError,
    SUPPORT_CUTOFF,
    herm_power_matrix,
    hermitianize,
    support_leak,
    support_projector,
    trace_norm,
)

LN2 = math.log(2.0)

FAMILIES = ("relative", "max", "petz", "sandwiched", "geometric", "sharp_upper")


@dataclass(frozen=True)
class DivergenceResult:
    value: float
    alpha: float
    family: str

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)

    def __float__(self) -> float:
        return self.value


def _check_same_space(p, q) -> None:
    if p.space != q.space:
        raise SpaceMismatchError("operators live on different spaces")


def _clean_eigvals(matrix: np.ndarray) -> np.ndarray:
    w = npl.eigvalsh(hermitianize(matrix))
    return np.clip(w, 0.0, None)


def _support_ok(p: np.ndarray, q: np.ndarray) -> bool:
    """supp(p) ⊆ supp(q) up to the package support cutoff."""
    leak = support_leak(p, q)
    return leak <= SUPPORT_CUTOFF * max(1.0, float(np.trace(p).real))


def _not_orthogonal(p: np.ndarray, q: np.ndarray) -> bool:
    pi_p = support_projector(p)
    pi_q = support_projector(q)
    return float(np.trace(pi_p @ pi_q).real) > 1e-12


def _log2_trace_power(matrix: np.ndarray, alpha: float) -> float:
    """log2 tr(M^alpha) for PSD M, evaluated stably in the log domain."""
    w = _clean_eigvals(matrix)
    w = w[w > 1e-300]
    if w.size == 0:
        return -math.inf
    logs = alpha * np.log2(w)
    top = logs.max()
    return float(top + np.log2(np.exp2(logs - top).sum()))


def relative_entropy(p: DensityOperator, q: DensityOperator) -> DivergenceResult:
    """Umegaki relative entropy tr(P log P - P log Q) / tr(P)."""
    _check_same_space(p, q)
    if not _support_ok(p.matrix, q.matrix):
        return DivergenceResult(math.inf, 1.0, "relative")
    wp, vp = npl.eigh(hermitianize(p.matrix))
    wp = np.clip(wp, 0.0, None)
    wq, vq = npl.eigh(hermitianize(q.matrix))
    wq = np.clip(wq, 0.0, None)
    # tr(P log P) over the support of P
    mask = wp > 1e-18
    tr_plogp = float((wp[mask] * np.log2(wp[mask])).sum())
    # tr(P log Q): evaluate log Q on supp(Q); P lives inside it
    mask_q = wq > SUPPORT_CUTOFF * max(wq.max(initial=0.0), 1e-300)
    logq = np.full_like(wq, 0.0)
    logq[mask_q] = np.log2(wq[mask_q])
    log_q_mat = (vq * logq) @ vq.conj().T
    tr_plogq = float(np.trace(p.matrix @ log_q_mat).real)
    return DivergenceResult((tr_plogp - tr_plogq) / p.trace, 1.0, "relative")


def max_relative_entropy(p: DensityOperator, q: DensityOperator) -> DivergenceResult:
    """D_max(P||Q) = inf { λ : P ≤ 2^λ Q } = log λ_max(Q^{-1/2} P Q^{-1/2})."""
    _check_same_space(p, q)
    if not _support_ok(p.matrix, q.matrix):
        return DivergenceResult(math.inf, math.inf, "max")
    qn = herm_power_matrix(q.matrix, -0.5)
    w = _clean_eigvals(qn @ p.matrix @ qn)
    top = w.max(initial=0.0)
    if top <= 0.0:
        return DivergenceResult(-math.inf, math.inf, "max")
    return DivergenceResult(float(np.log2(top)), math.inf, "max")


def petz_renyi(p: DensityOperator, q: DensityOperator, alpha: float) -> DivergenceResult:
    """Petz Rényi divergence (1/(α-1)) log tr(P^α Q^{1-α}) / tr(P)."""
    if not (0.0 < alpha < 2.0) or alpha == 1.0:
        raise ValueError(f"alpha={alpha} outside (0,1) ∪ (1,2)")
    _check_same_space(p, q)
    if alpha > 1.0:
        if not _support_ok(p.matrix, q.matrix):
            return DivergenceResult(math.inf, alpha, "petz")
    elif not _not_orthogonal(p.matrix, q.matrix):
        return DivergenceResult(math.inf, alpha, "petz")
    pa = herm_power_matrix(p.matrix, alpha)
    qa = herm_power_matrix(q.matrix, 1.0 - alpha)
    tr = float(np.trace(pa @ qa).real)
    if tr <= 0.0:
        return DivergenceResult(math.inf, alpha, "petz")
    val = (np.log2(tr) - np.log2(p.trace)) / (alpha - 1.0)
    return DivergenceResult(float(val), alpha, "petz")


def sandwiched_renyi(p: DensityOperator, q: DensityOperator, alpha: float) -> DivergenceResult:
    """Sandwiched Rényi divergence; α = inf dispatches to D_max."""
    if alpha == math.inf:
        r = max_relative_entropy(p, q)
        return DivergenceResult(r.value, math.inf, "sandwiched")
    if not (alpha >= 0.5 and alpha != 1.0):
        raise ValueError(f"alpha={alpha} outside [1/2,1) ∪ (1,∞]")
    _check_same_space(p, q)
    if alpha > 1.0:
        if not _support_ok(p.matrix, q.matrix):
            return DivergenceResult(math.inf, alpha, "sandwiched")
    elif not _not_orthogonal(p.matrix, q.matrix):
        return DivergenceResult(math.inf, alpha, "sandwiched")
    val = _sandwiched_value(p.matrix, q.matrix, alpha, p.trace)
    return DivergenceResult(val, alpha, "sandwiched")


def _sandwiched_value(p: np.ndarray, q: np.ndarray, alpha: float, tr_p: float) -> float:
    a_half = (alpha - 1.0) / alpha / 2.0  # α'/2, exact
    qn = herm_power_matrix(q, -a_half)
    g = hermitianize(qn @ p @ qn)
    log_tr = _log2_trace_power(g, alpha)
    if log_tr == -math.inf:
        return math.inf
    return float((log_tr - np.log2(tr_p)) / (alpha - 1.0))


def geometric_renyi(
    a: HermitianObservable | DensityOperator, q: DensityOperator, alpha: float
) -> DivergenceResult:
    """Geometric (maximal) Rényi divergence for PSD ``a`` (unnormalised ok).

    (1/(α-1)) log tr( Q (Q^{-1/2} A Q^{-1/2})^α ); +∞ unless supp A ⊆ supp Q.
    For a normalised pure state the value equals log <ψ|Q^{-1}|ψ> for every
    α > 1.
    """
    if not alpha > 1.0:
        raise ValueError(f"alpha={alpha} must exceed 1")
    _check_same_space(a, q)
    a_mat = hermitianize(a.matrix)
    if _clean_eigvals(a_mat).max(initial=0.0) <= 0.0:
        raise ValueError("first argument must be a nonzero PSD operator")
    if not _support_ok(a_mat, q.matrix):
        return DivergenceResult(math.inf, alpha, "geometric")
    val = _geometric_value(a_mat, q.matrix, alpha)
    return DivergenceResult(val, alpha, "geometric")


def _geometric_value(a: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """log-domain tr(Q M^α) with M = L⁻¹AL⁻ᴴ, Q = LLᴴ restricted to supp Q.

    The Cholesky route keeps tiny eigenvalues of Q fully relatively
    accurate (triangular solves are backward stable), which matters for
    ill-conditioned second arguments.
    """
    wq, vq = npl.eigh(hermitianize(q))
    scale = max(wq.max(initial=0.0), 1e-300)
    keep = wq > SUPPORT_CUTOFF * scale
    basis = vq[:, keep]
    q_s = hermitianize(basis.conj().T @ q @ basis)
    a_s = hermitianize(basis.conj().T @ a @ basis)
    try:
        chol = npl.cholesky(q_s)
    except npl.LinAlgError:
        chol = npl.cholesky(q_s + 10 * SUPPORT_CUTOFF * scale * np.eye(q_s.shape[0]))
    inv_l_a = scipy.linalg.solve_triangular(chol, a_s, lower=True)
    m = scipy.linalg.solve_triangular(chol, inv_l_a.conj().T, lower=True).conj().T
    m = hermitianize(m)
    # tr(Q (Q^{-1/2} A Q^{-1/2})^α) = tr(L M^α Lᴴ) = sum_i λ_i^α |Lᴴ u_i|²
    w, u = npl.eigh(m)
    w = np.clip(w, 0.0, None)
    weights = np.abs(chol.conj().T @ u) ** 2
    col_w = weights.sum(axis=0)
    mask = (w > 1e-300) & (col_w > 1e-300)
    if not mask.any():
        return math.inf
    logs = alpha * np.log2(w[mask]) + np.log2(col_w[mask])
    top = logs.max()
    log_tr = float(top + np.log2(np.exp2(logs - top).sum()))
    return log_tr / (alpha - 1.0)


def sharp_upper_bound(
    p: DensityOperator, q: DensityOperator, alpha: float
) -> tuple[DivergenceResult, HermitianObservable]:
    """Certified upper bound on the sharp Rényi divergence of a close pair.

    Builds the dominating operator
    ``A_t = (1+t)(1+√ε) q^{1/2} Π q^{1/2} + (1+1/t) 2^d q^{1/2} Π⊥ q^{1/2}``
    at ``t = (2^{αd} √ε / (1+√ε)^α)^{1/(α+1)}``, where ε is the trace
    distance, d the max-relative entropy, and Π projects onto the small
    eigenvalues (≤ √ε) of ``q^{-1/2} (p-q)_+ q^{-1/2}``.  Returns the
    geometric divergence of ``A_t`` from ``q`` together with the witness;
    ``A_t ⪰ p`` is certified by construction.
    """
    if not alpha > 1.0:
        raise ValueError(f"alpha={alpha} must exceed 1")
    _check_same_space(p, q)
    if not _support_ok(p.matrix, q.matrix):
        raise ValueError("supp(p) must be contained in supp(q)")
    eps = 0.5 * trace_norm(p.matrix - q.matrix)
    d = max_relative_entropy(p, q).value
    root_eps = math.sqrt(max(eps, 0.0))

    # positive part of p - q, conjugated by q^{-1/2}
    diff = hermitianize(p.matrix - q.matrix)
    w, v = npl.eigh(diff)
    pos = (v * np.clip(w, 0.0, None)) @ v.conj().T
    q_isqrt = herm_power_matrix(q.matrix, -0.5)
    q_sqrt = herm_power_matrix(q.matrix, 0.5)
    core = hermitianize(q_isqrt @ pos @ q_isqrt)
    lam, x = npl.eigh(core)
    small = lam <= root_eps + 1e-14
    pi = hermitianize(x[:, small] @ x[:, small].conj().T)
    pi_perp = np.eye(pi.shape[0]) - pi

    if small.all():
        witness_mat = (1.0 + root_eps) * q.matrix
        t_min = 0.0
    else:
        t_min = (2.0 ** (alpha * d) * root_eps / (1.0 + root_eps) ** alpha) ** (
            1.0 / (alpha + 1.0)
        )
        t_min = max(t_min, 1e-12)
        witness_mat = (1 + t_min) * (1 + root_eps) * (q_sqrt @ pi @ q_sqrt) + (
            1 + 1.0 / t_min
        ) * 2.0**d * (q_sqrt @ pi_perp @ q_sqrt)
    witness = HermitianObservable(p.space, witness_mat)
    value = _geometric_value(witness.matrix, q.matrix, alpha)
    return DivergenceResult(value, alpha, "sharp_upper"), witness


def sharp_closed_form(eps: float, d: float, alpha: float) -> float:
    """Closed-form ceiling for :func:`sharp_upper_bound`.

    ((α+1)/(α-1)) log( (1+√ε)^{α/(α+1)} + (2^{αd} √ε)^{1/(α+1)} ).
    """
    if not alpha > 1.0:
        raise ValueError(f"alpha={alpha} must exceed 1")
    root_eps = math.sqrt(max(eps, 0.0))
    first = (1.0 + root_eps) ** (alpha / (alpha + 1.0))
    # evaluate (2^{αd} √ε)^{1/(α+1)} in the log domain
    if root_eps == 0.0:
        second = 0.0
    else:
        second = 2.0 ** ((alpha * d + math.log2(root_eps)) / (alpha + 1.0))
    return (alpha + 1.0) / (alpha - 1.0) * math.log2(first + second)


def smooth_dmax_classical(p: ClassicalJoint, q: ClassicalJoint, eps: float) -> float:
    """Exact smoothed max-relative entropy for classical inputs.

    Minimises D_max(p̃||q) over reductions 0 ≤ p̃ ≤ p within the trace-
    distance ball (1/2)||p - p̃||₁ ≤ eps, i.e. removed mass ≤ 2·eps.
    Reductions are optimal in this ball: adding mass can only increase
    the maximal ratio p̃/q.  The minimal feasible λ satisfies
    Σ max(0, p - 2^λ q) = budget and is found exactly from the sorted
    ratio breakpoints.  Monotone nonincreasing in eps.
    """
    if p.space != q.space:
        raise SpaceMismatchError("distributions live on different spaces")
    if not (0.0 <= eps < 1.0):
        raise ValueError(f"eps={eps} outside [0, 1)")
    pv = p.flat()
    qv = q.flat()
    budget = 2.0 * eps
    if budget >= p.total_mass - 1e-15:
        raise ValueError("smoothing budget covers the entire distribution")
    off_support = pv[qv <= 0.0].sum()
    if off_support > budget + 1e-15:
        return math.inf
    mask = qv > 0.0
    pv_s, qv_s = pv[mask], qv[mask]
    ratios = pv_s / qv_s
    order = np.argsort(ratios)[::-1]
    pv_s, qv_s, ratios = pv_s[order], qv_s[order], ratios[order]
    remaining = budget - off_support
    # The trimmed mass T(μ) = Σ max(0, p - μ q) is piecewise linear and
    # decreasing in μ, with T(μ) = P_i - μ Q_i on the segment below the
    # i-th largest ratio (P_i, Q_i prefix sums over the active entries).
    # The minimal feasible μ solves T(μ) = remaining.
    p_cum = np.cumsum(pv_s)
    q_cum = np.cumsum(qv_s)
    mu = 0.0
    for i in range(ratios.size):
        lo = ratios[i + 1] if i + 1 < ratios.size else 0.0
        t_at_lo = p_cum[i] - lo * q_cum[i]
        if t_at_lo >= remaining - 1e-18:
            mu = (p_cum[i] - remaining) / q_cum[i]
            mu = min(max(mu, lo), ratios[i])
            break
    if mu <= 0.0:
        raise ValueError("smoothing budget covers the entire distribution")
    return float(np.log2(mu))


def substate_bound(d_value: float, eps: float) -> float:
    """Smoothed D_max ceiling produced from a relative-entropy bound.

    ``(d + 1)/eps + log(1/(1-eps))`` bounds the √eps-smoothed max-relative
    entropy whenever d bounds the relative entropy.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps={eps} outside (0, 1)")
    if d_value < 0.0:
        raise ValueError(f"d_value={d_value} must be nonnegative")
    return (d_value + 1.0) / eps + math.log2(1.0 / (1.0 - eps))


def classical_renyi_close_bound(eps: float, d: float, alpha: float) -> float:
    """Rényi-divergence ceiling for classical pairs with TV ≤ eps, D_max ≤ d.

    For α > 1:
        (1/(α-1)) log( (1+√ε)^{α-1} (1-2√ε) + 2^{d(α-1)+1} √ε )
    and the α → 1 companion (returned when alpha == 1):
        (1-2√ε) log(1+√ε) + 2√ε d.
    Requires d ≥ √eps.
    """
    if not (0.0 < eps <= 1.0):
        raise ValueError(f"eps={eps} outside (0, 1]")
    root_eps = math.sqrt(eps)
    if d < root_eps:
        raise ValueError(f"d={d} must be at least sqrt(eps)={root_eps}")
    if alpha == 1.0:
        return (1.0 - 2.0 * root_eps) * math.log2(1.0 + root_eps) + 2.0 * root_eps * d
    if alpha <= 1.0:
        raise ValueError(f"alpha={alpha} must be 1 (companion) or > 1")
    inner = (1.0 + root_eps) ** (alpha - 1.0) * (1.0 - 2.0 * root_eps) + 2.0 ** (
        d * (alpha - 1.0) + 1.0
    ) * root_eps
    return math.log2(inner) / (alpha - 1.0)


def classical_kl(p: np.ndarray, q: np.ndarray) -> float:
    """Scalar KL oracle in bits (supports subnormalised p with /tr p)."""
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    mask = p > 0
    if np.any(q[mask] <= 0):
        return math.inf
    return float((p[mask] * (np.log2(p[mask]) - np.log2(q[mask]))).sum() / p.sum())


def classical_renyi(p: np.ndarray, q: np.ndarray, alpha: float) -> float:
    """Scalar Rényi divergence oracle in bits."""
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    mask = p > 0
    if alpha > 1 and np.any(q[mask] <= 0):
        return math.inf
    with np.errstate(divide="ignore"):
        terms = p[mask] ** alpha * q[mask] ** (1.0 - alpha)
    return float((np.log2(terms.sum()) - np.log2(p.sum())) / (alpha - 1.0))
