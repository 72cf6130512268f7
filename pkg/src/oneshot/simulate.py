"""Sequential-process generators and counterexample constructions.

Classical processes are evaluated by exact table contraction (no
sampling); sizes are guarded by caps on the number of rounds.  The
quantum smoke test instantiates a tiny accumulation chain (qubit
registers, n ≤ 3) and evaluates every inequality it relies on directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse
from scipy.optimize import linprog
from scipy.stats import binom

from oneshot.channels import ClassicalChannel, KrausChannel, mix_kraus_channels
from oneshot.divergences import sandwiched_renyi, sharp_upper_bound
from oneshot.entropies import h_down_alpha, h_up_alpha
from oneshot.linalg import (
    ClassicalJoint,
    DensityOperator,
    RegisterSpace,
    hermitianize,
    partial_trace,
)

__all__ = [
    "MinTradeoffFunction",
    "TestEvent",
    "run_sequential_classical",
    "joint_from_conditionals",
    "build_r_distribution",
    "counterexample_side_info",
    "side_info_reduced_smoothed_hmin",
    "counterexample_triangle",
    "triangle_p_family",
    "quantum_eat_smoke",
]


@dataclass(frozen=True)
class MinTradeoffFunction:
    """Affine function on distributions over the test alphabet.

    ``values[x]`` is f(δ_x); affinity is then automatic,
    f(q) = Σ_x q(x) values[x].  ``min_sigma_override`` and
    ``var_override`` may tighten the statistics when the reachable set of
    test distributions is known; they default to the unrestricted
    extremes.  Non-affine tradeoff functions are rejected by design: only
    per-letter values can be supplied.
    """

    values: tuple[float, ...]
    min_sigma_override: Optional[float] = None
    var_override: Optional[float] = None

    def __init__(self, values: Sequence[float], min_sigma_override=None, var_override=None):
        vals = tuple(float(v) for v in values)
        if len(vals) < 1:
            raise ValueError("tradeoff function needs at least one letter")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "min_sigma_override", min_sigma_override)
        object.__setattr__(self, "var_override", var_override)

    @property
    def max_f(self) -> float:
        return max(self.values)

    @property
    def min_f(self) -> float:
        return min(self.values)

    @property
    def min_sigma_f(self) -> float:
        return self.min_f if self.min_sigma_override is None else float(self.min_sigma_override)

    @property
    def var_f(self) -> float:
        if self.var_override is not None:
            if self.var_override < 0:
                raise ValueError("variance statistic must be nonnegative")
            return float(self.var_override)
        # maximal variance over distributions: the even two-point mixture
        # of the extreme letters
        return ((self.max_f - self.min_f) / 2.0) ** 2

    @property
    def d_register_dim(self) -> int:
        return math.ceil(2.0 ** (self.max_f - self.min_f))

    def __call__(self, freq: Sequence[float]) -> float:
        q = np.asarray(freq, dtype=float)
        if q.shape != (len(self.values),) or abs(q.sum() - 1.0) > 1e-9 or q.min() < -1e-12:
            raise ValueError("argument is not a distribution on the test alphabet")
        return float(q @ np.asarray(self.values))


@dataclass(frozen=True)
class TestEvent:
    """Acceptance event over frequency vectors with threshold ``h``."""

    threshold: float
    tradeoff: MinTradeoffFunction
    predicate: Optional[Callable[[np.ndarray], bool]] = None

    def accepts(self, freq: Sequence[float]) -> bool:
        q = np.asarray(freq, dtype=float)
        if self.predicate is not None:
            return bool(self.predicate(q))
        return self.tradeoff(q) >= self.threshold - 1e-12


# ---------------------------------------------------------------------------
# classical sequential processes


def run_sequential_classical(
    initial: ClassicalJoint, channels: Sequence[ClassicalChannel]
) -> ClassicalJoint:
    """Exact joint over (A_1..A_n, B_1..B_n, E) of a memory-channel chain.

    ``initial`` holds registers (R0[, E]); channel k maps R_{k-1} to
    (R_k, A_k, B_k).  The final memory register is traced out.
    """
    labels = list(initial.space.labels)
    has_e = len(labels) == 2
    if len(labels) not in (1, 2):
        raise ValueError("initial joint must hold (R0) or (R0, E)")
    dim_e = initial.space.dims[1] if has_e else 1
    acc = initial.probs.reshape(initial.space.dims[0], dim_e)  # (R, E)
    a_dims: list[int] = []
    b_dims: list[int] = []
    for idx, ch in enumerate(channels):
        if len(ch.input_dims) != 1 or len(ch.output_dims) != 3:
            raise ValueError("sequential channels must map R -> (R', A, B)")
        m = idx  # rounds already absorbed; axes (A_1..m, B_1..m, R, E)
        if ch.input_dims[0] != acc.shape[2 * m]:
            raise ValueError(f"channel {idx + 1} input dimension mismatch")
        out = np.tensordot(acc, ch.table, axes=([2 * m], [0]))
        # axes now (A_1..m, B_1..m, E, R', A_new, B_new)
        perm = (
            list(range(m))
            + [2 * m + 2]
            + list(range(m, 2 * m))
            + [2 * m + 3]
            + [2 * m + 1, 2 * m]
        )
        acc = out.transpose(perm)
        a_dims.append(ch.output_dims[1])
        b_dims.append(ch.output_dims[2])
    acc = acc.sum(axis=-2)  # trace out the final memory register
    n = len(channels)
    regs = [(f"A{k + 1}", a_dims[k]) for k in range(n)]
    regs += [(f"B{k + 1}", b_dims[k]) for k in range(n)]
    if has_e:
        regs.append(("E", dim_e))
    else:
        acc = acc.reshape(acc.shape[:-1])
    return ClassicalJoint(RegisterSpace(regs), acc)


def joint_from_conditionals(
    p_e: Sequence[float], conditionals: Sequence[np.ndarray], dim_a: int, dim_b: int
) -> ClassicalJoint:
    """Assemble Π_k p(a_k, b_k | a_1^{k-1}, b_1^{k-1}, e) · p(e) exactly.

    ``conditionals[k]`` has shape (|A|,)*k + (|B|,)*k + (|E|, |A|, |B|),
    indexed (a_1..a_k, b_1..b_k, e, a_{k+1}, b_{k+1}).
    """
    p_e = np.asarray(p_e, dtype=float)
    dim_e = p_e.size
    n = len(conditionals)
    acc = p_e.copy()  # axes (E,)
    for k, cond in enumerate(conditionals):
        want = (dim_a,) * k + (dim_b,) * k + (dim_e, dim_a, dim_b)
        cond = np.asarray(cond, dtype=float).reshape(want)
        new = acc[..., np.newaxis, np.newaxis] * cond
        # axes (A^k, B^k, E, A_new, B_new) -> (A^k, A_new, B^k, B_new, E)
        perm = (
            list(range(k))
            + [2 * k + 1]
            + list(range(k, 2 * k))
            + [2 * k + 2]
            + [2 * k]
        )
        acc = new.transpose(perm)
    regs = [(f"A{k + 1}", dim_a) for k in range(n)]
    regs += [(f"B{k + 1}", dim_b) for k in range(n)]
    regs.append(("E", dim_e))
    return ClassicalJoint(RegisterSpace(regs), acc)


def build_r_distribution(
    p_e: Sequence[float],
    p_conditionals: Sequence[np.ndarray],
    q_conditionals: Sequence[np.ndarray],
    dim_a: int,
    dim_b: int,
    eps: float,
) -> tuple[ClassicalJoint, float]:
    """Markov-compliant envelope for a sup-norm-approximate process.

    Mixes each round conditional q^{(k)} with the uniform distribution,

        r^{(k)} = (q^{(k)} + |A||B| ε u) / (1 + |A||B| ε),

    and returns the joint r together with the certified exponent
    n log2(1 + ε|A||B|) for which p ≤ (1 + ε|A||B|)^n r holds elementwise.
    Raises when some history violates ||p^{(k)} - q^{(k)}||_∞ ≤ ε or when
    a q^{(k)} is not Markov (its B marginal depends on the A history).
    """
    n = len(p_conditionals)
    if len(q_conditionals) != n:
        raise ValueError("p and q conditional lists differ in length")
    p_e = np.asarray(p_e, dtype=float)
    dim_e = p_e.size
    ab = dim_a * dim_b
    r_conditionals = []
    for k in range(n):
        want = (dim_a,) * k + (dim_b,) * k + (dim_e, dim_a, dim_b)
        pk = np.asarray(p_conditionals[k], dtype=float).reshape(want)
        qk = np.asarray(q_conditionals[k], dtype=float).reshape(want)
        gap = np.abs(pk - qk).max()
        if gap > eps + 1e-12:
            raise ValueError(
                f"round {k + 1} violates the sup-norm premise: gap {gap:.3e} > eps {eps}"
            )
        # Markov check: q(b | history, e) must not depend on the A history
        qb = qk.sum(axis=-2)  # (A^k, B^k, E, B)
        if k > 0:
            ref = qb[(0,) * k + (...,)]
            diff = np.abs(qb - np.broadcast_to(ref, qb.shape)).max()
            if diff > 1e-10:
                raise ValueError(f"round {k + 1} conditional is not Markov (dev {diff:.3e})")
        # r = (q + |A||B| ε u)/(1 + |A||B| ε); the uniform table u has
        # entries 1/(|A||B|), so each entry gains exactly ε before rescaling
        rk = (qk + eps) / (1.0 + ab * eps)
        r_conditionals.append(rk)
    r_joint = joint_from_conditionals(p_e, r_conditionals, dim_a, dim_b)
    p_joint = joint_from_conditionals(p_e, p_conditionals, dim_a, dim_b)
    factor = (1.0 + eps * ab) ** n
    ratio_ok = p_joint.probs <= factor * r_joint.probs + 1e-12
    if not ratio_ok.all():
        raise AssertionError("elementwise domination p ≤ (1+ε|A||B|)^n r failed")
    exponent = n * math.log2(1.0 + eps * ab)
    return r_joint, exponent


# ---------------------------------------------------------------------------
# side-information counterexample


def _pattern_weights(n: int, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Leak-pattern probabilities and last-leak positions.

    Pattern c ∈ {0,1}^n marks the rounds whose side information reveals
    the full secret prefix (c_k = 0, probability ε/2 per round).  Returns
    (P(c), k*(c)) over all 2^n patterns; k* = 0 when no round leaks.
    """
    if n > 16:
        raise ValueError(f"n={n} exceeds the table-size guard (16)")
    size = 2**n
    probs = np.zeros(size)
    last_leak = np.zeros(size, dtype=int)
    p_leak = eps / 2.0
    for c in range(size):
        bits = [(c >> k) & 1 for k in range(n)]  # bit k: 1 = leak in round k+1
        pr = 1.0
        k_star = 0
        for k in range(n):
            if bits[k]:
                pr *= p_leak
                k_star = k + 1
            else:
                pr *= 1.0 - p_leak
        probs[c] = pr
        last_leak[c] = k_star
    return probs, last_leak


def side_info_reduced_smoothed_hmin(n: int, eps: float, eps_prime: float) -> float:
    """Exact smoothed min-entropy of the leaking process, reduced form.

    Averaging an optimal smoothing over the joint relabellings of the
    secret string (XOR shifts plus prefix permutations) preserves
    feasibility and the objective, so the mass-preserving LP collapses to
    three variables per leak pattern c: the level on supported cells
    (total mass V_c), the level parked on unsupported cells of the same
    side-information blocks (total mass U_c, capacity cap_c cells), and
    the per-block ceiling m_c = max of the two levels.  Minimise
    Σ_c 2^{k*(c)} m_c subject to Σ(V+U) = 1 and
    Σ(|P(c) - V_c| + U_c) ≤ 2 ε'.
    """
    probs, last_leak = _pattern_weights(n, eps)
    size = probs.size
    na = float(2**n)
    blocks = 2.0 ** last_leak.astype(float)
    consistent_cells = na  # 2^{k*} blocks x 2^{n-k*} supported cells each
    cap = blocks * (na - na / blocks)  # unsupported cells per pattern

    # variables [V (size), U (size), m (size), d (size)]
    def col(group: int, i: int) -> int:
        return group * size + i

    c_vec = np.zeros(4 * size)
    c_vec[2 * size : 3 * size] = blocks
    rows, cols, data, rhs = [], [], [], []

    def add_row(entries, bound):
        r = len(rhs)
        for c, v in entries:
            rows.append(r)
            cols.append(c)
            data.append(v)
        rhs.append(bound)

    for i in range(size):
        # m_i >= V_i / 2^n  (supported level)
        add_row([(col(0, i), 1.0 / consistent_cells), (col(2, i), -1.0)], 0.0)
        # m_i >= U_i / cap_i (parked level); U_i = 0 when there is no room
        if cap[i] > 0:
            add_row([(col(1, i), 1.0 / cap[i]), (col(2, i), -1.0)], 0.0)
        # d_i >= |P_i - V_i|
        add_row([(col(0, i), 1.0), (col(3, i), -1.0)], probs[i])
        add_row([(col(0, i), -1.0), (col(3, i), -1.0)], -probs[i])
    add_row(
        [(col(3, i), 1.0) for i in range(size)] + [(col(1, i), 1.0) for i in range(size)],
        2.0 * eps_prime,
    )
    a_ub = scipy.sparse.csr_matrix((data, (rows, cols)), shape=(len(rhs), 4 * size))
    eq_cols = [col(0, i) for i in range(size)] + [col(1, i) for i in range(size)]
    a_eq = scipy.sparse.csr_matrix(
        (np.ones(2 * size), (np.zeros(2 * size, dtype=int), eq_cols)), shape=(1, 4 * size)
    )
    bounds = [(0.0, None)] * (4 * size)
    for i in range(size):
        if cap[i] <= 0:
            bounds[col(1, i)] = (0.0, 0.0)
    res = linprog(
        c_vec,
        A_ub=a_ub,
        b_ub=np.array(rhs),
        A_eq=a_eq,
        b_eq=np.array([1.0]),
        bounds=bounds,
        method="highs",
    )
    if not res.success:
        raise ArithmeticError(f"side-information LP failed: {res.message}")
    return -math.log2(max(float(res.fun), 1e-300))


def side_info_full_table(n: int, eps: float) -> ClassicalJoint:
    """Explicit (A, B) table of the leaking process for small n.

    B enumerates the distinct realised side-information values: the leak
    pattern together with the longest revealed prefix.  Fresh random
    strings and suffix randomisers are coarse-grained away; they are
    independent of everything else and do not affect guessing
    probabilities or smoothing.
    """
    if n > 8:
        raise ValueError(f"n={n} exceeds the full-table guard (8)")
    probs, last_leak = _pattern_weights(n, eps)
    na = 2**n
    blocks: list[tuple[int, int]] = []  # (pattern, prefix value)
    index: dict[tuple[int, int], int] = {}
    for c in range(2**n):
        for prefix in range(2 ** last_leak[c]):
            index[(c, prefix)] = len(blocks)
            blocks.append((c, prefix))
    table = np.zeros((na, len(blocks)))
    for c in range(2**n):
        k_star = last_leak[c]
        weight = probs[c] / na
        for a in range(na):
            prefix = a & ((1 << k_star) - 1)  # bits 1..k* of the secret
            table[a, index[(c, prefix)]] = weight
    space = RegisterSpace([("A", na), ("B", len(blocks))])
    return ClassicalJoint(space, table)


def counterexample_side_info(n: int, eps: float, eps_prime: float) -> dict:
    """Leaky side-information process: large primed entropy, small real one.

    Round k leaks the full secret prefix with probability ε/2; the primed
    process replaces the leak with noise.  Reports the diamond distance
    between the round channels, the exact primed min-entropy (= n), the
    exact smoothed min-entropy of the real process, and the analytic
    ceiling l + log2(8/3) with l = (2/ε) log2(1/ε').
    """
    if n > 12:
        raise ValueError(f"n={n} exceeds the process guard (12)")
    if not (0.0 < eps < 1.0) or not (0.0 < eps_prime <= 0.25):
        raise ValueError("need eps in (0,1) and eps_prime in (0, 1/4]")
    ell = (2.0 / eps) * math.log2(1.0 / eps_prime)
    upper = ell + math.log2(8.0 / 3.0)
    lp_real = side_info_reduced_smoothed_hmin(n, eps, eps_prime)
    # primed process: pattern weights are independent of the uniform secret
    probs, last_leak = _pattern_weights(n, eps)
    hmin_primed = -math.log2((probs * 2.0 ** (-float(n))).sum())
    report = {
        "n": n,
        "eps": eps,
        "eps_prime": eps_prime,
        "l": ell,
        "upper_bound": upper,
        "hmin_primed": hmin_primed,
        "lp_real_smoothed": lp_real,
        "per_round_primed": 1.0,
        "per_round_real": lp_real / n,
        "diamond_tv": eps / 2.0,
    }
    return report


# ---------------------------------------------------------------------------
# triangle-inequality counterexample


def triangle_p_family(n: int, eps: float) -> tuple[ClassicalJoint, ClassicalJoint]:
    """Spike-plus-uniform pair (p, p conditioned on the spike event).

    B = 0 with probability ε and then A is the all-zero string; otherwise
    A is uniform.  Conditioning on B = 0 concentrates everything on one
    atom.
    """
    if n > 16:
        raise ValueError(f"n={n} exceeds the table-size guard (16)")
    na = 2**n
    table = np.zeros((na, 2))
    table[:, 1] = (1.0 - eps) / na
    table[0, 0] = eps
    space = RegisterSpace([("A", na), ("B", 2)])
    p = ClassicalJoint(space, table)
    cond = np.zeros((na, 2))
    cond[0, 0] = 1.0
    p_given_e = ClassicalJoint(space, cond)
    return p, p_given_e


def counterexample_triangle(n: int, eps: float) -> dict:
    """Witness data that entropic triangle inequalities need the α factor.

    Builds the spike distribution p and its conditioned version, plus the
    copy-chain statistics: the match count I = |{i : A_{2i-1} = A_{2i}}|
    is Binomial(n, (1+ε)/2) under the chain but Binomial(n, 1/2) under
    the product of its marginals, so the total-variation gap approaches 1
    as n grows.
    """
    if n > 16:
        raise ValueError(f"n={n} exceeds the table-size guard (16)")
    p, p_given_e = triangle_p_family(n, eps)
    ratio = p_given_e.probs[p.probs > 0] / p.probs[p.probs > 0]
    dmax_cond = math.log2(ratio.max())

    # pairwise match probability from the exact 2-step table
    # (A_prev, B_next, A_next): A_next copies A_prev when B_next = 0
    pair = np.zeros((2, 2, 2))
    for a_prev in range(2):
        pair[a_prev, 0, a_prev] += 0.5 * eps
        for a_next in range(2):
            pair[a_prev, 1, a_next] += 0.5 * (1.0 - eps) * 0.5
    match_prob = float(sum(pair[a, :, a].sum() for a in range(2)))

    ks = np.arange(n + 1)
    pmf_chain = binom.pmf(ks, n, match_prob)
    pmf_prod = binom.pmf(ks, n, 0.5)
    tv_statistic = 0.5 * float(np.abs(pmf_chain - pmf_prod).sum())
    return {
        "n": n,
        "eps": eps,
        "dmax_conditioned": dmax_cond,
        "dmax_expected": math.log2(1.0 / eps),
        "match_probability": match_prob,
        "mean_matches_chain": n * match_prob,
        "mean_matches_product": n / 2.0,
        "l1_lower_bound": 2.0 * tv_statistic,
    }


# ---------------------------------------------------------------------------
# quantum smoke test


def _copy_isometry(leak_to_b: bool) -> np.ndarray:
    """Isometry |r> -> |r>_R |r>_A |b>_B with b = r (leak) or b = 0."""
    v = np.zeros((8, 2), dtype=np.complex128)
    for r in range(2):
        b = r if leak_to_b else 0
        v[r * 4 + r * 2 + b, r] = 1.0
    return v


def _smoke_channels(eps: float) -> tuple[KrausChannel, KrausChannel]:
    """A Markov-compliant round channel and its ε-diamond perturbation.

    The compliant channel copies the memory qubit into the output and
    emits a fresh side-information qubit; the perturbed channel leaks the
    memory value into the side information with probability ε.
    """
    iso_clean = _copy_isometry(False)
    iso_leak = _copy_isometry(True)
    clean = KrausChannel(2, 8, [iso_clean])
    leak = KrausChannel(2, 8, [iso_leak])
    mixed = KrausChannel(
        2, 8, [math.sqrt(1 - eps) * iso_clean, math.sqrt(eps) * iso_leak]
    )
    return clean, mixed


def _apply_round(state: DensityOperator, ch: KrausChannel, round_idx: int) -> DensityOperator:
    """Apply a memory-round channel R -> (R, A_k, B_k) to the chain state."""
    labels = state.space.labels
    r_pos = labels.index("R")
    dims = state.space.dims
    d_before = math.prod(dims[:r_pos]) if r_pos else 1
    d_after = math.prod(dims[r_pos + 1 :]) if r_pos + 1 < len(dims) else 1
    out_regs = (
        list(state.space.registers[:r_pos])
        + [("R", 2), (f"A{round_idx}", 2), (f"B{round_idx}", 2)]
        + list(state.space.registers[r_pos + 1 :])
    )
    new_space = RegisterSpace(out_regs)
    mat = np.zeros((new_space.total_dim, new_space.total_dim), dtype=np.complex128)
    for k in ch.kraus:
        lifted = np.kron(np.kron(np.eye(d_before), k), np.eye(d_after))
        mat += lifted @ state.matrix @ lifted.conj().T
    return DensityOperator(new_space, hermitianize(mat))


def _run_chain(channels: Sequence[KrausChannel]) -> DensityOperator:
    """Chain state over (A_1..A_n, B_1..B_n) from a |+><+| memory qubit."""
    state = DensityOperator(RegisterSpace([("R", 2)]), np.full((2, 2), 0.5))
    for k, ch in enumerate(channels):
        state = _apply_round(state, ch, k + 1)
    keep = [l for l in state.space.labels if l != "R"]
    return partial_trace(state, keep)


def quantum_eat_smoke(
    n: int = 2,
    eps: float = 0.05,
    delta: float = 0.2,
    alpha: float = 1.25,
    beta: float = 2.0,
    omega_samples: int = 40,
    seed: int = 11,
) -> dict:
    """Tiny quantum accumulation chain with every inequality evaluated.

    Builds the perturbed chain ρ and the δ-mixed envelope chain σ, checks
    the divergence ceiling D̃_β(ρ||σ) ≤ n z_β(ε, δ), compares against the
    per-round certified sharp bounds on the realised states, and verifies
    the flagged-round entropy recursion
        H_α↑(A_1^k|B_1^k)_{θ|c} ≥ H_α↑(A_1^{k-1}|B_1^{k-1})_{θ|c}
                                  + [c_k = 1] h_k - [c_k = 0] s
    with s = log2(|A||B|²) on every flag string; h_k is estimated by
    restart minimisation over channel inputs and labelled heuristic.
    """
    if n > 3:
        raise ValueError(f"n={n} exceeds the smoke-test dimension guard (3)")
    from oneshot.bounds import scalar_z_beta

    clean, real = _smoke_channels(eps)
    mixed = mix_kraus_channels(clean, real, delta)

    rho = _run_chain([real] * n)
    sigma = _run_chain([mixed] * n)
    div = sandwiched_renyi(rho, sigma, beta).value
    z_ceiling = n * scalar_z_beta(eps, delta, beta)

    # per-round sharp bounds on the realised chain prefixes
    per_round = []
    init = DensityOperator(RegisterSpace([("R", 2)]), np.full((2, 2), 0.5))
    chain_rho = init
    chain_sigma = init
    for k in range(n):
        out_real = _apply_round(chain_sigma, real, k + 1)
        out_mixed = _apply_round(chain_sigma, mixed, k + 1)
        res, _ = sharp_upper_bound(out_real, out_mixed, beta)
        per_round.append(res.value)
        chain_rho = _apply_round(chain_rho, real, k + 1)
        chain_sigma = out_mixed

    # h_k: heuristic infimum of the down-arrow entropy over channel inputs
    rng = np.random.default_rng(seed)
    h_k = math.inf
    for t in range(omega_samples):
        if t == 0:
            # maximally entangled R:R~ input
            v = np.array([1.0, 0.0, 0.0, 1.0]) / math.sqrt(2.0)
            omega = np.outer(v, v)
        else:
            g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            omega = g @ g.conj().T
            omega /= np.trace(omega).real
        out = np.zeros((16, 16), dtype=np.complex128)
        for kop in clean.kraus:
            lifted = np.kron(kop, np.eye(2))
            out += lifted @ omega @ lifted.conj().T
        space = RegisterSpace([("R", 2), ("A", 2), ("B", 2), ("Rt", 2)])
        st = DensityOperator(space, hermitianize(out))
        val = h_down_alpha(st, ["A"], ["B", "Rt"], alpha).value
        h_k = min(h_k, val)
    s_pen = math.log2(2 * 2 * 2)  # log2(|A||B|^2)

    # flag-string recursion on θ
    theta_ok = True
    worst_slack = math.inf
    for flags in range(2**n):
        bits = [(flags >> k) & 1 for k in range(n)]  # 1 = compliant round
        state = init
        prev_h = 0.0
        for k in range(n):
            ch = clean if bits[k] else real
            state = _apply_round(state, ch, k + 1)
            reduced = partial_trace(state, [l for l in state.space.labels if l != "R"])
            a_labels = [f"A{j + 1}" for j in range(k + 1)]
            b_labels = [f"B{j + 1}" for j in range(k + 1)]
            cur_h = h_up_alpha(reduced, a_labels, b_labels, alpha, restarts=4).value
            gain = h_k if bits[k] else -s_pen
            slack = cur_h - (prev_h + gain)
            worst_slack = min(worst_slack, slack)
            if slack < -1e-7:
                theta_ok = False
            prev_h = cur_h
    return {
        "n": n,
        "eps": eps,
        "delta": delta,
        "alpha": alpha,
        "beta": beta,
        "divergence": div,
        "z_ceiling": z_ceiling,
        "divergence_within_ceiling": div <= z_ceiling + 1e-9,
        "per_round_sharp": per_round,
        "sharp_sum": float(sum(per_round)),
        "divergence_within_sharp_sum": div <= sum(per_round) + 1e-9,
        "h_k": h_k,
        "s_penalty": s_pen,
        "theta_recursion_ok": theta_ok,
        "theta_worst_slack": worst_slack,
    }
