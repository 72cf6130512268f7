"""Labelled tensor-space linear algebra and state metrics.

Operators live on a :class:`RegisterSpace`, an ordered list of named
registers.  Everything is stored dense (``complex128``); the intended
scale is a total dimension of at most ~64, which keeps eigendecompositions
essentially free and avoids any sparse machinery.

Conventions used throughout the package:

* Hermiticity is enforced by symmetrisation ``(X + X†)/2`` at
  construction time (eigendecomposition stability).
* Eigenvalues in ``[-1e-10, 0]`` are numerical noise and are clamped to
  zero; anything below ``-1e-10`` (relative to the matrix scale) is an
  invalid input and raises.
* Negative matrix powers are taken on the support only (pseudo-inverse
  convention).
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Iterable, Sequence

import numpy as np
import numpy.linalg as npl

HERM_TOL = 1e-10
EIG_CLAMP = 1e-10
TRACE_TOL = 1e-10
SUPPORT_CUTOFF = 1e-10


class SpaceMismatchError(ValueError):
    """Two operators do not live on the same register space."""


class LabelError(ValueError):
    """Unknown, duplicate or colliding register label."""


@dataclass(frozen=True)
class RegisterSpace:
    """Ordered collection of named registers spanning a tensor space."""

    registers: tuple[tuple[str, int], ...]

    def __init__(self, registers: Iterable[tuple[str, int]]):
        regs = tuple((str(label), int(dim)) for label, dim in registers)
        labels = [label for label, _ in regs]
        if len(set(labels)) != len(labels):
            raise LabelError(f"duplicate register labels in {labels}")
        for label, dim in regs:
            if dim < 1:
                raise LabelError(f"register {label!r} has dimension {dim} < 1")
        object.__setattr__(self, "registers", regs)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(label for label, _ in self.registers)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.registers)

    @property
    def total_dim(self) -> int:
        return prod(self.dims) if self.registers else 1

    def dim(self, label: str) -> int:
        for reg_label, reg_dim in self.registers:
            if reg_label == label:
                return reg_dim
        raise LabelError(f"unknown register label {label!r}")

    def positions(self, labels: Iterable[str]) -> list[int]:
        """Indices of ``labels`` in register order; raises on unknown labels."""
        wanted = set(labels)
        unknown = wanted - set(self.labels)
        if unknown:
            raise LabelError(f"unknown register labels {sorted(unknown)}")
        return [i for i, (label, _) in enumerate(self.registers) if label in wanted]

    def subspace(self, labels: Iterable[str]) -> "RegisterSpace":
        """Sub-space of ``labels`` in their original order."""
        keep = set(labels)
        return RegisterSpace([r for r in self.registers if r[0] in keep])

    def __eq__(self, other) -> bool:
        return isinstance(other, RegisterSpace) and self.registers == other.registers


def _as_matrix(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return m


def hermitianize(matrix: np.ndarray, tol: float = HERM_TOL) -> np.ndarray:
    """Return ``(X + X†)/2``; raise if X is grossly non-Hermitian."""
    m = _as_matrix(matrix)
    scale = max(1.0, float(np.abs(m).max(initial=0.0)))
    if np.abs(m - m.conj().T).max(initial=0.0) > tol * scale * 100:
        raise ValueError("matrix is not Hermitian within tolerance")
    return (m + m.conj().T) / 2


@dataclass(frozen=True)
class HermitianObservable:
    """Hermitian (possibly sign-indefinite) operator on a register space."""

    space: RegisterSpace
    matrix: np.ndarray

    def __init__(self, space: RegisterSpace, matrix):
        m = hermitianize(matrix)
        if m.shape[0] != space.total_dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} != space dimension {space.total_dim}"
            )
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvals(self) -> np.ndarray:
        return npl.eigvalsh(self.matrix)


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian PSD operator with trace in (0, 1] on a labelled space.

    Subnormalised states (trace < 1) are allowed everywhere; several
    divergences normalise by the trace explicitly.
    """

    space: RegisterSpace
    matrix: np.ndarray

    def __init__(self, space: RegisterSpace, matrix):
        m = hermitianize(matrix)
        if m.shape[0] != space.total_dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} != space dimension {space.total_dim}"
            )
        scale = max(1.0, float(np.abs(m).max(initial=0.0)))
        eigs = npl.eigvalsh(m)
        if eigs.min(initial=0.0) < -EIG_CLAMP * scale * 10:
            raise ValueError(f"matrix has negative eigenvalue {eigs.min():.3e}")
        tr = float(np.trace(m).real)
        if not (0.0 < tr <= 1.0 + TRACE_TOL):
            raise ValueError(f"trace {tr} outside (0, 1]")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.trace(self.matrix).real)

    def eigvals(self) -> np.ndarray:
        return npl.eigvalsh(self.matrix)

    def as_observable(self) -> HermitianObservable:
        return HermitianObservable(self.space, self.matrix)


@dataclass(frozen=True)
class ClassicalJoint:
    """Joint pmf over labelled finite alphabets, possibly subnormalised.

    ``probs`` is stored as an ndarray with one axis per register, in
    register order.
    """

    space: RegisterSpace
    probs: np.ndarray

    def __init__(self, space: RegisterSpace, probs):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim == 1:
            p = p.reshape(space.dims)
        if p.shape != space.dims:
            raise ValueError(f"probability table shape {p.shape} != dims {space.dims}")
        if p.min(initial=0.0) < -1e-12:
            raise ValueError(f"negative probability {p.min():.3e}")
        p = np.clip(p, 0.0, None)
        if p.sum() > 1.0 + 1e-12:
            raise ValueError(f"total mass {p.sum()} exceeds 1")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "probs", p)

    @property
    def total_mass(self) -> float:
        return float(self.probs.sum())

    def marginal(self, labels: Sequence[str]) -> "ClassicalJoint":
        keep = self.space.positions(labels)
        axes = tuple(i for i in range(len(self.space.registers)) if i not in keep)
        return ClassicalJoint(self.space.subspace(labels), self.probs.sum(axis=axes))

    def flat(self) -> np.ndarray:
        return self.probs.reshape(-1)

    def to_density(self) -> DensityOperator:
        """Diagonal embedding into a DensityOperator on the same space."""
        return DensityOperator(self.space, np.diag(self.flat()))


def classical_tv(a: ClassicalJoint, b: ClassicalJoint) -> float:
    """Total variation (1/2) sum |a - b| between two joints on one space."""
    if a.space != b.space:
        raise SpaceMismatchError("classical joints live on different spaces")
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


# ---------------------------------------------------------------------------
# tensor algebra


def tensor_product(a: DensityOperator, b: DensityOperator) -> DensityOperator:
    """Kronecker product of two states on disjoint register sets."""
    collision = set(a.space.labels) & set(b.space.labels)
    if collision:
        raise LabelError(f"register labels collide: {sorted(collision)}")
    space = RegisterSpace(list(a.space.registers) + list(b.space.registers))
    return DensityOperator(space, np.kron(a.matrix, b.matrix))


def tensor_many(states: Sequence[DensityOperator]) -> DensityOperator:
    out = states[0]
    for s in states[1:]:
        out = tensor_product(out, s)
    return out


def _tensor_view(matrix: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    return matrix.reshape(tuple(dims) * 2)


def partial_trace_matrix(matrix: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a dense matrix over all axes not in ``keep``."""
    n = len(dims)
    t = _tensor_view(matrix, dims)
    row = list(range(n))
    col = [n + i if i in keep else i for i in range(n)]
    out = [i for i in keep] + [n + i for i in keep]
    res = np.einsum(t, row + col, out)
    d = prod(dims[i] for i in keep) if keep else 1
    return res.reshape(d, d)


def partial_trace(rho: DensityOperator, keep: Iterable[str]) -> DensityOperator:
    """Trace out every register whose label is not in ``keep``."""
    keep_list = list(keep)
    positions = rho.space.positions(keep_list)
    sub = rho.space.subspace(keep_list)
    m = partial_trace_matrix(rho.matrix, rho.space.dims, positions)
    return DensityOperator(sub, m)


def partial_trace_observable(x: HermitianObservable, keep: Iterable[str]) -> HermitianObservable:
    keep_list = list(keep)
    positions = x.space.positions(keep_list)
    sub = x.space.subspace(keep_list)
    return HermitianObservable(sub, partial_trace_matrix(x.matrix, x.space.dims, positions))


def embed_matrix(op: np.ndarray, space: RegisterSpace, labels: Iterable[str]) -> np.ndarray:
    """Extend an operator acting on ``labels`` by identity on the rest.

    ``op`` must act on the registers in the order they appear in
    ``space`` (not the order of ``labels``).
    """
    positions = space.positions(labels)
    dims = space.dims
    n = len(dims)
    rest = [i for i in range(n) if i not in positions]
    d_rest = prod(dims[i] for i in rest) if rest else 1
    full = np.kron(op, np.eye(d_rest, dtype=np.complex128))
    perm = positions + rest
    inv = np.argsort(perm)
    t = full.reshape([dims[p] for p in perm] * 2)
    t = t.transpose(list(inv) + [n + i for i in inv])
    d = space.total_dim
    return np.ascontiguousarray(t.reshape(d, d))


def embed_state(sigma: DensityOperator, space: RegisterSpace) -> np.ndarray:
    """``I ⊗ sigma`` on ``space``, identity on registers sigma lacks."""
    return embed_matrix(sigma.matrix, space, sigma.space.labels)


def permute_matrix(matrix: np.ndarray, space: RegisterSpace, order: Sequence[str]) -> np.ndarray:
    """Rewrite an operator so its registers appear in ``order``."""
    if set(order) != set(space.labels) or len(order) != len(space.labels):
        raise LabelError(f"order {order} is not a permutation of {space.labels}")
    dims = space.dims
    n = len(dims)
    perm = [space.labels.index(label) for label in order]
    t = _tensor_view(matrix, dims).transpose(perm + [n + p for p in perm])
    d = space.total_dim
    return np.ascontiguousarray(t.reshape(d, d))


def permute_registers(rho: DensityOperator, order: Sequence[str]) -> DensityOperator:
    space = RegisterSpace([(label, rho.space.dim(label)) for label in order])
    return DensityOperator(space, permute_matrix(rho.matrix, rho.space, order))


# ---------------------------------------------------------------------------
# spectral functions


def _clamped_eigh(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    w, v = npl.eigh(hermitianize(matrix))
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    if w.min(initial=0.0) < -EIG_CLAMP * scale * 10:
        raise ValueError(f"operator has negative eigenvalue {w.min():.3e}")
    return np.clip(w, 0.0, None), v


def herm_power(x: HermitianObservable | DensityOperator, exponent: float) -> HermitianObservable:
    """Fractional power on the support (zero eigenvalues stay zero)."""
    return HermitianObservable(x.space, herm_power_matrix(x.matrix, exponent))


def herm_power_matrix(matrix: np.ndarray, exponent: float, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    w, v = _clamped_eigh(matrix)
    scale = max(w.max(initial=0.0), 1e-300)
    on_support = w > cutoff * scale
    powered = np.zeros_like(w)
    if exponent > 0:
        # positive powers extend continuously off the support
        powered = w**exponent
    else:
        # exponent 0 gives the support projector, negative exponents the
        # pseudo-inverse powers
        powered[on_support] = w[on_support] ** exponent
    return hermitianize((v * powered) @ v.conj().T)


def support_projector(matrix: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> np.ndarray:
    w, v = _clamped_eigh(matrix)
    scale = max(w.max(initial=0.0), 1e-300)
    keep = w > cutoff * scale
    return hermitianize((v[:, keep]) @ (v[:, keep].conj().T))


def support_leak(p: np.ndarray, q: np.ndarray, cutoff: float = SUPPORT_CUTOFF) -> float:
    """Weight of ``p`` outside the support of ``q`` (0 iff supp p ⊆ supp q)."""
    pi = support_projector(q, cutoff)
    comp = np.eye(q.shape[0]) - pi
    return float(np.trace(comp @ p @ comp).real)


def trace_norm(matrix: np.ndarray) -> float:
    """Trace norm; uses eigenvalues when Hermitian, singular values otherwise."""
    m = _as_matrix(matrix)
    if np.abs(m - m.conj().T).max(initial=0.0) <= 1e-12 * max(1.0, np.abs(m).max(initial=0.0)):
        return float(np.abs(npl.eigvalsh(hermitianize(m))).sum())
    return float(npl.svd(m, compute_uv=False).sum())


def trace_distance(a: DensityOperator, b: DensityOperator) -> float:
    """(1/2) ||a - b||_1."""
    if a.space != b.space:
        raise SpaceMismatchError("states live on different spaces")
    return 0.5 * trace_norm(a.matrix - b.matrix)


def fidelity(a: DensityOperator, b: DensityOperator) -> float:
    """F(a, b) = ||sqrt(a) sqrt(b)||_1^2 for positive operators."""
    if a.space != b.space:
        raise SpaceMismatchError("states live on different spaces")
    ra = herm_power_matrix(a.matrix, 0.5)
    rb = herm_power_matrix(b.matrix, 0.5)
    return float(trace_norm(ra @ rb) ** 2)


def generalized_fidelity(a: DensityOperator, b: DensityOperator) -> float:
    """Fidelity completed with the missing-mass term for subnormalised states."""
    root = np.sqrt(fidelity(a, b))
    extra = np.sqrt(max(0.0, 1.0 - a.trace) * max(0.0, 1.0 - b.trace))
    return float(min(1.0, (root + extra)) ** 2)


def purified_distance(a: DensityOperator, b: DensityOperator) -> float:
    """sqrt(1 - F*) where F* is the generalised fidelity."""
    return float(np.sqrt(max(0.0, 1.0 - generalized_fidelity(a, b))))


def asymmetric_pinching_witness(
    x: HermitianObservable, pi: HermitianObservable, t: float
) -> HermitianObservable:
    """Gap operator ``(1+t) ΠXΠ + (1+1/t) Π⊥XΠ⊥ - X``, PSD for PSD X.

    ``pi`` must be an orthogonal projector and ``t > 0``.
    """
    if t <= 0:
        raise ValueError(f"pinching parameter t={t} must be positive")
    if x.space != pi.space:
        raise SpaceMismatchError("operator and projector live on different spaces")
    p = pi.matrix
    if np.abs(p @ p - p).max(initial=0.0) > 1e-9:
        raise ValueError("pi is not an orthogonal projector (Π² != Π)")
    if x.eigvals().min(initial=0.0) < -1e-9:
        raise ValueError("x must be positive semidefinite")
    comp = np.eye(p.shape[0]) - p
    gap = (1 + t) * (p @ x.matrix @ p) + (1 + 1.0 / t) * (comp @ x.matrix @ comp) - x.matrix
    return HermitianObservable(x.space, gap)


def von_neumann_entropy(rho: DensityOperator) -> float:
    """Eigenvalue Shannon entropy in bits (unnormalised input allowed)."""
    w = np.clip(rho.eigvals(), 0.0, None)
    w = w[w > 1e-18]
    return float(-(w * np.log2(w)).sum())
