"""Seeded random state, distribution and channel generators for test suites."""

from __future__ import annotations

import math
from typing import Optional, Sequence

import numpy as np

from oneshot.linalg import ClassicalJoint, DensityOperator, RegisterSpace, hermitianize


def random_density(
    space: RegisterSpace,
    rng: np.random.Generator,
    rank: Optional[int] = None,
    floor: float = 0.0,
) -> DensityOperator:
    """Wishart-style random state; ``floor`` mixes in identity for conditioning."""
    d = space.total_dim
    r = rank or d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    m = m / np.trace(m).real
    if floor > 0.0:
        m = (1.0 - floor) * m + floor * np.eye(d) / d
    return DensityOperator(space, m)


def random_pure(space: RegisterSpace, rng: np.random.Generator) -> DensityOperator:
    d = space.total_dim
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    v /= np.linalg.norm(v)
    return DensityOperator(space, np.outer(v, v.conj()))


def random_subnormalized(
    space: RegisterSpace, rng: np.random.Generator, low: float = 0.3
) -> DensityOperator:
    rho = random_density(space, rng)
    scale = rng.uniform(low, 1.0)
    return DensityOperator(space, scale * rho.matrix)


def random_classical(space: RegisterSpace, rng: np.random.Generator) -> ClassicalJoint:
    p = rng.dirichlet(np.ones(space.total_dim))
    return ClassicalJoint(space, p.reshape(space.dims))


def random_cq(
    dim_c: int, quantum_space: RegisterSpace, rng: np.random.Generator, label: str = "C"
) -> DensityOperator:
    """Classical-quantum state, classical register appended last."""
    weights = rng.dirichlet(np.ones(dim_c))
    mats = [random_density(quantum_space, rng).matrix for _ in range(dim_c)]
    full = sum(
        weights[c] * np.kron(mats[c], _basis_proj(dim_c, c)) for c in range(dim_c)
    )
    space = RegisterSpace(list(quantum_space.registers) + [(label, dim_c)])
    return DensityOperator(space, hermitianize(full))


def _basis_proj(d: int, i: int) -> np.ndarray:
    e = np.zeros((d, d))
    e[i, i] = 1.0
    return e


def random_close_pair(
    space: RegisterSpace, rng: np.random.Generator, tv_cap: float = 0.05
) -> tuple[DensityOperator, DensityOperator]:
    """Full-rank pair with trace distance at most ``tv_cap``."""
    q = random_density(space, rng, floor=0.1)
    d = space.total_dim
    pert = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    pert = hermitianize((pert + pert.conj().T) / 2)
    pert -= np.trace(pert).real / d * np.eye(d)
    eigs = np.linalg.eigvalsh(pert)
    spectral = float(np.abs(eigs).max())
    half_l1 = 0.5 * float(np.abs(eigs).sum())
    # stay inside the TV cap and keep the sum strictly positive definite
    scale = rng.uniform(0.1, 1.0) * min(
        tv_cap / max(half_l1, 1e-12),
        0.9 * float(q.eigvals().min()) / max(spectral, 1e-12),
    )
    m = q.matrix + scale * pert
    m = m / np.trace(m).real
    return DensityOperator(space, m), q


def random_stochastic(rng: np.random.Generator, n_in: int, n_out: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n_out), size=n_in)
