"""Classical conditional-probability channels and CPTP Kraus channels.

The classical diamond distance is exact (worst case over input letters);
the quantum one is a heuristic lower bound obtained by a seesaw between
the optimal distinguishing measurement and the optimal pure input.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np
import numpy.linalg as npl

from oneshot.linalg import hermitianize, trace_norm


@dataclass(frozen=True)
class ClassicalChannel:
    """Conditional probability table P(out | in).

    ``table`` has shape ``input_dims + output_dims`` and every row
    (fixed input) sums to one.
    """

    input_dims: tuple[int, ...]
    output_dims: tuple[int, ...]
    table: np.ndarray

    def __init__(self, input_dims: Sequence[int], output_dims: Sequence[int], table):
        in_d = tuple(int(d) for d in input_dims)
        out_d = tuple(int(d) for d in output_dims)
        t = np.asarray(table, dtype=np.float64).reshape(in_d + out_d)
        if t.min(initial=0.0) < -1e-12:
            raise ValueError("negative channel probability")
        t = np.clip(t, 0.0, None)
        rows = t.reshape(prod(in_d) if in_d else 1, -1)
        if np.abs(rows.sum(axis=1) - 1.0).max(initial=0.0) > 1e-12:
            raise ValueError("channel rows must sum to 1")
        object.__setattr__(self, "input_dims", in_d)
        object.__setattr__(self, "output_dims", out_d)
        object.__setattr__(self, "table", t)

    @property
    def n_inputs(self) -> int:
        return prod(self.input_dims) if self.input_dims else 1

    @property
    def n_outputs(self) -> int:
        return prod(self.output_dims) if self.output_dims else 1

    def rows(self) -> np.ndarray:
        return self.table.reshape(self.n_inputs, self.n_outputs)


@dataclass(frozen=True)
class KrausChannel:
    """CPTP map given by a Kraus operator list (sum K†K = I)."""

    dim_in: int
    dim_out: int
    kraus: tuple[np.ndarray, ...]

    def __init__(self, dim_in: int, dim_out: int, kraus: Sequence[np.ndarray]):
        ops = tuple(np.asarray(k, dtype=np.complex128) for k in kraus)
        for k in ops:
            if k.shape != (dim_out, dim_in):
                raise ValueError(f"Kraus operator shape {k.shape} != ({dim_out},{dim_in})")
        total = sum(k.conj().T @ k for k in ops)
        if np.abs(total - np.eye(dim_in)).max(initial=0.0) > 1e-9:
            raise ValueError("Kraus operators do not satisfy sum K†K = I")
        object.__setattr__(self, "dim_in", int(dim_in))
        object.__setattr__(self, "dim_out", int(dim_out))
        object.__setattr__(self, "kraus", ops)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return hermitianize(sum(k @ rho @ k.conj().T for k in self.kraus))

    def apply_adjoint(self, x: np.ndarray) -> np.ndarray:
        return hermitianize(sum(k.conj().T @ x @ k for k in self.kraus))

    def apply_extended(self, rho: np.ndarray, dim_ref: int) -> np.ndarray:
        """Apply the channel to the first factor of an A ⊗ R state."""
        ops = [np.kron(k, np.eye(dim_ref)) for k in self.kraus]
        return hermitianize(sum(k @ rho @ k.conj().T for k in ops))


def classical_diamond_distance(n: ClassicalChannel, m: ClassicalChannel) -> float:
    """Exact diamond distance (1/2)||N - M||⋄ for classical channels.

    For stochastic maps entanglement does not help, so the worst case is
    a deterministic input letter and the distance is the maximal total
    variation between corresponding output rows.
    """
    if n.input_dims != m.input_dims or n.output_dims != m.output_dims:
        raise ValueError("channel alphabets do not match")
    diff = np.abs(n.rows() - m.rows()).sum(axis=1)
    return 0.5 * float(diff.max(initial=0.0))


def _random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / npl.norm(v)


def quantum_diamond_lower_bound(
    n: KrausChannel, m: KrausChannel, restarts: int = 50, seed: int = 0, iters: int = 60
) -> float:
    """Heuristic lower bound on (1/2)||N - M||⋄.

    Seesaw over pure inputs psi on A ⊗ R (|R| = |A|): for a fixed input the
    optimal measurement is the +/- eigenprojector split of the output
    difference, and for a fixed measurement the optimal input is the top
    eigenvector of the pulled-back observable.  The value of any feasible
    pair never exceeds the true diamond distance.
    """
    if n.dim_in != m.dim_in or n.dim_out != m.dim_out:
        raise ValueError("channel dimensions do not match")
    rng = np.random.default_rng(seed)
    d_in = n.dim_in
    dim_ref = d_in
    best = 0.0
    for r in range(max(1, restarts)):
        if r == 0:
            # maximally entangled start
            psi = np.eye(d_in).reshape(-1) / np.sqrt(d_in)
        else:
            psi = _random_pure(d_in * dim_ref, rng)
        val = 0.0
        for _ in range(iters):
            rho = np.outer(psi, psi.conj())
            delta = n.apply_extended(rho, dim_ref) - m.apply_extended(rho, dim_ref)
            val = 0.5 * trace_norm(delta)
            w, v = npl.eigh(hermitianize(delta))
            meas = (v * np.sign(w)) @ v.conj().T
            # pull the measurement back through the channel difference
            pulled = _extended_adjoint(n, meas, dim_ref) - _extended_adjoint(m, meas, dim_ref)
            w2, v2 = npl.eigh(hermitianize(pulled))
            new_psi = v2[:, -1]
            if np.abs(np.vdot(new_psi, psi)) > 1 - 1e-14:
                break
            psi = new_psi
        best = max(best, val)
    return best


def _extended_adjoint(ch: KrausChannel, x: np.ndarray, dim_ref: int) -> np.ndarray:
    ops = [np.kron(k, np.eye(dim_ref)) for k in ch.kraus]
    return hermitianize(sum(k.conj().T @ x @ k for k in ops))


def mix_classical_channels(
    m_prime: ClassicalChannel, m: ClassicalChannel, delta: float
) -> ClassicalChannel:
    """Convex mixture (1-delta) m_prime + delta m, delta in (0, 1)."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta={delta} must lie strictly in (0, 1)")
    if m_prime.input_dims != m.input_dims or m_prime.output_dims != m.output_dims:
        raise ValueError("channel alphabets do not match")
    return ClassicalChannel(
        m.input_dims, m.output_dims, (1 - delta) * m_prime.table + delta * m.table
    )


def mix_kraus_channels(m_prime: KrausChannel, m: KrausChannel, delta: float) -> KrausChannel:
    """Convex mixture of CPTP maps via rescaled concatenated Kraus lists."""
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta={delta} must lie strictly in (0, 1)")
    if m_prime.dim_in != m.dim_in or m_prime.dim_out != m.dim_out:
        raise ValueError("channel dimensions do not match")
    kraus = [np.sqrt(1 - delta) * k for k in m_prime.kraus]
    kraus += [np.sqrt(delta) * k for k in m.kraus]
    return KrausChannel(m.dim_in, m.dim_out, kraus)
