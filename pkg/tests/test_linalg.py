import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oneshot.linalg import (
    ClassicalJoint,
    DensityOperator,
    HermitianObservable,
    LabelError,
    RegisterSpace,
    SpaceMismatchError,
    asymmetric_pinching_witness,
    classical_tv,
    embed_matrix,
    herm_power,
    partial_trace,
    permute_registers,
    purified_distance,
    tensor_product,
    trace_distance,
    von_neumann_entropy,
)
from oneshot.rand import random_density, random_pure, random_subnormalized

QUBIT = RegisterSpace([("A", 2)])


def bell_pair():
    space = RegisterSpace([("A", 2), ("B", 2)])
    v = np.zeros(4)
    v[0] = v[3] = 1.0 / math.sqrt(2.0)
    return DensityOperator(space, np.outer(v, v))


def test_register_space_invariants():
    with pytest.raises(LabelError):
        RegisterSpace([("A", 2), ("A", 3)])
    with pytest.raises(LabelError):
        RegisterSpace([("A", 0)])
    sp = RegisterSpace([("A", 2), ("B", 3)])
    assert sp.total_dim == 6
    assert sp.dim("B") == 3
    with pytest.raises(LabelError):
        sp.dim("C")


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(QUBIT, np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        DensityOperator(QUBIT, np.diag([1.2, 0.0]))
    # mild numerical noise is symmetrised away
    rho = DensityOperator(QUBIT, np.array([[0.5, 1e-13j], [0.0, 0.5]]))
    assert np.allclose(rho.matrix, rho.matrix.conj().T)


def test_tensor_product_maximally_mixed():
    half = DensityOperator(QUBIT, np.eye(2) / 2)
    other = DensityOperator(RegisterSpace([("B", 2)]), np.eye(2) / 2)
    prod = tensor_product(half, other)
    assert np.allclose(prod.matrix, np.eye(4) / 4)
    with pytest.raises(LabelError):
        tensor_product(half, half)


def test_tensor_product_scalar_identity(rng):
    rho = random_density(QUBIT, rng)
    one = DensityOperator(RegisterSpace([]), np.eye(1))
    assert np.allclose(tensor_product(rho, one).matrix, rho.matrix)


def test_tensor_product_index_oracle(rng):
    a = random_density(QUBIT, rng)
    b = random_density(RegisterSpace([("B", 2)]), rng)
    prod = tensor_product(a, b)
    # independent index-arithmetic oracle for the Kronecker table
    for i in range(4):
        for j in range(4):
            expect = a.matrix[i // 2, j // 2] * b.matrix[i % 2, j % 2]
            assert prod.matrix[i, j] == pytest.approx(expect, abs=1e-15)


def test_partial_trace_product_and_bell(rng):
    a = random_density(QUBIT, rng)
    b = random_density(RegisterSpace([("B", 3)]), rng)
    prod = tensor_product(a, b)
    assert np.allclose(partial_trace(prod, ["A"]).matrix, a.matrix, atol=1e-12)
    bell = bell_pair()
    assert np.allclose(partial_trace(bell, ["B"]).matrix, np.eye(2) / 2, atol=1e-12)
    with pytest.raises(LabelError):
        partial_trace(prod, ["Z"])


def test_partial_trace_two_step_composition(rng):
    space = RegisterSpace([("A", 2), ("B", 3), ("C", 2)])
    rho = random_density(space, rng)
    direct = partial_trace(rho, ["A", "C"])
    via_ab = partial_trace(partial_trace(rho, ["A", "B", "C"]), ["A", "C"])
    via_two = partial_trace(partial_trace(rho, ["A", "C"]), ["A", "C"])
    assert np.allclose(direct.matrix, via_ab.matrix, atol=1e-12)
    assert np.allclose(direct.matrix, via_two.matrix, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_partial_trace_preserves_trace(seed):
    rng = np.random.default_rng(seed)
    dims = [int(rng.integers(2, 5)) for _ in range(3)]
    space = RegisterSpace([("A", dims[0]), ("B", dims[1]), ("C", dims[2])])
    rho = random_density(space, rng)
    reduced = partial_trace(rho, ["B"])
    assert reduced.trace == pytest.approx(rho.trace, abs=1e-10)


def test_herm_power_cases(rng):
    rho = random_density(QUBIT, rng)
    assert np.allclose(herm_power(rho, 1.0).matrix, rho.matrix, atol=1e-12)
    mixed = DensityOperator(RegisterSpace([("A", 4)]), np.eye(4) / 4)
    assert np.allclose(herm_power(mixed, 0.7).matrix, 4.0**-0.7 * np.eye(4), atol=1e-12)


def test_herm_power_eigenvalue_oracle(rng):
    space = RegisterSpace([("A", 3)])
    x = random_density(space, rng)
    powered = herm_power(x, 0.37)
    w, v = np.linalg.eigh(x.matrix)
    oracle = (v * np.clip(w, 0, None) ** 0.37) @ v.conj().T
    assert np.allclose(powered.matrix, oracle, atol=1e-10)


def test_herm_power_additive_on_support(rng):
    space = RegisterSpace([("A", 4)])
    x = random_density(space, rng, rank=3).as_observable()
    a, b = 0.4, -0.9
    combined = herm_power(x, a).matrix @ herm_power(x, b).matrix
    direct = herm_power(x, a + b).matrix
    assert np.abs(combined - direct).max() < 1e-8


def test_trace_distance_cases(rng):
    rho = random_density(QUBIT, rng)
    assert trace_distance(rho, rho) == pytest.approx(0.0, abs=1e-12)
    zero = DensityOperator(QUBIT, np.diag([1.0, 0.0]))
    one = DensityOperator(QUBIT, np.diag([0.0, 1.0]))
    assert trace_distance(zero, one) == pytest.approx(1.0, abs=1e-12)
    p = DensityOperator(QUBIT, np.diag([0.7, 0.3]))
    q = DensityOperator(QUBIT, np.diag([0.4, 0.6]))
    assert trace_distance(p, q) == pytest.approx(0.3, abs=1e-12)
    other = random_density(RegisterSpace([("B", 2)]), rng)
    with pytest.raises(SpaceMismatchError):
        trace_distance(rho, other)


def test_purified_distance_cases(rng):
    rho = random_density(QUBIT, rng)
    assert purified_distance(rho, rho) == pytest.approx(0.0, abs=1e-8)
    zero = DensityOperator(QUBIT, np.diag([1.0, 0.0]))
    plus = DensityOperator(QUBIT, np.full((2, 2), 0.5))
    assert purified_distance(zero, plus) == pytest.approx(math.sqrt(0.5), abs=1e-12)
    half = DensityOperator(QUBIT, 0.5 * rho.matrix)
    assert purified_distance(half, half) == pytest.approx(0.0, abs=1e-8)


def test_purified_dominates_trace_distance(rng):
    for _ in range(100):
        a = random_subnormalized(QUBIT, rng)
        b = random_subnormalized(QUBIT, rng)
        assert purified_distance(a, b) >= trace_distance(a, b) - 1e-10


def test_pinching_witness_cases(rng):
    space = RegisterSpace([("X", 4)])
    g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    x = HermitianObservable(space, g @ g.conj().T)
    proj = np.zeros((4, 4))
    proj[0, 0] = proj[1, 1] = 1.0
    pi = HermitianObservable(space, proj)
    # t = 1 reduces to the standard pinching gap
    gap = asymmetric_pinching_witness(x, pi, 1.0)
    comp = np.eye(4) - proj
    direct = 2 * (proj @ x.matrix @ proj + comp @ x.matrix @ comp) - x.matrix
    assert np.allclose(gap.matrix, direct, atol=1e-12)
    assert gap.eigvals().min() >= -1e-9
    # block-diagonal X: gap collapses to t ΠXΠ + (1/t) Π⊥XΠ⊥
    xb = HermitianObservable(space, proj @ x.matrix @ proj + comp @ x.matrix @ comp)
    t = 0.3
    gap_b = asymmetric_pinching_witness(xb, pi, t)
    expect = t * (proj @ xb.matrix @ proj) + (1 / t) * (comp @ xb.matrix @ comp)
    assert np.allclose(gap_b.matrix, expect, atol=1e-10)
    with pytest.raises(ValueError):
        asymmetric_pinching_witness(x, HermitianObservable(space, 0.5 * proj), 1.0)


def test_embed_and_permute(rng):
    space = RegisterSpace([("A", 2), ("B", 3), ("C", 2)])
    rho = random_density(space, rng)
    back = permute_registers(permute_registers(rho, ["C", "A", "B"]), ["A", "B", "C"])
    assert np.allclose(back.matrix, rho.matrix, atol=1e-13)
    sigma = random_density(RegisterSpace([("B", 3)]), rng)
    embedded = embed_matrix(sigma.matrix, space, ["B"])
    reduced = partial_trace(
        DensityOperator(space, embedded / 4.0), ["B"]
    )
    assert np.allclose(reduced.matrix, sigma.matrix, atol=1e-12)


def test_classical_joint_and_tv():
    space = RegisterSpace([("X", 2), ("Y", 2)])
    p = ClassicalJoint(space, np.array([[0.3, 0.2], [0.4, 0.1]]))
    q = ClassicalJoint(space, np.array([[0.1, 0.4], [0.2, 0.3]]))
    assert classical_tv(p, q) == pytest.approx(0.4, abs=1e-12)
    assert p.marginal(["X"]).probs == pytest.approx(np.array([0.5, 0.5]))
    dense = p.to_density()
    assert von_neumann_entropy(dense) == pytest.approx(
        -(p.flat() * np.log2(p.flat())).sum(), abs=1e-10
    )
