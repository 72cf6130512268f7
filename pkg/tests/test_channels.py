import math

import numpy as np
import pytest

from oneshot.channels import (
    ClassicalChannel,
    KrausChannel,
    classical_diamond_distance,
    mix_classical_channels,
    mix_kraus_channels,
    quantum_diamond_lower_bound,
)
from oneshot.divergences import sharp_upper_bound, max_relative_entropy
from oneshot.bounds import scalar_z_beta
from oneshot.linalg import DensityOperator, RegisterSpace


def identity_channel(d=2):
    table = np.zeros((d, d))
    np.fill_diagonal(table, 1.0)
    return ClassicalChannel([d], [d], table)


def bitflip(p):
    return ClassicalChannel([2], [2], np.array([[1 - p, p], [p, 1 - p]]))


def test_classical_diamond_cases():
    ident = identity_channel()
    assert classical_diamond_distance(ident, ident) == 0.0
    assert classical_diamond_distance(bitflip(0.1), ident) == pytest.approx(0.1)
    # channels differing on one row by total variation 0.3
    a = ClassicalChannel([2], [3], np.array([[0.5, 0.3, 0.2], [0.2, 0.5, 0.3]]))
    b = ClassicalChannel([2], [3], np.array([[0.5, 0.3, 0.2], [0.2, 0.2, 0.6]]))
    assert classical_diamond_distance(a, b) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        classical_diamond_distance(ident, identity_channel(3))


def kraus_identity(d=2):
    return KrausChannel(d, d, [np.eye(d)])


def kraus_unitary(u):
    return KrausChannel(u.shape[0], u.shape[0], [u])


def kraus_depolarizing(eps):
    paulis = [
        np.eye(2),
        np.array([[0, 1], [1, 0]]),
        np.array([[0, -1j], [1j, 0]]),
        np.array([[1, 0], [0, -1]]),
    ]
    ops = [math.sqrt(1 - 3 * eps / 4) * paulis[0]] + [
        math.sqrt(eps / 4) * p for p in paulis[1:]
    ]
    return KrausChannel(2, 2, ops)


def test_quantum_diamond_lower_bound_cases():
    ident = kraus_identity()
    assert quantum_diamond_lower_bound(ident, ident, restarts=3) == pytest.approx(0.0, abs=1e-12)
    phase = kraus_unitary(np.diag([1.0, np.exp(1j * math.pi)]))
    val = quantum_diamond_lower_bound(phase, ident, restarts=10)
    assert val == pytest.approx(1.0, abs=1e-9)
    dep = kraus_depolarizing(0.2)
    # the Bell-input trace distance is a certified floor
    bell = np.zeros((4, 4))
    for i in (0, 3):
        for j in (0, 3):
            bell[i, j] = 0.5
    out = dep.apply_extended(bell, 2)
    floor = 0.5 * np.abs(np.linalg.eigvalsh(out - bell)).sum()
    val = quantum_diamond_lower_bound(dep, ident, restarts=20)
    assert val >= floor - 1e-9


def test_quantum_matches_classical_on_diagonal_channels(rng):
    # diagonal (classical) channels: seesaw reaches the exact value
    for _ in range(3):
        rows_n = rng.dirichlet(np.ones(2), size=2)
        rows_m = rng.dirichlet(np.ones(2), size=2)
        cn = ClassicalChannel([2], [2], rows_n)
        cm = ClassicalChannel([2], [2], rows_m)
        kn = KrausChannel(
            2, 2, [math.sqrt(rows_n[i, j]) * np.outer(_e(j), _e(i)) for i in range(2) for j in range(2)]
        )
        km = KrausChannel(
            2, 2, [math.sqrt(rows_m[i, j]) * np.outer(_e(j), _e(i)) for i in range(2) for j in range(2)]
        )
        exact = classical_diamond_distance(cn, cm)
        heur = quantum_diamond_lower_bound(kn, km, restarts=50)
        assert heur == pytest.approx(exact, abs=1e-6)
        assert heur <= exact + 1e-9


def _e(i, d=2):
    v = np.zeros(d)
    v[i] = 1.0
    return v


def test_mix_classical_channels():
    ident = identity_channel()
    flip = bitflip(0.2)
    with pytest.raises(ValueError):
        mix_classical_channels(ident, flip, 1.0)
    mixed = mix_classical_channels(ident, flip, 0.5)
    eps = classical_diamond_distance(ident, flip)
    assert classical_diamond_distance(mixed, flip) == pytest.approx(0.5 * eps)
    assert classical_diamond_distance(mixed, ident) == pytest.approx(0.5 * eps)
    # delta -> 1 approaches the real channel
    near = mix_classical_channels(ident, flip, 1 - 1e-9)
    assert classical_diamond_distance(near, flip) < 1e-9


def test_mix_kraus_dmax_and_channel_divergence(rng):
    ident = kraus_identity()
    dep = kraus_depolarizing(0.12)
    delta = 0.3
    mixed = mix_kraus_channels(ident, dep, delta)
    # depolarising vs identity is covariant: the Bell input is optimal and
    # gives the exact diamond distance 3 eps/4
    eps = 3 * 0.12 / 4
    heur = quantum_diamond_lower_bound(dep, ident, restarts=20)
    assert heur == pytest.approx(eps, abs=1e-9)
    space = RegisterSpace([("A", 2), ("R", 2)])
    z = scalar_z_beta(eps, delta, 2.0)
    for _ in range(20):
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        m = g @ g.conj().T
        rho = m / np.trace(m).real
        out_real = DensityOperator(space, dep.apply_extended(rho, 2))
        out_mixed = DensityOperator(space, mixed.apply_extended(rho, 2))
        # D_max(real || mixture) <= log(1/delta) on every input
        assert max_relative_entropy(out_real, out_mixed).value <= math.log2(1 / delta) + 1e-9
        res, _ = sharp_upper_bound(out_real, out_mixed, 2.0)
        assert res.value <= z + 1e-9
