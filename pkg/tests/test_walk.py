import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qwalk.errors import DimensionMismatch, InvalidParameter, NotUnitary
from qwalk.walk import (
    PAULI_Y,
    CoinProgram,
    CoinSpec,
    TorusWalkState,
    WalkState,
    apply_double_step,
    apply_step,
    build_step_operator,
    build_torus_step,
    coin_unitary,
    evolve,
    grover_coin,
    named_coin,
    trajectory,
)
from qwalk.protocols import ballistic_program, christandl_program

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


@st.composite
def programs(draw):
    n = 2 * draw(st.integers(2, 10))
    specs = []
    for _ in range(n):
        v = np.array([draw(st.floats(-1, 1)) for _ in range(3)])
        if np.linalg.norm(v) < 1e-3:
            v = np.array([0.0, 1.0, 0.0])
        specs.append(CoinSpec(draw(angles), tuple(v / np.linalg.norm(v)), draw(angles)))
    return CoinProgram(n, tuple(specs))


def test_y_coin_matrix():
    np.testing.assert_allclose(coin_unitary(CoinSpec(0.3)), [[np.cos(0.3), np.sin(0.3)],
                                                             [-np.sin(0.3), np.cos(0.3)]])
    np.testing.assert_array_equal(CoinSpec.reversing().unitary().real.round(15), [[0, 1], [-1, 0]])


def test_phase_is_global_factor():
    c = coin_unitary(CoinSpec(0.4, (0.6, 0.0, 0.8), 0.25))
    np.testing.assert_allclose(c, np.exp(0.25j) * coin_unitary(CoinSpec(0.4, (0.6, 0.0, 0.8))))


def test_coin_spec_validation():
    with pytest.raises(InvalidParameter):
        CoinSpec(0.1, (1.0, 1.0, 0.0))
    with pytest.raises(InvalidParameter):
        CoinSpec(float("nan"))


def test_program_validation():
    with pytest.raises(InvalidParameter):
        CoinProgram(5, tuple(CoinSpec(0.0) for _ in range(5)))
    with pytest.raises(InvalidParameter):
        CoinProgram(6, tuple(CoinSpec(0.0) for _ in range(4)))


def test_state_validation():
    with pytest.raises(InvalidParameter):
        WalkState(np.ones((4, 2)))
    with pytest.raises(DimensionMismatch):
        WalkState(np.ones((4, 3)) / np.sqrt(12))
    with pytest.raises(InvalidParameter):
        named_coin("sideways")


def test_free_walk_moves_one_site():
    p = ballistic_program(10)
    out = apply_step(WalkState.localized(10, 3, (1, 0)).amplitudes, p)
    assert abs(out[4, 0]) == 1
    out = apply_step(WalkState.localized(10, 3, (0, 1)).amplitudes, p)
    assert abs(out[2, 1]) == 1


def test_double_step_support_from_first_vertex():
    u = build_step_operator(christandl_program(30, 0.03))
    s = apply_double_step(WalkState.localized(30, 1), u)
    support = set(np.flatnonzero(s.probabilities() > 0))
    assert support <= {29, 1, 3}


def test_all_reversing_coins_square_to_minus_identity():
    p = CoinProgram(8, tuple(CoinSpec.reversing() for _ in range(8)))
    u = build_step_operator(p)
    np.testing.assert_allclose(u @ u, -np.eye(16), atol=1e-15)


def test_apply_double_step_dimension():
    with pytest.raises(DimensionMismatch):
        apply_double_step(WalkState.localized(6, 1), np.eye(10))


@settings(max_examples=40, deadline=None)
@given(programs())
def test_step_operator_unitary(program):
    u = build_step_operator(program)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(programs(), st.integers(0, 100), st.integers(1, 6))
def test_fast_path_matches_dense(program, seed, steps):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=2 * program.n_positions) + 1j * rng.normal(size=2 * program.n_positions)
    state = WalkState(v / np.linalg.norm(v))
    u = build_step_operator(program)
    fast = trajectory(state, program, steps)
    dense = state
    for t in range(1, steps + 1):
        dense = apply_double_step(dense, u)
        np.testing.assert_allclose(fast[t], dense.amplitudes, atol=1e-12)
    np.testing.assert_allclose(np.sum(np.abs(fast) ** 2, axis=(1, 2)), 1, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(programs(), st.data())
def test_locality_and_parity(program, data):
    n = program.n_positions
    x = data.draw(st.integers(0, n - 1))
    s = WalkState.localized(n, x, (1 / np.sqrt(2), 1j / np.sqrt(2)))
    a = apply_step(apply_step(s.amplitudes, program), program)
    allowed = {(x + d) % n for d in (-2, 0, 2)}
    assert set(np.flatnonzero(np.abs(a).sum(axis=1) > 1e-14)) <= allowed


def test_evolve_trace_closure():
    tr = evolve(WalkState.localized(30, 1), christandl_program(30, 0.03), 20)
    assert len(tr) == 21
    assert tr.closure_residual() < 1e-9
    assert tr.p_source[0] == 1


def test_grover_coin_and_torus():
    g = grover_coin()
    np.testing.assert_allclose(g @ g, np.eye(4), atol=1e-15)
    u = build_torus_step(3, g)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(36), atol=1e-12)
    with pytest.raises(NotUnitary):
        build_torus_step(3, 2 * np.eye(4))
    with pytest.raises(InvalidParameter):
        build_torus_step(1, g)


def test_torus_shift_directions():
    u = build_torus_step(4, np.eye(4))
    for c, (dx, dy) in enumerate([(1, 0), (-1, 0), (0, 1), (0, -1)]):
        coin = np.zeros(4)
        coin[c] = 1
        s = TorusWalkState.localized(4, 1, 1, coin)
        out = (u @ s.vector).reshape(4, 4, 4)
        assert abs(out[1 + dx, 1 + dy, c]) == 1


def test_sigma_y_swaps_coin():
    np.testing.assert_allclose(PAULI_Y @ [0, -1], [1j, 0])


def test_coin_examples():
    np.testing.assert_array_equal(coin_unitary(CoinSpec(0.0, (0.6, 0.8, 0.0))), np.eye(2))
    c = np.cos(np.pi / 4)
    np.testing.assert_allclose(coin_unitary(CoinSpec(np.pi / 4, (1, 0, 0))),
                               [[c, 1j * c], [1j * c, c]], atol=1e-15)


def test_small_cycle_examples():
    shift = build_step_operator(CoinProgram(4, tuple(CoinSpec(0.0) for _ in range(4))))
    v = WalkState.localized(4, 0).vector
    assert (shift @ v)[2 * 1 + 0] == 1
    rev = build_step_operator(CoinProgram(4, tuple(CoinSpec.reversing() for _ in range(4))))
    out = rev @ v
    assert out[2 * 3 + 1] == pytest.approx(-1)
    u = build_step_operator(CoinProgram(6, tuple(CoinSpec(np.pi / 4) for _ in range(6))))
    for col in u.T:
        nz = np.abs(col[np.abs(col) > 0])
        np.testing.assert_allclose(np.sort(nz), [np.sin(np.pi / 4), np.cos(np.pi / 4)])


def test_identity_double_step_and_zero_steps():
    p = CoinProgram(6, tuple(CoinSpec(0.0) for _ in range(6)))
    s = apply_double_step(WalkState.localized(6, 1), build_step_operator(p))
    assert s.amplitudes[3, 0] == 1
    s = WalkState.localized(6, 1, (0.6, 0.8))
    np.testing.assert_array_equal(apply_double_step(s, np.eye(12)).amplitudes, s.amplitudes)
    tr = evolve(s, p, 0)
    assert len(tr) == 1
    assert tr.p_source[0] == pytest.approx(1)


def test_engineered_transfer_and_return():
    tr = evolve(WalkState.localized(30, 1), christandl_program(30, 0.03), 120)
    assert tr.peak_fidelity >= 0.99
    assert tr.p_source[tr.peak_time:].max() > 0.9


def test_all_reversing_probabilities_constant():
    p = CoinProgram(4, tuple(CoinSpec.reversing() for _ in range(4)))
    tr = evolve(WalkState.localized(4, 1, (0.6, 0.8)), p, 4)
    np.testing.assert_allclose(tr.p_source, 1)


def test_torus_examples():
    u = build_torus_step(4, np.eye(4))
    s = TorusWalkState.localized(4, 0, 0, (1, 0, 0, 0))
    out = (u @ s.vector).reshape(4, 4, 4)
    assert out[1, 0, 0] == 1
    g = build_torus_step(4, grover_coin())
    for col in g.T:
        np.testing.assert_allclose(np.abs(col[np.abs(col) > 1e-15]), [0.5] * 4)
    u2 = build_torus_step(2, np.eye(4))
    np.testing.assert_array_equal(u2 @ u2, np.eye(16))


def test_norm_drift_long_run():
    rng = np.random.default_rng(5)
    specs = tuple(CoinSpec(t) for t in rng.uniform(0, np.pi, 256))
    p = CoinProgram(256, specs)
    a = WalkState.localized(256, 1, (0.6, 0.8)).amplitudes
    for _ in range(10_000):
        a = apply_step(a, p)
    assert abs(np.sum(np.abs(a) ** 2) - 1) <= 1e-10
