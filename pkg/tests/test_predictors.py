import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from calab.engine import step
from calab.predictors import (
    build_constructed_net,
    constant_majority,
    convnet_predictor,
    copy_last,
    flip_all,
    forward,
    oracle_predictor,
    rulewise,
    triangle_response,
)
from calab.rules import Rule, moore_max_count, parse_notation, sample_rules

from conftest import random_grid


def test_oracle_predicts_exactly(gol):
    rng = np.random.default_rng(0)
    grid = random_grid(rng, 10, 10)
    pred = oracle_predictor(gol, "dead")
    assert np.array_equal(pred.predict([grid]), step(gol, grid, "dead"))


def test_oracle_wrong_rule_differs():
    a = parse_notation("B3/S23")
    b = parse_notation("B1/S0,8 n=3")
    rng = np.random.default_rng(1)
    grid = random_grid(rng, 16, 16)
    assert not np.array_equal(
        oracle_predictor(a).predict([grid]), oracle_predictor(b).predict([grid])
    )


def test_copy_last_returns_newest():
    frames = [np.zeros((4, 4), dtype=np.uint8), np.ones((4, 4), dtype=np.uint8)]
    assert np.array_equal(copy_last().predict(frames), frames[-1])


def test_flip_all_complements():
    rng = np.random.default_rng(2)
    grid = random_grid(rng, 5, 6)
    assert np.array_equal(flip_all().predict([grid]), 1 - grid)


def test_constant_majority_threshold():
    grid = np.zeros((3, 3), dtype=np.uint8)
    assert not constant_majority(0.49).predict([grid]).any()
    assert constant_majority(0.5).predict([grid]).all()
    assert constant_majority(0.51).predict([grid]).all()
    with pytest.raises(ValueError):
        constant_majority(1.5)


def test_alive_codes_gol(gol):
    # max_count 8, multiplier 9: born 3 -> 3; stay 2,3 -> 11,12
    assert build_constructed_net(gol).alive_codes == (3, 11, 12)


def test_alive_codes_stay_zero():
    rule = Rule(radius=1, born=frozenset(), stay=frozenset({0}))
    assert build_constructed_net(rule).alive_codes == (9,)


def test_alive_codes_fig_rule():
    rule = parse_notation("B1,4,7/S2,5,10,12 n=5")
    assert build_constructed_net(rule).alive_codes == (1, 4, 7, 27, 30, 35, 37)


def test_code_kernel_layout(gol):
    net = build_constructed_net(gol)
    assert net.code_kernel.shape == (3, 3)
    assert net.code_kernel[1, 1] == 9
    assert net.code_kernel.sum() == 8 + 9


@pytest.mark.parametrize("radius", [1, 2, 3])
def test_code_injectivity(radius):
    # q = count + (max_count+1)*state is distinct over all (state, count) pairs
    limit = moore_max_count(radius)
    codes = {count + (limit + 1) * state for state in (0, 1) for count in range(limit + 1)}
    assert len(codes) == 2 * (limit + 1)


def test_triangle_selectivity():
    values = np.arange(0, 2 * 8 + 2)
    for code in range(2 * 8 + 2):
        response = triangle_response(values, code)
        expected = (values == code).astype(np.int64)
        assert np.array_equal(response, expected)


def test_forward_blinker_matches_engine(gol):
    grid = np.zeros((5, 5), dtype=np.uint8)
    grid[2, 1:4] = 1
    net = build_constructed_net(gol)
    assert np.array_equal(forward(net, grid), step(gol, grid, "dead"))


def test_forward_all_dead_stays_dead():
    rule = sample_rules(1, 1, rng_seed=77)[0]
    net = build_constructed_net(rule)
    assert not forward(net, np.zeros((6, 6), dtype=np.uint8)).any()


def test_forward_exhaustive_3x3_grids(gol):
    # all 512 3x3 grids, radius 1: small enough to brute force here
    idx = np.arange(512, dtype=np.uint32)
    grids = ((idx[:, None] >> np.arange(9)) & 1).astype(np.uint8).reshape(512, 3, 3)
    net = build_constructed_net(gol)
    assert np.array_equal(forward(net, grids), step(gol, grids, "dead"))


@settings(deadline=None, max_examples=40)
@given(
    st.integers(min_value=1, max_value=3),
    st.sampled_from(["dead", "toroidal"]),
    st.integers(min_value=0, max_value=2**31 - 1),
)
def test_forward_matches_step_random(radius, boundary, seed):
    rule = sample_rules(1, radius, rng_seed=seed)[0]
    grid = random_grid(np.random.default_rng(seed), 12, 15)
    net = build_constructed_net(rule)
    assert np.array_equal(forward(net, grid, boundary), step(rule, grid, boundary))


def test_flip_all_perfect_on_alternating_rule():
    # B1..8/S(empty): every live cell dies; every dead cell with >= 1 live
    # neighbor is born, so on a state with no isolated dead regions the next
    # state is the exact complement
    rule = Rule(radius=1, born=frozenset(range(1, 9)), stay=frozenset())
    grid = random_grid(np.random.default_rng(12), 16, 16, density=0.6)
    counts_ok = (np.array([[
        sum(grid[(r + dy) % 16, (c + dx) % 16] for dy in (-1, 0, 1) for dx in (-1, 0, 1)
            if (dy, dx) != (0, 0)) for c in range(16)] for r in range(16)]) >= 1)
    assert counts_ok.all()  # precondition: every cell sees a live neighbor
    nxt = step(rule, grid, "toroidal")
    assert np.array_equal(flip_all().predict([grid]), nxt)


@pytest.mark.parametrize("factory", [oracle_predictor, convnet_predictor])
def test_predictor_contract_shape_and_binary(factory):
    rule = sample_rules(1, 2, rng_seed=5)[0]
    pred = factory(rule, "dead")
    rng = np.random.default_rng(3)
    for h, w in [(1, 1), (3, 8), (17, 5)]:
        frames = [random_grid(rng, h, w) for _ in range(3)]
        out = pred.predict(frames)
        assert out.shape == (h, w)
        assert set(np.unique(out)) <= {0, 1}


def test_rulewise_bank():
    ruleset = sample_rules(4, 1, rng_seed=2)
    bank = rulewise(oracle_predictor, ruleset)
    assert set(bank) == {0, 1, 2, 3}
    grid = random_grid(np.random.default_rng(0), 6, 6)
    for i, rule in enumerate(ruleset):
        assert np.array_equal(bank[i].predict([grid]), step(rule, grid, "dead"))


def test_k1_input_works(gol):
    grid = random_grid(np.random.default_rng(7), 8, 8)
    assert oracle_predictor(gol).predict([grid]).shape == (8, 8)
