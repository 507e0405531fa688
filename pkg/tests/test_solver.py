import random

import pytest

from conftest import brute_parity_winner, random_cost_game
from costparity import (INF, BudgetExceededError, ParityGame,
                        decide_bounded_cost, decide_bounded_cost_finite_duration,
                        make_game, optimal_cost, solve_parity, subdivide_costs)
from costparity.semantics import spoiler_cost, strategy_cost
from costparity.solver import clamp_bound


def test_solve_parity_single_vertex():
    assert solve_parity(ParityGame((0,), (0,), ((0,),), 0)).winner_from_initial == 0
    assert solve_parity(ParityGame((0,), (1,), ((0,),), 0)).winner_from_initial == 1


def test_solve_parity_matches_brute_force():
    rng = random.Random(3)
    for _ in range(250):
        n = rng.randint(1, 6)
        owners = tuple(rng.randint(0, 1) for _ in range(n))
        colors = tuple(rng.randint(0, 3) for _ in range(n))
        succ = tuple(tuple(sorted(rng.sample(range(n), rng.randint(1, n))))
                     for _ in range(n))
        pg = ParityGame(owners, colors, succ, 0)
        res = solve_parity(pg)
        assert res.winner_from_initial == brute_parity_winner(owners, colors, succ, 0)
        assert res.win0 | res.win1 == frozenset(range(n))
        assert not res.win0 & res.win1
        # exactly the winner's strategy is present, and it stays in its region
        strat = (res.player0_strategy, res.player1_strategy)[res.winner_from_initial]
        other = (res.player1_strategy, res.player0_strategy)[res.winner_from_initial]
        assert strat is not None and other is None
        region = (res.win0, res.win1)[res.winner_from_initial]
        for v, t in strat.items():
            assert v in region and t in region


def test_solve_parity_winner_strategy_wins():
    rng = random.Random(4)
    for _ in range(150):
        n = rng.randint(1, 6)
        owners = tuple(rng.randint(0, 1) for _ in range(n))
        colors = tuple(rng.randint(0, 4) for _ in range(n))
        succ = tuple(tuple(sorted(rng.sample(range(n), rng.randint(1, n))))
                     for _ in range(n))
        pg = ParityGame(owners, colors, succ, 0)
        res = solve_parity(pg)
        p = res.winner_from_initial
        strat = (res.player0_strategy, res.player1_strategy)[p]
        rows = [[strat[v]] if v in strat else list(succ[v]) for v in range(n)]
        from conftest import _all_reachable_cycles_even

        if p == 0:
            assert _all_reachable_cycles_even(rows, colors, 0)
        else:
            flipped = tuple(c + 1 for c in colors)
            assert _all_reachable_cycles_even(rows, flipped, 0)


def test_decide_delay_games(delay_won, delay_lost):
    assert decide_bounded_cost(delay_won, 2).achievable
    assert not decide_bounded_cost(delay_won, 1).achievable
    for b in range(delay_lost.n + 1):
        assert not decide_bounded_cost(delay_lost, b).achievable


def test_decide_layered_equals_flat():
    rng = random.Random(6)
    for _ in range(120):
        if rng.random() < 0.5:
            g = random_cost_game(rng, rng.randint(1, 4), 4)
        else:
            g = random_cost_game(rng, rng.randint(1, 4), 4, max_cost=3,
                                 encoding="binary")
        b = rng.randint(0, 4)
        assert decide_bounded_cost(g, b).achievable == \
            decide_bounded_cost(g, b, engine="flat").achievable


def test_decide_clamps_to_regime_bound():
    rng = random.Random(8)
    for _ in range(60):
        g = random_cost_game(rng, rng.randint(1, 3), 3)
        base = decide_bounded_cost(g, g.n).achievable
        for extra in (1, 5):
            assert decide_bounded_cost(g, g.n + extra).achievable == base
    gb = random_cost_game(rng, 3, 3, max_cost=3, encoding="binary")
    assert clamp_bound(gb, 10 ** 9) == gb.n * gb.max_cost


def test_decide_rejects_bad_input(delay_won):
    with pytest.raises(ValueError):
        decide_bounded_cost(delay_won, -1)
    with pytest.raises(ValueError):
        decide_bounded_cost(delay_won, 1, engine="quantum")
    with pytest.raises(BudgetExceededError):
        decide_bounded_cost(delay_won, 2, product_budget=1)


def test_finite_duration_delay_game(delay_won):
    assert decide_bounded_cost_finite_duration(delay_won, 2).achievable is True
    assert decide_bounded_cost_finite_duration(delay_won, 1).achievable is False


def test_finite_duration_odd_epsilon_cycle():
    # initial vertex sits in a forced 1-colored ε-cycle: an odd
    # dominating cycle settles every branch for Player 1 at b = 0
    g = make_game([(0, 0, 1), (1, 1, 1)], [(0, 1, 0), (1, 0, 0)], 0)
    res = decide_bounded_cost_finite_duration(g, 0)
    assert res.achievable is False


def test_finite_duration_budget_exhaustion(delay_won):
    res = decide_bounded_cost_finite_duration(delay_won, 2, node_budget=2)
    assert res.exhausted and res.achievable is None


def test_first_cycle_oracle_triangle():
    """decide == finite-duration == first-cycle minimax over explicit G'."""
    from costparity.reduction import build_quotient_game

    def first_cycle_minimax(game, b, node_budget=400_000):
        qg = build_quotient_game(game, b)
        budget = [node_budget]

        def rec(path, seen):
            budget[0] -= 1
            if budget[0] <= 0:
                raise TimeoutError
            cur = path[-1]
            if cur in seen:
                k = path.index(cur)
                top = max(qg.parities[i] for i in path[k:])
                return top % 2 == 0
            owner = qg.owners[cur]
            seen = seen | {cur}
            results = (rec(path + [j], seen) for j in qg.succ[cur])
            return any(results) if owner == 0 else all(results)

        return rec([qg.initial], frozenset())

    rng = random.Random(12)
    checked = 0
    for _ in range(120):
        g = random_cost_game(rng, rng.randint(1, 3), 4)
        b = rng.randint(0, 1)
        try:
            brute = first_cycle_minimax(g, b)
        except TimeoutError:
            continue
        want = decide_bounded_cost(g, b).achievable
        fd = decide_bounded_cost_finite_duration(g, b)
        assert brute == want
        assert fd.achievable == want
        checked += 1
    assert checked >= 60


def test_optimal_delay_games(delay_won, delay_lost):
    assert optimal_cost(delay_won).value == 2
    assert optimal_cost(delay_lost).value == INF


def test_optimal_trivial():
    g = make_game([(0, 0, 0)], [(0, 0, 1)], 0)
    res = optimal_cost(g)
    assert res.value == 0 and res.witness is not None


def test_optimal_bisect_equals_sweep():
    rng = random.Random(19)
    for _ in range(50):
        g = random_cost_game(rng, rng.randint(1, 4), 4)
        assert optimal_cost(g).value == optimal_cost(g, method="sweep").value


def test_certificates_verify():
    rng = random.Random(21)
    for _ in range(60):
        if rng.random() < 0.5:
            g = random_cost_game(rng, rng.randint(1, 3), 3)
        else:
            g = random_cost_game(rng, rng.randint(1, 3), 3, max_cost=2,
                                 encoding="binary")
        b = rng.randint(0, 2)
        res = decide_bounded_cost(g, b)
        cert = res.certificate
        if res.achievable:
            assert cert.player == 0
            assert strategy_cost(g, cert) <= res.bound
        else:
            assert cert.player == 1
            assert spoiler_cost(g, cert) > res.bound
        assert cert.size <= (g.n + 1) * (res.bound + 2) ** g.d


def test_inf_witness_is_spoiler(delay_lost):
    res = optimal_cost(delay_lost)
    assert res.value == INF
    assert res.witness.player == 1
    assert spoiler_cost(delay_lost, res.witness) > delay_lost.n


def test_monotone_in_bound():
    rng = random.Random(25)
    for _ in range(50):
        g = random_cost_game(rng, rng.randint(1, 4), 4)
        vals = [decide_bounded_cost(g, b).achievable for b in range(g.n + 1)]
        assert all(b or not a for a, b in zip(vals, vals[1:]))


def test_binary_matches_subdivision():
    rng = random.Random(27)
    for _ in range(60):
        g = random_cost_game(rng, rng.randint(1, 3), 3, max_cost=3, encoding="binary")
        sub = subdivide_costs(g)
        for b in range(5):
            assert decide_bounded_cost(g, b).achievable == \
                decide_bounded_cost(sub, b).achievable
