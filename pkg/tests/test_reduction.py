import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cost_game
from costparity import (Edge, build_quotient_game, classify_cycle, dominates,
                        initial_request_function, make_game, relevant_requests,
                        settled, settled_bound, shortcut_step, track_play,
                        update_track_state)
from costparity.core import BudgetExceededError
from costparity.reduction import (RequestFunction, TrackState, Tracker,
                                  start_prefix)


def rf(mapping):
    return RequestFunction.from_mapping(mapping)


def ts(o, mapping):
    return TrackState(o, rf(mapping))


def test_initial_request_function():
    g = make_game([(0, 0, 0), (1, 1, 3), (2, 0, 2), (3, 1, 1)],
                  [(i, (i + 1) % 4, 1) for i in range(4)], 0)
    assert initial_request_function(g, 0).as_dict() == {1: None, 3: None}
    assert initial_request_function(g, 1).as_dict() == {1: None, 3: 0}
    assert initial_request_function(g, 2).as_dict() == {1: None, 3: None}


def eight_vertex_trace_game():
    colors = [3, 0, 1, 1, 2, 4, 1, 0]
    costs = [0, 1, 1, 0, 1, 1, 1]
    verts = [(i, 0, c) for i, c in enumerate(colors)]
    edges = [(i, i + 1, w) for i, w in enumerate(costs)] + [(7, 7, 1)]
    return make_game(verts, edges, 0)


def test_update_track_state_steps():
    g = eight_vertex_trace_game()
    # column 0 -> 1: ε-edge to a color-0 vertex leaves (0, {1:⊥,3:0}) alone
    s = update_track_state(g, 2, ts(0, {1: None, 3: 0}), Edge(0, 1, 0))
    assert s == ts(0, {1: None, 3: 0})
    # column 3 -> 4: ε-edge to the color-2 vertex closes the request for 1
    s = update_track_state(g, 2, ts(0, {1: 1, 3: 2}), Edge(3, 4, 0))
    assert s == ts(0, {1: None, 3: 2})
    # column 4 -> 5: increment to the color-4 vertex overflows, then answers
    s = update_track_state(g, 2, ts(0, {1: None, 3: 2}), Edge(4, 5, 1))
    assert s == ts(1, {1: None, 3: None})


def test_track_play_reproduces_reference_rows():
    g = eight_vertex_trace_game()
    prefix = track_play(g, 2, range(8))
    want_o = [0, 0, 0, 0, 0, 1, 1, 1]
    want_r1 = [None, None, 0, 1, None, None, 0, 1]
    want_r3 = [0, 0, 1, 2, 2, None, None, None]
    for i in range(8):
        s = prefix.state_at(i)
        assert s.overflow == want_o[i]
        assert s.requests.get(1) == want_r1[i]
        assert s.requests.get(3) == want_r3[i]


def test_relevant_requests():
    assert relevant_requests({1: 2, 3: 1}) == {1, 3}
    assert relevant_requests({1: 1, 3: 2}) == {3}
    assert relevant_requests({1: None, 3: None}) == set()
    assert relevant_requests({1: 1, 3: 1}) == {3}  # equal cost: larger dominates


def test_dominates_examples():
    assert dominates(ts(0, {1: None}), ts(0, {1: 0}))
    assert dominates(ts(0, {1: 2}), ts(1, {1: None}))
    assert dominates(ts(0, {1: 2, 3: None}), ts(0, {1: None, 3: 2}))
    assert not dominates(ts(0, {1: None, 3: 2}), ts(0, {1: 2, 3: None}))


reqvals = st.one_of(st.none(), st.integers(min_value=0, max_value=2))


@st.composite
def states(draw, colors=(1, 3)):
    o = draw(st.integers(min_value=0, max_value=3))
    return ts(o, {c: draw(reqvals) for c in colors})


@settings(max_examples=200, deadline=None)
@given(states())
def test_domination_reflexive(a):
    assert dominates(a, a)


@settings(max_examples=200, deadline=None)
@given(states(), states(), states())
def test_domination_transitive(a, b, c):
    if dominates(a, b) and dominates(b, c):
        assert dominates(a, c)


@settings(max_examples=200, deadline=None)
@given(states(), states())
def test_equivalent_states_share_relevant_requests(a, b):
    if a.overflow == b.overflow and dominates(a, b) and dominates(b, a):
        ra, rb = a.requests, b.requests
        rel = relevant_requests(ra)
        assert rel == relevant_requests(rb)
        assert all(ra.get(c) == rb.get(c) for c in rel)


def test_largest_and_costliest_requests_always_relevant():
    rng = random.Random(9)
    for _ in range(300):
        vals = {c: rng.choice([None, 0, 1, 2, 3]) for c in (1, 3, 5)}
        if all(v is None for v in vals.values()):
            continue
        rel = relevant_requests(vals)
        open_colors = [c for c, v in vals.items() if v is not None]
        assert max(open_colors) in rel
        costliest = max(open_colors, key=lambda c: (vals[c], c))
        assert costliest in rel


def test_stability_under_concatenation_exhaustive():
    # domination is preserved by every memory step, enumerated over all state pairs and
    # all edges of random games with d ≤ 2, b ≤ 2, n ≤ 3
    rng = random.Random(11)
    for _ in range(50):
        g = random_cost_game(rng, rng.randint(1, 3), 4)
        b = rng.randint(0, 2)
        tr = Tracker(g, b)
        values = [None] + list(range(b + 1))
        rs = [()]
        for _ in tr.colors:
            rs = [r + (v,) for r in rs for v in values]
        states_all = [(o, r) for o in range(g.n + 1) for r in rs]
        for o1, r1 in states_all:
            for o2, r2 in states_all:
                if o2 >= g.n:
                    continue
                a, bb = TrackState(o1, RequestFunction(tr.colors, r1)), \
                    TrackState(o2, RequestFunction(tr.colors, r2))
                if not dominates(a, bb):
                    continue
                for e in g.edges:
                    o1n, r1n, _ = tr.update(o1, r1, e.cost, e.target)
                    o2n, r2n, _ = tr.update(o2, r2, e.cost, e.target)
                    assert dominates(
                        TrackState(o1n, RequestFunction(tr.colors, r1n)),
                        TrackState(o2n, RequestFunction(tr.colors, r2n))), \
                        (r1, r2, o1, o2, e)


def test_update_never_exceeds_bounds():
    rng = random.Random(13)
    for _ in range(60):
        g = random_cost_game(rng, rng.randint(1, 4), 5, max_cost=3,
                             encoding="binary")
        b = rng.randint(0, 3)
        tr = Tracker(g, b)
        o, r = tr.initial_state()
        for _ in range(60):
            e = rng.choice([e for e in g.edges])
            o, r, _ = tr.update(o, r, e.cost, e.target)
            assert o <= g.n
            assert all(x is None or 0 <= x <= b for x in r)


def test_classify_cycle():
    g = eight_vertex_trace_game()
    # artificial annotated prefix via a real walk on the color-0 tail
    walk = track_play(g, 2, [0, 1, 2, 3, 4, 5, 6, 7, 7, 7])
    assert classify_cycle(g, 2, walk, 8, 9) in ("even", "odd", "none")
    with pytest.raises(IndexError):
        classify_cycle(g, 2, walk, 5, 99)


def test_classify_cycle_equal_states_even():
    g = make_game([(0, 0, 0), (1, 1, 0)], [(0, 1, 0), (1, 0, 0)], 0)
    walk = track_play(g, 1, [0, 1, 0])
    assert classify_cycle(g, 1, walk, 0, 2) == "even"


def test_classify_cycle_odd_growth():
    g = make_game([(0, 0, 1), (1, 1, 0)], [(0, 1, 1), (1, 0, 1)], 0)
    walk = track_play(g, 3, [0, 1, 0])
    # request for 1 grows from 0 to 2 across the cycle; max color 1 odd
    assert classify_cycle(g, 3, walk, 0, 2) == "odd"


def test_classify_cycle_overflow_mismatch():
    g = make_game([(0, 0, 1), (1, 1, 0)], [(0, 1, 1), (1, 0, 1)], 0)
    walk = track_play(g, 0, [0, 1, 0, 1, 0])
    for k in range(2):
        for k2 in range(k + 1, 5):
            if walk.overflows[k] != walk.overflows[k2]:
                assert classify_cycle(g, 0, walk, k, k2) == "none"


def test_settled_saturation_and_verdicts():
    g = make_game([(0, 0, 1), (1, 1, 0)], [(0, 1, 1), (1, 0, 1)], 0)
    walk = track_play(g, 0, [0, 1] * (g.n + 2))
    verdict = settled(g, 0, walk)
    assert verdict.settled
    walk1 = start_prefix(g, 0)
    assert settled(g, 0, walk1).kind == "unsettled"


def test_settled_bound_values():
    g4 = make_game([(i, 0, 0) for i in range(4)],
                   [(i, (i + 1) % 4, 1) for i in range(4)], 0)
    assert settled_bound(g4) == 15625
    g4b = make_game([(i, 0, 0) for i in range(4)],
                    [(i, (i + 1) % 4, 2) for i in range(4)], 0, "binary")
    assert settled_bound(g4b) == 4 * 15625
    g1 = make_game([(0, 0, 0)], [(0, 0, 1)], 0)
    assert settled_bound(g1) == 64


def test_long_prefixes_are_settled():
    # walks in tiny games never stay unsettled past ℓ
    rng = random.Random(17)
    for _ in range(20):
        g = random_cost_game(rng, rng.randint(1, 2), 3)
        b = rng.randint(0, 1)
        bound = settled_bound(g)
        walk = [g.initial]
        prefix = start_prefix(g, b)
        tr = Tracker(g, b)
        for _ in range(bound + 1):
            t, w = rng.choice(g.successors[walk[-1]])
            o, r, _ = tr.update(prefix.overflows[-1], prefix.requests[-1], w, t)
            prefix = prefix.extended(t, o, r, w)
            walk.append(t)
            if settled(g, b, prefix).settled:
                break
        else:
            pytest.fail("prefix exceeded the settled bound")


def test_shortcut_fastforward_near_bound():
    g = make_game([(0, 0, 1), (1, 1, 0), (2, 1, 0)],
                  [(0, 1, 2), (1, 2, 1), (2, 1, 0), (1, 0, 0)], 0, "binary")
    b = 10
    prefix = track_play(g, b, [0, 1, 2])
    assert prefix.requests[-1] == (3,)
    extended = shortcut_step(g, b, prefix, Edge(2, 1, 0))
    # infix 1,2,1 repeats vertex 1 with stable relevant requests, cost 1:
    # the open request fast-forwards as close to b as full traversals allow
    assert extended.via_shortcut[-1]
    s, cstar = 1, 3
    t = (b - cstar) // s
    assert t == 7
    assert extended.requests[-1] == (cstar + s * t,)
    assert extended.requests[-1][0] == b
    assert extended.costs[-1] == 0 + s * t  # transition cost Cst(v_j,v') + s·t


def test_shortcut_multiplier_arithmetic():
    # the fast-forward multiplier from the criterion: with b=10, an open
    # maximum of 2 and an infix cost of 3, two more traversals fit
    b, cstar, s = 10, 2, 3
    t = (b - cstar) // s
    assert t == max(t2 for t2 in range(1, b + 1) if cstar + s * t2 <= b)
    assert t == 2 and cstar + s * t == 8


def test_shortcut_zero_cost_infix_is_ordinary():
    g = make_game([(0, 0, 1), (1, 1, 0), (2, 1, 0)],
                  [(0, 1, 2), (1, 2, 0), (2, 1, 0), (1, 0, 0)], 0, "binary")
    prefix = track_play(g, 10, [0, 1, 2])
    extended = shortcut_step(g, 10, prefix, Edge(2, 1, 0))
    assert not extended.via_shortcut[-1]


def test_shortcut_rejects_unary_games(delay_won):
    prefix = start_prefix(delay_won, 2)
    with pytest.raises(ValueError):
        shortcut_step(delay_won, 2, prefix, Edge(0, 1, 1))


def test_quotient_delay_game(delay_won):
    qg = build_quotient_game(delay_won, 2)
    assert qg.size <= 3 * 4 * 4
    assert qg.states[0] == (0, 0, (0,))  # (v_I, 0, r_{v_I})
    for i, (v, o, r) in enumerate(qg.states):
        if o == delay_won.n:
            assert qg.parities[i] == 1
        else:
            assert qg.parities[i] == delay_won.color[v]
        assert qg.owners[i] == delay_won.owner[v]


def test_quotient_budget(delay_won):
    with pytest.raises(BudgetExceededError):
        build_quotient_game(delay_won, 2, budget=2)


def test_quotient_cpg_export(delay_won):
    from costparity import format_cpg, validate_game

    qg = build_quotient_game(delay_won, 1)
    pgame = qg.to_cost_game()
    assert validate_game(pgame) == []
    text = format_cpg(pgame, qg.state_comments())
    assert text == format_cpg(pgame, qg.state_comments())
    assert "(0,0,(0,))" in text


def test_saturated_region_stays_color_one():
    # any play that reaches o = n stays in color-1 product states
    rng = random.Random(23)
    for _ in range(20):
        g = random_cost_game(rng, rng.randint(1, 3), 3)
        qg = build_quotient_game(g, 0)
        idx = {s: i for i, s in enumerate(qg.states)}
        for i, (v, o, r) in enumerate(qg.states):
            if o == g.n:
                for j in qg.succ[i]:
                    assert qg.states[j][1] == g.n
                    assert qg.parities[j] == 1
