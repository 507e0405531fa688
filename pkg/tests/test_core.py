import pytest

from costparity import (BudgetExceededError, Edge, FormatError, Vertex,
                        export_dot, format_cpg, format_strat, make_game,
                        parse_cpg, parse_strat, subdivide_costs, validate_game)
from costparity.core import CostGame


def test_minimal_legal_game_is_clean():
    g = make_game([(0, 0, 0)], [(0, 0, 0)], 0)
    assert validate_game(g) == []


def test_terminal_vertex_reported():
    g = make_game([(0, 0, 0), (1, 1, 1)], [(0, 1, 0)], 0)
    report = validate_game(g)
    assert any("terminal" in line and "1" in line for line in report)


def test_unary_flag_rejects_large_costs():
    g = make_game([(0, 0, 0)], [(0, 0, 3)], 0, encoding="unary")
    assert any("non-abstract cost" in line for line in validate_game(g))
    assert validate_game(make_game([(0, 0, 0)], [(0, 0, 3)], 0, "binary")) == []


def test_validate_catches_structural_problems():
    g = CostGame((Vertex(0, 0, 0), Vertex(0, 1, 2)), (Edge(0, 5, 0),), 9)
    report = validate_game(g)
    assert any("duplicate id" in line for line in report)
    assert any("unknown target" in line for line in report)
    assert any("initial vertex 9" in line for line in report)


def test_validate_rejects_parallel_edges():
    g = make_game([(0, 0, 0), (1, 0, 0)],
                  [(0, 1, 0), (0, 1, 1), (1, 0, 0)], 0, "binary")
    assert any("parallel edge" in line for line in validate_game(g))


def test_subdivide_identity_on_small_costs():
    g = make_game([(0, 0, 1), (1, 1, 2)], [(0, 1, 1), (1, 0, 0)], 0)
    sub = subdivide_costs(g)
    assert sub.n == 2 and len(sub.edges) == 2
    assert sub.encoding == "unary"


def test_subdivide_cost3_arithmetic():
    # one cost-3 edge and a cost-0 back edge: 2 fresh color-0 vertices,
    # the cost-3 edge becomes a 3-edge unit path
    g = make_game([(0, 0, 1), (1, 1, 2)], [(0, 1, 3), (1, 0, 0)], 0, "binary")
    sub = subdivide_costs(g)
    assert sub.n == 4
    assert len(sub.edges) == 4
    assert all(e.cost <= 1 for e in sub.edges)
    assert validate_game(sub) == []
    fresh = [v for v in sub.vertices if v.id >= 2]
    assert all(v.color == 0 for v in fresh)
    assert all(v.owner == 0 for v in fresh)  # source's owner


def test_subdivide_always_valid_and_color_preserving():
    import random

    rng = random.Random(5)
    from conftest import random_cost_game

    for _ in range(40):
        g = random_cost_game(rng, rng.randint(1, 4), 4, max_cost=4,
                             encoding="binary")
        sub = subdivide_costs(g)
        assert validate_game(sub) == []
        assert sub.n == g.n + sum(e.cost - 1 for e in g.edges if e.cost >= 2)
        # original vertices keep their colors
        for v in g.vertices:
            assert sub.color[v.id] == g.color[v.id]


def test_subdivide_budget():
    g = make_game([(0, 0, 0), (1, 0, 0)], [(0, 1, 100), (1, 0, 0)], 0, "binary")
    with pytest.raises(BudgetExceededError):
        subdivide_costs(g, vertex_budget=10)


def test_export_dot_deterministic(delay_won):
    out = export_dot(delay_won)
    assert out == export_dot(delay_won)
    assert out.count("->") == 4
    assert out.count("shape=circle") == 2 and out.count("shape=box") == 1


def test_export_dot_single_vertex():
    g = make_game([(0, 0, 0)], [(0, 0, 0)], 0)
    out = export_dot(g)
    assert "v0 -> v0" in out


def test_cpg_roundtrip(delay_won):
    text = format_cpg(delay_won)
    g = parse_cpg(text)
    assert g.vertices == delay_won.vertices
    assert set(g.edges) == set(delay_won.edges)
    assert g.initial == delay_won.initial
    assert format_cpg(g) == text


def test_cpg_parse_errors():
    with pytest.raises(FormatError):
        parse_cpg("")
    with pytest.raises(FormatError):
        parse_cpg("costparity 1 0 unary\n0 0 0 junk\n")
    with pytest.raises(FormatError):
        parse_cpg("costparity 2 0 unary\n0 0 0 0:0\n")
    with pytest.raises(FormatError):
        parse_cpg("costparity 1 0 trinary\n0 0 0 0:0\n")


def test_cpg_comments_ignored():
    g = parse_cpg("# a game\ncostparity 1 0 unary\n0 0 0 0:0  # self loop\n")
    assert g.n == 1


def test_strat_roundtrip(delay_won):
    from costparity.core import strategy_from_functions

    strat = strategy_from_functions(
        delay_won, 0, "only", lambda m, e: m, lambda v, m: delay_won.successors[v][0][0])
    text = format_strat(strat)
    back = parse_strat(text)
    assert back.player == 0 and back.size == 1
    assert back.update == dict(strat.update)
    assert back.next_move == dict(strat.next_move)
