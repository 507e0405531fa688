"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the production code paths: parity
winners come from enumerating positional strategies and checking every
reachable cycle, play costs from literally unrolling the lasso, and
Streett winners from enumerating positional spoilers.
"""

import itertools
import random

import pytest

from costparity import make_game
from costparity.semantics import INF, Lasso


def delay_game(free_idling: bool):
    """Two three-vertex games: a color-1 entry, a color-0 middle vertex
    owned by Player 1, a color-2 exit.  With a free (cost-0) self-loop
    Player 1 can only idle harmlessly and Player 0 bounds every answer
    at cost 2; with a costly self-loop he delays answers forever."""
    return make_game(
        vertices=[(0, 0, 1), (1, 1, 0), (2, 0, 2)],
        edges=[(0, 1, 1), (1, 1, 0 if free_idling else 1), (1, 2, 1), (2, 0, 1)],
        initial=0)


@pytest.fixture
def delay_won():
    return delay_game(True)


@pytest.fixture
def delay_lost():
    return delay_game(False)


def random_cost_game(rng: random.Random, n: int, max_color: int,
                     max_cost: int = 1, encoding: str = "unary"):
    verts = [(i, rng.randint(0, 1), rng.randint(0, max_color)) for i in range(n)]
    edges = []
    for i in range(n):
        for t in rng.sample(range(n), rng.randint(1, n)):
            edges.append((i, t, rng.randint(0, max_cost)))
    return make_game(verts, edges, 0, encoding)


# --- oracle: play cost by unrolling ------------------------------------------

def unrolled_play_cost(game, lasso: Lasso, horizon_factor: int = 4):
    """limsup of Cor computed on a long explicit unrolling."""
    p, c = len(lasso.prefix), len(lasso.cycle)
    start = p + horizon_factor * c
    horizon = start + 3 * c

    def color(j):
        return game.color[lasso.vertex_at(j)]

    def cost(j):
        return game.edge_cost[(lasso.vertex_at(j), lasso.vertex_at(j + 1))]

    def cor_at(j):
        req = color(j)
        if req % 2 == 0:
            return 0
        total = 0
        for k in range(j, horizon + 2 * c):
            if color(k) % 2 == 0 and color(k) >= req:
                return total
            total += cost(k)
        return INF

    return max(cor_at(j) for j in range(start, start + c))


# --- oracle: parity winner by positional enumeration --------------------------

def brute_parity_winner(owners, colors, succ, initial) -> int:
    """0 iff some positional Player 0 strategy makes every reachable
    cycle even-dominated."""
    n = len(owners)
    p0 = [v for v in range(n) if owners[v] == 0]
    for combo in itertools.product(*[succ[v] for v in p0]) if p0 else [()]:
        choice = dict(zip(p0, combo))
        rows = [[choice[v]] if v in choice else list(succ[v]) for v in range(n)]
        if _all_reachable_cycles_even(rows, colors, initial):
            return 0
    return 1


def _all_reachable_cycles_even(rows, colors, initial) -> bool:
    seen = {initial}
    stack = [initial]
    while stack:
        v = stack.pop()
        for w in rows[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    # peel colors from the top: a cycle whose maximum is odd loses
    active = set(seen)
    while active:
        top = max(colors[v] for v in active)
        tops = {v for v in active if colors[v] == top}
        if top % 2 == 1 and _has_cycle_through(rows, active, tops):
            return False
        active -= tops
    return True


def _has_cycle_through(rows, active, targets) -> bool:
    from costparity.streett import _sccs

    ids = sorted(active)
    index = {v: i for i, v in enumerate(ids)}
    sub = [[index[w] for w in rows[v] if w in active] for v in ids]
    for comp in _sccs(len(sub), sub):
        cyclic = len(comp) > 1 or any(x in sub[comp[0]] for x in comp)
        if cyclic and any(ids[k] in targets for k in comp):
            return True
    return False


# --- oracle: Streett winner by positional spoiler enumeration -----------------

def good_streett_cycle_exists(n, rows, qmask, pmask, ids=None) -> bool:
    from costparity.streett import _sccs

    ids = list(range(n)) if ids is None else ids
    for comp in _sccs(n, rows):
        cyclic = len(comp) > 1 or any(x in rows[comp[0]] for x in comp)
        if not cyclic:
            continue
        q = p = 0
        for k in comp:
            q |= qmask[ids[k]]
            p |= pmask[ids[k]]
        viol = q & ~p
        if not viol:
            return True
        keep = [k for k in comp if not qmask[ids[k]] & viol]
        if not keep:
            continue
        pos = {k: i for i, k in enumerate(keep)}
        sub = [[pos[j] for j in rows[k] if j in pos] for k in keep]
        if good_streett_cycle_exists(len(keep), sub, qmask, pmask,
                                     [ids[k] for k in keep]):
            return True
    return False


def brute_streett_winner(sg) -> int:
    p1 = [v for v in range(sg.n) if sg.owners[v] == 1]
    for combo in itertools.product(*[sg.succ[v] for v in p1]) if p1 else [()]:
        tau = dict(zip(p1, combo))
        rows = [[tau[v]] if v in tau else list(sg.succ[v]) for v in range(sg.n)]
        seen = {sg.initial}
        stack = [sg.initial]
        while stack:
            v = stack.pop()
            for w in rows[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        ids = sorted(seen)
        pos = {v: i for i, v in enumerate(ids)}
        sub = [[pos[w] for w in rows[v]] for v in ids]
        if not good_streett_cycle_exists(len(ids), sub, sg.qmask, sg.pmask, ids):
            return 1
    return 0
