"""Streett games with costs: semantics, reduction, solving, verification.

A Streett pair (Q_c, P_c) opens a request at every Q_c-visit and
answers all standing c-requests at every P_c-visit; each pair carries
its own edge cost function.  Player 0 wins a play iff the limsup of the
per-position maximal pair cost is finite.

Bounded-cost existence reduces to a classical Streett game over the
arena extended with per-pair request tracking plus one extra pair that
fires once the overflow counter saturates.  Classical Streett games are
solved directly by a Zielonka-tree recursion over the request/answer
membership patterns: Player 1's condition is a disjunction, so his
nodes are unary and his synthesized strategies positional, while
Player 0's nodes branch per pair, giving her strategies of at most d!
memory, matching the known bounds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Optional, Sequence

from .core import BudgetExceededError, CostGame, StrategySpec, Vertex
from .semantics import INF, Lasso

DEFAULT_STREETT_BUDGET = 5_000_000


@dataclass(frozen=True)
class StreettPair:
    requests: frozenset[int]  # Q_c
    answers: frozenset[int]   # P_c


@dataclass(frozen=True)
class StreettEdge:
    source: int
    target: int
    costs: tuple[int, ...]  # one cost per pair


@dataclass(frozen=True)
class CostStreettGame:
    vertices: tuple[Vertex, ...]  # colors unused, conventionally 0
    edges: tuple[StreettEdge, ...]
    pairs: tuple[StreettPair, ...]
    initial: int

    @cached_property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def d(self) -> int:
        return len(self.pairs)

    @cached_property
    def owner(self) -> dict[int, int]:
        return {v.id: v.owner for v in self.vertices}

    @cached_property
    def successors(self) -> dict[int, tuple[tuple[int, tuple[int, ...]], ...]]:
        out: dict[int, list] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            out[e.source].append((e.target, e.costs))
        return {u: tuple(sorted(ts)) for u, ts in out.items()}

    @cached_property
    def edge_costs(self) -> dict[tuple[int, int], tuple[int, ...]]:
        return {(e.source, e.target): e.costs for e in self.edges}

    @cached_property
    def max_cost(self) -> int:
        return max((max(e.costs) for e in self.edges), default=0)

    @cached_property
    def request_mask(self) -> dict[int, int]:
        ids = {v.id for v in self.vertices}
        out = {i: 0 for i in ids}
        for c, p in enumerate(self.pairs):
            for v in p.requests:
                out[v] |= 1 << c
        return out

    @cached_property
    def answer_mask(self) -> dict[int, int]:
        ids = {v.id for v in self.vertices}
        out = {i: 0 for i in ids}
        for c, p in enumerate(self.pairs):
            for v in p.answers:
                out[v] |= 1 << c
        return out


@dataclass(frozen=True)
class StreettGame:
    """Classical Streett game (all costs implicitly zero)."""

    owners: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    pairs_q: tuple[frozenset[int], ...]
    pairs_p: tuple[frozenset[int], ...]
    initial: int

    @property
    def n(self) -> int:
        return len(self.owners)

    @property
    def d(self) -> int:
        return len(self.pairs_q)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        pred: list[list[int]] = [[] for _ in range(self.n)]
        for u in range(self.n):
            for v in self.succ[u]:
                pred[v].append(u)
        return tuple(tuple(p) for p in pred)

    @cached_property
    def qmask(self) -> tuple[int, ...]:
        out = [0] * self.n
        for c, qs in enumerate(self.pairs_q):
            for v in qs:
                out[v] |= 1 << c
        return tuple(out)

    @cached_property
    def pmask(self) -> tuple[int, ...]:
        out = [0] * self.n
        for c, ps in enumerate(self.pairs_p):
            for v in ps:
                out[v] |= 1 << c
        return tuple(out)


def validate_streett_game(game: CostStreettGame) -> list[str]:
    report: list[str] = []
    if game.d < 1:
        report.append("game: needs at least one Streett pair")
    ids = {v.id for v in game.vertices}
    if game.initial not in ids:
        report.append(f"game: initial vertex {game.initial} does not exist")
    seen: set[tuple[int, int]] = set()
    out = {i: 0 for i in ids}
    for e in game.edges:
        if e.source not in ids or e.target not in ids:
            report.append(f"edge {e.source}->{e.target}: unknown endpoint")
            continue
        if (e.source, e.target) in seen:
            report.append(f"edge {e.source}->{e.target}: parallel edge")
        seen.add((e.source, e.target))
        if len(e.costs) != game.d:
            report.append(f"edge {e.source}->{e.target}: expected {game.d} costs")
        if any(w < 0 for w in e.costs):
            report.append(f"edge {e.source}->{e.target}: negative cost")
        out[e.source] += 1
    for i, k in sorted(out.items()):
        if k == 0:
            report.append(f"vertex {i}: terminal vertex (no outgoing edge)")
    for c, p in enumerate(game.pairs):
        for v in p.requests | p.answers:
            if v not in ids:
                report.append(f"pair {c}: unknown vertex {v}")
    return report


def require_valid_streett(game: CostStreettGame) -> None:
    report = validate_streett_game(game)
    if report:
        raise ValueError("invalid Streett game: " + "; ".join(report))


# --- cost semantics on lassos ------------------------------------------------

def _validate_streett_lasso(game: CostStreettGame, lasso: Lasso) -> None:
    if not lasso.cycle:
        raise ValueError("lasso cycle must be non-empty")
    seq = list(lasso.prefix) + list(lasso.cycle)
    if seq[0] != game.initial:
        raise ValueError(f"lasso must start at the initial vertex {game.initial}")
    costs = game.edge_costs
    closed = seq + [lasso.cycle[0]]
    for a, b in zip(closed, closed[1:]):
        if (a, b) not in costs:
            raise ValueError(f"lasso uses missing edge {a}->{b}")


def stcor(game: CostStreettGame, lasso: Lasso, j: int) -> float:
    """max over pairs of the cost (under that pair's cost function) from
    position j to the first later answer of a request opened there; 0 if
    nothing is opened, ∞ if some opened request is never answered."""
    _validate_streett_lasso(game, lasso)
    if not 0 <= j < len(lasso):
        raise ValueError(f"position {j} outside canonical range [0, {len(lasso)})")
    v = lasso.vertex_at(j)
    opened = game.request_mask[v]
    if not opened:
        return 0
    worst: float = 0
    costs = game.edge_costs
    amask = game.answer_mask
    limit = len(lasso) + len(lasso.cycle)
    for c in range(game.d):
        if not opened >> c & 1:
            continue
        if amask[v] >> c & 1:
            continue  # answered on the spot with cost 0
        total = 0
        k = j
        value: float = INF
        while k - j < limit:
            u, w = lasso.vertex_at(k), lasso.vertex_at(k + 1)
            total += costs[(u, w)][c]
            k += 1
            if amask[w] >> c & 1:
                value = total
                break
        worst = max(worst, value)
    return worst


def streett_play_cost(game: CostStreettGame, lasso: Lasso) -> float:
    """limsup of StCor over positions = max over one cycle period."""
    _validate_streett_lasso(game, lasso)
    p = len(lasso.prefix)
    return max(stcor(game, lasso, p + i) for i in range(len(lasso.cycle)))


# --- per-pair request tracking ------------------------------------------------

class StreettTracker:
    """Mirror of the parity tracker with one counter per Streett pair."""

    def __init__(self, game: CostStreettGame, bound: int):
        if bound < 0:
            raise ValueError("bound must be non-negative")
        self.game = game
        self.bound = bound
        self.d = game.d
        self.n = game.n
        self.qmask = game.request_mask
        self.pmask = game.answer_mask
        self.bot = (None,) * self.d

    def initial_r(self, vertex: int) -> tuple:
        fresh = self.qmask[vertex] & ~self.pmask[vertex]
        return tuple(0 if fresh >> c & 1 else None for c in range(self.d))

    def initial_state(self) -> tuple[int, tuple]:
        return (0, self.initial_r(self.game.initial))

    def update(self, o: int, r: tuple, costs: Sequence[int], target: int
               ) -> tuple[int, tuple, bool]:
        b = self.bound
        r = tuple(x if x is None else x + w for x, w in zip(r, costs))
        overflow = any(x is not None and x > b for x in r)
        if overflow:
            r = self.bot
            o = min(o + 1, self.n)
        close = self.pmask[target]
        open_ = self.qmask[target] & ~close
        if close or open_:
            r = tuple(None if close >> c & 1 else
                      (0 if (open_ >> c & 1) and x is None else x)
                      for c, x in enumerate(r))
        return o, r, overflow


# --- reduction to a classical Streett game ------------------------------------

@dataclass(frozen=True)
class StreettReduction:
    game: CostStreettGame
    bound: int
    streett: StreettGame
    states: tuple[tuple[int, int, tuple], ...]  # (vertex, overflow, r)
    index: Mapping[tuple[int, int, tuple], int]
    overflow_edge: frozenset[tuple[int, int]]

    @property
    def size(self) -> int:
        return len(self.states)


def build_streett_reduction(game: CostStreettGame, bound: int,
                            budget: int = DEFAULT_STREETT_BUDGET) -> StreettReduction:
    """Reachable product with per-pair tracking; pairs are lifted and one
    extra pair (saturated states, ∅) dooms Player 0 past n overflows."""
    require_valid_streett(game)
    tr = StreettTracker(game, bound)
    succ = game.successors
    owner = game.owner
    n = game.n
    o0, r0 = tr.initial_state()
    start = (game.initial, o0, r0)
    index: dict[tuple[int, int, tuple], int] = {start: 0}
    order = [start]
    rows: list[tuple[int, ...]] = []
    ovf_edges: set[tuple[int, int]] = set()
    head = 0
    while head < len(order):
        v, o, r = order[head]
        head += 1
        row = []
        for t, costs in succ[v]:
            o2, r2, ovf = tr.update(o, r, costs, t)
            key = (t, o2, r2)
            j = index.get(key)
            if j is None:
                j = len(order)
                if j >= budget:
                    raise BudgetExceededError(
                        f"streett reduction exceeds budget {budget} states")
                index[key] = j
                order.append(key)
            if ovf:
                ovf_edges.add((head - 1, j))
            row.append(j)
        rows.append(tuple(row))
    owners = tuple(owner[v] for v, _, _ in order)
    d = game.d
    pairs_q = [frozenset(i for i, (v, _, _) in enumerate(order)
                         if game.request_mask[v] >> c & 1) for c in range(d)]
    pairs_p = [frozenset(i for i, (v, _, _) in enumerate(order)
                         if game.answer_mask[v] >> c & 1) for c in range(d)]
    pairs_q.append(frozenset(i for i, (_, o, _) in enumerate(order) if o >= n))
    pairs_p.append(frozenset())
    sg = StreettGame(owners, tuple(rows), tuple(pairs_q), tuple(pairs_p), 0)
    return StreettReduction(game, bound, sg, tuple(order), index, frozenset(ovf_edges))


# --- classical Streett solving (Zielonka-tree recursion) -----------------------

class _DeadState:
    """Sentinel strategy state once play has left the assembled region."""

    def __repr__(self):
        return "<dead>"


_DEAD = _DeadState()


class _LeafCell:
    def __init__(self, moves: dict[int, int]):
        self.moves = moves

    def init(self, v):
        return 0

    def step(self, state, w):
        return 0

    def move(self, v, state):
        return self.moves.get(v)


class _RotateCell:
    """Round-robin over the node's children: attract toward colors
    outside the child label, rotate on hitting one, otherwise play the
    child subgame strategy inside its zone."""

    def __init__(self, children: list[dict]):
        self.children = children  # target_set, attr_moves, attr_region, zone, subcell, stay

    def _enter(self, idx, w):
        ch = self.children[idx]
        if ch["zone"] is not None and w in ch["zone"]:
            return (idx, ch["subcell"].init(w))
        return (idx, None)

    def init(self, v):
        return self._enter(0, v)

    def step(self, state, w):
        if state is _DEAD:
            return _DEAD
        idx, sub = state
        ch = self.children[idx]
        if w in ch["targets"]:
            return self._enter((idx + 1) % len(self.children), w)
        if ch["zone"] is not None and w in ch["zone"]:
            if sub is None:
                return (idx, ch["subcell"].init(w))
            return (idx, ch["subcell"].step(sub, w))
        if w in ch["attr_region"]:
            return (idx, None)
        return _DEAD

    def move(self, v, state):
        if state is _DEAD:
            return None
        idx, sub = state
        ch = self.children[idx]
        if v in ch["targets"]:
            return ch["stay"].get(v)
        if ch["zone"] is not None and v in ch["zone"]:
            # inconsistent (vertex, state) pairs can be probed during
            # tabulation; they never occur along consistent plays
            return ch["subcell"].move(v, sub) if sub is not None else None
        return ch["attr_moves"].get(v)


class _PieceCell:
    """Dominion pieces peeled for the non-favored player: per piece an
    attractor into the sub-region and the sub-region's own strategy."""

    def __init__(self, pieces: list[dict], piece_of: dict[int, int]):
        self.pieces = pieces  # sub_region, attr_moves, subcell
        self.piece_of = piece_of

    def _enter(self, v):
        idx = self.piece_of.get(v)
        if idx is None:
            return _DEAD
        pc = self.pieces[idx]
        if v in pc["sub_region"]:
            return (idx, pc["subcell"].init(v))
        return (idx, None)

    def init(self, v):
        return self._enter(v)

    def step(self, state, w):
        idx2 = self.piece_of.get(w)
        if idx2 is None:
            return _DEAD
        if state is _DEAD or state[0] != idx2:
            return self._enter(w)
        idx, sub = state
        pc = self.pieces[idx]
        if w in pc["sub_region"]:
            if sub is None:
                return (idx, pc["subcell"].init(w))
            return (idx, pc["subcell"].step(sub, w))
        return (idx, None)

    def move(self, v, state):
        if state is _DEAD or self.piece_of.get(v) != state[0]:
            return None
        idx, sub = state
        pc = self.pieces[idx]
        if v in pc["sub_region"]:
            return pc["subcell"].move(v, sub) if sub is not None else None
        return pc["attr_moves"].get(v)


def _streett_attractor(sg: StreettGame, player: int, targets, active: set
                       ) -> tuple[set, dict[int, int]]:
    in_region = {t for t in targets if t in active}
    rank = {t: 0 for t in in_region}
    queue = sorted(in_region)
    cnt: dict[int, int] = {}
    qi = 0
    while qi < len(queue):
        w = queue[qi]
        qi += 1
        for u in sg.pred[w]:
            if u not in active or u in in_region:
                continue
            if sg.owners[u] == player:
                in_region.add(u)
                rank[u] = rank[w] + 1
                queue.append(u)
            else:
                if u not in cnt:
                    cnt[u] = sum(1 for s in sg.succ[u] if s in active)
                cnt[u] -= 1
                if cnt[u] == 0:
                    in_region.add(u)
                    rank[u] = rank[w] + 1
                    queue.append(u)
    moves: dict[int, int] = {}
    tset = set(targets) & active
    for u in in_region:
        if sg.owners[u] != player or u in tset:
            continue
        for s in sorted(sg.succ[u]):
            if s in in_region and rank[s] < rank[u]:
                moves[u] = s
                break
    return in_region, moves


class _StreettSolver:
    def __init__(self, sg: StreettGame):
        self.sg = sg
        # distinct (request-mask, answer-mask) patterns
        pat_index: dict[tuple[int, int], int] = {}
        pattern_of = []
        for v in range(sg.n):
            key = (sg.qmask[v], sg.pmask[v])
            if key not in pat_index:
                pat_index[key] = len(pat_index)
            pattern_of.append(pat_index[key])
        self.pattern_of = pattern_of
        self.pat_q = [q for (q, _), _ in sorted(pat_index.items(), key=lambda kv: kv[1])]
        self.pat_p = [p for (_, p), _ in sorted(pat_index.items(), key=lambda kv: kv[1])]

    def _violated(self, colors: frozenset[int]) -> int:
        q = p = 0
        for pid in colors:
            q |= self.pat_q[pid]
            p |= self.pat_p[pid]
        return q & ~p

    def _children(self, colors: frozenset[int], fav: int) -> list[frozenset[int]]:
        if fav == 0:
            out = []
            for c in range(self.sg.d):
                cu = frozenset(p for p in colors if not self.pat_p[p] >> c & 1)
                if cu != colors and any(self.pat_q[p] >> c & 1 for p in cu):
                    out.append(cu)
            uniq = sorted(set(out), key=sorted)
            return [c for c in uniq if not any(c < c2 for c2 in uniq)]
        cur = colors
        while True:
            viol = self._violated(cur)
            if not viol:
                break
            cur = frozenset(p for p in cur if not self.pat_q[p] & viol)
        return [cur] if cur else []

    def solve(self, active: set, colors: frozenset[int]):
        """Returns (win0, win1, cell0, cell1) on the active subgame."""
        sg = self.sg
        if not active:
            return set(), set(), None, None
        fav = 0 if not self._violated(colors) else 1
        opp = 1 - fav
        children = self._children(colors, fav)
        if not children:
            moves = {v: min(s for s in sg.succ[v] if s in active)
                     for v in active if sg.owners[v] == fav}
            cells = [None, None]
            cells[fav] = _LeafCell(moves)
            wins = [set(), set()]
            wins[fav] = set(active)
            return wins[0], wins[1], cells[0], cells[1]

        active = set(active)
        pieces: list[dict] = []
        piece_of: dict[int, int] = {}
        opp_total: set = set()
        while True:
            progressed = False
            recorded: list[dict] = []
            for cu in children:
                targets = {v for v in active if self.pattern_of[v] not in cu}
                attr, amoves = _streett_attractor(sg, fav, targets, active)
                zone = active - attr
                entry = {"targets": targets, "attr_region": attr,
                         "attr_moves": amoves, "zone": zone or None, "subcell": None}
                if zone:
                    w0, w1, c0, c1 = self.solve(zone, cu)
                    wopp = (w0, w1)[opp]
                    if wopp:
                        region, dmoves = _streett_attractor(sg, opp, sorted(wopp), active)
                        idx = len(pieces)
                        pieces.append({"sub_region": set(wopp), "attr_moves": dmoves,
                                       "subcell": (c0, c1)[opp]})
                        for v in region:
                            piece_of[v] = idx
                        opp_total |= region
                        active -= region
                        progressed = True
                        break
                    entry["subcell"] = (c0, c1)[fav]
                recorded.append(entry)
            if not progressed:
                break
        for entry in recorded:
            entry["stay"] = {v: min(s for s in sg.succ[v] if s in active)
                             for v in entry["targets"] if sg.owners[v] == fav}
        cells = [None, None]
        if active:
            cells[fav] = _RotateCell(recorded)
        if opp_total:
            cells[opp] = _PieceCell(pieces, piece_of)
        wins = [None, None]
        wins[fav] = set(active)
        wins[opp] = opp_total
        return wins[0], wins[1], cells[0], cells[1]


class StreettSolveResult:
    """Winner, regions, and lazily materialized winner strategy."""

    def __init__(self, sg: StreettGame, winner: int, win0, win1, cells):
        self.sg = sg
        self.winner_from_initial = winner
        self.win0 = frozenset(win0)
        self.win1 = frozenset(win1)
        self._cells = cells

    def cell(self, player: int):
        return self._cells[player]

    @cached_property
    def player0_strategy(self) -> Optional[StrategySpec]:
        if self.winner_from_initial != 0:
            return None
        return _materialize_cell(self.sg, 0, self._cells[0])

    @cached_property
    def player1_strategy(self) -> Optional[StrategySpec]:
        if self.winner_from_initial != 1:
            return None
        return _positional_from_cell(self.sg, 1, self._cells[1])


def _materialize_cell(sg: StreettGame, player: int, cell) -> StrategySpec:
    """Tabulate a cell strategy into a StrategySpec over the Streett
    arena (edges keyed with cost 0).  Memory states are the distinct
    cell states reachable from any vertex, discovery-ordered."""
    start = cell.init(sg.initial) if cell is not None else _DEAD
    index = {start: 0}
    labels = [start]
    edges = [(u, 0, t) for u in range(sg.n) for t in sg.succ[u]]
    frontier = [start]
    while frontier:
        st = frontier.pop()
        for u in range(sg.n):
            for t in sg.succ[u]:
                nxt = cell.step(st, t) if cell is not None else _DEAD
                if nxt not in index:
                    index[nxt] = len(labels)
                    labels.append(nxt)
                    frontier.append(nxt)
    update = {}
    for st in labels:
        for u, w, t in edges:
            nxt = cell.step(st, t) if cell is not None else _DEAD
            update[(index[st], (u, w, t))] = index[nxt]
    next_move: dict[tuple[int, int], int] = {}
    for v in range(sg.n):
        if sg.owners[v] != player:
            continue
        for st in labels:
            mv = cell.move(v, st) if cell is not None else None
            if mv is None:
                mv = min(sg.succ[v])
            next_move[(v, index[st])] = mv
    return StrategySpec(player, tuple(range(len(labels))), 0, update, next_move)


def _positional_from_cell(sg: StreettGame, player: int, cell) -> StrategySpec:
    """Positional strategy read off a cell whose states are functions of
    the current vertex (the case for Player 1: his condition being a
    disjunction, his tree nodes are unary, so nothing ever rotates)."""
    update = {(0, (u, 0, t)): 0 for u in range(sg.n) for t in sg.succ[u]}
    next_move = {}
    for v in range(sg.n):
        if sg.owners[v] != player:
            continue
        mv = cell.move(v, cell.init(v)) if cell is not None else None
        next_move[(v, 0)] = mv if mv is not None else min(sg.succ[v])
    return StrategySpec(player, (0,), 0, update, next_move)


def solve_streett(sg: StreettGame) -> StreettSolveResult:
    """Winner and strategies of a classical Streett game."""
    solver = _StreettSolver(sg)
    colors = frozenset(range(len(solver.pat_q)))
    w0, w1, c0, c1 = solver.solve(set(range(sg.n)), colors)
    winner = 0 if sg.initial in w0 else 1
    return StreettSolveResult(sg, winner, w0, w1, (c0, c1))


# --- bounded-cost decision ------------------------------------------------------

def streett_regime_cap(game: CostStreettGame) -> int:
    """Cost cap nW·2^d·(2d)! beyond which the bound is immaterial."""
    return game.n * max(1, game.max_cost) * (2 ** game.d) * math.factorial(2 * game.d)


class StreettBoundedResult:
    def __init__(self, game: CostStreettGame, bound: int, achievable: bool,
                 reduction: StreettReduction, solve: StreettSolveResult):
        self.game = game
        self.bound = bound
        self.achievable = achievable
        self.reduction = reduction
        self.solve = solve

    @property
    def product_states(self) -> int:
        return self.reduction.size

    @cached_property
    def certificate(self) -> StrategySpec:
        if self.achievable:
            return _compose_p0_certificate(self.reduction, self.solve)
        return _extract_p1_certificate(self.reduction, self.solve)


def decide_bounded_cost_streett(game: CostStreettGame, bound: int, *,
                                budget: int = DEFAULT_STREETT_BUDGET
                                ) -> StreettBoundedResult:
    """Does Player 0 have a strategy of cost at most ``bound``?"""
    require_valid_streett(game)
    if bound < 0:
        raise ValueError("bound must be non-negative")
    b = min(bound, streett_regime_cap(game))
    red = build_streett_reduction(game, b, budget)
    res = solve_streett(red.streett)
    return StreettBoundedResult(game, b, res.winner_from_initial == 0, red, res)


def _streett_strategy_from_functions(game: CostStreettGame, player: int,
                                     initial_label, update_fn, next_move_fn
                                     ) -> StrategySpec:
    edges = [(e.source, 0, e.target) for e in game.edges]
    index = {initial_label: 0}
    labels = [initial_label]
    frontier = [initial_label]
    while frontier:
        label = frontier.pop()
        for ek in edges:
            nxt = update_fn(label, ek)
            if nxt not in index:
                index[nxt] = len(labels)
                labels.append(nxt)
                frontier.append(nxt)
    update = {(index[l], ek): index[update_fn(l, ek)] for l in labels for ek in edges}
    next_move = {}
    for v in game.vertices:
        if v.owner != player:
            continue
        for label in labels:
            next_move[(v.id, index[label])] = next_move_fn(v.id, label)
    return StrategySpec(player, tuple(labels), 0, update, next_move)


def _streett_strategy_from_product(game: CostStreettGame, player: int,
                                   initial_label, update_fn, next_move_fn
                                   ) -> StrategySpec:
    """Product-reachable memory only, with an absorbing dead state for
    update queries no consistent play can pose."""
    from .core import DEAD_MEMORY

    succ = game.successors
    index = {initial_label: 0}
    labels = [initial_label]
    seen = {(game.initial, initial_label)}
    stack = [(game.initial, initial_label)]
    while stack:
        v, m = stack.pop()
        for t, _ in succ[v]:
            m2 = update_fn(m, (v, 0, t))
            if m2 not in index:
                index[m2] = len(labels)
                labels.append(m2)
            if (t, m2) not in seen:
                seen.add((t, m2))
                stack.append((t, m2))
    edges = [(e.source, 0, e.target) for e in game.edges]
    pending = {}
    for m in labels:
        for ek in edges:
            pending[(index[m], ek)] = index.get(update_fn(m, ek))
    if any(j is None for j in pending.values()):
        index[DEAD_MEMORY] = len(labels)
        labels.append(DEAD_MEMORY)
        dead = index[DEAD_MEMORY]
        for ek in edges:
            pending[(dead, ek)] = dead
        update = {k: (dead if j is None else j) for k, j in pending.items()}
    else:
        update = pending
    next_move = {}
    for v in game.vertices:
        if v.owner != player:
            continue
        for m in labels:
            if m is DEAD_MEMORY:
                next_move[(v.id, index[m])] = succ[v.id][0][0]
            else:
                next_move[(v.id, index[m])] = next_move_fn(v.id, m)
    return StrategySpec(player, tuple(labels), 0, update, next_move)


def _compose_p0_certificate(red: StreettReduction, sol: StreettSolveResult) -> StrategySpec:
    """Tracking memory × solver memory, with next moves projected."""
    game = red.game
    tr = StreettTracker(game, red.bound)
    succ = game.successors
    cell = sol.cell(0)

    def upd(label, ek):
        (o, r, s) = label
        src, _, t = ek
        costs = game.edge_costs[(src, t)]
        o2, r2, _ = tr.update(o, r, costs, t)
        j = red.index.get((t, o2, r2))
        if j is None or s is None:
            return (o2, r2, None)
        return (o2, r2, cell.step(s, j))

    def nxt(v, label):
        (o, r, s) = label
        i = red.index.get((v, o, r))
        if i is not None and s is not None:
            j = cell.move(i, s)
            if j is not None:
                return red.states[j][0]
        return succ[v][0][0]

    o0, r0 = tr.initial_state()
    start = (o0, r0, cell.init(red.index[(game.initial, o0, r0)]))
    return _streett_strategy_from_product(game, 0, start, upd, nxt)


def _extract_p1_certificate(red: StreettReduction, sol: StreettSolveResult) -> StrategySpec:
    """Spoiler memory with the overflow counter reset to the least value
    reachable under the product strategy (mirror of the parity case)."""
    game = red.game
    tr = StreettTracker(game, red.bound)
    succ = game.successors
    owner = game.owner
    n = game.n
    cell = sol.cell(1)

    def product_move(i: int) -> Optional[int]:
        # Player 1 cell states are position-determined, so the entry
        # state at i already carries the positional choice.
        return cell.move(i, cell.init(i))

    start = red.states[0]
    seen = {start}
    stack = [start]
    o_min: dict[int, int] = {}
    while stack:
        v, o, r = stack.pop()
        if r == tr.initial_r(v):
            o_min[v] = min(o, o_min.get(v, n))
        if o >= n:
            continue
        i = red.index[(v, o, r)]
        if owner[v] == 1:
            j = product_move(i)
            moves = [red.states[j][0]] if j is not None else [succ[v][0][0]]
        else:
            moves = [t for t, _ in succ[v]]
        for t in moves:
            costs = game.edge_costs[(v, t)]
            o2, r2, _ = tr.update(o, r, costs, t)
            key = (t, o2, r2)
            if key not in seen:
                seen.add(key)
                stack.append(key)

    def upd(label, ek):
        (o, r) = label
        src, _, t = ek
        costs = game.edge_costs[(src, t)]
        o2, r2, ovf = tr.update(o, r, costs, t)
        if ovf:
            return (o_min.get(t, n), r2)
        return (o2, r2)

    def nxt(v, label):
        (o, r) = label
        i = red.index.get((v, o, r))
        if i is not None:
            j = product_move(i)
            if j is not None:
                return red.states[j][0]
        return succ[v][0][0]

    return _streett_strategy_from_product(game, 1, (0, tr.initial_r(game.initial)),
                                          upd, nxt)


# --- strategy verification (one-player tracked products) -------------------------

def _streett_strategy_product(game: CostStreettGame, strat: StrategySpec
                              ) -> tuple[list[tuple[int, int]], list[list[int]]]:
    """Reachable (vertex, memory) product with the owner's moves fixed."""
    succ = game.successors
    owner = game.owner
    index: dict[tuple[int, int], int] = {}
    order: list[tuple[int, int]] = []

    def intern(v, m):
        key = (v, m)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    intern(game.initial, strat.initial)
    rows: list[list[int]] = []
    head = 0
    while head < len(order):
        v, m = order[head]
        head += 1
        if owner[v] == strat.player:
            moves = [strat.next_move[(v, m)]]
        else:
            moves = [t for t, _ in succ[v]]
        row = []
        for t in moves:
            m2 = strat.update[(m, (v, 0, t))]
            row.append(intern(t, m2))
        rows.append(row)
    return order, rows


def _sccs(n: int, rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    indexv = [-1] * n
    low = [0] * n
    onstack = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if indexv[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                indexv[v] = low[v] = counter
                counter += 1
                stack.append(v)
                onstack[v] = True
            recurse = False
            for i in range(pi, len(rows[v])):
                w = rows[v][i]
                if indexv[w] == -1:
                    work[-1] = (v, i + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if onstack[w]:
                    low[v] = min(low[v], indexv[w])
            if recurse:
                continue
            if low[v] == indexv[v]:
                comp = []
                while True:
                    w = stack.pop()
                    onstack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            work.pop()
            if work:
                u, _ = work[-1]
                low[u] = min(low[u], low[v])
    return out


def _has_unanswered_cycle(game: CostStreettGame, order, rows) -> bool:
    """A reachable cycle opening some pair's request and never answering it."""
    for c in range(game.d):
        keep = [i for i, (v, _) in enumerate(order)
                if not game.answer_mask[v] >> c & 1]
        pos = {i: k for k, i in enumerate(keep)}
        sub = [[pos[j] for j in rows[i] if j in pos] for i in keep]
        for comp in _sccs(len(keep), sub):
            cyclic = len(comp) > 1 or any(x in sub[comp[0]] for x in comp)
            if not cyclic:
                continue
            if any(game.request_mask[order[keep[k]][0]] >> c & 1 for k in comp):
                return True
    return False


def _overflow_cycle(game: CostStreettGame, strat: StrategySpec, bound: int) -> bool:
    """Tracked one-player product: is some overflow edge on a cycle?"""
    tr = StreettTracker(game, bound)
    succ = game.successors
    owner = game.owner
    o0, r0 = tr.initial_state()
    start = (game.initial, strat.initial, r0)
    index = {start: 0}
    order = [start]
    rows: list[list[int]] = []
    ovf: list[list[bool]] = []
    head = 0
    while head < len(order):
        v, m, r = order[head]
        head += 1
        if owner[v] == strat.player:
            moves = [strat.next_move[(v, m)]]
        else:
            moves = [t for t, _ in succ[v]]
        row, orow = [], []
        for t in moves:
            m2 = strat.update[(m, (v, 0, t))]
            _, r2, over = tr.update(0, r, game.edge_costs[(v, t)], t)
            key = (t, m2, r2)
            j = index.get(key)
            if j is None:
                j = len(order)
                index[key] = j
                order.append(key)
            row.append(j)
            orow.append(over)
        rows.append(row)
        ovf.append(orow)
    comp_of = {}
    for comp in _sccs(len(order), rows):
        cid = id(comp)
        for v in comp:
            comp_of[v] = cid
    for i, row in enumerate(rows):
        for j, over in zip(row, ovf[i]):
            if over and comp_of[i] == comp_of[j]:
                return True
    return False


def streett_strategy_cost(game: CostStreettGame, strat: StrategySpec) -> float:
    """Cst(σ) = sup over consistent plays, by lasso analysis on the
    σ-restricted one-player product."""
    require_valid_streett(game)
    if strat.player != 0:
        raise ValueError("streett_strategy_cost expects a Player 0 strategy")
    order, rows = _streett_strategy_product(game, strat)
    if _has_unanswered_cycle(game, order, rows):
        return INF
    cap = len(order) * max(1, game.max_cost)
    if _overflow_cycle(game, strat, cap):
        return INF
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi) // 2
        if _overflow_cycle(game, strat, mid):
            lo = mid + 1
        else:
            hi = mid
    return lo


def _good_lasso(game: CostStreettGame, strat: StrategySpec, bound: int) -> bool:
    """Player 0 (sole mover against the fixed spoiler) reaches a cycle
    without overflow edges on which every requested pair is answered."""
    tr = StreettTracker(game, bound)
    succ = game.successors
    owner = game.owner
    o0, r0 = tr.initial_state()
    start = (game.initial, strat.initial, r0)
    index = {start: 0}
    order = [start]
    rows: list[list[int]] = []
    head = 0
    while head < len(order):
        v, m, r = order[head]
        head += 1
        if owner[v] == strat.player:
            moves = [strat.next_move[(v, m)]]
        else:
            moves = [t for t, _ in succ[v]]
        row = []
        for t in moves:
            m2 = strat.update[(m, (v, 0, t))]
            _, r2, over = tr.update(0, r, game.edge_costs[(v, t)], t)
            if over:
                continue  # good lassos avoid overflow edges
            key = (t, m2, r2)
            j = index.get(key)
            if j is None:
                j = len(order)
                index[key] = j
                order.append(key)
            row.append(j)
        rows.append(row)

    def good(comp_ids: list[int], sub_rows) -> bool:
        for comp in _sccs(len(comp_ids), sub_rows):
            cyclic = len(comp) > 1 or any(x in sub_rows[comp[0]] for x in comp)
            if not cyclic:
                continue
            qhit = phit = 0
            for k in comp:
                v = order[comp_ids[k]][0]
                qhit |= game.request_mask[v]
                phit |= game.answer_mask[v]
            viol = qhit & ~phit
            if not viol:
                return True
            keep = [k for k in comp
                    if not game.request_mask[order[comp_ids[k]][0]] & viol]
            if not keep:
                continue
            pos = {k: i for i, k in enumerate(keep)}
            nested = [[pos[j] for j in sub_rows[k] if j in pos] for k in keep]
            if good([comp_ids[k] for k in keep], nested):
                return True
        return False

    return good(list(range(len(order))), rows)


def streett_spoiler_cost(game: CostStreettGame, strat: StrategySpec) -> float:
    """Cst(τ) = inf over consistent plays: least b for which Player 0
    finds a good lasso in the τ-restricted product."""
    require_valid_streett(game)
    if strat.player != 1:
        raise ValueError("streett_spoiler_cost expects a Player 1 strategy")
    order, _ = _streett_strategy_product(game, strat)
    cap = len(order) * max(1, game.max_cost)
    if not _good_lasso(game, strat, cap):
        return INF
    lo, hi = 0, cap
    while lo < hi:
        mid = (lo + hi) // 2
        if _good_lasso(game, strat, mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


# --- optimal cost ----------------------------------------------------------------

@dataclass(frozen=True)
class StreettOptimalResult:
    value: float  # natural, or ∞ (Player 0 loses outright)
    witness: Optional[StrategySpec]
    cap_hit: bool = False
    searched_up_to: int = 0


def optimal_cost_streett(game: CostStreettGame, *,
                         practical_cap: Optional[int] = None,
                         budget: int = DEFAULT_STREETT_BUDGET) -> StreettOptimalResult:
    """Least achievable bound by ramp-up then bisection.

    The theoretical cap nW·2^d·(2d)! is astronomically large, so the
    search stops at a practical cap (default n·W·2^d) and reports
    ``cap_hit`` when even that bound is not achievable — the true value
    then exceeds the cap but Player 0 is not proven to lose.
    """
    require_valid_streett(game)
    cap = practical_cap if practical_cap is not None else \
        game.n * max(1, game.max_cost) * 2 ** game.d
    cap = min(cap, streett_regime_cap(game))
    probe, prev = 0, -1
    while True:
        last = decide_bounded_cost_streett(game, probe, budget=budget)
        if last.achievable:
            break
        if probe >= cap:
            if cap >= streett_regime_cap(game):
                return StreettOptimalResult(INF, last.certificate, False, cap)
            return StreettOptimalResult(INF, None, True, cap)
        prev = probe
        probe = min(cap, 1 if probe == 0 else probe * 2)
    lo, hi = prev + 1, probe
    best = last
    while lo < hi:
        mid = (lo + hi) // 2
        res = decide_bounded_cost_streett(game, mid, budget=budget)
        if res.achievable:
            hi = mid
            best = res
        else:
            lo = mid + 1
    return StreettOptimalResult(lo, best.certificate, False, cap)


# --- bridges and file format -------------------------------------------------------

def streett_from_cost_parity(game: CostGame) -> CostStreettGame:
    """Pairs from a parity coloring: Q_c = color-(2c+1) vertices, P_c =
    vertices of even color ≥ 2c+2, all pairs sharing the edge costs."""
    odd = game.odd_colors
    pairs = []
    for c in odd:
        q = frozenset(v.id for v in game.vertices if v.color == c)
        p = frozenset(v.id for v in game.vertices
                      if v.color % 2 == 0 and v.color >= c + 1)
        pairs.append(StreettPair(q, p))
    if not pairs:
        pairs.append(StreettPair(frozenset(), frozenset()))
    edges = tuple(StreettEdge(e.source, e.target, (e.cost,) * len(pairs))
                  for e in game.edges)
    return CostStreettGame(game.vertices, edges, tuple(pairs), game.initial)


def parse_cst(text: str) -> CostStreettGame:
    from .core import FormatError, _strip_comment

    lines = [s for s in (_strip_comment(l) for l in text.splitlines()) if s]
    if not lines:
        raise FormatError("empty .cst file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "coststreett":
        raise FormatError(f"bad header: {lines[0]!r}")
    try:
        n, initial, d = int(head[1]), int(head[2]), int(head[3])
    except ValueError as exc:
        raise FormatError(f"bad header: {lines[0]!r}") from exc
    if len(lines) != 1 + n + d:
        raise FormatError(f"expected {n} vertex and {d} pair lines")
    vertices: list[Vertex] = []
    edges: list[StreettEdge] = []
    for line in lines[1:1 + n]:
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"bad vertex line: {line!r}")
        vid, color, owner = int(parts[0]), int(parts[1]), int(parts[2])
        vertices.append(Vertex(vid, owner, color))
        for succ in parts[3].split(","):
            if ":" not in succ:
                raise FormatError(f"bad successor {succ!r}")
            t, ws = succ.split(":", 1)
            costs = tuple(int(w) for w in ws.split("|"))
            if len(costs) != d:
                raise FormatError(f"expected {d} costs in {succ!r}")
            edges.append(StreettEdge(vid, int(t), costs))
    pairs: list[StreettPair] = [None] * d  # type: ignore[list-item]
    for line in lines[1 + n:]:
        parts = line.replace("Q:", " Q: ").replace("P:", " P: ").split()
        if parts[0] != "pair":
            raise FormatError(f"bad pair line: {line!r}")
        c = int(parts[1])
        qi = parts.index("Q:")
        pi = parts.index("P:")
        q = frozenset(int(x) for x in parts[qi + 1:pi])
        p = frozenset(int(x) for x in parts[pi + 1:])
        if not 0 <= c < d or pairs[c] is not None:
            raise FormatError(f"bad pair index {c}")
        pairs[c] = StreettPair(q, p)
    game = CostStreettGame(tuple(vertices), tuple(edges), tuple(pairs), initial)
    require_valid_streett(game)
    return game


def format_cst(game: CostStreettGame) -> str:
    lines = [f"coststreett {game.n} {game.initial} {game.d}"]
    for v in sorted(game.vertices, key=lambda v: v.id):
        succs = ",".join(f"{t}:" + "|".join(map(str, cs))
                         for t, cs in game.successors[v.id])
        lines.append(f"{v.id} {v.color} {v.owner} {succs}")
    for c, p in enumerate(game.pairs):
        q = " ".join(map(str, sorted(p.requests)))
        a = " ".join(map(str, sorted(p.answers)))
        lines.append(f"pair {c} Q: {q} P: {a}")
    return "\n".join(lines) + "\n"
