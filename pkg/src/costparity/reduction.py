"""Request tracking and the quotient parity game.

The memory element is a pair (o, r): an overflow counter o ∈ [0, n] and
a request function r mapping each odd color to ⊥ (no open request) or
to the cost the oldest open request of that color has incurred so far,
capped by the active bound b.  Traversing an edge updates (o, r) in four
steps: add the edge cost to open requests, reset everything and bump o
on an excess over b, close requests answered by the target's color, and
open the target's own request.

On top of the tracking sit the domination preorder ⊑, dominating
cycles, settled prefixes, the shortcut rule for binary-cost games, and
the explicit reachable product G' whose parity winner characterizes
bounded-cost strategy existence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .core import BINARY, UNARY, BudgetExceededError, CostGame, Edge, require_valid

BOT = None  # ⊥


@dataclass(frozen=True)
class RequestFunction:
    """Map from the odd colors D to ⊥ or a natural in [0, b]."""

    colors: tuple[int, ...]
    values: tuple[int | None, ...]

    @staticmethod
    def from_mapping(mapping: Mapping[int, int | None]) -> "RequestFunction":
        colors = tuple(sorted(mapping))
        return RequestFunction(colors, tuple(mapping[c] for c in colors))

    def get(self, color: int) -> int | None:
        return self.values[self.colors.index(color)]

    def as_dict(self) -> dict[int, int | None]:
        return dict(zip(self.colors, self.values))


@dataclass(frozen=True)
class TrackState:
    overflow: int
    requests: RequestFunction


def _relevant_mask(values: Sequence[int | None]) -> int:
    """Bit i set iff color i is relevant: open and not dominated by a
    larger color with at least the same incurred cost."""
    mask = 0
    best = -1
    for i in range(len(values) - 1, -1, -1):
        x = values[i]
        if x is not None and x > best:
            mask |= 1 << i
            best = x
    return mask


def _r_dominated(values_a: Sequence[int | None], values_b: Sequence[int | None]) -> bool:
    """r_a ⊑ r_b on aligned value tuples."""
    mask_b = _relevant_mask(values_b)
    suffix_best = -1
    ok = True
    mask_a = _relevant_mask(values_a)
    for i in range(len(values_a) - 1, -1, -1):
        if mask_b >> i & 1:
            val = values_b[i]
            if val is not None and val > suffix_best:
                suffix_best = val
        if mask_a >> i & 1 and values_a[i] > suffix_best:
            ok = False
            break
    return ok


def relevant_requests(r: RequestFunction | Mapping[int, int | None]) -> frozenset[int]:
    """{c : r(c) ≠ ⊥ and no c' > c has r(c') ≥ r(c)}."""
    if not isinstance(r, RequestFunction):
        r = RequestFunction.from_mapping(r)
    mask = _relevant_mask(r.values)
    return frozenset(c for i, c in enumerate(r.colors) if mask >> i & 1)


def dominates(a: TrackState, b: TrackState) -> bool:
    """a ⊑ b: larger overflow dominates; at equal overflow every relevant
    request of a is covered by a relevant request of b that is at least
    as large in color and incurred cost."""
    if a.overflow != b.overflow:
        return a.overflow < b.overflow
    if a.requests.colors != b.requests.colors:
        raise ValueError("request functions over different color sets")
    return _r_dominated(a.requests.values, b.requests.values)


class Tracker:
    """Prepared update machinery for one (game, bound) pair."""

    def __init__(self, game: CostGame, bound: int):
        if bound < 0:
            raise ValueError("bound must be non-negative")
        self.game = game
        self.bound = bound
        self.colors = game.odd_colors
        self.index = {c: i for i, c in enumerate(self.colors)}
        self.d = len(self.colors)
        self.n = game.n
        self.color_of = game.color
        self.bot = (BOT,) * self.d

    def initial_r(self, vertex: int) -> tuple:
        c = self.color_of[vertex]
        if c % 2 == 0:
            return self.bot
        r = [BOT] * self.d
        r[self.index[c]] = 0
        return tuple(r)

    def initial_state(self) -> tuple[int, tuple]:
        return (0, self.initial_r(self.game.initial))

    def update(self, o: int, r: tuple, cost: int, target: int) -> tuple[int, tuple, bool]:
        """One memory step; returns (o', r', overflowed)."""
        b = self.bound
        if cost:
            r = tuple(x if x is None else x + cost for x in r)
        overflow = any(x is not None and x > b for x in r)
        if overflow:
            r = self.bot
            o = min(o + 1, self.n)
        tc = self.color_of[target]
        if tc % 2 == 0:
            if tc > 0 and any(x is not None for x in r):
                r = tuple(BOT if c <= tc else x for c, x in zip(self.colors, r))
        else:
            i = self.index[tc]
            if r[i] is None:
                lst = list(r)
                lst[i] = 0
                r = tuple(lst)
        return o, r, overflow


def initial_request_function(game: CostGame, vertex: int) -> RequestFunction:
    """r_v: all ⊥ for an even-colored v, else Ω(v) ↦ 0 and the rest ⊥."""
    tr = Tracker(game, 0)
    return RequestFunction(tr.colors, tr.initial_r(vertex))


def update_track_state(game: CostGame, bound: int, state: TrackState, edge: Edge) -> TrackState:
    tr = Tracker(game, bound)
    if state.requests.colors != tr.colors:
        raise ValueError("request function does not match the game's odd colors")
    o, r, _ = tr.update(state.overflow, state.requests.values, edge.cost, edge.target)
    return TrackState(o, RequestFunction(tr.colors, r))


# --- annotated prefixes, dominating cycles, settledness ---------------------

@dataclass(frozen=True)
class TrackedPrefix:
    """Play prefix annotated with memory states and transition costs.

    ``costs[i]`` is the cost charged for the step into position i
    (0 at position 0); shortcuts inflate it by their fast-forward
    amount.  ``via_shortcut[i]`` marks shortcut destinations.
    """

    vertices: tuple[int, ...]
    overflows: tuple[int, ...]
    requests: tuple[tuple, ...]
    costs: tuple[int, ...]
    via_shortcut: tuple[bool, ...]
    colors: tuple[int, ...]  # the odd-color domain D

    def __len__(self) -> int:
        return len(self.vertices)

    def state_at(self, i: int) -> TrackState:
        return TrackState(self.overflows[i], RequestFunction(self.colors, self.requests[i]))

    def extended(self, v: int, o: int, r: tuple, cost: int,
                 shortcut: bool = False) -> "TrackedPrefix":
        return TrackedPrefix(self.vertices + (v,), self.overflows + (o,),
                             self.requests + (r,), self.costs + (cost,),
                             self.via_shortcut + (shortcut,), self.colors)


def start_prefix(game: CostGame, bound: int) -> TrackedPrefix:
    tr = Tracker(game, bound)
    o, r = tr.initial_state()
    return TrackedPrefix((game.initial,), (o,), (r,), (0,), (False,), tr.colors)


def track_play(game: CostGame, bound: int, vertices: Sequence[int]) -> TrackedPrefix:
    """Annotate a concrete vertex sequence (no shortcuts applied)."""
    if list(vertices[:1]) != [game.initial]:
        raise ValueError("prefix must start at the initial vertex")
    tr = Tracker(game, bound)
    prefix = start_prefix(game, bound)
    for u, v in zip(vertices, vertices[1:]):
        w = game.edge_cost.get((u, v))
        if w is None:
            raise ValueError(f"missing edge {u}->{v}")
        o, r, _ = tr.update(prefix.overflows[-1], prefix.requests[-1], w, v)
        prefix = prefix.extended(v, o, r, w)
    return prefix


@dataclass(frozen=True)
class SettleVerdict:
    kind: str  # unsettled | saturated | even_cycle | odd_cycle | shortcut_settled
    start: int | None = None
    end: int | None = None
    parity: str | None = None  # even | odd, for shortcut_settled

    @property
    def settled(self) -> bool:
        return self.kind != "unsettled"

    @property
    def winner(self) -> int | None:
        if self.kind == "unsettled":
            return None
        if self.kind == "even_cycle" or (self.kind == "shortcut_settled" and self.parity == "even"):
            return 0
        return 1


def classify_cycle(game: CostGame, bound: int, prefix: TrackedPrefix, k: int, k2: int) -> str:
    """even/odd dominating-cycle classification of the infix k..k2, or none."""
    if not 0 <= k < k2 < len(prefix):
        raise IndexError(f"bad cycle indices {k}, {k2}")
    if prefix.vertices[k] != prefix.vertices[k2]:
        return "none"
    if prefix.overflows[k] != prefix.overflows[k2] or prefix.overflows[k] >= game.n:
        return "none"
    color = game.color
    top = max(color[prefix.vertices[i]] for i in range(k, k2 + 1))
    if top % 2 == 0:
        return "even" if _r_dominated(prefix.requests[k2], prefix.requests[k]) else "none"
    return "odd" if _r_dominated(prefix.requests[k], prefix.requests[k2]) else "none"


def settled(game: CostGame, bound: int, prefix: TrackedPrefix) -> SettleVerdict:
    """Minimal verdict of a prefix: saturated overflow, or the first
    dominating cycle found scanning ends (and, per end, starts) upward."""
    n = game.n
    color = game.color
    buckets: dict[tuple[int, int], list[int]] = {}
    for k2 in range(len(prefix)):
        if prefix.overflows[k2] == n:
            return SettleVerdict("saturated", end=k2)
        key = (prefix.vertices[k2], prefix.overflows[k2])
        for k in buckets.get(key, ()):
            kind = classify_cycle(game, bound, prefix, k, k2)
            if kind != "none":
                if prefix.via_shortcut[k2]:
                    return SettleVerdict("shortcut_settled", k, k2, parity=kind)
                return SettleVerdict(f"{kind}_cycle", k, k2, parity=kind)
        buckets.setdefault(key, []).append(k2)
    return SettleVerdict("unsettled")


def settled_bound(game: CostGame) -> int:
    """ℓ = (n+1)^6 for unary games; (⌈log₂(nW)⌉+1)·(n+1)^6 for binary."""
    base = (game.n + 1) ** 6
    if game.encoding == UNARY:
        return base
    nw = max(1, game.n * game.max_cost)
    return (math.ceil(math.log2(nw)) + 1) * base


def shortcut_step(game: CostGame, bound: int, prefix: TrackedPrefix,
                  edge: Edge) -> TrackedPrefix:
    """Extend a prefix by one move, fast-forwarding a shortcut cycle when
    the criterion mandates it.

    The criterion holds for the infix from j' to the new position if the
    arena vertex and overflow repeat, the relevant requests are stable
    and non-empty throughout, the infix has positive cost, and another
    full traversal would still not overflow; the maximal such j' is
    taken.  The fast-forward adds s·t to every open request, where s is
    the infix cost and t is maximal with r'(c*) + s·t ≤ b.
    """
    if game.encoding != BINARY:
        raise ValueError("shortcut_step is only meaningful for binary-encoded games")
    if edge.source != prefix.vertices[-1]:
        raise ValueError("edge does not extend the prefix")
    tr = Tracker(game, bound)
    o2, r2, _ = tr.update(prefix.overflows[-1], prefix.requests[-1], edge.cost, edge.target)
    new_mask = _relevant_mask(r2)
    L = len(prefix)
    best = None
    if new_mask:
        cost_after = 0  # Cst of the infix from j' through the new position
        stable = True
        for j in range(L - 1, -1, -1):
            cost_after += prefix.costs[j + 1] if j + 1 < L else edge.cost
            if _relevant_mask(prefix.requests[j]) != new_mask:
                stable = False
            if not stable:
                break
            if prefix.vertices[j] != edge.target or prefix.overflows[j] != o2:
                continue
            cstar = max(x for x in r2 if x is not None)
            if cost_after > 0 and cstar + cost_after <= bound:
                best = (j, cost_after, cstar)
                break  # maximal j' by scanning downward from the end
    if best is None:
        return prefix.extended(edge.target, o2, r2, edge.cost)
    _, s, cstar = best
    t = (bound - cstar) // s
    rstar = tuple(x if x is None else x + s * t for x in r2)
    return prefix.extended(edge.target, o2, rstar, edge.cost + s * t, shortcut=True)


# --- the quotient game G' ---------------------------------------------------

@dataclass(frozen=True)
class QuotientGame:
    """Explicit reachable product of the arena with the tracking memory.

    A parity game: state i is (vertex, overflow, request tuple), with
    the arena owner, color Ω(v) for o < n and color 1 once saturated.
    """

    game: CostGame
    bound: int
    states: tuple[tuple[int, int, tuple], ...]
    owners: tuple[int, ...]
    parities: tuple[int, ...]
    succ: tuple[tuple[int, ...], ...]
    initial: int = 0

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def size_bound(self) -> int:
        g = self.game
        return g.n * (g.n + 1) * (self.bound + 2) ** g.d

    def to_cost_game(self) -> CostGame:
        """Parity subset of .cpg: all edge costs 0, states named in comments."""
        from .core import make_game

        verts = [(i, self.owners[i], self.parities[i]) for i in range(self.size)]
        edges = [(i, j, 0) for i in range(self.size) for j in self.succ[i]]
        return make_game(verts, edges, self.initial, UNARY)

    def state_comments(self) -> dict[int, str]:
        return {i: f"({v},{o},{r})" for i, (v, o, r) in enumerate(self.states)}


def build_quotient_game(game: CostGame, bound: int,
                        budget: int = 5_000_000) -> QuotientGame:
    """Breadth-first reachable product from (v_I, 0, r_{v_I})."""
    require_valid(game)
    tr = Tracker(game, bound)
    succ = game.successors
    owner = game.owner
    color = game.color
    n = game.n
    o0, r0 = tr.initial_state()
    index: dict[tuple[int, int, tuple], int] = {(game.initial, o0, r0): 0}
    order: list[tuple[int, int, tuple]] = [(game.initial, o0, r0)]
    succ_out: list[tuple[int, ...]] = []
    head = 0
    while head < len(order):
        v, o, r = order[head]
        head += 1
        row = []
        for t, w in succ[v]:
            o2, r2, _ = tr.update(o, r, w, t)
            key = (t, o2, r2)
            j = index.get(key)
            if j is None:
                j = len(order)
                if j >= budget:
                    raise BudgetExceededError(
                        f"quotient product exceeds budget {budget} states")
                index[key] = j
                order.append(key)
            row.append(j)
        succ_out.append(tuple(row))
    owners = tuple(owner[v] for v, _, _ in order)
    parities = tuple(color[v] if o < n else 1 for v, o, _ in order)
    qg = QuotientGame(game, bound, tuple(order), owners, parities, tuple(succ_out))
    assert qg.size <= qg.size_bound
    return qg
