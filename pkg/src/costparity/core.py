"""Arenas, cost games and finite-state strategies.

A cost game is a finite directed game graph whose vertices are split
between Player 0 (circles) and Player 1 (boxes), colored by naturals,
with a natural-number cost on every edge.  Every vertex must have at
least one successor so that all plays are infinite.

All values here are immutable after construction; operations are pure
functions and safe to call concurrently on shared games.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping

UNARY = "unary"
BINARY = "binary"


class FormatError(ValueError):
    """Raised on malformed .cpg/.cst/.strat/QDIMACS input."""


class BudgetExceededError(RuntimeError):
    """Raised when a construction would exceed its vertex budget."""


@dataclass(frozen=True)
class Vertex:
    id: int
    owner: int
    color: int


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    cost: int


@dataclass(frozen=True)
class CostGame:
    """Arena with coloring Ω (on vertices) and cost function (on edges).

    ``encoding`` selects the solver regime: ``unary`` games carry only
    abstract costs 0/1 (ε and increment edges) and admit the bound cap
    b ≤ n; ``binary`` games carry arbitrary naturals and cap at n·W.
    """

    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    initial: int
    encoding: str = UNARY

    @cached_property
    def n(self) -> int:
        return len(self.vertices)

    @cached_property
    def vertex_by_id(self) -> dict[int, Vertex]:
        return {v.id: v for v in self.vertices}

    @cached_property
    def color(self) -> dict[int, int]:
        return {v.id: v.color for v in self.vertices}

    @cached_property
    def owner(self) -> dict[int, int]:
        return {v.id: v.owner for v in self.vertices}

    @cached_property
    def successors(self) -> dict[int, tuple[tuple[int, int], ...]]:
        """id → ((target, cost), ...), targets in ascending order."""
        out: dict[int, list[tuple[int, int]]] = {v.id: [] for v in self.vertices}
        for e in self.edges:
            if e.source in out:
                out[e.source].append((e.target, e.cost))
        return {u: tuple(sorted(ts)) for u, ts in out.items()}

    @cached_property
    def edge_cost(self) -> dict[tuple[int, int], int]:
        return {(e.source, e.target): e.cost for e in self.edges}

    @cached_property
    def odd_colors(self) -> tuple[int, ...]:
        """D, the odd colors in use, ascending."""
        return tuple(sorted({v.color for v in self.vertices if v.color % 2 == 1}))

    @property
    def d(self) -> int:
        return len(self.odd_colors)

    @cached_property
    def max_cost(self) -> int:
        """W, the largest edge cost."""
        return max((e.cost for e in self.edges), default=0)

    @cached_property
    def max_color(self) -> int:
        return max(v.color for v in self.vertices)


@dataclass(frozen=True)
class StrategySpec:
    """Finite-state (Mealy) strategy for one player.

    Memory states are the integers 0..len(states)−1 (``states`` exists so
    builders can keep descriptive labels).  ``update`` is total on
    M × E with edges keyed (source, cost, target); ``next_move`` maps
    every (owned vertex, state) pair to a successor vertex.
    """

    player: int
    states: tuple
    initial: int
    update: Mapping[tuple[int, tuple[int, int, int]], int]
    next_move: Mapping[tuple[int, int], int]

    @property
    def size(self) -> int:
        return len(self.states)

    def advance(self, state: int, edge: tuple[int, int, int]) -> int:
        return self.update[(state, edge)]


def make_game(vertices: Iterable[tuple[int, int, int]],
              edges: Iterable[tuple[int, int, int]],
              initial: int,
              encoding: str = UNARY) -> CostGame:
    """Build a CostGame from (id, owner, color) and (source, target, cost) triples."""
    return CostGame(
        vertices=tuple(Vertex(i, o, c) for i, o, c in vertices),
        edges=tuple(Edge(s, t, w) for s, t, w in edges),
        initial=initial,
        encoding=encoding,
    )


def validate_game(game: CostGame) -> list[str]:
    """Check all structural invariants; returns a list of violations (empty = valid)."""
    report: list[str] = []
    ids = [v.id for v in game.vertices]
    seen: set[int] = set()
    for i in ids:
        if i in seen:
            report.append(f"vertex {i}: duplicate id")
        seen.add(i)
    if game.encoding not in (UNARY, BINARY):
        report.append(f"game: unknown encoding {game.encoding!r}")
    if not game.vertices:
        report.append("game: no vertices")
        return report
    if game.initial not in seen:
        report.append(f"game: initial vertex {game.initial} does not exist")
    for v in game.vertices:
        if v.owner not in (0, 1):
            report.append(f"vertex {v.id}: owner must be 0 or 1, got {v.owner}")
        if v.color < 0:
            report.append(f"vertex {v.id}: negative color {v.color}")
    out_count = {i: 0 for i in seen}
    seen_pairs: set[tuple[int, int]] = set()
    for e in game.edges:
        if e.source not in seen:
            report.append(f"edge {e.source}->{e.target}: unknown source")
            continue
        if e.target not in seen:
            report.append(f"edge {e.source}->{e.target}: unknown target")
            continue
        if (e.source, e.target) in seen_pairs:
            report.append(f"edge {e.source}->{e.target}: parallel edge")
        seen_pairs.add((e.source, e.target))
        if e.cost < 0:
            report.append(f"edge {e.source}->{e.target}: negative cost {e.cost}")
        if game.encoding == UNARY and e.cost > 1:
            report.append(
                f"edge {e.source}->{e.target}: non-abstract cost {e.cost} in unary game")
        out_count[e.source] += 1
    for i, k in sorted(out_count.items()):
        if k == 0:
            report.append(f"vertex {i}: terminal vertex (no outgoing edge)")
    return report


def require_valid(game: CostGame) -> None:
    report = validate_game(game)
    if report:
        raise ValueError("invalid game: " + "; ".join(report))


def subdivide_costs(game: CostGame, vertex_budget: int = 1_000_000) -> CostGame:
    """Replace every cost-w edge (w ≥ 2) by a path of w increment edges.

    The w−1 fresh vertices get color 0 and the source's owner (no player
    gains choices on a forced path).  The result carries the ``unary``
    encoding flag.
    """
    require_valid(game)
    extra = sum(e.cost - 1 for e in game.edges if e.cost >= 2)
    if game.n + extra > vertex_budget:
        raise BudgetExceededError(
            f"subdivision blow-up: needs {game.n + extra} vertices, budget {vertex_budget}")
    vertices = list(game.vertices)
    edges: list[Edge] = []
    next_id = max(v.id for v in game.vertices) + 1
    for e in sorted(game.edges, key=lambda e: (e.source, e.target)):
        if e.cost < 2:
            edges.append(e)
            continue
        owner = game.owner[e.source]
        chain = [e.source]
        for _ in range(e.cost - 1):
            vertices.append(Vertex(next_id, owner, 0))
            chain.append(next_id)
            next_id += 1
        chain.append(e.target)
        for a, b in zip(chain, chain[1:]):
            edges.append(Edge(a, b, 1))
    return CostGame(tuple(vertices), tuple(edges), game.initial, UNARY)


def export_dot(game: CostGame) -> str:
    """Deterministic DOT rendering; circles for Player 0, boxes for Player 1."""
    lines = ["digraph costgame {"]
    for v in sorted(game.vertices, key=lambda v: v.id):
        shape = "circle" if v.owner == 0 else "box"
        peri = ", peripheries=2" if v.id == game.initial else ""
        lines.append(f'  v{v.id} [shape={shape}, label="{v.id}:{v.color}"{peri}];')
    for e in sorted(game.edges, key=lambda e: (e.source, e.target)):
        lines.append(f'  v{e.source} -> v{e.target} [label="{e.cost}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# --- .cpg text format ------------------------------------------------------
#
# line 1:  costparity <n> <initial-id> <encoding>
# then n lines:  <id> <color> <owner> <succ:cost>[,<succ:cost>...] [# comment]

def _strip_comment(line: str) -> str:
    return line.split("#", 1)[0].strip()


def parse_cpg(text: str) -> CostGame:
    lines = [s for s in (_strip_comment(l) for l in text.splitlines()) if s]
    if not lines:
        raise FormatError("empty .cpg file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "costparity":
        raise FormatError(f"bad header: {lines[0]!r}")
    try:
        n, initial = int(head[1]), int(head[2])
    except ValueError as exc:
        raise FormatError(f"bad header numbers: {lines[0]!r}") from exc
    encoding = head[3]
    if encoding not in (UNARY, BINARY):
        raise FormatError(f"unknown encoding {encoding!r}")
    if len(lines) - 1 != n:
        raise FormatError(f"expected {n} vertex lines, found {len(lines) - 1}")
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"bad vertex line: {line!r}")
        try:
            vid, color, owner = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError as exc:
            raise FormatError(f"bad vertex line: {line!r}") from exc
        vertices.append(Vertex(vid, owner, color))
        for succ in parts[3].split(","):
            if ":" not in succ:
                raise FormatError(f"bad successor {succ!r} in line: {line!r}")
            t, w = succ.split(":", 1)
            try:
                edges.append(Edge(vid, int(t), int(w)))
            except ValueError as exc:
                raise FormatError(f"bad successor {succ!r} in line: {line!r}") from exc
    game = CostGame(tuple(vertices), tuple(edges), initial, encoding)
    require_valid(game)
    return game


def format_cpg(game: CostGame, comments: Mapping[int, str] | None = None) -> str:
    lines = [f"costparity {game.n} {game.initial} {game.encoding}"]
    for v in sorted(game.vertices, key=lambda v: v.id):
        succs = ",".join(f"{t}:{w}" for t, w in game.successors[v.id])
        line = f"{v.id} {v.color} {v.owner} {succs}"
        if comments and v.id in comments:
            line += f"  # {comments[v.id]}"
        lines.append(line)
    return "\n".join(lines) + "\n"


# --- .strat text format ----------------------------------------------------
#
# header:  strategy <player> <num-states> <initial-state>
# update:  u <state> <source-id> <cost> <target-id> <next-state>
# moves:   n <vertex-id> <state> <target-id>

def format_strat(strat: StrategySpec) -> str:
    lines = [f"strategy {strat.player} {strat.size} {strat.initial}"]
    for (m, (s, w, t)), m2 in sorted(strat.update.items()):
        lines.append(f"u {m} {s} {w} {t} {m2}")
    for (v, m), t in sorted(strat.next_move.items()):
        lines.append(f"n {v} {m} {t}")
    return "\n".join(lines) + "\n"


def parse_strat(text: str) -> StrategySpec:
    lines = [s for s in (_strip_comment(l) for l in text.splitlines()) if s]
    if not lines:
        raise FormatError("empty .strat file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "strategy":
        raise FormatError(f"bad header: {lines[0]!r}")
    try:
        player, nstates, initial = int(head[1]), int(head[2]), int(head[3])
    except ValueError as exc:
        raise FormatError(f"bad header: {lines[0]!r}") from exc
    update: dict[tuple[int, tuple[int, int, int]], int] = {}
    next_move: dict[tuple[int, int], int] = {}
    for line in lines[1:]:
        parts = line.split()
        try:
            if parts[0] == "u" and len(parts) == 6:
                m, s, w, t, m2 = map(int, parts[1:])
                update[(m, (s, w, t))] = m2
            elif parts[0] == "n" and len(parts) == 4:
                v, m, t = map(int, parts[1:])
                next_move[(v, m)] = t
            else:
                raise FormatError(f"bad line: {line!r}")
        except ValueError as exc:
            raise FormatError(f"bad line: {line!r}") from exc
    return StrategySpec(player, tuple(range(nstates)), initial, update, next_move)


def validate_strategy(game: CostGame, strat: StrategySpec) -> list[str]:
    """Well-formedness of a strategy against a game: totality and move legality."""
    report: list[str] = []
    if strat.player not in (0, 1):
        report.append(f"player must be 0 or 1, got {strat.player}")
    nstates = strat.size
    if not (0 <= strat.initial < nstates):
        report.append(f"initial state {strat.initial} out of range")
    edges = [(e.source, e.cost, e.target) for e in game.edges]
    for m in range(nstates):
        for ek in edges:
            m2 = strat.update.get((m, ek))
            if m2 is None:
                report.append(f"update missing for state {m}, edge {ek}")
            elif not (0 <= m2 < nstates):
                report.append(f"update ({m}, {ek}) leaves the state space")
    succ_sets = {u: {t for t, _ in ts} for u, ts in game.successors.items()}
    for v in game.vertices:
        if v.owner != strat.player:
            continue
        for m in range(nstates):
            t = strat.next_move.get((v.id, m))
            if t is None:
                report.append(f"next_move missing for vertex {v.id}, state {m}")
            elif t not in succ_sets[v.id]:
                report.append(f"next_move({v.id}, {m}) = {t} is not a successor")
    return report


def strategy_from_functions(game: CostGame, player: int, initial_label,
                            update_fn, next_move_fn) -> StrategySpec:
    """Tabulate a strategy given by callables into an explicit StrategySpec.

    Memory states are discovered by closure under ``update_fn`` over all
    edges of the arena, starting from ``initial_label``; they are numbered
    in discovery order, which makes the result deterministic.
    """
    edges = [(e.source, e.cost, e.target) for e in game.edges]
    index: dict = {initial_label: 0}
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
    next_move: dict[tuple[int, int], int] = {}
    for v in game.vertices:
        if v.owner != player:
            continue
        for label in labels:
            next_move[(v.id, index[label])] = next_move_fn(v.id, label)
    return StrategySpec(player, tuple(labels), 0, update, next_move)


class _DeadMemory:
    """Absorbing memory state for vertex-inconsistent update queries."""

    def __repr__(self):
        return "<dead-memory>"


DEAD_MEMORY = _DeadMemory()


def strategy_from_product(game: CostGame, player: int, initial_label,
                          update_fn, next_move_fn) -> StrategySpec:
    """Tabulate a strategy, restricting memory to product-reachable states.

    Memory values are collected along the reachable (vertex, memory)
    product only — update sequences that no play can realize do not
    enlarge the state space.  Totality over M × E is preserved by
    routing any update that leaves the collected set into an absorbing
    dead state, which no consistent play ever reaches.
    """
    succ = game.successors
    index: dict = {initial_label: 0}
    labels = [initial_label]
    seen = {(game.initial, initial_label)}
    stack = [(game.initial, initial_label)]
    while stack:
        v, m = stack.pop()
        for t, w in succ[v]:
            m2 = update_fn(m, (v, w, t))
            if m2 not in index:
                index[m2] = len(labels)
                labels.append(m2)
            if (t, m2) not in seen:
                seen.add((t, m2))
                stack.append((t, m2))
    edges = [(e.source, e.cost, e.target) for e in game.edges]
    update: dict[tuple[int, tuple[int, int, int]], int] = {}
    pending = {}
    for m in labels:
        for ek in edges:
            m2 = update_fn(m, ek)
            pending[(index[m], ek)] = index.get(m2)
    if any(j is None for j in pending.values()):
        index[DEAD_MEMORY] = len(labels)
        labels.append(DEAD_MEMORY)
        dead = index[DEAD_MEMORY]
        for ek in edges:
            pending[(dead, ek)] = dead
        update = {k: (dead if j is None else j) for k, j in pending.items()}
    else:
        update = pending
    next_move: dict[tuple[int, int], int] = {}
    for v in game.vertices:
        if v.owner != player:
            continue
        for m in labels:
            if m is DEAD_MEMORY:
                next_move[(v.id, index[m])] = game.successors[v.id][0][0]
            else:
                next_move[(v.id, index[m])] = next_move_fn(v.id, m)
    return StrategySpec(player, tuple(labels), 0, update, next_move)
