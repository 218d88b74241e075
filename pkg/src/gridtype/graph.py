"""Grid keyboard graph: nodes, cursor actions, distances and intent policies.

The keyboard is a rows x cols grid of labelled keys.  With ``wrap=True``
(the default) opposite edges are glued, so every key has exactly four
move-neighbours and the cursor never hits a wall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

BACKSPACE = "⌫"  # erase-left symbol, the label of the backspace key
SPACE = " "

# 26 letters + 7 punctuation marks + space + backspace = 35 keys, row-major 5x7.
DEFAULT_LABELS = "abcdefghijklmnopqrstuvwxyz.,?'!-: " + BACKSPACE

SELECT_COMMAND = "select-command"
PSC = "psc"
MODES = (SELECT_COMMAND, PSC)


class Action(IntEnum):
    """Immediate cursor commands. SELECT is only admissible in select-command mode."""

    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3
    SELECT = 4


MOVE_ACTIONS = (Action.UP, Action.DOWN, Action.LEFT, Action.RIGHT)

_DELTAS = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1),
}


def admissible_actions(mode: str) -> tuple[Action, ...]:
    if mode == SELECT_COMMAND:
        return MOVE_ACTIONS + (Action.SELECT,)
    if mode == PSC:
        return MOVE_ACTIONS
    raise ValueError(f"unknown mode {mode!r}")


def n_action_classes(mode: str) -> int:
    return len(admissible_actions(mode))


@dataclass
class NavGraph:
    """Immutable keyboard graph. Build through :func:`build_grid_graph`."""

    rows: int
    cols: int
    labels: tuple[str, ...]
    wrap: bool = True
    _label_index: dict[str, int] = field(repr=False, compare=False, default_factory=dict)
    _policy_cache: dict[tuple[int, str], np.ndarray] = field(
        repr=False, compare=False, default_factory=dict
    )

    @property
    def n_nodes(self) -> int:
        return self.rows * self.cols

    def node_index(self, row: int, col: int) -> int:
        return row * self.cols + col

    def node_rc(self, node: int) -> tuple[int, int]:
        return divmod(node, self.cols)

    def label_of(self, node: int) -> str:
        return self.labels[node]

    def node_of_label(self, label: str) -> int:
        try:
            return self._label_index[label]
        except KeyError:
            raise KeyError(f"label {label!r} is not on the keyboard") from None

    def _check_node(self, node: int) -> None:
        if not 0 <= node < self.n_nodes:
            raise IndexError(f"node {node} outside 0..{self.n_nodes - 1}")

    def neighbors(self, node: int) -> list[int]:
        """Distinct nodes reachable with one move action."""
        out = []
        for a in MOVE_ACTIONS:
            nxt = apply_action(self, node, a)
            if nxt != node and nxt not in out:
                out.append(nxt)
        return out


def build_grid_graph(
    rows: int, cols: int, labels, wrap: bool = True
) -> NavGraph:
    """Build a rows x cols keyboard graph.

    ``labels`` is a string or sequence of single-character key labels, one per
    node in row-major order.  Requires rows, cols >= 3 so every node has four
    distinct move-neighbours on the torus.
    """
    labels = tuple(labels)
    if rows < 3 or cols < 3:
        raise ValueError(f"grid must be at least 3x3, got {rows}x{cols}")
    if len(labels) != rows * cols:
        raise ValueError(f"expected {rows * cols} labels, got {len(labels)}")
    if len(set(labels)) != len(labels):
        raise ValueError("labels must be unique")
    g = NavGraph(rows=rows, cols=cols, labels=labels, wrap=wrap)
    g._label_index.update({lab: i for i, lab in enumerate(labels)})
    return g


def apply_action(g: NavGraph, cursor: int, action: Action) -> int:
    """Next cursor position. SELECT leaves the cursor in place; on a
    non-wrapping grid a move off the edge also stays put."""
    g._check_node(cursor)
    action = Action(action)
    if action == Action.SELECT:
        return cursor
    r, c = g.node_rc(cursor)
    dr, dc = _DELTAS[action]
    if g.wrap:
        return g.node_index((r + dr) % g.rows, (c + dc) % g.cols)
    nr, nc = r + dr, c + dc
    if 0 <= nr < g.rows and 0 <= nc < g.cols:
        return g.node_index(nr, nc)
    return cursor


def action_distance(g: NavGraph, a: int, b: int) -> int:
    """Minimum number of move actions from node a to node b."""
    g._check_node(a)
    g._check_node(b)
    ra, ca = g.node_rc(a)
    rb, cb = g.node_rc(b)
    dr = abs(ra - rb)
    dc = abs(ca - cb)
    if g.wrap:
        dr = min(dr, g.rows - dr)
        dc = min(dc, g.cols - dc)
    return dr + dc


def optimal_actions(g: NavGraph, cursor: int, target: int) -> tuple[Action, ...]:
    """Move actions that strictly minimise the remaining distance to target."""
    dists = {a: action_distance(g, apply_action(g, cursor, a), target) for a in MOVE_ACTIONS}
    best = min(dists.values())
    return tuple(a for a in MOVE_ACTIONS if dists[a] == best)


def intent_policy(g: NavGraph, cursor: int, target: int, mode: str) -> dict[Action, float]:
    """Distribution over the actions a user aiming at ``target`` would take.

    Away from the target the user moves along a shortest path, choosing
    uniformly when several moves tie.  On the target the user issues SELECT
    in select-command mode; under the posterior-ratio criterion there is no
    select action, so the modelled intent is a uniform move in place.
    """
    g._check_node(cursor)
    g._check_node(target)
    actions = admissible_actions(mode)
    if cursor == target:
        if mode == SELECT_COMMAND:
            return {Action.SELECT: 1.0}
        return {a: 0.25 for a in MOVE_ACTIONS}
    best = optimal_actions(g, cursor, target)
    p = 1.0 / len(best)
    return {a: p for a in actions if a in best}


def policy_matrix(g: NavGraph, cursor: int, mode: str) -> np.ndarray:
    """P(action | intended node) for every node, as an (n_actions, n_nodes) array.

    Row order follows :class:`Action`; column j is the intent policy of a user
    whose true target is node j.  Cached per (cursor, mode) -- the graph is
    immutable so entries never go stale.
    """
    key = (cursor, mode)
    cached = g._policy_cache.get(key)
    if cached is not None:
        return cached
    actions = admissible_actions(mode)
    mat = np.zeros((len(actions), g.n_nodes))
    for t in range(g.n_nodes):
        for a, p in intent_policy(g, cursor, t, mode).items():
            mat[a, t] = p
    mat.setflags(write=False)
    g._policy_cache[key] = mat
    return mat
