"""Cylinder trees and the exact minimum-weight antichain cover.

Nodes of a :class:`CylinderTree` are stored level by level.  Words whose
futures and weights coincide (same automaton state, same depth) may be
lumped into one *class*; the tree is then a DAG whose paths are the words.
All DP arithmetic is done on log weights, with ``+inf`` marking a node that
may not be used as a cover element.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import Infeasible, InvalidDepth
from .symbolic import ShiftSystem, Word
from .targets import TargetAutomaton, TargetSet

INF = math.inf


@dataclass
class Level:
    """One depth of the tree.

    ``words`` holds one representative word per class.  ``parent``,
    ``child`` and ``symbol`` describe the edges to the next level, sorted by
    parent; ``starts`` are the segment offsets of each parent's edges.
    """

    words: np.ndarray
    mult: np.ndarray
    in_target: np.ndarray
    parent: np.ndarray | None = None
    child: np.ndarray | None = None
    symbol: np.ndarray | None = None
    starts: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.mult)


class CylinderTree:
    """Rooted tree of cylinders down to a fixed depth.

    Attributes
    ----------
    k : int
        Alphabet size.
    depth : int
        Depth ``D`` of the leaves.
    levels : list of Level
        ``levels[d]`` holds the (lumped) nodes at depth ``d``.  Empty when
        the target has no words of length ``D``.
    log_weights : list of ndarray or None
        Per-level log weights, set by the caller before running the DP.
    """

    def __init__(self, k: int, depth: int, levels: list[Level]):
        self.k = k
        self.depth = depth
        self.levels = levels
        self.log_weights: list[np.ndarray] | None = None

    @property
    def empty(self) -> bool:
        return not self.levels or self.levels[0].size == 0

    @property
    def n_classes(self) -> int:
        return sum(lv.size for lv in self.levels)

    @property
    def n_leaves(self) -> int:
        return 0 if self.empty else int(round(self.levels[-1].mult.sum()))

    def set_weights(self, fn: Callable[[int, Level], np.ndarray]) -> "CylinderTree":
        """Fill ``log_weights`` by calling ``fn(depth, level)`` per level."""
        self.log_weights = [np.asarray(fn(d, lv), dtype=float) for d, lv in enumerate(self.levels)]
        return self

    @classmethod
    def explicit(cls, k: int, depth: int, weights: Callable[[Word], float] | Mapping[Word, float]) -> "CylinderTree":
        """Full ``k``-ary tree with one node per word and linear weights.

        ``weights`` maps a word to a weight ``>= 0`` (``inf`` forbids the
        node).  Mostly for tests and the exhaustive oracle.
        """
        if depth < 0:
            raise InvalidDepth("tree depth must be >= 0")
        get = weights.__getitem__ if isinstance(weights, Mapping) else weights
        levels = []
        logw = []
        for d in range(depth + 1):
            words = np.array(list(itertools.product(range(1, k + 1), repeat=d)), dtype=np.int16).reshape(k**d, d)
            lv = Level(words, np.ones(k**d), np.ones(k**d, dtype=bool))
            if d < depth:
                n = k**d
                lv.parent = np.repeat(np.arange(n), k)
                lv.child = np.arange(n * k)
                lv.symbol = np.tile(np.arange(1, k + 1), n)
                lv.starts = np.arange(0, n * k, k)
            levels.append(lv)
            with np.errstate(divide="ignore"):
                logw.append(np.log(np.array([float(get(tuple(int(s) for s in w))) for w in words])))
        tree = cls(k, depth, levels)
        tree.log_weights = logw
        return tree


def build_tree(
    sys: ShiftSystem,
    Z: TargetSet,
    depth: int,
    *,
    lump: bool = True,
    track_counts: bool = False,
    bowen_log_delta: float | None = None,
    log_tol: float = 1e-12,
) -> CylinderTree:
    """Build the cylinder tree of ``Z`` down to ``depth``.

    Parameters
    ----------
    lump : bool
        Merge words that reach the same automaton state.  Only valid when
        every weight the caller will assign is a function of that state and
        the depth.
    track_counts : bool
        Include symbol counts in the automaton state (needed to lump
        product-type metrics).
    bowen_log_delta : float, optional
        When given, record for each node the range of Bowen-ball orders
        ``n`` for which the ball around any of its points is exactly that
        cylinder (``extra['order_lo']``, ``extra['order_hi']``; ``-1`` if
        none).
    """
    if depth < 1:
        raise InvalidDepth(f"tree depth must be >= 1, got {depth}")
    auto = TargetAutomaton(sys, Z, track_counts)
    psi = sys.psi
    reps: list[Word] = [()]
    states = [auto.initial]
    mult = [1]
    opens: list[tuple[int, ...]] = [(0,)]
    raw = []
    for d in range(depth):
        index: dict = {}
        n_reps: list[Word] = []
        n_states, n_mult, n_opens = [], [], []
        n_lo, n_hi = [], []
        par, chi, sym = [], [], []
        for i, (w, st) in enumerate(zip(reps, states)):
            for j in sys.successors(w[-1] if w else None):
                st2 = auto.step(st, j)
                if st2 is None:
                    continue
                key = st2 if lump else w + (j,)
                ci = index.get(key)
                if ci is None:
                    ci = len(n_reps)
                    index[key] = ci
                    c = w + (j,)
                    n_reps.append(c)
                    n_states.append(st2)
                    n_mult.append(0)
                    if bowen_log_delta is not None:
                        # scans that are still open at depth d+1
                        still = tuple(
                            k for k in opens[i] if psi.log_weight(c[k:]) >= bowen_log_delta - log_tol
                        ) + (d + 1,)
                        closed = [k for k in opens[i] if k not in still]
                        lo = min(closed) if closed else -1
                        hi = still[0] - 1
                        if lo < 0 or lo > hi:
                            lo = hi = -1
                        n_opens.append(still)
                        n_lo.append(lo)
                        n_hi.append(hi)
                n_mult[ci] += mult[i]
                par.append(i)
                chi.append(ci)
                sym.append(j)
        # the order ranges describe the next level's classes
        raw.append((reps, states, mult, par, chi, sym, (n_lo, n_hi)))
        reps, states, mult, opens = n_reps, n_states, n_mult, n_opens
    raw.append((reps, states, mult, None, None, None, None))
    return _assemble(sys, auto, depth, raw, bowen_log_delta is not None)


def _assemble(sys, auto, depth, raw, with_orders) -> CylinderTree:
    # alive[d][i]: class i at depth d has a leaf of Z below it
    leaf_states = raw[depth][1]
    alive = [None] * (depth + 1)
    alive[depth] = np.array([auto.in_target(s, depth) for s in leaf_states], dtype=bool)
    for d in range(depth - 1, -1, -1):
        _, st, _, par, chi, _, _ = raw[d]
        a = np.zeros(len(st), dtype=bool)
        if par:
            par_a, chi_a = np.asarray(par), np.asarray(chi)
            a[par_a[alive[d + 1][chi_a]]] = True
        alive[d] = a
    if not alive[0].any():
        return CylinderTree(sys.k, depth, [])
    remap = []
    for d in range(depth + 1):
        m = np.full(len(alive[d]), -1)
        m[alive[d]] = np.arange(int(alive[d].sum()))
        remap.append(m)
    levels = []
    for d in range(depth + 1):
        reps, st, mult, par, chi, sym, _ = raw[d]
        keep = np.flatnonzero(alive[d])
        words = np.array([reps[i] for i in keep], dtype=np.int16).reshape(len(keep), d)
        lv = Level(
            words,
            np.array([float(mult[i]) for i in keep]),
            np.array([auto.in_target(st[i], d) for i in keep], dtype=bool),
        )
        if d < depth:
            par_a, chi_a, sym_a = np.asarray(par), np.asarray(chi), np.asarray(sym)
            ok = alive[d][par_a] & alive[d + 1][chi_a]
            p, c, s = remap[d][par_a[ok]], remap[d + 1][chi_a[ok]], sym_a[ok]
            order = np.argsort(p, kind="stable")
            lv.parent, lv.child, lv.symbol = p[order], c[order], s[order]
            lv.starts = np.flatnonzero(np.r_[True, np.diff(lv.parent) != 0])
        if d > 0 and raw[d - 1][6] is not None and with_orders:
            lo, hi = raw[d - 1][6]
            lv.extra["order_lo"] = np.asarray(lo, dtype=np.int64)[keep]
            lv.extra["order_hi"] = np.asarray(hi, dtype=np.int64)[keep]
        levels.append(lv)
    # multiplicities along surviving paths only
    levels[0].mult = np.ones(1)
    for d in range(depth):
        lv = levels[d]
        m = np.zeros(levels[d + 1].size)
        np.add.at(m, lv.child, lv.mult[lv.parent])
        levels[d + 1].mult = m
    return CylinderTree(sys.k, depth, levels)


@dataclass
class CoverSolution:
    log_cost: float
    witness: tuple[Word, ...] | None
    witness_size: int

    @property
    def cost(self) -> float:
        return math.exp(self.log_cost) if self.log_cost < 710 else INF


def _segment_logsumexp(vals: np.ndarray, seg_of: np.ndarray, starts: np.ndarray) -> np.ndarray:
    m = np.maximum.reduceat(vals, starts)
    shift = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = np.log(np.add.reduceat(np.exp(vals - shift[seg_of]), starts)) + shift
    out[m == INF] = INF
    out[m == -INF] = -INF
    return out


def optimal_cover_dp(
    tree: CylinderTree,
    min_depth: int | None = None,
    max_diam_depth: int | None = None,
    witness_limit: int = 100_000,
) -> CoverSolution:
    """Minimum total weight of an antichain covering every leaf.

    ``cost(w) = min(weight(w), sum of children costs)``; ties keep ``w``.
    Nodes shallower than ``min_depth`` or than ``max_diam_depth`` (the
    depth below which every cylinder is small enough) are not eligible.

    Raises
    ------
    Infeasible
        If some leaf lies under no eligible node.
    """
    if tree.empty:
        return CoverSolution(-INF, (), 0)
    if tree.log_weights is None:
        raise ValueError("tree has no weights")
    floor = max(min_depth or 0, max_diam_depth or 0)
    D = tree.depth
    chosen: list[np.ndarray] = [None] * (D + 1)
    cost_next = None
    for d in range(D, -1, -1):
        own = np.array(tree.log_weights[d], dtype=float)
        own[np.isnan(own)] = INF
        if d < floor:
            own[:] = INF
        if d == D:
            cost = own
            chosen[d] = np.isfinite(own)
        else:
            lv = tree.levels[d]
            sub = _segment_logsumexp(cost_next[lv.child], lv.parent, lv.starts)
            chosen[d] = (own <= sub) & np.isfinite(own)
            cost = np.where(chosen[d], own, sub)
        cost_next = cost
    root = float(cost_next[0])
    if root == INF:
        raise Infeasible("no admissible cover: some leaf has no eligible ancestor at this depth")
    # witness size by counting selected nodes under each class
    cnt = chosen[D].astype(float)
    for d in range(D - 1, -1, -1):
        lv = tree.levels[d]
        sub = np.add.reduceat(cnt[lv.child], lv.starts)
        cnt = np.where(chosen[d], 1.0, sub)
    size = int(round(cnt[0]))
    witness = None
    if 0 < size <= witness_limit:
        out = []
        stack = [(0, 0, ())]
        while stack:
            d, i, w = stack.pop()
            if chosen[d][i]:
                out.append(w)
                continue
            lv = tree.levels[d]
            lo = lv.starts[i]
            hi = lv.starts[i + 1] if i + 1 < len(lv.starts) else len(lv.parent)
            for e in range(hi - 1, lo - 1, -1):
                stack.append((d + 1, int(lv.child[e]), w + (int(lv.symbol[e]),)))
        witness = tuple(out)
    return CoverSolution(root, witness, size)


def enumerate_cover_costs(tree: CylinderTree) -> np.ndarray:
    """Weights of every antichain cover, by brute force (small trees only)."""
    if tree.empty:
        return np.zeros(1)
    D = tree.depth
    lw = tree.log_weights

    def rec(d: int, i: int) -> np.ndarray:
        w = lw[d][i]
        own = np.array([math.exp(w)]) if w < INF else np.empty(0)
        if d == D:
            return own
        lv = tree.levels[d]
        lo = lv.starts[i]
        hi = lv.starts[i + 1] if i + 1 < len(lv.starts) else len(lv.parent)
        combos = None
        for e in range(lo, hi):
            a = rec(d + 1, int(lv.child[e]))
            combos = a if combos is None else (combos[:, None] + a[None, :]).ravel()
        return np.concatenate([own, combos])

    return rec(0, 0)


def is_antichain_cover(words, leaves) -> bool:
    """True when ``words`` are pairwise incomparable and cover ``leaves``."""
    ws = sorted(set(words))
    for a, b in zip(ws, ws[1:]):
        if b[: len(a)] == a:
            return False
    pref = set(ws)
    for leaf in leaves:
        if not any(leaf[:n] in pref for n in range(len(leaf) + 1)):
            return False
    return True
