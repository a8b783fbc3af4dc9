"""Minimum-energy way allocation across cores by pairwise reduction of EPI curves.

Each core contributes an :class:`EnergyCurve` ``e_j(w)``. Curves are combined
pairwise in a balanced binary tree; a node's table maps the total number of
ways given to its group to the cheapest split found below it. After one core's
curve changes, only the ``log2 N`` tables on its path to the root are redone.

Ties between equal-energy splits go to the split whose left share is closest
to proportional (by real, non-padding core count), then to the smaller left
share.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .energy import EnergyCurve

MIN_WAYS = 2


class InfeasibleAllocation(RuntimeError):
    pass


@dataclass(frozen=True)
class AllocationVector:
    ways: tuple[int, ...]
    vf_indices: tuple[int, ...]
    total_epi: float

    def __post_init__(self):
        if len(self.ways) != len(self.vf_indices):
            raise ValueError("ways and VF vectors differ in length")


@dataclass
class ReductionTable:
    """``W -> (E, V)``: cheapest energy ``E`` and per-member split ``V`` of ``W`` ways."""

    members: tuple[int, ...]  # leaf slots covered, in order
    real: int  # members that are actual cores (not padding)
    entries: dict[int, tuple[float, tuple[int, ...]]] = field(default_factory=dict)
    generation: int = 0

    @property
    def padding(self) -> int:
        return len(self.members) - self.real

    def __contains__(self, w):
        return w in self.entries

    def __getitem__(self, w):
        return self.entries[w]

    @classmethod
    def leaf(cls, slot: int, curve: EnergyCurve, real: bool = True, generation: int = 0):
        entries = {w: (curve.epi(w), (w,)) for w in curve.domain}
        return cls((slot,), int(real), entries, generation)


def _tie_key(wx: int, wxy: int, tx: ReductionTable, ty: ReductionTable) -> tuple[int, int]:
    # distance of the left share from proportional, scaled to stay integral
    real = tx.real + ty.real
    if real == 0:
        return (0, wx)
    free_x = wx - MIN_WAYS * tx.padding
    free = wxy - MIN_WAYS * (tx.padding + ty.padding)
    return (abs(free_x * real - free * tx.real), wx)


def reduce_tables(tx: ReductionTable, ty: ReductionTable, limit: int | None = None,
                  generation: int = 0) -> ReductionTable:
    """Combine two disjoint group tables into one over their union.

    ``limit`` caps the combined allocation (ways the rest of the machine must keep).
    """
    best: dict[int, tuple] = {}
    ys = sorted(ty.entries.items())
    for wx, (ex, vx) in sorted(tx.entries.items()):
        for wy, (ey, vy) in ys:
            wxy = wx + wy
            if limit is not None and wxy > limit:
                break
            e = ex + ey
            cur = best.get(wxy)
            if cur is not None:
                if e > cur[0]:
                    continue
                key = _tie_key(wx, wxy, tx, ty)
                if e == cur[0] and key >= cur[1]:
                    continue
            else:
                key = _tie_key(wx, wxy, tx, ty)
            best[wxy] = (e, key, vx, vy)
    entries = {w: (e, vx + vy) for w, (e, _, vx, vy) in sorted(best.items())}
    return ReductionTable(tx.members + ty.members, tx.real + ty.real, entries, generation)


def _padded_size(n: int) -> int:
    size = 1
    while size < n:
        size *= 2
    return size


def _dummy_curve(slot: int) -> EnergyCurve:
    return EnergyCurve.from_values(slot, {MIN_WAYS: 0.0})


class ReductionTree:
    """Balanced tree of reduction tables over ``num_cores`` leaves.

    Non-power-of-two core counts are padded with dummy leaves pinned to two
    ways at zero energy; the padding is invisible in results.
    """

    def __init__(self, curves: list[EnergyCurve], total_ways: int):
        if not curves:
            raise ValueError("need at least one core")
        self.num_cores = len(curves)
        self.total_ways = total_ways
        self.size = _padded_size(self.num_cores)
        self.padded_total = total_ways + MIN_WAYS * (self.size - self.num_cores)
        self.reduce_calls = 0
        self._generation = itertools.count(1)
        self.curves = list(curves) + [_dummy_curve(s) for s in range(self.num_cores, self.size)]
        # heap layout: node 1 is the root, leaves at [size, 2*size)
        self.nodes: list[ReductionTable | None] = [None] * (2 * self.size)
        for slot, curve in enumerate(self.curves):
            self.nodes[self.size + slot] = ReductionTable.leaf(
                slot, curve, slot < self.num_cores, next(self._generation))
        for node in range(self.size - 1, 0, -1):
            self._reduce_node(node)

    @property
    def depth(self) -> int:
        return self.size.bit_length() - 1

    @property
    def root(self) -> ReductionTable:
        return self.nodes[1]

    def _limit(self, table_size: int) -> int:
        return self.padded_total - MIN_WAYS * (self.size - table_size)

    def _reduce_node(self, node: int) -> None:
        left, right = self.nodes[2 * node], self.nodes[2 * node + 1]
        limit = self._limit(len(left.members) + len(right.members))
        self.nodes[node] = reduce_tables(left, right, limit, next(self._generation))
        self.reduce_calls += 1

    def update(self, core_id: int, curve: EnergyCurve) -> None:
        if not 0 <= core_id < self.num_cores:
            raise IndexError(f"core {core_id} out of range")
        self.curves[core_id] = curve
        node = self.size + core_id
        self.nodes[node] = ReductionTable.leaf(core_id, curve, True, next(self._generation))
        node //= 2
        while node >= 1:
            self._reduce_node(node)
            node //= 2

    def optimize(self) -> AllocationVector:
        table = self.root
        if self.padded_total not in table:
            raise InfeasibleAllocation(
                f"no feasible allocation of {self.total_ways} ways over {self.num_cores} cores")
        e, vec = table[self.padded_total]
        ways = vec[: self.num_cores]
        vfs = tuple(self.curves[j].vf(w) for j, w in enumerate(ways))
        return AllocationVector(tuple(ways), vfs, e)


def update_core(tree: ReductionTree, core_id: int, curve: EnergyCurve) -> ReductionTree:
    tree.update(core_id, curve)
    return tree


def optimize(tree: ReductionTree, total_ways: int | None = None) -> AllocationVector:
    if total_ways is not None and total_ways != tree.total_ways:
        raise ValueError(f"tree was built for {tree.total_ways} ways, asked for {total_ways}")
    return tree.optimize()


# --- exhaustive oracle -------------------------------------------------------

def _tree_key(vec, curves, lo, hi, n_real):
    """Lexicographic ranking of a full vector mirroring the tree's choices.

    Energies are summed in the same pairwise order as the tree, so totals are
    bit-identical for identical vectors.
    """
    if hi - lo == 1:
        return (curves[lo].epi(vec[lo]),)
    mid = (lo + hi) // 2
    left = _tree_key(vec, curves, lo, mid, n_real)
    right = _tree_key(vec, curves, mid, hi, n_real)
    wx = sum(vec[lo:mid])
    wxy = wx + sum(vec[mid:hi])
    real_x = sum(1 for j in range(lo, mid) if j < n_real)
    real_y = sum(1 for j in range(mid, hi) if j < n_real)
    pad_x = (mid - lo) - real_x
    pad_y = (hi - mid) - real_y
    real = real_x + real_y
    if real == 0:
        dist = 0
    else:
        dist = abs((wx - MIN_WAYS * pad_x) * real - (wxy - MIN_WAYS * (pad_x + pad_y)) * real_x)
    return (left[0] + right[0], dist, wx, left, right)


def _chain_bounds(curves, total):
    """``bound[j][r]``: cheapest way to give exactly ``r`` ways to cores ``j..``.

    Computed left-to-right independently of the tree; used only to prune.
    """
    inf = float("inf")
    n = len(curves)
    bound = [[inf] * (total + 1) for _ in range(n + 1)]
    bound[n][0] = 0.0
    for j in range(n - 1, -1, -1):
        dom = [(w, curves[j].epi(w)) for w in curves[j].domain if w <= total]
        nxt, cur = bound[j + 1], bound[j]
        for r in range(total + 1):
            best = inf
            for w, e in dom:
                if w > r:
                    break
                rest = nxt[r - w]
                if rest != inf and e + rest < best:
                    best = e + rest
            cur[r] = best
    return bound


def enumerate_allocations(curves: list[EnergyCurve], total_ways: int):
    """Every vector with one entry per core, each in its curve's domain, summing to the total."""
    doms = [curve.domain for curve in curves]
    for vec in itertools.product(*doms):
        if sum(vec) == total_ways:
            yield vec


def brute_force_optimize(curves: list[EnergyCurve], total_ways: int,
                         prune: bool = True) -> AllocationVector:
    """Exhaustive search over all feasible allocation vectors.

    With ``prune`` the search skips branches whose exact remaining lower bound
    already exceeds the optimum by more than rounding slack; the surviving
    candidates are ranked exactly as the reduction tree ranks them.
    """
    n = len(curves)
    if n < 1:
        raise ValueError("need at least one core")
    size = _padded_size(n)
    padded = list(curves) + [_dummy_curve(s) for s in range(n, size)]
    padded_total = total_ways + MIN_WAYS * (size - n)

    if prune:
        candidates = _pruned_candidates(list(curves), total_ways)
    else:
        candidates = enumerate_allocations(list(curves), total_ways)

    best_key, best_vec = None, None
    for vec in candidates:
        full = tuple(vec) + (MIN_WAYS,) * (size - n)
        key = _tree_key(full, padded, 0, size, n)
        if best_key is None or key < best_key:
            best_key, best_vec = key, tuple(vec)
    if best_vec is None:
        raise InfeasibleAllocation(
            f"no feasible allocation of {total_ways} ways over {n} cores")
    assert sum(best_vec) + MIN_WAYS * (size - n) == padded_total
    vfs = tuple(curves[j].vf(w) for j, w in enumerate(best_vec))
    return AllocationVector(best_vec, vfs, best_key[0])


def _pruned_candidates(curves, total):
    bound = _chain_bounds(curves, total)
    opt = bound[0][total]
    if opt == float("inf"):
        return
    slack = 1e-9 * max(1.0, abs(opt))
    n = len(curves)
    doms = [curve.domain for curve in curves]
    vec = [0] * n

    def walk(j, remaining, partial):
        if j == n:
            if remaining == 0:
                yield tuple(vec)
            return
        nxt = bound[j + 1]
        for w in doms[j]:
            if w > remaining:
                break
            rest = nxt[remaining - w]
            if rest == float("inf"):
                continue
            e = partial + curves[j].epi(w)
            if e + rest > opt + slack:
                continue
            vec[j] = w
            yield from walk(j + 1, remaining - w, e)

    yield from walk(0, total, 0.0)
