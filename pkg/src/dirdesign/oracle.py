"""Independent brute-force checks at tiny scale.

These routines share no code path with the developers and planners they
cross-check: designs are enumerated or assembled by backtracking directly
from the axioms.
"""

from __future__ import annotations

from itertools import permutations

from .model import RESIDUE, ordered_pairs, reverse
from .verify import GroupPartition


def enumerate_dd5():
    """All 2-(5,5,1) directed designs on {0..4} and their intersection sizes.

    A design is two 5-blocks covering all 20 ordered pairs exactly once.
    Returns (designs, spectrum) with designs as a sorted list of frozensets.
    """
    points = [(RESIDUE, i) for i in range(5)]
    blocks = [tuple(p) for p in permutations(points)]
    pairs = {b: ordered_pairs(b) for b in blocks}
    designs = set()
    for b1 in blocks:
        for b2 in blocks:
            if b1 >= b2:
                continue
            if not (pairs[b1] & pairs[b2]) and len(pairs[b1] | pairs[b2]) == 20:
                designs.add(frozenset((b1, b2)))
    designs = sorted(designs, key=sorted)
    spectrum = set()
    for d1 in designs:
        for d2 in designs:
            spectrum.add(len(d1 & d2))
    return designs, spectrum


def confirm_no_volume1_trade(k: int) -> bool:
    """True iff distinct orderings of a k-set always differ in some pair.

    Exhaustive over all k! orderings; a collision would be a volume-1
    directed trade, which is why intersection b-1 is never possible.
    """
    if k > 6:
        raise ValueError("exhaustive check is limited to k <= 6")
    points = [(RESIDUE, i) for i in range(k)]
    seen = {}
    for b in permutations(points):
        key = ordered_pairs(tuple(b))
        if key in seen:
            return False
        seen[key] = b
    return True


def _cross_pairs(partition: GroupPartition):
    which = partition.group_of()
    points = sorted(partition.universe())
    return [
        (a, b)
        for a in points
        for b in points
        if a != b and which[a] != which[b]
    ]


def search_dgdd(partition: GroupPartition, limit: int = 1, seed=()):
    """Backtracking exact cover: ordered 5-blocks over cross-group pairs.

    Every cross-group ordered pair must be covered exactly once and no
    block may touch a group twice.  `seed` blocks are forced into the
    solution; up to `limit` completed designs are returned as sorted block
    tuples (empty when no completion exists).
    """
    which = partition.group_of()
    cross = _cross_pairs(partition)
    want = set(cross)
    solutions = []

    covered = set()
    chosen = []
    for blk in seed:
        ps = ordered_pairs(blk)
        if not ps <= want or ps & covered:
            return []
        if len({which[p] for p in blk}) != len(blk):
            return []
        covered |= ps
        chosen.append(blk)

    groups = [tuple(sorted(g)) for g in partition.groups]

    def candidates_for(pair):
        """All valid ordered 5-blocks containing `pair` and only uncovered pairs."""
        out = []
        first, second = pair
        g1, g2 = which[first], which[second]
        other_groups = [i for i in range(len(groups)) if i not in (g1, g2)]
        from itertools import combinations as comb

        for extra in comb(other_groups, 3):
            pools = [groups[i] for i in extra]
            for picks in _product(pools):
                support = [first, second] + list(picks)
                for order in permutations(support):
                    idx_f = order.index(first)
                    idx_s = order.index(second)
                    if idx_f > idx_s:
                        continue
                    ps = ordered_pairs(tuple(order))
                    if ps <= want and not (ps & covered):
                        out.append((tuple(order), ps))
        return out

    def backtrack():
        if len(solutions) >= limit:
            return
        missing = [p for p in cross if p not in covered]
        if not missing:
            solutions.append(tuple(sorted(chosen)))
            return
        pair = missing[0]
        for blk, ps in candidates_for(pair):
            covered.update(ps)
            chosen.append(blk)
            backtrack()
            chosen.pop()
            covered.difference_update(ps)
            if len(solutions) >= limit:
                return

    backtrack()
    return solutions


def _product(pools):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head,) + rest
