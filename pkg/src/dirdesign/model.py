"""Value types for directed block designs.

Points are tagged tuples so that comparison, hashing and sorting come for
free: residues sort before coordinate pairs, which sort before infinity
points, and lexicographically within each kind.  Blocks are plain tuples of
points; equality is order-sensitive, so ``(0,1,2,3,4)`` and ``(4,3,2,1,0)``
are distinct blocks.  Everything here is immutable.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable

RESIDUE = 0
COORD = 1
INFINITY = 2

Point = tuple
Block = tuple
OrderedPair = tuple


class DesignError(Exception):
    """Base class for all structural errors raised by this package."""


class InconsistentPairs(DesignError):
    """Pair set is not the pair set of any block."""


class DuplicateBlock(DesignError):
    """A block was produced or inserted twice."""


class UniverseMismatch(DesignError):
    """Blocks or designs refer to points outside the declared universe."""


def residue(value: int, modulus: int) -> Point:
    if modulus <= 0:
        raise ValueError("modulus must be positive")
    return (RESIDUE, value % modulus)


def coord(first: int, second: int, mod_first: int, mod_second: int) -> Point:
    return (COORD, first % mod_first, second % mod_second)


def infinity(index: int) -> Point:
    if index < 0:
        raise ValueError("infinity index must be non-negative")
    return (INFINITY, index)


def render_point(p: Point) -> str:
    kind = p[0]
    if kind == RESIDUE:
        return str(p[1])
    if kind == COORD:
        return "(%d,%d)" % (p[1], p[2])
    return "inf%d" % p[1]


def parse_point(text: str) -> Point:
    text = text.strip()
    if text.startswith("inf"):
        try:
            return (INFINITY, int(text[3:]))
        except ValueError:
            raise InconsistentPairs("bad infinity point %r" % text) from None
    if text.startswith("("):
        if not text.endswith(")"):
            raise InconsistentPairs("unterminated coordinate %r" % text)
        parts = text[1:-1].split(",")
        if len(parts) != 2:
            raise InconsistentPairs("coordinate needs two components: %r" % text)
        return (COORD, int(parts[0]), int(parts[1]))
    try:
        return (RESIDUE, int(text))
    except ValueError:
        raise InconsistentPairs("bad point %r" % text) from None


def render_block(b: Block) -> str:
    return "(" + ",".join(render_point(p) for p in b) + ")"


def parse_block(text: str) -> Block:
    """Parse the canonical rendering of a block; inverse of render_block."""
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise InconsistentPairs("block must be parenthesized: %r" % text)
    inner = text[1:-1]
    points = []
    depth = 0
    token = []
    for ch in inner:
        if ch == "(":
            depth += 1
            token.append(ch)
        elif ch == ")":
            depth -= 1
            token.append(ch)
        elif ch == "," and depth == 0:
            points.append(parse_point("".join(token)))
            token = []
        else:
            token.append(ch)
    if token:
        points.append(parse_point("".join(token)))
    block = tuple(points)
    check_block(block)
    return block


def check_block(b: Block) -> Block:
    if len(set(b)) != len(b):
        raise DuplicateBlock("repeated point in block %s" % render_block(b))
    return b


def ordered_pairs(b: Block) -> frozenset:
    """All C(k,2) ordered pairs (x,y) with x preceding y in the block."""
    k = len(b)
    return frozenset((b[i], b[j]) for i in range(k) for j in range(i + 1, k))


def block_from_pairs(pairs: Iterable[OrderedPair]) -> Block:
    """Reconstruct the unique block whose ordered pairs are exactly `pairs`.

    The pair relation of a block is a total order on its support, so the
    block is recovered by sorting points on out-degree.  Raises
    InconsistentPairs when the input is not such a relation.
    """
    pairs = set(pairs)
    support = set()
    for x, y in pairs:
        if x == y:
            raise InconsistentPairs("pair with equal components")
        support.add(x)
        support.add(y)
    k = len(support)
    if len(pairs) != k * (k - 1) // 2:
        raise InconsistentPairs(
            "%d pairs cannot come from a %d-point block" % (len(pairs), k)
        )
    succ = Counter(x for x, _ in pairs)
    # In a total order the i-th point (0-based) has out-degree k-1-i.
    by_degree = sorted(support, key=lambda p: (-succ[p], p))
    block = tuple(by_degree)
    if ordered_pairs(block) != frozenset(pairs):
        raise InconsistentPairs("pair set is not a total order")
    return block


def reverse(b: Block) -> Block:
    return tuple(reversed(b))


def pair_multiset(blocks: Iterable[Block]) -> Counter:
    """Multiset of ordered pairs contributed by a collection of blocks."""
    counts: Counter = Counter()
    for b in blocks:
        k = len(b)
        for i in range(k):
            for j in range(i + 1, k):
                counts[(b[i], b[j])] += 1
    return counts


def block_count(v: int) -> int:
    """Number of blocks b_v = v(v-1)/10 of a 2-(v,5,1) directed design."""
    if (v * (v - 1)) % 10 != 0:
        raise ValueError("v(v-1) is not divisible by 10 for v=%d" % v)
    return v * (v - 1) // 10


@dataclass(frozen=True)
class Design:
    """A directed design: a set of ordered blocks over a fixed point set."""

    universe: frozenset
    blocks: frozenset
    params: tuple = (2, 5, 1)

    def __post_init__(self):
        object.__setattr__(self, "universe", frozenset(self.universe))
        object.__setattr__(self, "blocks", frozenset(self.blocks))

    @property
    def v(self) -> int:
        return len(self.universe)

    def sorted_blocks(self) -> list:
        return sorted(self.blocks)

    def sorted_points(self) -> list:
        return sorted(self.universe)


def make_design(universe, blocks, params=(2, 5, 1)) -> Design:
    """Validated Design constructor; duplicates and foreign points are errors."""
    universe = frozenset(universe)
    seen = set()
    for b in blocks:
        check_block(b)
        if b in seen:
            raise DuplicateBlock("duplicate block %s" % render_block(b))
        seen.add(b)
        for p in b:
            if p not in universe:
                raise UniverseMismatch(
                    "point %s of block %s not in universe"
                    % (render_point(p), render_block(b))
                )
    return Design(universe, frozenset(seen), params)


def residue_universe(modulus: int, n_infinity: int = 0) -> frozenset:
    pts = [(RESIDUE, i) for i in range(modulus)]
    pts += [(INFINITY, i) for i in range(n_infinity)]
    return frozenset(pts)


def coord_universe(mod_first: int, mod_second: int, n_infinity: int = 0) -> frozenset:
    pts = [(COORD, a, b) for a in range(mod_first) for b in range(mod_second)]
    pts += [(INFINITY, i) for i in range(n_infinity)]
    return frozenset(pts)
