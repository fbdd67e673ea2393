"""Development of base blocks into full designs.

Four mechanisms generate a design from base blocks: cyclic addition on
residues, coordinate-wise addition on coordinate pairs, orbits under a
point permutation, and verbatim block lists.  Infinity points never move
with the step; they are relabelled only through an explicit policy keyed
on the cumulative added value.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (
    COORD,
    INFINITY,
    RESIDUE,
    Block,
    Design,
    DesignError,
    DuplicateBlock,
    UniverseMismatch,
    make_design,
    render_block,
    render_point,
)


class PolicyGap(DesignError):
    """An added value hit a residue class the infinity policy does not cover."""


class NotBijective(DesignError):
    """A relabelling map is not a bijection of the universe."""


@dataclass(frozen=True)
class CyclicAdd:
    step: int
    modulus: int
    orbit: int

    def __post_init__(self):
        # Either the orbit closes, or it is a declared strict slice of the
        # full orbit (used by truncated readings); anything longer would
        # revisit blocks and is a data error.
        import math

        full = self.modulus // math.gcd(self.step % self.modulus or self.modulus, self.modulus)
        closes = (self.orbit * self.step) % self.modulus == 0
        if self.orbit < 1 or (not closes and self.orbit >= full):
            raise ValueError(
                "orbit %d of step %d neither closes nor slices mod %d"
                % (self.orbit, self.step, self.modulus)
            )


@dataclass(frozen=True)
class CoordAdd:
    coordinate: str  # "first" or "second"
    modulus: int
    orbit: int

    def __post_init__(self):
        if self.coordinate not in ("first", "second"):
            raise ValueError("coordinate must be 'first' or 'second'")


@dataclass(frozen=True)
class PermutationOrbit:
    generator: tuple  # sorted tuple of (point, image) pairs
    orbit: int

    def mapping(self) -> dict:
        return dict(self.generator)


@dataclass(frozen=True)
class ExplicitList:
    orbit: int = 1


@dataclass(frozen=True)
class InfinityPolicy:
    """Relabelling rules (index, period, {added value mod period: index shift})."""

    rules: tuple  # of (index, period, tuple of (residue, shift))

    def shift_for(self, index: int, delta: int) -> int:
        for idx, period, table in self.rules:
            if idx != index:
                continue
            for res, shift in table:
                if delta % period == res:
                    return shift
            raise PolicyGap(
                "no rule for inf%d when adding %d (mod %d)" % (index, delta, period)
            )
        return 0


def advance_point(p, rule, steps: int, policy: Optional[InfinityPolicy] = None):
    """Image of a point after `steps` applications of the rule."""
    kind = p[0]
    if isinstance(rule, ExplicitList):
        return p
    if isinstance(rule, PermutationOrbit):
        mapping = rule.mapping()
        q = p
        for _ in range(steps % rule.orbit if rule.orbit else steps):
            q = mapping.get(q, q)
        return q
    if isinstance(rule, CyclicAdd):
        if kind == RESIDUE:
            return (RESIDUE, (p[1] + rule.step * steps) % rule.modulus)
        if kind == INFINITY:
            if policy is None:
                return p
            return (INFINITY, p[1] + policy.shift_for(p[1], rule.step * steps))
        return p
    if isinstance(rule, CoordAdd):
        if kind == COORD:
            if rule.coordinate == "first":
                return (COORD, (p[1] + steps) % rule.modulus, p[2])
            return (COORD, p[1], (p[2] + steps) % rule.modulus)
        if kind == INFINITY:
            if policy is None:
                return p
            return (INFINITY, p[1] + policy.shift_for(p[1], steps))
        return p
    raise TypeError("unknown development rule %r" % (rule,))


def develop_block(block: Block, rule, steps: int, policy=None) -> Block:
    return tuple(advance_point(p, rule, steps, policy) for p in block)


@dataclass(frozen=True)
class BaseBlock:
    block: Block
    rule: object  # per-block rule; rarely differs from the set default

    def orbit(self) -> int:
        return self.rule.orbit


@dataclass(frozen=True)
class BaseBlockSet:
    universe: frozenset
    base: tuple  # of BaseBlock
    policy: Optional[InfinityPolicy] = None
    params: tuple = (2, 5, 1)


def develop(bs: BaseBlockSet) -> Design:
    """Union of the orbits of every base block; duplicates are a hard error."""
    blocks = []
    seen = set()
    for bb in bs.base:
        for s in range(bb.orbit()):
            b = develop_block(bb.block, bb.rule, s, bs.policy)
            if b in seen:
                raise DuplicateBlock(
                    "orbit collision at %s (base %s, step %d)"
                    % (render_block(b), render_block(bb.block), s)
                )
            seen.add(b)
            blocks.append(b)
    return make_design(bs.universe, blocks, bs.params)


def apply_permutation(d: Design, mapping: dict) -> Design:
    """Relabel every block of a design entrywise by a universe bijection."""
    if set(mapping) != set(d.universe) or set(mapping.values()) != set(d.universe):
        raise NotBijective("mapping is not a bijection of the universe")
    blocks = [tuple(mapping[p] for p in b) for b in d.blocks]
    return make_design(d.universe, blocks, d.params)


def cycles_to_mapping(cycles, universe) -> dict:
    """Mapping from disjoint cycles; points absent from the cycles stay fixed."""
    mapping = {p: p for p in universe}
    seen = set()
    for cyc in cycles:
        for p in cyc:
            if p not in mapping:
                raise UniverseMismatch("cycle point %s not in universe" % render_point(p))
            if p in seen:
                raise NotBijective("point %s in two cycles" % render_point(p))
            seen.add(p)
        for i, p in enumerate(cyc):
            mapping[p] = cyc[(i + 1) % len(cyc)]
    return mapping


def parse_cycles(text: str):
    """Parse cycle notation over residues, e.g. "(0)(1..17)(18..34)" or "(3,9)(4,5)"."""
    text = text.strip()
    cycles = []
    i = 0
    while i < len(text):
        if text[i] != "(":
            raise ValueError("expected '(' at %r" % text[i:])
        j = text.index(")", i)
        body = text[i + 1 : j]
        cyc = []
        for part in body.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                cyc.extend((RESIDUE, n) for n in range(int(lo), int(hi) + 1))
            elif part:
                cyc.append((RESIDUE, int(part)))
        cycles.append(tuple(cyc))
        i = j + 1
    return tuple(cycles)


def render_cycles(cycles) -> str:
    out = []
    for cyc in cycles:
        values = [p[1] for p in cyc]
        if len(values) > 3 and values == list(range(values[0], values[0] + len(values))):
            out.append("(%d..%d)" % (values[0], values[-1]))
        else:
            out.append("(" + ",".join(str(v) for v in values) + ")")
    return "".join(out)
