"""Doubling construction: inflate a {5,6}-GDD into a 2-(2v+1,5,1)DD.

Each GDD block of size five (six) is replaced by a directed GDD of type
2^5 (2^6) on the doubled block, and each group g gets a 2-(2|g|+1,5,1)DD
on its doubled points plus the shared infinity point.  Running the same
recipe twice with ingredient pairs meeting in prescribed counts yields
design pairs whose intersection is exactly the sum of the choices.  A PBD
analogue replaces each unordered block by a directed design of its size.
"""

from __future__ import annotations

from dataclasses import dataclass

from .catalog import Catalog, build_problem
from .model import (
    Design,
    DesignError,
    DuplicateBlock,
    INFINITY,
    RESIDUE,
    make_design,
    residue_universe,
)
from .trades import Schedule, realize_spectrum, run_schedule
from .verify import GroupPartition


class BadGroupSize(DesignError):
    pass


class MissingIngredient(DesignError):
    pass


class MissingSizeDesign(DesignError):
    pass


class UnrealizableChoice(DesignError):
    pass


class RelabelCollision(DesignError):
    pass


@dataclass(frozen=True)
class Gdd:
    universe: frozenset
    groups: tuple       # of point tuples, declared order
    blocks: tuple       # of frozensets
    sizes: frozenset

    def partition(self) -> GroupPartition:
        return GroupPartition(tuple(frozenset(g) for g in self.groups))


@dataclass(frozen=True)
class Pbd:
    universe: frozenset
    blocks: tuple  # of frozensets
    sizes: frozenset


def transversal_design_5_5() -> Gdd:
    """TD(5,5) from the lines x -> a*x+b over Z5; groups are the 5 columns."""
    groups = tuple(
        tuple((RESIDUE, 5 * g + x) for x in range(5)) for g in range(5)
    )
    blocks = []
    for a in range(5):
        for b in range(5):
            blocks.append(
                frozenset((RESIDUE, 5 * g + (a * g + b) % 5) for g in range(5))
            )
    return Gdd(residue_universe(25), groups, tuple(blocks), frozenset({5}))


def affine_plane_25() -> Pbd:
    """The 30 lines of the order-5 affine plane as a PBD(25,{5})."""
    blocks = []
    for c in range(5):
        blocks.append(frozenset((RESIDUE, 5 * c + y) for y in range(5)))
    for m in range(5):
        for b in range(5):
            blocks.append(
                frozenset((RESIDUE, 5 * x + (m * x + b) % 5) for x in range(5))
            )
    return Pbd(residue_universe(25), tuple(blocks), frozenset({5}))


def gdd_from_entry(entry) -> Gdd:
    return Gdd(entry.universe, entry.groups, entry.unordered_blocks, entry.sizes)


def pbd_from_entry(entry) -> Pbd:
    return Pbd(entry.universe, entry.unordered_blocks, entry.sizes)


class IngredientLibrary:
    """Lazily realized ingredient pairs backed by the catalog entries."""

    DGDD = {5: "dgdd25", 6: "dgdd26"}
    DD = {5: "v5", 11: "v11"}

    def __init__(self, catalog: Catalog):
        self.catalog = catalog
        self._problems = {}
        self._pairs = {}

    def _problem(self, name):
        if name not in self._problems:
            entry = self.catalog.entry(name)
            self._problems[name] = (entry, build_problem(entry, self.catalog))
        return self._problems[name]

    def block_total(self, name) -> int:
        return len(self._problem(name)[1].base.blocks)

    def values(self, name) -> frozenset:
        b = self.block_total(name)
        return frozenset(range(b - 1)) | {b}

    def pair(self, name, m):
        """Two designs from entry `name` meeting in exactly m blocks."""
        key = (name, m)
        if key in self._pairs:
            return self._pairs[key]
        entry, problem = self._problem(name)
        base = problem.base
        if m == len(base.blocks):
            pair = (base, base)
        else:
            result = realize_spectrum(problem, {m})
            if result.unrealized:
                raise UnrealizableChoice(
                    "entry %s has no pair meeting in %d blocks" % (name, m)
                )
            w = result.witnesses[m]
            if w.kind == "pairwise":
                pair = (base, w.other)
            else:
                traded, measured = run_schedule(base, Schedule(w.steps))
                pair = (base, traded)
        self._pairs[key] = pair
        return pair

    def dgdd_pair(self, size, m):
        name = self.DGDD.get(size)
        if name is None:
            raise MissingIngredient("no doubled ingredient for block size %d" % size)
        return self.pair(name, m), self.catalog.entry(name)

    def dd_pair(self, group_size, m):
        order = 2 * group_size + 1
        name = self.DD.get(order)
        if name is None:
            raise MissingSizeDesign("no 2-(%d,5,1)DD ingredient on hand" % order)
        return self.pair(name, m), self.catalog.entry(name)


def _doubled_universe(v: int) -> frozenset:
    return residue_universe(2 * v, 1)


def _point_index(universe):
    return {p: i for i, p in enumerate(sorted(universe))}


def _relabel_dgdd(design: Design, entry, block_points, index) -> list:
    """Map a type-2^n ingredient onto the doubled points of one GDD block."""
    mapping = {}
    for gi, group in enumerate(entry.groups):
        x = block_points[gi]
        mapping[group[0]] = (RESIDUE, 2 * index[x])
        mapping[group[1]] = (RESIDUE, 2 * index[x] + 1)
    return [tuple(mapping[p] for p in b) for b in design.sorted_blocks()]


def _relabel_dd(design: Design, group_points, index) -> list:
    """Map a 2-(2n+1,5,1)DD onto a doubled group plus the infinity point."""
    n = len(group_points)
    mapping = {}
    for j, p in enumerate(sorted(design.universe)):
        if j < 2 * n:
            y = group_points[j // 2]
            mapping[p] = (RESIDUE, 2 * index[y] + j % 2)
        else:
            mapping[p] = (INFINITY, 0)
    return [tuple(mapping[p] for p in b) for b in design.sorted_blocks()]


def _check_gdd(gdd: Gdd):
    for g in gdd.groups:
        if len(g) % 5 not in (0, 2):
            raise BadGroupSize("group size %d is not 0 or 2 mod 5" % len(g))
    for blk in gdd.blocks:
        if len(blk) not in (5, 6):
            raise BadGroupSize("block size %d is not 5 or 6" % len(blk))


def _inflate(gdd: Gdd, lib: IngredientLibrary, block_values, group_values, side):
    index = _point_index(gdd.universe)
    universe = _doubled_universe(len(gdd.universe))
    blocks = []
    for j, blk in enumerate(sorted(gdd.blocks, key=sorted)):
        pts = sorted(blk)
        pair, entry = lib.dgdd_pair(len(pts), block_values[j])
        blocks.extend(_relabel_dgdd(pair[side], entry, pts, index))
    for i, group in enumerate(gdd.groups):
        pts = sorted(group)
        pair, _ = lib.dd_pair(len(pts), group_values[i])
        blocks.extend(_relabel_dd(pair[side], pts, index))
    try:
        return make_design(universe, blocks)
    except DuplicateBlock as exc:
        raise RelabelCollision(str(exc)) from exc


def inflate_gdd(gdd: Gdd, lib: IngredientLibrary) -> Design:
    """Build one 2-(2v+1,5,1)DD from the GDD (all ingredients taken whole)."""
    _check_gdd(gdd)
    blocks = sorted(gdd.blocks, key=sorted)
    bvals = [lib.block_total(lib.DGDD[len(blk)]) for blk in blocks]
    gvals = [lib.block_total(lib.DD[2 * len(g) + 1]) for g in gdd.groups]
    return _inflate(gdd, lib, bvals, gvals, 0)


def inflate_gdd_pair(gdd: Gdd, lib: IngredientLibrary, block_values, group_values):
    """Two inflated designs meeting in exactly sum(a_j) + sum(c_j) + sum(d_i).

    block_values follow the blocks in canonical (sorted) order; group_values
    follow the declared group order.
    """
    _check_gdd(gdd)
    blocks = sorted(gdd.blocks, key=sorted)
    if len(block_values) != len(blocks) or len(group_values) != len(gdd.groups):
        raise UnrealizableChoice("one value per block and per group is required")
    for j, blk in enumerate(blocks):
        allowed = lib.values(lib.DGDD[len(blk)])
        if block_values[j] not in allowed:
            raise UnrealizableChoice(
                "block value %d not in %s" % (block_values[j], sorted(allowed))
            )
    for i, group in enumerate(gdd.groups):
        allowed = lib.values(lib.DD[2 * len(group) + 1])
        if group_values[i] not in allowed:
            raise UnrealizableChoice(
                "group value %d not in %s" % (group_values[i], sorted(allowed))
            )
    d1 = _inflate(gdd, lib, block_values, group_values, 0)
    d2 = _inflate(gdd, lib, block_values, group_values, 1)
    expected = sum(block_values) + sum(group_values)
    return d1, d2, expected


def pbd_inflate(pbd: Pbd, designs_by_size: dict) -> Design:
    """Union of a relabelled directed design over every PBD block."""
    blocks = []
    for blk in sorted(pbd.blocks, key=sorted):
        pts = sorted(blk)
        size = len(pts)
        if size not in designs_by_size:
            raise MissingSizeDesign("no directed design of order %d supplied" % size)
        ingredient = designs_by_size[size]
        if len(ingredient.universe) != size:
            raise MissingSizeDesign(
                "ingredient for size %d lives on %d points"
                % (size, len(ingredient.universe))
            )
        mapping = dict(zip(sorted(ingredient.universe), pts))
        blocks.extend(
            tuple(mapping[p] for p in b) for b in ingredient.sorted_blocks()
        )
    try:
        return make_design(pbd.universe, blocks)
    except DuplicateBlock as exc:
        raise RelabelCollision(str(exc)) from exc
