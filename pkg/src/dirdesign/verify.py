"""Exact verifiers for design axioms.

Each verifier counts into a dense multiplicity table indexed by the
canonical point order and reports every defective pair, so two runs over
the same input produce identical reports.  Nothing here is probabilistic
and nothing is floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .model import (
    Design,
    UniverseMismatch,
    block_count,
    pair_multiset,
    render_point,
)


@dataclass(frozen=True)
class VerificationReport:
    passed: bool
    defects: tuple  # of (pair, expected, observed), canonical order
    summary: tuple  # of (label, value) pairs, stable order

    def defect_lines(self):
        for pair, want, got in self.defects:
            a, b = pair
            yield "%s,%s expected %d observed %d" % (
                render_point(a),
                render_point(b),
                want,
                got,
            )

    def to_text(self) -> str:
        lines = ["PASS" if self.passed else "FAIL"]
        lines += ["%s=%s" % (k, v) for k, v in self.summary]
        lines += list(self.defect_lines())
        return "\n".join(lines)


def _report(defects, summary) -> VerificationReport:
    return VerificationReport(not defects, tuple(defects), tuple(summary))


@dataclass(frozen=True)
class GroupPartition:
    groups: tuple  # of frozensets, in declared order

    def __post_init__(self):
        seen = set()
        for g in self.groups:
            if seen & g:
                raise ValueError("groups are not disjoint")
            seen |= g

    def universe(self) -> frozenset:
        out = set()
        for g in self.groups:
            out |= g
        return frozenset(out)

    def group_of(self) -> dict:
        return {p: i for i, g in enumerate(self.groups) for p in g}


def verify_dd(d: Design) -> VerificationReport:
    """Every ordered pair of distinct points covered exactly once, b = v(v-1)/10."""
    t, k, lam = d.params
    if (t, k, lam) != (2, 5, 1):
        raise ValueError("only 2-(v,5,1) directed designs are verified here")
    points = d.sorted_points()
    counts = pair_multiset(d.blocks)
    defects = []
    for a in points:
        for b in points:
            if a == b:
                continue
            got = counts.get((a, b), 0)
            if got != 1:
                defects.append(((a, b), 1, got))
    # 10*b = v(v-1) whenever all pair multiplicities are 1, so a block-count
    # mismatch always surfaces as pair defects; the summary still records it.
    expected_b = block_count(d.v)
    summary = [
        ("v", d.v),
        ("blocks", len(d.blocks)),
        ("expected-blocks", expected_b),
        ("pair-slots", 10 * len(d.blocks)),
    ]
    return _report(defects, summary)


def verify_dgdd(d: Design, g: GroupPartition) -> VerificationReport:
    """Cross-group ordered pairs once, within-group ordered pairs never."""
    if g.universe() != d.universe:
        raise UniverseMismatch("group partition does not cover the universe")
    points = d.sorted_points()
    which = g.group_of()
    counts = pair_multiset(d.blocks)
    defects = []
    for a in points:
        for b in points:
            if a == b:
                continue
            want = 0 if which[a] == which[b] else 1
            got = counts.get((a, b), 0)
            if got != want:
                defects.append(((a, b), want, got))
    summary = [
        ("points", len(points)),
        ("groups", len(g.groups)),
        ("blocks", len(d.blocks)),
    ]
    return _report(defects, summary)


def _unordered_counts(blocks):
    counts = {}
    for blk in blocks:
        pts = sorted(blk)
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                key = (pts[i], pts[j])
                counts[key] = counts.get(key, 0) + 1
    return counts


def verify_gdd(blocks, g: GroupPartition, sizes) -> VerificationReport:
    """Unordered group divisible design check with block sizes in `sizes`."""
    points = sorted(g.universe())
    which = g.group_of()
    defects = []
    clean = []
    for blk in blocks:
        blk = frozenset(blk)
        if len(blk) not in sizes:
            defects.append(((min(blk), max(blk)), -len(blk), len(blk)))
        clean.append(blk)
    counts = _unordered_counts(clean)
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            want = 0 if which[a] == which[b] else 1
            got = counts.get((a, b), 0)
            if got != want:
                defects.append(((a, b), want, got))
    summary = [
        ("points", len(points)),
        ("groups", len(g.groups)),
        ("blocks", len(clean)),
        ("sizes", "/".join(str(s) for s in sorted(sizes))),
    ]
    return _report(defects, summary)


def verify_pbd(blocks, universe, sizes) -> VerificationReport:
    """Pairwise balanced design check: every unordered pair exactly once."""
    points = sorted(universe)
    defects = []
    clean = []
    for blk in blocks:
        blk = frozenset(blk)
        if len(blk) not in sizes:
            defects.append(((min(blk), max(blk)), -len(blk), len(blk)))
        clean.append(blk)
    counts = _unordered_counts(clean)
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            got = counts.get((a, b), 0)
            if got != 1:
                defects.append(((a, b), 1, got))
    summary = [
        ("points", len(points)),
        ("blocks", len(clean)),
        ("sizes", "/".join(str(s) for s in sorted(sizes))),
    ]
    return _report(defects, summary)


def intersection(d1: Design, d2: Design):
    """Number of common blocks (order-sensitive equality) and the blocks."""
    if d1.universe != d2.universe or d1.params != d2.params:
        raise UniverseMismatch("designs live on different universes or parameters")
    common = d1.blocks & d2.blocks
    return len(common), common
