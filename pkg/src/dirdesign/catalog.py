"""Catalog of explicit constructions: file grammar, loader and errata overlay.

Catalog files are line-oriented; see docs/catalog-format.md for the EBNF.
The shipped data files transcribe construction tables verbatim; corrections
live exclusively in the errata overlay (`errata.cat`), each carrying a
justification that is re-checked at load time.  Every file is protected by
a content digest in data/CHECKSUMS.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, replace
from typing import Optional

from .develop import (
    BaseBlock,
    BaseBlockSet,
    CoordAdd,
    CyclicAdd,
    ExplicitList,
    InfinityPolicy,
    PermutationOrbit,
    apply_permutation as _apply_permutation,
    cycles_to_mapping,
    develop as _develop,
    develop_block,
    parse_cycles,
    render_cycles,
)
from .model import (
    Block,
    Design,
    DesignError,
    INFINITY,
    RESIDUE,
    block_count,
    coord_universe,
    infinity,
    make_design,
    parse_block,
    render_block,
    residue_universe,
)
from .trades import SpectrumProblem, Trade
from .verify import GroupPartition, verify_dd, verify_dgdd, verify_gdd, verify_pbd


class ParseError(DesignError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__("%s:%d: %s" % (path, line, message))


class UnknownEntry(DesignError):
    pass


class ChecksumMismatch(DesignError):
    pass


# ---------------------------------------------------------------------------
# data model


@dataclass(frozen=True)
class UniverseSpec:
    shape: str  # "residues" or "coords"
    mod_first: int
    mod_second: int = 0
    n_infinity: int = 0

    def points(self) -> frozenset:
        if self.shape == "residues":
            return residue_universe(self.mod_first, self.n_infinity)
        return coord_universe(self.mod_first, self.mod_second, self.n_infinity)

    def render(self) -> str:
        if self.shape == "residues":
            text = "residues mod %d" % self.mod_first
        else:
            text = "coords mod %d x %d" % (self.mod_first, self.mod_second)
        if self.n_infinity:
            text += " + inf %d" % self.n_infinity
        return text


@dataclass(frozen=True)
class TradeBlockRef:
    base_index: int
    offset: int
    reorder: tuple  # 1-based positions: new[i] = old[reorder[i]-1]


@dataclass(frozen=True)
class TradeFamilySpec:
    name: str
    volume: int
    count: int
    stride: int
    blocks: tuple  # of TradeBlockRef


@dataclass(frozen=True)
class PairwiseClaim:
    left: tuple   # ("base"|"companion", name, perms applied left to right)
    right: tuple
    value: int


@dataclass(frozen=True)
class ErratumRecord:
    entry: str
    field_path: str
    printed: str
    adopted: str
    check: str


@dataclass(frozen=True)
class SupplementRecord:
    entry: str
    family: TradeFamilySpec
    check: str


@dataclass
class CatalogEntry:
    name: str
    kind: str  # directed-design | dgdd | gdd | pbd
    universe_spec: UniverseSpec
    rule_text: str = "none"
    policy: Optional[InfinityPolicy] = None
    base: tuple = ()           # of BaseBlock (shared part)
    readings: tuple = ()       # of (name, tuple of BaseBlock)
    groups: tuple = ()         # of point tuples, declared order
    unordered_blocks: tuple = ()  # of frozensets, gdd/pbd only
    sizes: frozenset = frozenset()
    append_source: str = ""    # entry name whose design is appended on inf points
    companions: tuple = ()     # of (name, tuple of BaseBlock)
    permutations: tuple = ()   # of (name, cycles)
    pairwise: tuple = ()       # of PairwiseClaim
    trade_families: tuple = () # of TradeFamilySpec
    claim: tuple = ("none",)   # ("full",) | ("subset", frozenset) | ("minus", frozenset) | ("none",)
    notes: tuple = ()
    provenance: tuple = ()     # of (field, printed value) from applied errata
    pending_checks: tuple = () # overlay justifications still to evaluate at load

    # -- structure ---------------------------------------------------------

    @property
    def universe(self) -> frozenset:
        return self.universe_spec.points()

    def reading_names(self):
        return [name for name, _ in self.readings] or [""]

    def base_blocks(self, reading: str = "") -> tuple:
        extra = ()
        for name, blocks in self.readings:
            if name == reading:
                extra = blocks
                break
        else:
            if reading:
                raise UnknownEntry("entry %s has no reading %r" % (self.name, reading))
        return self.base + extra

    def group_partition(self) -> GroupPartition:
        return GroupPartition(tuple(frozenset(g) for g in self.groups))

    def expected_blocks(self) -> int:
        v = len(self.universe)
        if self.kind == "directed-design":
            return block_count(v)
        if self.kind == "dgdd":
            cross = v * (v - 1) - sum(len(g) * (len(g) - 1) for g in self.groups)
            return cross // 10
        return len(self.unordered_blocks)

    def orbit_total(self, reading: str = "") -> int:
        total = sum(bb.orbit() for bb in self.base_blocks(reading))
        if self.append_source:
            total += 11  # appended sub-design on the infinity points
        return total

    # -- materialization ---------------------------------------------------

    def appended_blocks(self, catalog) -> tuple:
        if not self.append_source:
            return ()
        sub = catalog.entry(self.append_source)
        subdesign = sub.design(catalog)
        mapping = {p: (INFINITY, p[1]) for p in subdesign.universe}
        return tuple(
            tuple(mapping[p] for p in b) for b in subdesign.sorted_blocks()
        )

    def design(self, catalog=None, reading: str = "") -> Design:
        blocks = []
        seen = set()
        bbs = BaseBlockSet(self.universe, self.base_blocks(reading), self.policy)
        developed = _develop(bbs)
        blocks = list(developed.blocks)
        if self.append_source:
            if catalog is None:
                raise UnknownEntry("entry %s needs the catalog for its appended part" % self.name)
            blocks.extend(self.appended_blocks(catalog))
        return make_design(self.universe, blocks)

    def trade(self, spec: TradeFamilySpec, index: int) -> Trade:
        return self.trade_with(spec, index)

    def trade_with(self, spec: TradeFamilySpec, index: int, reading: str = "") -> Trade:
        bbs = self.all_base_blocks_indexable(reading)
        removed = []
        added = []
        for ref in spec.blocks:
            bb = bbs[ref.base_index]
            steps = ref.offset + spec.stride * index
            blk = develop_block(bb.block, bb.rule, steps, self.policy)
            removed.append(blk)
            added.append(tuple(blk[i - 1] for i in ref.reorder))
        return Trade(
            frozenset(removed),
            frozenset(added),
            "%s[%d]" % (spec.name, index),
        )

    def all_base_blocks_indexable(self, reading: str = "") -> tuple:
        # Trade block references index into shared bases first, then the
        # reading-specific ones (any reading sees the same shared prefix).
        if self.readings:
            for name, _ in self.readings:
                try:
                    return self.base_blocks(reading or name)
                except UnknownEntry:
                    continue
        return self.base_blocks(reading)

    def family_trades(self, spec: TradeFamilySpec):
        return [self.trade(spec, i) for i in range(spec.count)]

    def claim_target(self):
        b = self.expected_blocks()
        full = frozenset(range(b - 1)) | {b}
        label, *rest = self.claim
        if label == "full":
            return full
        if label == "subset":
            return frozenset(rest[0])
        if label == "minus":
            return full - frozenset(rest[0])
        return frozenset()


@dataclass
class Catalog:
    entries: dict
    errata: tuple = ()
    supplements: tuple = ()

    def entry(self, name: str) -> CatalogEntry:
        if name not in self.entries:
            raise UnknownEntry("no catalog entry named %r" % name)
        return self.entries[name]

    def names(self):
        return sorted(self.entries)


# ---------------------------------------------------------------------------
# parsing


class _Cursor:
    def __init__(self, path, text):
        self.path = path
        self.lines = text.splitlines()
        self.i = 0

    def error(self, message):
        return ParseError(self.path, self.i + 1 if self.i < len(self.lines) else len(self.lines), message)

    def next_line(self):
        while self.i < len(self.lines):
            raw = self.lines[self.i]
            self.i += 1
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            return line
        return None

    def peek_done(self):
        j = self.i
        while j < len(self.lines):
            line = self.lines[j].strip()
            if line and not line.startswith("#"):
                return False
            j += 1
        return True


def _parse_universe(text, err):
    parts = text.split()
    n_inf = 0
    if "+" in parts:
        plus = parts.index("+")
        if parts[plus + 1] != "inf":
            raise err("expected 'inf' after '+' in universe")
        n_inf = int(parts[plus + 2])
        parts = parts[:plus]
    if parts[0] == "residues" and parts[1] == "mod":
        return UniverseSpec("residues", int(parts[2]), 0, n_inf)
    if parts[0] == "coords" and parts[1] == "mod" and parts[3] == "x":
        return UniverseSpec("coords", int(parts[2]), int(parts[4]), n_inf)
    raise err("bad universe %r" % text)


def _parse_rule(text, universe_spec, err):
    parts = text.split()
    if parts[0] == "none":
        return ExplicitList()
    if parts[0] == "add":
        if parts[2] != "mod" or parts[4] != "orbit":
            raise err("bad cyclic rule %r" % text)
        return CyclicAdd(int(parts[1]), int(parts[3]), int(parts[5]))
    if parts[0] == "coord":
        if parts[2] != "mod" or parts[4] != "orbit":
            raise err("bad coordinate rule %r" % text)
        return CoordAdd(parts[1], int(parts[3]), int(parts[5]))
    if parts[0] == "perm-orbit":
        rest = text[len("perm-orbit") :].strip()
        if not rest.startswith('"'):
            raise err("perm-orbit needs a quoted cycle list")
        close = rest.index('"', 1)
        cycles = parse_cycles(rest[1:close])
        tail = rest[close + 1 :].split()
        if len(tail) != 2 or tail[0] != "orbit":
            raise err("perm-orbit needs an orbit length")
        mapping = cycles_to_mapping(cycles, universe_spec.points())
        generator = tuple(sorted(mapping.items()))
        return PermutationOrbit(generator, int(tail[1]))
    raise err("unknown development rule %r" % text)


def _rule_render(rule, permutation_cycles=None) -> str:
    if isinstance(rule, ExplicitList):
        return "none"
    if isinstance(rule, CyclicAdd):
        return "add %d mod %d orbit %d" % (rule.step, rule.modulus, rule.orbit)
    if isinstance(rule, CoordAdd):
        return "coord %s mod %d orbit %d" % (rule.coordinate, rule.modulus, rule.orbit)
    if isinstance(rule, PermutationOrbit):
        cycles = permutation_cycles or _mapping_cycles(rule.mapping())
        return 'perm-orbit "%s" orbit %d' % (render_cycles(cycles), rule.orbit)
    raise TypeError("cannot render rule %r" % (rule,))


def _mapping_cycles(mapping):
    seen = set()
    cycles = []
    for start in sorted(mapping):
        if start in seen or mapping[start] == start:
            seen.add(start)
            continue
        cyc = [start]
        seen.add(start)
        p = mapping[start]
        while p != start:
            cyc.append(p)
            seen.add(p)
            p = mapping[p]
        cycles.append(tuple(cyc))
    return tuple(cycles)


def _parse_block_line(line, default_rule, universe_spec, err):
    rest = line
    blk = _take_block(rest, err)
    tail = rest[len(blk) :].strip()
    block = parse_block(blk)
    rule = default_rule
    if tail.startswith("orbit "):
        orbit = int(tail.split()[1])
        rule = replace(default_rule, orbit=orbit)
    elif tail.startswith("develop "):
        rule = _parse_rule(tail[len("develop ") :], universe_spec, err)
    elif tail:
        raise err("unexpected trailing text %r" % tail)
    return BaseBlock(block, rule)


def _take_block(text, err):
    depth = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return text[: i + 1]
    raise err("unbalanced parentheses in %r" % text)


def _parse_policy_lines(cur):
    rules = []
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated infinity-policy")
        if line == "}":
            break
        # index I mod P: r -> +s, r -> -s, ...
        head, _, table = line.partition(":")
        parts = head.split()
        if len(parts) != 4 or parts[0] != "index" or parts[2] != "mod":
            raise cur.error("bad policy line %r" % line)
        idx, period = int(parts[1]), int(parts[3])
        entries = []
        for item in table.split(","):
            res, _, shift = item.partition("->")
            entries.append((int(res.strip()) % period, int(shift.strip())))
        rules.append((idx, period, tuple(entries)))
    return InfinityPolicy(tuple(rules))


def _parse_side(tokens, err):
    # base | companion NAME, optionally followed by "@ perm" chains
    perms = []
    if tokens[0] == "base":
        kind, name = "base", ""
        rest = tokens[1:]
    elif tokens[0] == "companion":
        if len(tokens) < 2:
            raise err("companion needs a name")
        kind, name = "companion", tokens[1]
        rest = tokens[2:]
    else:
        raise err("bad design reference %r" % " ".join(tokens))
    while rest:
        if rest[0] != "@" or len(rest) < 2:
            raise err("bad permutation suffix %r" % " ".join(rest))
        perms.append(rest[1])
        rest = rest[2:]
    return (kind, name, tuple(perms))


def _render_side(side):
    kind, name, perms = side
    text = "base" if kind == "base" else "companion %s" % name
    for p in perms:
        text += " @ %s" % p
    return text


def _parse_trade_family(header, cur):
    # trades NAME volume V count N [stride S] {
    parts = header.split()
    name = parts[1]
    volume = count = None
    stride = 1
    i = 2
    while i < len(parts) - 1:
        if parts[i] == "volume":
            volume = int(parts[i + 1])
        elif parts[i] == "count":
            count = int(parts[i + 1])
        elif parts[i] == "stride":
            stride = int(parts[i + 1])
        else:
            raise cur.error("bad trades header token %r" % parts[i])
        i += 2
    if parts[-1] != "{" or volume is None or count is None:
        raise cur.error("bad trades header %r" % header)
    blocks = []
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated trades section")
        if line == "}":
            break
        toks = line.split(None, 3)
        if len(toks) != 4 or toks[0] != "block":
            raise cur.error("bad trade block line %r" % line)
        reorder = tuple(int(x) for x in toks[3].strip("()").split(","))
        if sorted(reorder) != list(range(1, len(reorder) + 1)):
            raise cur.error("reorder %r is not a permutation of positions" % (toks[3],))
        blocks.append(TradeBlockRef(int(toks[1]), int(toks[2]), reorder))
    if len(blocks) != volume:
        raise cur.error(
            "family %s declares volume %d but lists %d blocks" % (name, volume, len(blocks))
        )
    return TradeFamilySpec(name, volume, count, stride, tuple(blocks))


def _parse_block_section(cur, default_rule, universe_spec):
    out = []
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated block section")
        if line == "}":
            break
        out.append(_parse_block_line(line, default_rule, universe_spec, cur.error))
    return tuple(out)


def _parse_set_line(line, err):
    line = line.strip()
    if not (line.startswith("{") and line.endswith("}")):
        raise err("unordered block must be braced: %r" % line)
    from .model import parse_point

    pts = [parse_point(tok) for tok in _split_points(line[1:-1])]
    if len(set(pts)) != len(pts):
        raise err("repeated point in %r" % line)
    return frozenset(pts)


def _split_points(inner):
    out = []
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
            out.append("".join(token))
            token = []
        else:
            token.append(ch)
    if token:
        out.append("".join(token))
    return [t for t in (tok.strip() for tok in out) if t]


def _parse_int_set(text, err):
    text = text.strip()
    if not (text.startswith("{") and text.endswith("}")):
        raise err("expected a braced integer set, got %r" % text)
    vals = [int(tok) for tok in text[1:-1].split(",") if tok.strip()]
    return frozenset(vals)


def parse_catalog_text(path, text):
    """Parse one catalog file into entries, errata and supplements."""
    cur = _Cursor(path, text)
    entries = []
    errata = []
    supplements = []
    while not cur.peek_done():
        line = cur.next_line()
        if line.startswith("entry ") and line.endswith("{"):
            entries.append(_parse_entry(line, cur))
        elif line.startswith("erratum ") and line.endswith("{"):
            errata.append(_parse_erratum(line, cur))
        elif line.startswith("supplement ") and line.endswith("{"):
            supplements.append(_parse_supplement(line, cur))
        else:
            raise cur.error("expected an entry, erratum or supplement, got %r" % line)
    return entries, errata, supplements


def _parse_entry(header, cur):
    name = header.split()[1]
    kind = ""
    universe_spec = None
    rule = ExplicitList()
    rule_seen = False
    policy = None
    base = ()
    readings = []
    groups = []
    unordered = []
    sizes = frozenset()
    append_source = ""
    companions = []
    permutations = []
    pairwise = []
    families = []
    claim = ("none",)
    notes = []
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated entry %s" % name)
        if line == "}":
            break
        if line.startswith("kind = "):
            kind = line[len("kind = ") :]
        elif line.startswith("universe = "):
            universe_spec = _parse_universe(line[len("universe = ") :], cur.error)
        elif line.startswith("develop = "):
            if universe_spec is None:
                raise cur.error("develop must follow universe")
            rule = _parse_rule(line[len("develop = ") :], universe_spec, cur.error)
            rule_seen = True
        elif line == "infinity-policy {":
            policy = _parse_policy_lines(cur)
        elif line == "base-blocks {":
            if not rule_seen and kind in ("directed-design",):
                raise cur.error("base-blocks must follow develop")
            base = _parse_block_section(cur, rule, universe_spec)
        elif line.startswith("reading ") and line.endswith("{"):
            rname = line.split()[1]
            inner = cur.next_line()
            if inner != "base-blocks {":
                raise cur.error("reading %s must contain a base-blocks section" % rname)
            rblocks = _parse_block_section(cur, rule, universe_spec)
            closing = cur.next_line()
            if closing != "}":
                raise cur.error("unterminated reading %s" % rname)
            readings.append((rname, rblocks))
        elif line == "groups {":
            while True:
                g = cur.next_line()
                if g is None:
                    raise cur.error("unterminated groups")
                if g == "}":
                    break
                groups.append(parse_block(g))
        elif line == "blocks {":
            while True:
                b = cur.next_line()
                if b is None:
                    raise cur.error("unterminated blocks")
                if b == "}":
                    break
                unordered.append(_parse_set_line(b, cur.error))
        elif line.startswith("sizes = "):
            sizes = _parse_int_set(line[len("sizes = ") :], cur.error)
        elif line == "append {":
            while True:
                a = cur.next_line()
                if a is None:
                    raise cur.error("unterminated append")
                if a == "}":
                    break
                if a.startswith("source = ") and a.endswith(" as infinity"):
                    append_source = a[len("source = ") : -len(" as infinity")]
                else:
                    raise cur.error("bad append line %r" % a)
        elif line.startswith("companion ") and line.endswith("{"):
            cname = line.split()[1]
            companions.append((cname, _parse_block_section(cur, rule, universe_spec)))
        elif line.startswith("permutation "):
            rest = line[len("permutation ") :]
            pname, _, cyctext = rest.partition(" = ")
            permutations.append((pname.strip(), parse_cycles(cyctext.strip())))
        elif line.startswith("pairwise = "):
            body = line[len("pairwise = ") :]
            sides, _, value = body.rpartition("->")
            left, _, right = sides.partition("~")
            pairwise.append(
                PairwiseClaim(
                    _parse_side(left.split(), cur.error),
                    _parse_side(right.split(), cur.error),
                    int(value.strip()),
                )
            )
        elif line.startswith("trades ") and line.endswith("{"):
            families.append(_parse_trade_family(line, cur))
        elif line.startswith("claim = "):
            text = line[len("claim = ") :]
            if text == "spectrum-full":
                claim = ("full",)
            elif text.startswith("spectrum-subset "):
                claim = ("subset", _parse_int_set(text[len("spectrum-subset ") :], cur.error))
            elif text.startswith("spectrum-minus "):
                claim = ("minus", _parse_int_set(text[len("spectrum-minus ") :], cur.error))
            elif text == "none":
                claim = ("none",)
            else:
                raise cur.error("bad claim %r" % text)
        elif line.startswith("note = "):
            notes.append(line[len("note = ") :].strip('"'))
        else:
            raise cur.error("unknown entry field %r" % line)
    if universe_spec is None:
        raise cur.error("entry %s lacks a universe" % name)
    return CatalogEntry(
        name=name,
        kind=kind,
        universe_spec=universe_spec,
        rule_text=_rule_render(rule),
        policy=policy,
        base=base,
        readings=tuple(readings),
        groups=tuple(groups),
        unordered_blocks=tuple(unordered),
        sizes=sizes,
        append_source=append_source,
        companions=tuple(companions),
        permutations=tuple(permutations),
        pairwise=tuple(pairwise),
        trade_families=tuple(families),
        claim=claim,
        notes=tuple(notes),
    )


def _parse_erratum(header, cur):
    parts = header.split()
    entry, field_path = parts[1], parts[2]
    printed = adopted = check = ""
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated erratum")
        if line == "}":
            break
        if line.startswith("printed = "):
            printed = line[len("printed = ") :]
        elif line.startswith("adopted = "):
            adopted = line[len("adopted = ") :]
        elif line.startswith("check = "):
            check = line[len("check = ") :]
        else:
            raise cur.error("bad erratum line %r" % line)
    return ErratumRecord(entry, field_path, printed, adopted, check)


def _parse_supplement(header, cur):
    parts = header.split()
    entry = parts[1]
    family = None
    check = ""
    while True:
        line = cur.next_line()
        if line is None:
            raise cur.error("unterminated supplement")
        if line == "}":
            break
        if line.startswith("trades ") and line.endswith("{"):
            family = _parse_trade_family(line, cur)
        elif line.startswith("check = "):
            check = line[len("check = ") :]
        else:
            raise cur.error("bad supplement line %r" % line)
    if family is None:
        raise cur.error("supplement without a trade family")
    return SupplementRecord(entry, family, check)


# ---------------------------------------------------------------------------
# printing (canonical form)


def print_entry(entry: CatalogEntry) -> str:
    out = ["entry %s {" % entry.name]
    out.append("  kind = %s" % entry.kind)
    out.append("  universe = %s" % entry.universe_spec.render())
    if entry.sizes:
        out.append("  sizes = %s" % _render_int_set(entry.sizes))
    if entry.kind in ("directed-design", "dgdd"):
        out.append("  develop = %s" % entry.rule_text)
    if entry.policy is not None:
        out.append("  infinity-policy {")
        for idx, period, table in entry.policy.rules:
            cells = ", ".join("%d -> %+d" % (r, s) for r, s in table)
            out.append("    index %d mod %d: %s" % (idx, period, cells))
        out.append("  }")
    default_rule = entry.rule_text
    if entry.base:
        out.append("  base-blocks {")
        out.extend("    " + _render_base_block(bb, default_rule) for bb in entry.base)
        out.append("  }")
    for rname, blocks in entry.readings:
        out.append("  reading %s {" % rname)
        out.append("    base-blocks {")
        out.extend("      " + _render_base_block(bb, default_rule) for bb in blocks)
        out.append("    }")
        out.append("  }")
    if entry.groups:
        out.append("  groups {")
        out.extend("    " + render_block(g) for g in entry.groups)
        out.append("  }")
    if entry.unordered_blocks:
        out.append("  blocks {")
        for blk in entry.unordered_blocks:
            out.append("    {" + ",".join(map(_point_text, sorted(blk))) + "}")
        out.append("  }")
    if entry.append_source:
        out.append("  append {")
        out.append("    source = %s as infinity" % entry.append_source)
        out.append("  }")
    for cname, blocks in entry.companions:
        out.append("  companion %s {" % cname)
        out.extend("    " + _render_base_block(bb, default_rule) for bb in blocks)
        out.append("  }")
    for pname, cycles in entry.permutations:
        out.append("  permutation %s = %s" % (pname, render_cycles(cycles)))
    for pc in entry.pairwise:
        out.append(
            "  pairwise = %s ~ %s -> %d"
            % (_render_side(pc.left), _render_side(pc.right), pc.value)
        )
    for fam in entry.trade_families:
        head = "  trades %s volume %d count %d" % (fam.name, fam.volume, fam.count)
        if fam.stride != 1:
            head += " stride %d" % fam.stride
        out.append(head + " {")
        for ref in fam.blocks:
            out.append(
                "    block %d %d (%s)"
                % (ref.base_index, ref.offset, ",".join(map(str, ref.reorder)))
            )
        out.append("  }")
    label = entry.claim[0]
    if label == "full":
        out.append("  claim = spectrum-full")
    elif label == "subset":
        out.append("  claim = spectrum-subset %s" % _render_int_set(entry.claim[1]))
    elif label == "minus":
        out.append("  claim = spectrum-minus %s" % _render_int_set(entry.claim[1]))
    else:
        out.append("  claim = none")
    for note in entry.notes:
        out.append('  note = "%s"' % note)
    out.append("}")
    return "\n".join(out) + "\n"


def _point_text(p):
    from .model import render_point

    return render_point(p)


def _render_int_set(values):
    return "{" + ",".join(str(v) for v in sorted(values)) + "}"


def _render_base_block(bb: BaseBlock, default_rule_text: str) -> str:
    text = render_block(bb.block)
    rtext = _rule_render(bb.rule)
    if rtext != default_rule_text:
        if (
            rtext.rsplit(" orbit ", 1)[0] == default_rule_text.rsplit(" orbit ", 1)[0]
            and not isinstance(bb.rule, ExplicitList)
        ):
            text += " orbit %d" % bb.rule.orbit
        else:
            text += " develop %s" % rtext
    return text


# ---------------------------------------------------------------------------
# loading


def data_dir() -> str:
    env = os.environ.get("DIRDESIGN_CATALOG")
    if env:
        return env
    return os.path.join(os.path.dirname(__file__), "data")


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


def load_checksums(root) -> dict:
    path = os.path.join(root, "CHECKSUMS")
    if not os.path.exists(path):
        return {}
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            digest, name = line.split(None, 1)
            out[name.strip()] = digest
    return out


def write_checksums(root) -> None:
    names = sorted(
        os.path.join(dirpath, f)
        for dirpath, _, files in os.walk(root)
        for f in files
        if f.endswith(".cat")
    )
    lines = []
    for path in names:
        rel = os.path.relpath(path, root)
        with open(path) as fh:
            lines.append("%s  %s" % (_sha256(fh.read()), rel))
    with open(os.path.join(root, "CHECKSUMS"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def load_catalog(root=None, check_digests=True) -> Catalog:
    """Load every catalog file under `root`, applying the errata overlay."""
    root = root or data_dir()
    digests = load_checksums(root) if check_digests else {}
    entries = {}
    errata = []
    supplements = []
    paths = sorted(
        os.path.join(dirpath, f)
        for dirpath, _, files in os.walk(root)
        for f in files
        if f.endswith(".cat")
    )
    for path in paths:
        rel = os.path.relpath(path, root)
        with open(path) as fh:
            text = fh.read()
        if digests:
            want = digests.get(rel)
            if want is None:
                raise ChecksumMismatch("%s is not registered in CHECKSUMS" % rel)
            got = _sha256(text)
            if got != want:
                raise ChecksumMismatch("%s digest %s != recorded %s" % (rel, got, want))
        es, er, su = parse_catalog_text(path, text)
        for e in es:
            if e.name in entries:
                raise ParseError(path, 1, "duplicate entry %s" % e.name)
            entries[e.name] = e
        errata.extend(er)
        supplements.extend(su)
    catalog = Catalog(entries, tuple(errata), tuple(supplements))
    for rec in errata:
        _apply_erratum(catalog, rec)
    for rec in supplements:
        _apply_supplement(catalog, rec)
    return catalog


def _apply_erratum(catalog: Catalog, rec: ErratumRecord) -> None:
    if rec.entry not in catalog.entries:
        raise UnknownEntry("erratum targets unknown entry %s" % rec.entry)
    entry = catalog.entries[rec.entry]
    if rec.field_path == "develop":
        _apply_rule_erratum(entry, rec)
    elif rec.field_path == "block":
        _apply_block_erratum(entry, rec)
    elif rec.field_path.startswith("trades "):
        _apply_family_erratum(entry, rec)
    else:
        raise UnknownEntry("unsupported erratum field %s" % rec.field_path)


def _apply_rule_erratum(entry: CatalogEntry, rec: ErratumRecord) -> None:
    if entry.rule_text != rec.printed:
        raise ChecksumMismatch(
            "erratum for %s expects printed rule %r, file has %r"
            % (rec.entry, rec.printed, entry.rule_text)
        )
    err = lambda msg: DesignError(msg)  # noqa: E731 - parse context is gone here
    adopted_rule = _parse_rule(rec.adopted, entry.universe_spec, err)
    printed_rule = _parse_rule(rec.printed, entry.universe_spec, err)
    if rec.check == "count-audit":
        expected = entry.expected_blocks()
        count_printed = len(entry.base) * printed_rule.orbit
        count_adopted = len(entry.base) * adopted_rule.orbit
        if count_printed == expected or count_adopted != expected:
            raise DesignError(
                "erratum justification fails: printed %d, adopted %d, expected %d"
                % (count_printed, count_adopted, expected)
            )
    new_base = tuple(
        BaseBlock(bb.block, adopted_rule) if bb.rule == printed_rule else bb
        for bb in entry.base
    )
    entry.base = new_base
    entry.rule_text = rec.adopted
    entry.provenance = entry.provenance + (("develop", rec.printed),)


def _apply_block_erratum(entry: CatalogEntry, rec: ErratumRecord) -> None:
    printed = parse_block(rec.printed)
    adopted = parse_block(rec.adopted)
    if frozenset(printed) != frozenset(adopted):
        raise DesignError(
            "block erratum for %s must reorder, not replace, points" % rec.entry
        )

    hits = 0

    def fix(blocks):
        nonlocal hits
        out = []
        for bb in blocks:
            if bb.block == printed:
                hits += 1
                out.append(BaseBlock(adopted, bb.rule))
            else:
                out.append(bb)
        return tuple(out)

    entry.base = fix(entry.base)
    entry.readings = tuple((name, fix(blocks)) for name, blocks in entry.readings)
    if hits == 0:
        raise ChecksumMismatch(
            "erratum for %s: printed block %s not found" % (rec.entry, rec.printed)
        )
    entry.provenance = entry.provenance + (("block %s" % rec.adopted, rec.printed),)
    if rec.check == "design-audit":
        entry.pending_checks = entry.pending_checks + ("design-audit",)


def _apply_family_erratum(entry: CatalogEntry, rec: ErratumRecord) -> None:
    name = rec.field_path.split(None, 1)[1]
    target = None
    for fam in entry.trade_families:
        if fam.name == name:
            target = fam
    if target is None:
        raise UnknownEntry("erratum for %s names unknown family %s" % (rec.entry, name))
    if rec.adopted != "removed":
        raise UnknownEntry("family errata only support removal")
    if rec.check == "invalid-trade":
        from .trades import validate_trade

        for i in range(target.count):
            if validate_trade(entry.trade_with(target, i)).passed:
                raise DesignError(
                    "erratum removes %s[%d] of %s, but it is a valid trade"
                    % (name, i, rec.entry)
                )
    entry.trade_families = tuple(f for f in entry.trade_families if f.name != name)
    entry.provenance = entry.provenance + (
        ("trades %s" % name, "removed: %s" % rec.printed),
    )


def _apply_supplement(catalog: Catalog, rec: SupplementRecord) -> None:
    if rec.entry not in catalog.entries:
        raise UnknownEntry("supplement targets unknown entry %s" % rec.entry)
    entry = catalog.entries[rec.entry]
    if rec.check == "trade-valid":
        from .trades import validate_trade

        for i in range(rec.family.count):
            trade = entry.trade_with(rec.family, i)
            report = validate_trade(trade)
            if not report.passed:
                raise DesignError(
                    "supplement %s for %s fails validation" % (rec.family.name, rec.entry)
                )
    entry.trade_families = entry.trade_families + (rec.family,)
    entry.provenance = entry.provenance + (
        ("trades %s" % rec.family.name, "derived, not in the source tables"),
    )


# ---------------------------------------------------------------------------
# verification-facing helpers


def audit_counts(entry: CatalogEntry, reading: str = "") -> tuple:
    """(total developed blocks incl. appended, expected) for the count audit."""
    return entry.orbit_total(reading), entry.expected_blocks()


def verify_entry(entry: CatalogEntry, catalog: Catalog, reading: str = ""):
    """Run the kind-appropriate verifier; returns the VerificationReport."""
    if entry.kind == "directed-design":
        return verify_dd(entry.design(catalog, reading))
    if entry.kind == "dgdd":
        return verify_dgdd(entry.design(catalog, reading), entry.group_partition())
    if entry.kind == "gdd":
        return verify_gdd(entry.unordered_blocks, entry.group_partition(), entry.sizes)
    if entry.kind == "pbd":
        return verify_pbd(entry.unordered_blocks, entry.universe, entry.sizes)
    raise UnknownEntry("entry %s has unknown kind %r" % (entry.name, entry.kind))


def passing_reading(entry: CatalogEntry, catalog: Catalog):
    """First reading whose developed design verifies, or None."""
    for reading in entry.reading_names():
        try:
            if audit_counts(entry, reading)[0] != entry.expected_blocks():
                continue
            if verify_entry(entry, catalog, reading).passed:
                return reading
        except DesignError:
            continue
    return None


def resolve_side(entry: CatalogEntry, catalog: Catalog, side, reading: str = "") -> Design:
    kind, name, perms = side
    if kind == "base":
        design = entry.design(catalog, reading)
    else:
        for cname, blocks in entry.companions:
            if cname == name:
                bbs = BaseBlockSet(entry.universe, blocks, entry.policy)
                design = _develop(bbs)
                break
        else:
            raise UnknownEntry("entry %s has no companion %s" % (entry.name, name))
    for pname in perms:
        design = _apply_permutation(design, _perm_mapping(entry, pname))
    return design


def _perm_mapping(entry: CatalogEntry, pname: str) -> dict:
    for name, cycles in entry.permutations:
        if name == pname:
            return cycles_to_mapping(cycles, entry.universe)
    raise UnknownEntry("entry %s has no permutation %s" % (entry.name, pname))


def _inverse(mapping: dict) -> dict:
    return {v: k for k, v in mapping.items()}


def pair_candidates(entry: CatalogEntry, catalog: Catalog, reading: str = ""):
    """Right-hand designs for pairwise witnesses: companions, permuted and
    reversed variants.  Intersection is invariant under simultaneous
    relabelling, so inverse images of the claimed pairs appear here too."""
    from .model import Design as _D

    base = entry.design(catalog, reading)
    seeds = [("base", base)]
    for cname, blocks in entry.companions:
        bbs = BaseBlockSet(entry.universe, blocks, entry.policy)
        seeds.append(("companion %s" % cname, _develop(bbs)))
    variants = list(seeds)
    for pname, cycles in entry.permutations:
        mapping = cycles_to_mapping(cycles, entry.universe)
        for label, design in seeds:
            variants.append(("%s @ %s" % (label, pname), _apply_permutation(design, mapping)))
            inv = _inverse(mapping)
            if inv != mapping:
                variants.append(
                    ("%s @ %s^-1" % (label, pname), _apply_permutation(design, inv))
                )
    from .model import reverse as rev_block

    for label, design in list(variants):
        reversed_blocks = frozenset(rev_block(b) for b in design.blocks)
        variants.append(("reverse(%s)" % label, Design(design.universe, reversed_blocks, design.params)))
    seen = set()
    out = []
    for label, design in variants:
        key = design.blocks
        if key in seen:
            continue
        seen.add(key)
        out.append((label, design))
    return out


def build_problem(entry: CatalogEntry, catalog: Catalog, reading: str = "") -> SpectrumProblem:
    """Assemble the spectrum planner's resources for one entry."""
    base = entry.design(catalog, reading)
    families = [(fam.name, entry.family_trades(fam)) for fam in entry.trade_families]
    alternatives = _append_alternatives(entry, catalog)
    candidates = pair_candidates(entry, catalog, reading)
    verifier = None
    if entry.kind == "dgdd":
        partition = entry.group_partition()
        verifier = lambda d: verify_dgdd(d, partition)  # noqa: E731
    return SpectrumProblem(
        base=base,
        families=families,
        alternatives=alternatives,
        pair_candidates=candidates,
        verifier=verifier,
    )


def _append_alternatives(entry: CatalogEntry, catalog: Catalog):
    if not entry.append_source:
        return []
    sub = catalog.entry(entry.append_source)
    sub_base = sub.design(catalog)
    mapping = {p: (INFINITY, p[1]) for p in sub_base.universe}
    appended = frozenset(tuple(mapping[p] for p in b) for b in sub_base.blocks)
    alts = {}
    for label, cand in pair_candidates(sub, catalog):
        shared = len(sub_base.blocks & cand.blocks)
        volume = len(sub_base.blocks) - shared
        if volume == 0 or volume in alts:
            continue
        swapped = frozenset(tuple(mapping[p] for p in b) for b in cand.blocks)
        alts[volume] = Trade(
            appended - swapped, swapped - appended, "swap%d" % shared
        )
    return [alts[v] for v in sorted(alts)]


def entry_summary(catalog: Catalog, name: str) -> tuple:
    """Deterministic (label, value) summary rows for one entry."""
    entry = catalog.entry(name)
    v = len(entry.universe)
    rows = [("entry", name), ("kind", entry.kind), ("v", v)]
    rows.append(("expected-blocks", entry.expected_blocks()))
    for reading in entry.reading_names():
        label = "orbit-total" + ("[%s]" % reading if reading else "")
        rows.append((label, entry.orbit_total(reading)))
    for fam in entry.trade_families:
        rows.append(("trades %s" % fam.name, "volume %d x %d" % (fam.volume, fam.count)))
    label = entry.claim[0]
    if label in ("subset", "minus"):
        rows.append(("claim", "%s %s" % (label, _render_int_set(entry.claim[1]))))
    else:
        rows.append(("claim", label))
    for fieldname, printed in entry.provenance:
        rows.append(("overlay %s" % fieldname, printed))
    return tuple(rows)
