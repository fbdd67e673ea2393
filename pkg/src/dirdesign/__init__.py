"""Directed 2-(v,5,1) block designs: development, verification, trades."""

from .model import (
    Design,
    DesignError,
    block_count,
    block_from_pairs,
    make_design,
    ordered_pairs,
    pair_multiset,
    parse_block,
    render_block,
    reverse,
)
from .develop import apply_permutation, develop
from .verify import intersection, verify_dd, verify_dgdd, verify_gdd, verify_pbd
from .trades import (
    Trade,
    apply_trade,
    jd,
    possible_intersections,
    realize_spectrum,
    run_schedule,
    validate_trade,
)
from .catalog import build_problem, entry_summary, load_catalog

__version__ = "0.1.0"
