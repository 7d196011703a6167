"""Packing colorings of square grids and tori, encoded as SAT.

The public surface re-exported here covers the usual workflow::

    from packcolor import GridSpec, EncodeRequest, encode_commander, solve_embedded

Each submodule documents its own contracts.
"""

from packcolor.analysis import (
    Fixture,
    FrequencyTable,
    blow_up,
    brute_force_search,
    frequency,
    is_monotone,
    load_fixture,
    monotonicity_breaks,
    strip_colors,
    transpose,
)
from packcolor.cnfio import (
    SolveOutcome,
    Status,
    decode_model,
    parse_solver_output,
    read_dimacs,
    write_dimacs,
)
from packcolor.encoder import (
    CnfFormula,
    EncodeRequest,
    Scheme,
    VarMap,
    default_group_size,
    encode,
    encode_basic,
    encode_commander,
)
from packcolor.grid import (
    Cell,
    Coloring,
    GridSpec,
    Topology,
    Verdict,
    Violation,
    bfs_distance_oracle,
    distance,
    format_grid,
    parse_grid,
    verify_packing,
)
from packcolor.solver import Limits, enumerate_models, solve_embedded, solve_external, solve_portfolio

__version__ = "0.1.0"
