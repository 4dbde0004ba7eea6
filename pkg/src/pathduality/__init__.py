"""Bounded path duality toolkit: structures, pathwidth, linear Datalog, Krom SNP, pebble-relation games."""

from .structures import (
    RelationalStructure,
    StructureError,
    Vocabulary,
    all_homomorphisms,
    disjoint_union,
    find_homomorphism,
    gaifman_graph,
    induced_substructure,
    is_homomorphism,
    make_structure,
    validate_structure,
)
from .pathwidth import (
    PathDecomposition,
    WidthPair,
    canonicalize_decomposition,
    check_path_decomposition,
    enumerate_structures,
    find_decomposition,
    minimal_widths,
)
from .logic import check_restriction, compile_decomposition_to_formula, compile_sentence, evaluate, theta_query
from .datalog import (
    LinearDatalogProgram,
    accepts,
    derivation_witness,
    immediate_consequence,
    least_fixpoint,
    non_two_colorability,
)
from .snp import KromSNPSentence, datalog_to_snp, evaluate_snp, snp_to_datalog
from .game import (
    GameConfiguration,
    canonical_blow,
    canonical_shrink,
    check_path_duality_bounded,
    decide_game,
    extract_obstruction,
)
from .nl_solvers import (
    b_2sat,
    build_conflict_graph,
    classify_ihsb,
    classify_implicational,
    directed_cycle,
    encode_2sat,
    implicational_obstruction,
    k_clique,
    oriented_path,
    solve_ihsb,
    solve_implicational,
    sym_cycle,
)

__version__ = "0.1.0"
