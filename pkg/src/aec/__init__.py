"""Landauer energy accounting for finite automata over regular languages."""

from .automata import (
    Dfa,
    DfaError,
    InDegreeProfile,
    RunTrace,
    accepts,
    equivalent,
    fingerprint,
    in_degree_profile,
    is_group_language,
    is_reversible_dfa,
    minimize,
    parse_dfa,
    renumber_canonical,
    run_trace,
    serialize_dfa,
    validate_dfa,
)
from .energy import (
    Distribution,
    EnergyCurve,
    RestrictedProfile,
    bits_to_joules,
    energy_complexity,
    energy_curve,
    energy_rate,
    expected_step_energy,
    lower_bound_margin,
    restricted_profile,
    run_energy,
    stationary,
)
from .qfa import (
    NotZeroError,
    Qfa,
    QfaError,
    accept_prob,
    branch_run,
    extract_dfa,
    from_dfa,
    gen_M2,
    gen_Mj,
    is_zero_error,
    max_error,
    parse_qfa,
    serialize_qfa,
    step_energy,
    validate_qfa,
)
from .transforms import BagPlan, cycle_expand, gen_LI, gen_Lbb, gen_Lj, rebalance, tree_expand

__version__ = "0.1.0"
