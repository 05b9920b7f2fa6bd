"""Markov-Gibbs measures on full shifts, pushforwards under symbol
amalgamation, and induced potentials with certified truncation error."""

from .bounds import (
    BudgetConstants,
    DecayCertificate,
    ErrorBudget,
    budget_constants,
    certified_variation_envelope,
    decay_certificate,
    epsilon_budget,
    exact_range_certificate,
    limit_bar,
    pressure_gap_bound,
    r_star,
    schedule_depth,
)
from .errors import (
    AlphabetMismatchError,
    CertificationError,
    EnumerationCapError,
    HiddenGibbsError,
    NotPrimitiveError,
    RowAllowabilityError,
    SpecValidationError,
)
from .markov import (
    GibbsReport,
    MarkovGibbsMeasure,
    TransferMatrix,
    build_transfer,
    gibbs_inequality_check,
    measure_from,
    periodic_measure,
    pressure_periodic,
    pressure_trace,
)
from .oracle import (
    OracleConfig,
    oracle_cylinder,
    oracle_lumped_chain,
    oracle_pushforward,
    oracle_pushforward_table,
    stationary_distribution,
)
from .potentials import (
    Holder,
    LocallyConstantPotential,
    Polynomial,
    Subexponential,
    Summable,
    VariationBoundedPotential,
    VariationProfile,
    approximant,
    first_symbol_weighted,
    geometric_tail,
    normalize,
    table_family,
    variation_profile,
)
from .projective import (
    IndexedMatrix,
    PerronData,
    SimplexVector,
    hilbert_metric,
    normalized_product,
    perron_data,
    phi_of,
    primitivity_index,
    project_apply,
    tau_of,
)
from .pushforward import (
    InducedPotentialEvaluator,
    InducedValue,
    PushforwardGibbsReport,
    PushforwardMeasure,
    RestrictedMatrixFamily,
    TailVector,
    VariationReport,
    build_family,
    exact_evaluator,
    gibbs_check_pushforward,
    induced_potential_exact_r,
    induced_potential_general,
    pushforward_from_potential,
    pushforward_measure,
    sup_induced_value,
    tail_vector,
    variation_report,
)
from .symbols import (
    Alphabet,
    AmalgamationMap,
    Word,
    enumerate_words,
    periodic_orbit_words,
)

__version__ = "0.1.0"
