"""Finite-state Markov chain mixing toolkit.

Chains, information divergences to stationarity, spectral and functional
constants, mixing-time curves, and cutoff diagnosis for parametrized chain
families.
"""

from .audit import AuditReport, run_audit
from .chains import (
    FiniteChain,
    GeneratorView,
    ProductChain,
    adjoint,
    build_chain,
    dirichlet_form,
    is_normal,
    is_reversible,
    lazify,
    load_chain,
    product_chain,
    semigroup_at,
)
from .cutoff import (
    ChainFamily,
    CutoffReport,
    FamilyTable,
    Thresholds,
    TypeClassification,
    chain_family,
    classify_types,
    cutoff_diagnosis,
    family_profile,
)
from .divergences import (
    Alpha,
    Bhattacharyya,
    ChiP,
    ChiSquare,
    CustomF,
    DivergenceSpec,
    Hellinger2,
    JensenShannon,
    KL,
    LeCam,
    Lp,
    Renyi,
    RenyiInf,
    ReverseRenyiInf,
    Separation,
    TV,
    conjugate_bound_constant,
    f_divergence,
    fpq_membership,
    pointwise_divergence,
    renyi,
    tv_type_bounds,
    worst_case,
)
from .errors import BadChainFile, CutoffLabError
from .expr import parse_expression
from .functional import (
    FunctionalConstantEstimate,
    lsi_lower_bound,
    monotonicity_audit,
    nonlinear_constant,
)
from .mixing import (
    DivergenceCurve,
    MixingTimeResult,
    alpha_renyi_mixing_identity,
    curve_from_chain,
    curve_from_function,
    mixing_time,
    renyi_halving_comparison,
)
from .spectral import (
    PerturbationCertificate,
    SpectralSummary,
    eigenvalue_lower_bounds,
    operator_norm_deviation,
    perturbation_certificate,
    qab_check,
    qab_minimal_a,
    spectral_summary,
)
from .zoo import (
    HypercubeMember,
    PakMember,
    ProductExampleMember,
    ZooFamily,
    default_pak_c,
    default_product_p,
    get_family,
    pak_identity_report,
    pak_transform,
)

__version__ = "0.1.0"
