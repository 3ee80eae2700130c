"""Exact growth computations and structure certificates for discrete groups.

Sets of group elements, their products and powers are computed exactly;
every structural claim (covers, approximate groups, separated translates)
comes with a certificate that can be re-checked by brute-force membership.
"""

from .covering import (
    ApproxGroupCertificate,
    CoverCertificate,
    approx_power_growth_check,
    ruzsa_cover,
    tripling_to_approx,
    verify_approx_group,
    verify_cover,
)
from .errors import (
    ApproxGrowthError,
    ConfigError,
    DomainError,
    ElementParseError,
    PreconditionError,
    ResourceError,
    SoundnessError,
)
from .groups import (
    Cyclic,
    Dihedral,
    DirectProduct,
    Element,
    FreeGroup,
    Group,
    Heisenberg,
    IntegerLattice,
    Lamplighter,
    parse_element,
    parse_group,
)
from .pipeline import Instance, PipelineReport, fuzz, parse_instance, run_corpus, verify_report, verify_theorem
from .sets import (
    ElementSet,
    GrowthProfile,
    PowerChain,
    ball,
    convolution,
    convolution_value,
    doubling_ratio,
    energy,
    growth_profile,
    limits,
    pluennecke_fuzz,
    product,
    product_chain_check,
    standard_generating_set,
)
from .structure import (
    DisjointTranslatesCertificate,
    bounded_representatives,
    disjointify,
    doubling_to_approx,
    high_multiplicity_set,
    local_coset_check,
    propagate_inclusion,
    verify_disjoint_translates,
)

__version__ = "0.1.0"
