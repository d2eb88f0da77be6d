"""Exact formal geometric quantization of fully toric b^m-symplectic manifolds.

The manifold is described combinatorially (pieces of ``M \\ Z`` with compact
moment regions, Z components with collar data and leaf polytopes); the
quantization is an exact virtual torus module, a finite weight map plus
finitely many constant-value lattice rays.
"""

from .errors import (
    BmqError,
    FinitenessViolation,
    NonOrientableError,
    NonProperRestrictionError,
    OverlapError,
    SpecError,
    UnboundedError,
)
from .laurent import (
    CollarFormData,
    LaurentLogFn,
    derivative,
    escape_direction,
    hamiltonian_check,
    mazzeo_melrose_decompose,
    moment_from_form,
    monotonicity_threshold,
)
from .lattice import (
    Halfspace,
    HPolytope,
    Prism,
    enumerate_lattice_points,
    generic_shift,
    polytope_nonempty,
    primitive,
    prism_first_slab,
    transverse_functional,
)
from .model import (
    ManifoldSpec,
    Piece,
    ValidationReport,
    ZComponent,
    check_integrality,
    delzant_check,
    propagate_signs,
    validate_spec,
)
from .quantize import (
    check_asymptotics,
    check_finiteness,
    end_contribution,
    piece_contribution,
    qr_check,
    quantize,
    stages_check,
    z_cancellation_check,
)
from .virtmod import (
    AsymptoticProfile,
    Infinite,
    Ray,
    VirtualTModule,
    add,
    asymptotic_profile,
    canonicalize,
    dim,
    multiplicity,
    pair_with_finite,
    restrict,
)

__version__ = "0.1.0"
