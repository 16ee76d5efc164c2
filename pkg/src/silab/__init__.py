"""Symplectic index laboratory.

Maslov-type and omega-indices of convex symplectic paths, splitting numbers,
mean indices, closed characteristics on convex hypersurfaces through the dual
action functional, and instance checks of the index-theoretic orbit count.
"""
from .bodies import ConvexBody, fenchel_conjugate, hamiltonian, hamiltonian_grad, hamiltonian_hessian
from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ClassificationError,
    InputError,
    InternalConsistencyError,
    NumericalError,
    ResolutionError,
    SILError,
)
from .index import (
    IndexPair,
    IndexProfile,
    OmegaGrid,
    OmegaIndexCache,
    check_positive_lower_bound,
    ekeland_index,
    iterated_index,
    maslov_index,
    mean_index,
    nullity,
    omega_index,
)
from .kernels import BACKEND
from .orbits import (
    ClosedCharacteristic,
    DualLoop,
    action,
    characteristic_to_u,
    classify_symmetry,
    dual_action,
    ellipsoid_characteristics,
    find_critical_points,
    find_orbits,
    u_to_characteristic,
)
from .splitting import (
    SplittingPair,
    SplittingProfile,
    bott_splitting_check,
    krein_sum_bound,
    lemma41_check,
    splitting_numbers,
)
from .symplectic import (
    LinearSystem,
    SymplecticPath,
    integrate_fundamental,
    iterate_path,
    linearize_orbit,
    validate_symplectic,
)
from .verifier import (
    count_theorem_check,
    covering_injection_check,
    index_intervals,
    index_jump_search,
    prepare_orbit,
    symmetric_halfpath_check,
)

__version__ = "0.1.0"
