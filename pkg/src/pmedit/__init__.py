"""Finitely presented multi-parameter persistence modules, edits and interleavings."""
from pmedit.barcodes import Barcode, barcode_1d, bottleneck
from pmedit.constructions import (
    HypothesisViolation,
    InterleavingPresentationPair,
    Schedule,
    easy_edit,
    easy_edit_claims,
    family_at,
    interleaving_to_path,
    pair_endpoint_check,
    radius_at,
    schedule,
    translation_bijection,
)
from pmedit.edits import (
    EditPath,
    EditRecord,
    IndexedModule,
    NotFound,
    component,
    edit_to_free,
    find_natural_iso,
    identity_edit,
    path_cost,
    validate_edit,
    validate_path,
)
from pmedit.exactlin import BACKEND
from pmedit.interleaving import (
    BudgetExceeded,
    InterleavingWitness,
    interleave_from_edit,
    relax_witness,
    search_interleaving,
    verify_interleaving,
)
from pmedit.order import (
    BOTTOM,
    FinitePoset,
    Grid,
    MonotoneMap,
    check_galois,
    compose_connection,
    distortion,
    injectivity_radius,
    is_grid_morphism,
    is_js_object,
    left_adjoint,
    right_adjoint,
    smallest_grid,
)
from pmedit.presentations import (
    InvalidBijection,
    Presentation,
    PresentationBijection,
    bijection_cost,
    check_essentially_same,
    evaluate,
    free_module,
    structure_map,
    support_grid,
    translate,
)
from pmedit.report import ValidationReport

__version__ = "0.1.0"
