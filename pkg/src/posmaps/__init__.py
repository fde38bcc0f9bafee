"""Positive maps on qubits: S-lemma positivity test, operator scaling and
explicit Kraus/co-Kraus decompositions with at most four terms."""

__version__ = "0.1.0"

from .decomp import (  # noqa: E402
    Decomposition,
    bistochastic_decompose,
    decompose,
    decompose_general,
    spinor_lift,
    verify_decomposition,
)
from .errors import *  # noqa: E402,F401,F403
from .extremal import ExtremalVerdict, build_perturbation, classify, kadison_extract  # noqa: E402
from .positivity import is_ccp, is_cp, is_interior, is_positive, property_report  # noqa: E402
from .ppt import partial_transpose, separability_verdict  # noqa: E402
from .qmap import (  # noqa: E402
    QubitMap,
    adjoint,
    choi,
    compose,
    conjugation_map,
    depolarizing_map,
    from_kraus,
    identity_map,
    random_map,
    transpose_map,
)
from .scaling import scale_to_bistochastic  # noqa: E402
from .slemma import decide, mu_search, reformulated_decide  # noqa: E402
