"""Average-consensus strategies with bounded in-degree: block Kronecker (de
Bruijn) and Cayley constructions, spectra, LQR costs and simulation."""

from .errors import DivergenceError, DomainError, KronsensusError, NumericError, SizeError, ValidationError
from .graphs import (
    DegreeProfile,
    DirectedGraph,
    cayley_graph,
    communication_graph,
    de_bruijn_graph,
    degree_profile,
    is_connected,
    is_strongly_connected,
)
from .groups import AbelianGroup
from .lqr import (
    CostReport,
    cost_report,
    j1_bounds,
    j1_exact,
    j2_bounds,
    j2_exact,
    j_closed_form_deadbeat,
    j_monte_carlo,
    j_riccati_unconstrained,
)
from .matlin import DigitIndex, Spectrum, block_kron, digit_rotate_left, eigenvalues, kron, mat_pow
from .sim import convergence_steps, replicate_figure, simulate
from .spectral import (
    SpectrumReport,
    cayley_spectrum_dft,
    compare_families,
    essential_spectral_radius,
    kron_ess_radius,
)
from .strategies import (
    Family,
    Strategy,
    ValidationReport,
    block_kron_strategy,
    cayley_strategy,
    deadbeat_seed,
    min_steps_bound,
    validate_consensus,
)

__version__ = "0.1.0"
