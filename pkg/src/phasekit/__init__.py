"""phasekit: partial-wave phase shifts by the variable phase approach.

The library computes the absolutely-defined phase shift delta_ell(k) --
the r -> infinity limit of a local phase function that starts at zero at
the origin and is followed continuously, never modulo pi -- together
with the local amplitude, Jost-function modulus, scattering length,
low- and high-energy asymptotics, and rigorous majorant envelopes.
"""

__version__ = "0.1.0"

from .potentials import (  # noqa: F401
    OriginClass,
    Potential,
    TailClass,
    barrier,
    centrifugal_plus,
    exponential,
    from_spec,
    gaussian_well,
    inverse_square,
    moments,
    power_origin,
    power_singular,
    square_well,
    tabulated,
    tail_bound,
    yukawa,
)
from .specfun import FreePair, riccati_pair, riccati_trig  # noqa: F401
from .radial import (  # noqa: F401
    Channel,
    NormConvention,
    RadialSolution,
    SolveError,
    SolverConfig,
    solve_regular,
    solve_singular,
    zero_energy_singular,
)
from .phasefunc import (  # noqa: F401
    PhaseMethod,
    PhaseProfile,
    amplitude_from_solution,
    local_phase_from_solution,
    solve_phase_ode,
    tail_correction,
)
from .absolute import (  # noqa: F401
    Formula,
    NotConvergedError,
    PhaseResult,
    jost_modulus,
    phase_shift,
    phase_shift_volterra,
)
from .iterate import (  # noqa: F401
    MajorantProfile,
    RiccatiBound,
    majorant,
    majorant_bound_l1,
    picard_phase,
    riccati_bound,
    sine_bound_constant,
)
from .observables import (  # noqa: F401
    AsymptoticFit,
    LevinsonResult,
    ScatteringLength,
    count_zero_energy_nodes,
    high_energy_fit,
    levinson_check,
    low_energy_2d_scan,
    power_law_fit,
    relative_phase,
    scattering_length,
    titchmarsh_fit,
    titchmarsh_predict,
)
