"""flyq: simulation and pulse design for flying-qubit control systems.

The toolkit reduces the driven-emitter/waveguide dynamics to a low-dimensional
non-unitary propagator plus quantum-jump amplitude chains, computes the
multi-photon output state, composes cascaded systems for non-vacuum inputs,
and optimizes control pulses against photon-emission objectives.
"""

from .analytic import (
    RectangularPulseParams,
    StepSchedule,
    StimulatedEmissionParams,
    rect_pulse_amplitudes,
    spontaneous_packet,
    stimulated_two_photon,
    stimulated_two_photon_compact,
)
from .errors import (
    CapacityError,
    ConditioningError,
    DimensionError,
    DivergenceError,
    FlyqError,
    SingularMatrixError,
    UnsupportedRegimeError,
    ValidationError,
)
from .network import (
    CascadedSystem,
    SourceDesign,
    design_absorber,
    design_source,
    series_product,
    transformation_scenario,
)
from .operators import (
    ControlSchedule,
    Impulse,
    Segment,
    SLHSystem,
    Waveform,
    adjoint,
    matmul,
    pauli_ops,
    qubit_system,
    solve,
)
from .optimize import (
    GAConfig,
    GAResult,
    Objective,
    PulseParametrization,
    PulseScenario,
    evaluate_objective,
    run_ga,
)
from .propagator import (
    PropagatorTable,
    dressed_coupling,
    effective_hamiltonian,
    green,
    propagate,
)
from .wavepacket import (
    ProbabilityLadder,
    WavepacketTensor,
    marginal_shape,
    output_amplitudes,
    photon_probabilities,
)

__version__ = "0.1.0"
