"""Delayed-choice interferometry without quantum control: simulation and witnesses."""

__version__ = "0.1.0"

from .state import (  # noqa: E402
    ENTANGLER,
    HYBRID,
    PATH2,
    ElementUnitary,
    PureState,
    QdcError,
    SpaceDescriptor,
    apply,
    inner,
    make_state,
)
from .circuits import EntanglerParams, HybridParams, QdcParams, entangler_state, hybrid_state, qdc_state  # noqa: E402
from .analysis import concurrence, detect_prob, visibility, visibility_empirical, wp_decompose  # noqa: E402
from .witness import PamSettings, ProbTable, WitnessResult, linear_witness, nonlinear_witness, prob_table  # noqa: E402
from .classical import ClassicalStrategy, MixedStrategy, classical_max, enumerate_strategies, strategy_table  # noqa: E402
from .sampling import CountTable, NoiseConfig, estimate_table, estimate_witness, sample_counts  # noqa: E402
