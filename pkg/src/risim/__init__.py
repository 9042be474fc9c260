"""Monte-Carlo outage simulator for surface-assisted links with discrete phase shifts."""

from ._version import __version__  # noqa: F401

from .channel import (  # noqa: E402,F401
    PERFECT,
    ChannelRealization,
    RngStream,
    SystemConfig,
    cascade,
    draw_realization,
)
from .link import (  # noqa: F401
    aggregate,
    bound_l2_lambda,
    bound_l3_lower,
    direct_snr_bounds,
    outage_indicator,
    received_snr,
)
from .montecarlo import (  # noqa: F401
    EventSpec,
    OutageEstimate,
    ResourceGuardError,
    estimate_conditional_outage,
    estimate_outage,
    event_probability,
    lower_bound_outage,
    measure_event_frequency,
    wilson_interval,
)
from .quantizer import (  # noqa: F401
    HIGH,
    LOW,
    PhaseCodebook,
    conditional_phase_error,
    quantize,
    quantize_phases,
    sample_phase_error,
)
from .specfun import (  # noqa: F401
    SeriesAccuracy,
    SeriesConvergenceError,
    bessel_k1,
    cdf_gsq,
    tilde_k1,
    tilde_k1_derivative,
)
from .analysis import (  # noqa: F401
    AllCensoredError,
    FitError,
    SlopeEstimate,
    SweepResult,
    fit_diversity,
    reference_curves,
    sweep,
)
