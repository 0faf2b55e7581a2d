"""Forward-error-correction laboratory for block Markov superposition
transmission of repetition/uncoded (RUN) codes over modulo-q groups.

Subpackages cover the signal sets (:mod:`~bmstrun.constellations`), the
basic code (:mod:`~bmstrun.runcode`), channel models
(:mod:`~bmstrun.channels`), distance-enumerator bounds
(:mod:`~bmstrun.analysis`), constrained-capacity limits
(:mod:`~bmstrun.capacity`), the coupled encoder/decoder
(:mod:`~bmstrun.bmst`), and the Monte Carlo sweep harness
(:mod:`~bmstrun.sim`).  The ``bmstrun`` console script exposes the
construct / sweep / bounds / capacity / selftest subcommands.
"""

__version__ = "0.1.0"

from .constellations import (  # noqa: F401
    LabeledConstellation,
    NoiseScale,
    builtin,
    load_constellation,
    load_labeling,
    sigma_from_snr,
)
from .runcode import (  # noqa: F401
    RunSpec,
    apply_dither,
    channel_priors,
    hard_decision,
    run_encode,
    siso_decode,
    time_sharing_params,
)
from .analysis import (  # noqa: F401
    EdefPolynomial,
    binary_memory_rule,
    edef_power,
    edef_single,
    genie_bound,
    qfunc,
    run_ser_bound,
    select_memory,
    union_bound_rep,
)
from .capacity import CapacityQuery, iud_capacity, shannon_limit  # noqa: F401
from .channels import (  # noqa: F401
    ChannelRealization,
    channel_evidence,
    transmit_awgn,
    transmit_rayleigh,
)
from .bmst import (  # noqa: F401
    BmstSpec,
    SlidingWindowDecoder,
    bmst_encode,
    effective_rate,
    make_interleavers,
    node_add,
    node_equal,
    swd_decode,
)
from .sim import (  # noqa: F401
    SimConfig,
    SimResult,
    construct_code,
    emit_csv,
    load_config,
    parse_config,
    read_result,
    run_sweep,
)
