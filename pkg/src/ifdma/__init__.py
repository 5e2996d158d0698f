"""IFDMA multiplexing inside a single Cooley-Tukey transform.

Modules:

* :mod:`ifdma.spectral` - staged FFT, bit/digit reversal, naive DFT oracle
* :mod:`ifdma.allocation` - bin allocation and Multi-IFDMA partitions
* :mod:`ifdma.conventional` - reference per-stream transmitters and receiver
* :mod:`ifdma.unified` - tapping-bus detectors and the unified multiplexer
* :mod:`ifdma.waveform` - PAPR / BER Monte-Carlo experiments
* :mod:`ifdma.complexity` - multiplier and switch counts
"""

__version__ = "0.1.0"

from .allocation import (
    AllocationError,
    MultiStreamAllocation,
    RequestProfile,
    StreamAllocation,
    allocate,
    allocate_composite,
    check_feasibility,
    group_by_node,
    minimal_partition,
    stream_for_subcarriers,
)
from .conventional import ChannelModel, rx_conventional, tx_aggregate, tx_freq_domain, tx_time_domain
from .spectral import DecompositionPlan, MultiplyCounter, dft_naive, fft, fft_reflected
from .unified import (
    TapSchedule,
    build_schedule,
    prop2_inputs,
    unified_detect,
    unified_detect_nofde,
    unified_multiplex,
    unified_receive,
)
