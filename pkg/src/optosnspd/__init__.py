"""Deterministic co-simulator for an all-optically biased and read-out SNSPD.

Modules:
  photodiode - cryogenic photodiode source and load-line analysis
  snspd      - latched-nanowire hotspot model and joint equilibrium
  modulator  - Michelson intensity modulator and optical budget
  circuit    - time-domain co-simulation and readout chain
  stats      - Monte Carlo photon counting and histograms
  fitkit     - sine V_pi fitting and Fabry-Perot loss extraction
  cli        - scenario runner
"""

from .circuit import (
    CircuitState,
    EdgeMetrics,
    OpticalDrive,
    ReadoutParams,
    TimeTrace,
    edge_metrics,
    readout_chain,
    run_trace,
)
from .errors import (
    ContractError,
    ContrastInconsistencyError,
    DomainError,
    FitFailureError,
    NumericalError,
    RankDeficiencyError,
)
from .fitkit import SineFitResult, SweepData, fabry_perot_loss, fit_sine_vpi
from .modulator import (
    ModulatorParams,
    OpticalBudget,
    coupling_budget,
    modulation_strength,
    small_signal_response,
    transmission,
    vpi_at_temperature,
)
from .photodiode import (
    OperatingPoint,
    PhotodiodeParams,
    load_sweep,
    max_power_point,
    photocurrent,
    solve_operating_point,
    source_current_at_voltage,
)
from .snspd import (
    Equilibrium,
    HotspotState,
    NanowireParams,
    absorb_photon,
    detection_efficiency,
    equilibrium_point,
    hotspot_growth_rate,
    reset,
)
from .stats import (
    CountHistogram,
    PeakStats,
    PhotonSource,
    build_histogram,
    peak_stats,
    run_counting_experiment,
    sample_pulse_photons,
    subtract_background,
)

__version__ = "0.1.0"
