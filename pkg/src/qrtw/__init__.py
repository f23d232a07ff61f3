"""Resonant transmission of a two-channel lattice walk through a pair
of identical coin defects, solved four independent ways: in closed
form, as a linear system, as a bounce series, and by direct time
stepping.  A delta-potential chain maps onto the same walk, giving the
transmission spectrum and its perfect-transmission wave numbers."""

from .coin import (
    BetaDecomposition,
    Coin,
    beta_decompose,
    coin_from_json,
    coin_to_json,
    determinant,
    free_coin,
    hadamard,
    half_wave_plate,
    identity_coin,
    make_coin,
    unitarity_residual,
)
from .errors import (
    DegenerateResonance,
    DivergentSeries,
    EdgeOutOfWindow,
    FullReflector,
    InvalidWaveNumber,
    MarginViolation,
    ModelError,
    NoConvergence,
    NotUnitary,
    NumericalDegeneracy,
    QrtwError,
    SingularSystem,
    TrivialBarrier,
    UsageError,
    WindowTooSmall,
)
from .evolution import (
    ConvergenceReport,
    EvolutionState,
    default_max_steps,
    default_window,
    from_profile,
    init_lattice,
    norm_check,
    run_to_convergence,
    step,
)
from .qgraph import (
    EdgeWave,
    GraphParams,
    ResonanceSet,
    SpectrumSample,
    edge_wave,
    edge_wavefunction,
    find_resonances,
    spectrum_from_csv,
    spectrum_scan,
    spectrum_to_csv,
    to_tunneling_config,
    transmission_at_k,
    vertex_coin,
)
from .scattering import (
    AmplitudeProfile,
    Injection,
    Method,
    StationarySolution,
    TunnelingConfig,
    build_profile,
    config_from_json,
    config_to_json,
    flux_balance,
    profile_from_csv,
    profile_max_difference,
    profile_to_csv,
    resonance_residual,
    solve_closed_form,
    solve_general,
    stationary_measure,
    t_magnitude_via_beta,
)
from .series import (
    MAX_TERMS,
    SeriesResult,
    t_series,
    t_series_limit,
    transmitted_tail_phase,
)

__version__ = "0.1.0"

__all__ = [
    "AmplitudeProfile",
    "BetaDecomposition",
    "Coin",
    "ConvergenceReport",
    "DegenerateResonance",
    "DivergentSeries",
    "EdgeOutOfWindow",
    "EdgeWave",
    "EvolutionState",
    "FullReflector",
    "GraphParams",
    "Injection",
    "InvalidWaveNumber",
    "MAX_TERMS",
    "MarginViolation",
    "Method",
    "ModelError",
    "NoConvergence",
    "NotUnitary",
    "NumericalDegeneracy",
    "QrtwError",
    "ResonanceSet",
    "SeriesResult",
    "SingularSystem",
    "SpectrumSample",
    "StationarySolution",
    "TrivialBarrier",
    "TunnelingConfig",
    "UsageError",
    "WindowTooSmall",
    "beta_decompose",
    "build_profile",
    "coin_from_json",
    "coin_to_json",
    "config_from_json",
    "config_to_json",
    "default_max_steps",
    "default_window",
    "determinant",
    "edge_wave",
    "edge_wavefunction",
    "find_resonances",
    "flux_balance",
    "free_coin",
    "from_profile",
    "hadamard",
    "half_wave_plate",
    "identity_coin",
    "init_lattice",
    "make_coin",
    "norm_check",
    "profile_from_csv",
    "profile_max_difference",
    "profile_to_csv",
    "resonance_residual",
    "run_to_convergence",
    "solve_closed_form",
    "solve_general",
    "spectrum_from_csv",
    "spectrum_scan",
    "spectrum_to_csv",
    "stationary_measure",
    "step",
    "t_magnitude_via_beta",
    "t_series",
    "t_series_limit",
    "to_tunneling_config",
    "transmission_at_k",
    "transmitted_tail_phase",
    "unitarity_residual",
    "vertex_coin",
]
