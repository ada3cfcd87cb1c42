"""Geometric phase of a two-state nuclear wavepacket (linear E x e model)."""

from ._core import (
    ConfigError,
    Gauge,
    Grid2D,
    InitKind,
    ModelParams,
    NumericalAbort,
    Observables,
    PathError,
    RunConfig,
    Sampling,
    SpinorField,
    SplitOperator,
    __version__,
    adiabatic_populations,
    bloch_loop_phase,
    circle_phase,
    constant_latitude_phase,
    diagnose_precision,
    initial_center,
    initial_state,
    load_config,
    loop_phase_increments,
    parse_config,
    run,
    wrap_pi,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
