"""Adaptive local VAR toolkit: estimation, interval detection, spillover."""

try:
    from . import _localvar as _core
except ImportError:  # plain CMake builds leave the extension next to build/
    import _localvar as _core

__all__ = [
    "AdaptiveResult",
    "CriticalValues",
    "IntervalGrid",
    "LocalVarError",
    "Panel",
    "SpilloverTable",
    "VarFit",
    "VarParams",
    "adaptive_search",
    "adaptive_series",
    "calibrate",
    "crisis_indicator",
    "first_admissible_tau",
    "fit_var",
    "gfevd",
    "ingest_csv",
    "is_stable",
    "load_params",
    "log_likelihood",
    "save_params",
    "simulate_var",
    "unconditional_mean",
]

globals().update({name: getattr(_core, name) for name in __all__})
