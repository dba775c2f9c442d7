"""Secrecy-rate maximization for a hybrid relay-IRS aided directional
modulation link facing a full-duplex eavesdropper/jammer."""

# Every matrix here is tiny (tens of rows); threaded BLAS only adds pool
# contention inside the interior-point loops. Parallelism lives at the
# sweep level instead.
try:
    import threadpoolctl as _threadpoolctl

    _threadpoolctl.threadpool_limits(limits=1, user_api="blas")
except Exception:  # pragma: no cover - best effort
    pass

from .channel import ChannelSet, Geometry, build_channels, los_channel, path_loss, steering_vector
from .runner import RunReport, SweepSpec, run_benchmark, run_max_sr_jop, run_max_sr_sop, run_sweep
from .system import (BeamState, PhaseState, ScenarioConfig, an_projection,
                     assemble_covariances, linearize_theta, power_bar,
                     rate_bob_bar, rate_mallory_bar, secrecy_objective)

__version__ = "0.1.0"
