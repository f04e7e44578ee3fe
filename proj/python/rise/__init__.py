"""Rotor-invariant shift estimation on the unit hypersphere."""

from ._rise import (
    Backend,
    PortMode,
    Prototype,
    RiseError,
    Rotor,
    ScoreReport,
    SpaceMap,
    commutativity_gap,
    exp_map,
    fit_map,
    geodesic_distance,
    learn_prototype,
    log_map,
    normalize,
    parallel_transport,
    port_prototype,
    predict,
    predict_batch,
    random_baseline,
    score,
    synth,
)

# RiseError.args is (message, exit code).
RiseError.code = property(lambda self: self.args[1])

__all__ = [
    "Backend",
    "PortMode",
    "Prototype",
    "RiseError",
    "Rotor",
    "ScoreReport",
    "SpaceMap",
    "commutativity_gap",
    "exp_map",
    "fit_map",
    "geodesic_distance",
    "learn_prototype",
    "log_map",
    "normalize",
    "parallel_transport",
    "port_prototype",
    "predict",
    "predict_batch",
    "random_baseline",
    "score",
    "synth",
]
