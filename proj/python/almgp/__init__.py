"""Manifold Gaussian process with active learning."""

from ._almgp import (
    AlmgpError,
    ExperimentConfig,
    FittedMgp,
    MgpParams,
    alc_score,
    borehole,
    borehole_from_unit,
    fit,
    joint_grad,
    joint_nlml,
    lhd,
    problem_data,
    run_experiment,
    sphere3d,
    synthetic2d,
    trig1d,
    uniform_grid,
)

__all__ = [
    "AlmgpError",
    "ExperimentConfig",
    "FittedMgp",
    "MgpParams",
    "alc_score",
    "borehole",
    "borehole_from_unit",
    "fit",
    "joint_grad",
    "joint_nlml",
    "lhd",
    "problem_data",
    "run_experiment",
    "sphere3d",
    "synthetic2d",
    "trig1d",
    "uniform_grid",
]
