"""Estimate the number of significant principal components of extremal dependence."""
from .angular import (
    AngularCovariance,
    AngularSample,
    as_data_matrix,
    empirical_angular_covariance,
    empirical_mean_direction,
    frechet_margin_transform,
    read_csv,
    select_extremes,
)
from .criteria import (
    CriterionCurve,
    CriterionKind,
    aic_circ,
    aic_fixed,
    aic_star,
    bic_circ,
    bic_fixed,
    bic_star,
    default_q,
    estimate_p,
    select_regime,
)
from .errors import ConstantColumnWarning, ExtremalPCAError, InputError, NumericError, RegimeError
from .simulate import ExperimentResult, Model, ModelSpec, run_experiment, sample
from .spectrum import ScreeTable, Spectrum, eigenvalues_descending, scree

__version__ = "0.1.0"
