from .base_estimator import (
    BaseEstimator,
    EstimatorConfig,
    EstimatorMode,
    UndistortionMode,
    PointWeightMode,
    SweepEstimate,
    LOGICAL_SIGMAS,
)
from .traditional_estimator import TraditionalEstimator
from .elastic_estimator import ElasticEstimator
from .semi_elastic_estimator import SemiElasticEstimator
from .prediction import predict
from .residuals import point_residual, point_residuals, elastic_point_residuals, logical_residual
from .solver import LevenbergMarquardt, ResidualBlock, SolverResult

ESTIMATORS = {
    EstimatorMode.TRADITIONAL: TraditionalEstimator,
    EstimatorMode.ELASTIC: ElasticEstimator,
    EstimatorMode.SEMI_ELASTIC: SemiElasticEstimator,
}


def create_estimator(config: EstimatorConfig = None, **kwargs) -> BaseEstimator:
    """Instantiate the estimator class serving config.mode"""
    config = config or EstimatorConfig()
    return ESTIMATORS[config.mode](config, **kwargs)


__all__ = [
    'BaseEstimator',
    'EstimatorConfig',
    'EstimatorMode',
    'UndistortionMode',
    'PointWeightMode',
    'SweepEstimate',
    'LOGICAL_SIGMAS',
    'TraditionalEstimator',
    'ElasticEstimator',
    'SemiElasticEstimator',
    'ESTIMATORS',
    'create_estimator',
    'predict',
    'point_residual',
    'point_residuals',
    'elastic_point_residuals',
    'logical_residual',
    'LevenbergMarquardt',
    'ResidualBlock',
    'SolverResult',
]
