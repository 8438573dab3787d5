from .base_estimator import BaseEstimator, EstimatorMode


class SemiElasticEstimator(BaseEstimator):
    """
    Both states are free. Point-to-plane residuals touch x_e only, the
    pre-integration residual couples x_b with x_e and the logical residual
    pulls x_b toward the previous end state.
    """

    def _define_mode(self) -> EstimatorMode:
        return EstimatorMode.SEMI_ELASTIC

    def optimizes_begin_state(self) -> bool:
        return True

    def uses_logical_residual(self) -> bool:
        return True
