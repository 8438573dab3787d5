from .base_estimator import BaseEstimator, EstimatorMode


class TraditionalEstimator(BaseEstimator):
    """Begin state frozen to the previous end state; only x_e is optimized"""

    def _define_mode(self) -> EstimatorMode:
        return EstimatorMode.TRADITIONAL

    def optimizes_begin_state(self) -> bool:
        return False

    def uses_logical_residual(self) -> bool:
        return False
