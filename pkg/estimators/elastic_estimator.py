from typing import Optional, Tuple

import numpy as np

from geometry import NavState, STATE_DIM
from inertial import Preintegration
from preprocessing import Sweep, interpolated_lidar_poses
from .base_estimator import Associations, BaseEstimator, EstimatorMode
from .residuals import elastic_point_residuals
from .solver import ResidualBlock


class ElasticEstimator(BaseEstimator):
    """Continuous-time variant: every point is placed with the pose interpolated at its timestamp"""

    def _define_mode(self) -> EstimatorMode:
        return EstimatorMode.ELASTIC

    def optimizes_begin_state(self) -> bool:
        return True

    def uses_logical_residual(self) -> bool:
        return True

    def _undistort(self, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState) -> Optional[Sweep]:
        return None

    def _query_points(self, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState,
                      undistorted: Optional[Sweep]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        alphas = sweep.alphas()
        rotations, translations = interpolated_lidar_poses(x_b, x_e, self.extrinsic, alphas)
        world = np.einsum("nij,nj->ni", rotations, sweep.points) + translations
        return world, sweep.points, alphas

    def _point_block(self, associations: Associations, x_b: NavState, x_e: NavState,
                     jacobians: bool) -> ResidualBlock:
        a = associations
        r, J_b, J_e = elastic_point_residuals(
            a.points, a.alphas, a.normals, a.offsets, a.weights, x_b, x_e, self.extrinsic, jacobians
        )
        J = None
        if jacobians:
            J = self._point_rows(J_b, 0) + self._point_rows(J_e, STATE_DIM)
        return ResidualBlock("point", r, J, self.config.huber_delta)
