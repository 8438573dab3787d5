import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from errors import DegenerateGeometryError, NonFiniteStateError, TimestampMismatchError
from geometry import NavState, Pose, STATE_DIM, boxminus, boxplus
from inertial import ImuNoiseModel, Preintegration, imu_residual, predict_state, repropagate, residual_jacobian
from mapping import VoxelMap, fit_planes
from preprocessing import Sweep, undistort_imu, undistort_uniform
from .prediction import predict
from .residuals import logical_residual, point_residuals
from .solver import LeastSquaresProblem, LevenbergMarquardt, ResidualBlock, cost_breakdown, total_cost


class EstimatorMode(Enum):
    """Which states the ICP term constrains"""
    TRADITIONAL = "traditional"
    ELASTIC = "elastic"
    SEMI_ELASTIC = "semi-elastic"


class UndistortionMode(Enum):
    UNIFORM = "uniform"
    IMU = "imu"


class PointWeightMode(Enum):
    PLANARITY = "planarity"
    CONSTANT = "constant"


# Standard deviations of x_b around x_prev_end per block: translation (m), rotation (rad),
# velocity (m/s), accelerometer bias (m/s^2), gyroscope bias (rad/s)
LOGICAL_SIGMAS = (0.01, 0.005, 0.01, 1e-3, 1e-4)


def logical_information_from_sigmas(sigmas) -> np.ndarray:
    sigmas = np.asarray(sigmas, dtype=float)
    return np.diag(np.repeat(1.0 / sigmas ** 2, 3))


@dataclass
class EstimatorConfig:
    """Per-sweep optimization settings"""
    mode: EstimatorMode = EstimatorMode.SEMI_ELASTIC
    max_outer_iterations: int = 5
    max_inner_iterations: int = 10
    tolerance: float = 1e-6
    huber_delta: Optional[float] = 0.1
    imu_huber_delta: Optional[float] = None
    logical_huber_delta: Optional[float] = None
    point_variance: float = 0.001
    logical_weight: float = 1.0
    logical_sigmas: Tuple[float, float, float, float, float] = LOGICAL_SIGMAS
    logical_information: Optional[np.ndarray] = None
    neighbors: int = 20
    min_neighbors: int = 5
    min_associations: int = 10
    max_point_to_plane: float = 0.5
    undistortion: UndistortionMode = UndistortionMode.IMU
    reundistort_each_iteration: bool = True
    point_weight_mode: PointWeightMode = PointWeightMode.PLANARITY
    accel_bias_repropagation: float = 0.1
    gyro_bias_repropagation: float = 0.01
    initial_lambda: float = 1e-4

    def validate(self):
        if self.max_outer_iterations < 1 or self.max_inner_iterations < 1:
            raise ValueError("Iteration counts must be positive")
        for name in ("tolerance", "point_variance", "logical_weight", "max_point_to_plane", "initial_lambda"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"EstimatorConfig.{name} must be positive")
        for name in ("huber_delta", "imu_huber_delta", "logical_huber_delta"):
            value = getattr(self, name)
            if value is not None and not value > 0.0:
                raise ValueError(f"EstimatorConfig.{name} must be positive or None")
        if self.neighbors < self.min_neighbors or self.min_neighbors < 3:
            raise ValueError("Need neighbors >= min_neighbors >= 3")
        if len(self.logical_sigmas) != 5 or not all(s > 0.0 for s in self.logical_sigmas):
            raise ValueError("EstimatorConfig.logical_sigmas needs five positive values")
        if self.logical_information is not None and np.shape(self.logical_information) != (STATE_DIM, STATE_DIM):
            raise ValueError(f"Logical information matrix must be {STATE_DIM}x{STATE_DIM}")
        return True


@dataclass
class SweepEstimate:
    """Result of one sweep's optimization"""
    x_b: NavState
    x_e: NavState
    mode: EstimatorMode
    iterations: int = 0
    final_cost: float = 0.0
    cost_breakdown: Dict[str, float] = field(default_factory=dict)
    converged: bool = False
    associations: int = 0
    cost_history: List[List[float]] = field(default_factory=list)
    fallback: bool = False
    fallback_reason: Optional[str] = None
    elapsed: float = 0.0

    def as_record(self) -> Dict:
        return {
            "mode": self.mode.value,
            "t_begin": self.x_b.timestamp,
            "t_end": self.x_e.timestamp,
            "iterations": self.iterations,
            "final_cost": self.final_cost,
            "cost_breakdown": self.cost_breakdown,
            "converged": self.converged,
            "associations": self.associations,
            "cost_history": self.cost_history,
            "fallback": self.fallback,
            "fallback_reason": self.fallback_reason,
            "elapsed": self.elapsed,
        }


@dataclass
class Associations:
    """Plane associations of one outer iteration"""
    points: np.ndarray      # end-frame points, or sensor-frame points in elastic mode
    alphas: np.ndarray
    normals: np.ndarray
    offsets: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return self.points.shape[0]


def whitening(covariance: np.ndarray, floor: float = 1e-18) -> np.ndarray:
    """W with WᵀW equal to the inverse of a covariance matrix"""
    eigenvalues, eigenvectors = np.linalg.eigh(0.5 * (covariance + covariance.T))
    return (eigenvectors / np.sqrt(np.maximum(eigenvalues, floor))).T


class SweepProblem(LeastSquaresProblem):
    """Least-squares problem over (x_b, x_e) built for one estimator mode"""

    def __init__(self, estimator: "BaseEstimator", associations: Associations, pre: Preintegration,
                 x_prev_end: NavState):
        self.estimator = estimator
        self.associations = associations
        self.pre = pre
        self.x_prev_end = x_prev_end
        self.imu_whitening = whitening(pre.covariance)
        self.active = estimator.active_columns()

    @property
    def dimension(self) -> int:
        return self.active.size

    def evaluate(self, state: Tuple[NavState, NavState], jacobians: bool = True) -> List[ResidualBlock]:
        x_b, x_e = state
        cfg = self.estimator.config
        blocks = [self.estimator._point_block(self.associations, x_b, x_e, jacobians)]

        r = imu_residual(self.pre, x_b, x_e, self.estimator.gravity)
        J = residual_jacobian(self.pre, x_b, x_e, self.estimator.gravity) if jacobians else None
        blocks.append(self._whitened("imu", r, J, self.imu_whitening, cfg.imu_huber_delta))

        if self.estimator.uses_logical_residual():
            r, J_b = logical_residual(x_b, self.x_prev_end)
            J = np.hstack([J_b, np.zeros((STATE_DIM, STATE_DIM))]) if jacobians else None
            blocks.append(self._whitened("logical", r, J, self.estimator.logical_whitening, cfg.logical_huber_delta))

        if jacobians:
            for block in blocks:
                block.jacobian = block.jacobian[:, self.active]
        return blocks

    @staticmethod
    def _whitened(name, r, J, W, huber_delta) -> ResidualBlock:
        return ResidualBlock(
            name=name,
            residual=W @ r,
            jacobian=None if J is None else W @ J,
            huber_delta=huber_delta,
            group_size=STATE_DIM,
        )

    def retract(self, state: Tuple[NavState, NavState], delta: np.ndarray) -> Tuple[NavState, NavState]:
        x_b, x_e = state
        full = np.zeros(2 * STATE_DIM)
        full[self.active] = delta
        if self.estimator.optimizes_begin_state():
            x_b = boxplus(x_b, full[:STATE_DIM])
        return x_b, boxplus(x_e, full[STATE_DIM:])


class BaseEstimator(ABC):
    """Shared predict/associate/solve loop; subclasses choose the point model and the free states"""

    def __init__(self, config: EstimatorConfig = None, gravity: np.ndarray = None, extrinsic: Pose = None,
                 noise: ImuNoiseModel = None):
        self.config = config or EstimatorConfig()
        self.config.validate()
        self.noise = noise or ImuNoiseModel()
        self.gravity = np.array([0.0, 0.0, self.noise.gravity_norm]) if gravity is None else np.asarray(gravity, float)
        self.extrinsic = extrinsic or Pose.identity()
        self.mode = self._define_mode()
        self.solver = LevenbergMarquardt(
            max_iterations=self.config.max_inner_iterations,
            tolerance=self.config.tolerance,
            initial_lambda=self.config.initial_lambda,
        )
        information = self.config.logical_information
        if information is None:
            information = logical_information_from_sigmas(self.config.logical_sigmas)
        self.logical_whitening = np.linalg.cholesky(self.config.logical_weight * np.asarray(information, float)).T
        self.point_scale = 1.0 / np.sqrt(self.config.point_variance)
        self.logger = logging.getLogger(__name__)

    @abstractmethod
    def _define_mode(self) -> EstimatorMode:
        """Mode served by this estimator"""
        pass

    @abstractmethod
    def optimizes_begin_state(self) -> bool:
        pass

    @abstractmethod
    def uses_logical_residual(self) -> bool:
        pass

    def _query_points(self, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState,
                      undistorted: Optional[Sweep]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(world points for association, points used by the residual, interpolation factors)"""
        return x_e.pose.apply(undistorted.points), undistorted.points, undistorted.alphas()

    def _point_block(self, associations: Associations, x_b: NavState, x_e: NavState,
                     jacobians: bool) -> ResidualBlock:
        """End-frame points registered with x_e only"""
        a = associations
        r, J_local = point_residuals(a.points, a.normals, a.offsets, a.weights, x_e, jacobians)
        J = self._point_rows(J_local, STATE_DIM) if jacobians else None
        return ResidualBlock("point", r, J, self.config.huber_delta)

    def active_columns(self) -> np.ndarray:
        if self.optimizes_begin_state():
            return np.arange(2 * STATE_DIM)
        return np.arange(STATE_DIM, 2 * STATE_DIM)

    def _point_rows(self, J_local: np.ndarray, first_col: int) -> np.ndarray:
        J = np.zeros((J_local.shape[0], 2 * STATE_DIM))
        J[:, first_col:first_col + 6] = J_local
        return J

    def _undistort(self, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState) -> Optional[Sweep]:
        if self.config.undistortion == UndistortionMode.IMU:
            return undistort_imu(sweep, pre.samples, x_b, self.extrinsic, self.gravity)
        return undistort_uniform(sweep, x_b, x_e, self.extrinsic)

    def map_points(self, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState) -> np.ndarray:
        """World points of a sweep placed with the same motion model the optimizer used"""
        undistorted = self._undistort(sweep, pre, x_b, x_e)
        world, _, _ = self._query_points(sweep, pre, x_b, x_e, undistorted)
        return world

    def _associate(self, world: np.ndarray, points: np.ndarray, alphas: np.ndarray,
                   voxel_map: VoxelMap) -> Associations:
        cfg = self.config
        neighbors, counts = voxel_map.neighbors_batch(world, cfg.neighbors)
        normals, offsets, planarity, valid = fit_planes(neighbors, counts, queries=world,
                                                        min_points=cfg.min_neighbors)
        distance = np.abs(np.einsum("nd,nd->n", normals, world) + offsets)
        keep = valid & (distance <= cfg.max_point_to_plane)
        if cfg.point_weight_mode == PointWeightMode.PLANARITY:
            weights = planarity[keep]
        else:
            weights = np.ones(int(np.count_nonzero(keep)))
        return Associations(
            points=points[keep],
            alphas=alphas[keep],
            normals=normals[keep],
            offsets=offsets[keep],
            weights=self.point_scale * weights,
        )

    def _refresh_preintegration(self, pre: Preintegration, x_b: NavState) -> Preintegration:
        drift_a = np.linalg.norm(x_b.accel_bias - pre.accel_bias_ref)
        drift_g = np.linalg.norm(x_b.gyro_bias - pre.gyro_bias_ref)
        if drift_a > self.config.accel_bias_repropagation or drift_g > self.config.gyro_bias_repropagation:
            self.logger.debug(f"Re-propagating pre-integration (bias drift {drift_a:.4f}, {drift_g:.5f})")
            return repropagate(pre, x_b.accel_bias, x_b.gyro_bias)
        return pre

    def _fallback(self, x_prev_end: NavState, x_e_pred: NavState, reason: str, started: float) -> SweepEstimate:
        return SweepEstimate(
            x_b=x_prev_end,
            x_e=x_e_pred,
            mode=self.mode,
            fallback=True,
            fallback_reason=reason,
            elapsed=time.perf_counter() - started,
        )

    def predict(self, x_prev_end: NavState, imu_window, pre: Preintegration = None) -> Tuple[NavState, NavState]:
        return predict(x_prev_end, imu_window, self.gravity, pre=pre, noise=self.noise)

    def optimize(self, sweep: Sweep, voxel_map: VoxelMap, x_prev_end: NavState, pre: Preintegration,
                 x_e_init: Optional[NavState] = None) -> SweepEstimate:
        """Jointly estimate the begin and end states of one sweep against the map"""
        started = time.perf_counter()
        if abs(sweep.t_begin - x_prev_end.timestamp) > 1e-6 or abs(sweep.t_end - pre.t_end) > 1e-6:
            raise TimestampMismatchError(
                f"Sweep [{sweep.t_begin:.6f}, {sweep.t_end:.6f}] does not match state {x_prev_end.timestamp:.6f} "
                f"and pre-integration end {pre.t_end:.6f}"
            )
        x_b = x_prev_end
        x_e = x_e_init if x_e_init is not None else predict_state(pre, x_prev_end, self.gravity)
        x_e_pred = x_e

        history: List[List[float]] = []
        iterations = 0
        converged = False
        undistorted = None
        problem = None
        result = None

        for outer in range(self.config.max_outer_iterations):
            pre = self._refresh_preintegration(pre, x_b)
            if undistorted is None or self.config.reundistort_each_iteration:
                undistorted = self._undistort(sweep, pre, x_b, x_e)
            world, points, alphas = self._query_points(sweep, pre, x_b, x_e, undistorted)
            associations = self._associate(world, points, alphas, voxel_map)
            if len(associations) < self.config.min_associations:
                reason = f"{len(associations)} plane associations, need {self.config.min_associations}"
                fallback = self._fallback(x_prev_end, x_e_pred, reason, started)
                raise DegenerateGeometryError(f"Sweep {sweep.index}: {reason}", fallback=fallback)

            problem = SweepProblem(self, associations, pre, x_prev_end)
            previous_end = x_e
            result = self.solver.solve(problem, (x_b, x_e))
            x_b, x_e = result.state
            if not (x_b.is_finite() and x_e.is_finite()):
                raise NonFiniteStateError(f"Sweep {sweep.index}: optimization produced a non-finite state")
            iterations += result.iterations
            history.append(result.cost_history)
            if np.linalg.norm(boxminus(x_e, previous_end)) < self.config.tolerance:
                converged = True
                break

        final_blocks = problem.evaluate((x_b, x_e), jacobians=False)
        estimate = SweepEstimate(
            x_b=x_b,
            x_e=x_e,
            mode=self.mode,
            iterations=iterations,
            final_cost=total_cost(final_blocks),
            cost_breakdown=cost_breakdown(final_blocks),
            converged=converged or result.converged,
            associations=len(problem.associations),
            cost_history=history,
            elapsed=time.perf_counter() - started,
        )
        self.logger.debug(
            f"Sweep {sweep.index} [{self.mode.value}]: {estimate.associations} associations, "
            f"{iterations} iterations, cost {estimate.final_cost:.4e}"
        )
        return estimate

    def get_status_summary(self) -> Dict:
        return {
            "mode": self.mode.value,
            "undistortion": self.config.undistortion.value,
            "point_variance": self.config.point_variance,
            "logical_weight": self.config.logical_weight,
            "logical_sigmas": list(self.config.logical_sigmas),
        }
