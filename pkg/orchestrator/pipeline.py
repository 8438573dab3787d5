import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from tqdm import tqdm

from config import RunConfig
from errors import AlignmentError, CoverageError, DegenerateGeometryError
from estimators import BaseEstimator, EstimatorMode, SweepEstimate, create_estimator
from evaluation import Trajectory
from geometry import NavState, boxminus
from inertial import ImuBuffer, InitResult, Preintegration, integrate, static_init
from mapping import VoxelMap
from preprocessing import Sweep, downsample
from .dataset import Dataset
from .sweep_log import SweepLog, SweepStatus


@dataclass
class RunResult:
    """Everything a run produces"""
    mode: EstimatorMode
    init: InitResult
    begin_states: List[NavState] = field(default_factory=list)
    end_states: List[NavState] = field(default_factory=list)
    estimates: List[SweepEstimate] = field(default_factory=list)
    log: SweepLog = field(default_factory=SweepLog)
    voxel_map: Optional[VoxelMap] = None
    elapsed: float = 0.0

    def trajectory(self) -> Trajectory:
        return Trajectory.from_states(self.end_states)

    def full_states(self) -> List[NavState]:
        """Begin and end state of every sweep, interleaved"""
        states = []
        for begin, end in zip(self.begin_states, self.end_states):
            states.extend([begin, end])
        return states


class OdometryPipeline:
    """Initialization, then predict -> optimize -> register for every sweep"""

    def __init__(self, config: RunConfig = None, estimator: BaseEstimator = None):
        self.config = config or RunConfig()
        self.noise = self.config.noise_model()
        self.gravity = self.config.gravity()
        self.extrinsic = self.config.extrinsic()
        self.estimator = estimator or create_estimator(
            self.config.estimator_config(), gravity=self.gravity, extrinsic=self.extrinsic, noise=self.noise
        )
        self.logger = logging.getLogger(__name__)

    def _new_map(self) -> VoxelMap:
        return VoxelMap(self.config.map_voxel_size, self.config.map_capacity, self.config.map_search_window)

    def _check_alignment(self, buffer: ImuBuffer, sweeps: List[Sweep]):
        if not sweeps:
            raise AlignmentError("Dataset holds no sweeps")
        if len(buffer) < 2:
            raise AlignmentError("IMU log holds fewer than two samples")
        if buffer.t_first > sweeps[0].t_begin + 1e-6 or buffer.t_last < sweeps[-1].t_end - 1e-6:
            raise AlignmentError(
                f"IMU [{buffer.t_first:.6f}, {buffer.t_last:.6f}] does not cover sweeps "
                f"[{sweeps[0].t_begin:.6f}, {sweeps[-1].t_end:.6f}]"
            )
        for previous, current in zip(sweeps[:-1], sweeps[1:]):
            if abs(current.t_begin - previous.t_end) > 1e-6:
                raise AlignmentError(
                    f"Sweep {current.index} starts at {current.t_begin:.6f}, previous ended at {previous.t_end:.6f}"
                )

    def _register(self, voxel_map: VoxelMap, sweep: Sweep, pre: Preintegration, x_b: NavState, x_e: NavState):
        voxel_map.insert(self.estimator.map_points(sweep, pre, x_b, x_e))
        voxel_map.prune(x_e.translation, self.config.map_prune_distance)

    def _reduce(self, sweep: Sweep) -> Sweep:
        return downsample(sweep, self.config.downsample_stride, self.config.downsample_voxel)

    def _corrupt(self, sweep: Sweep, x_e: NavState) -> NavState:
        if sweep.index != self.config.corrupt_sweep_index:
            return x_e
        offset = np.asarray(self.config.corrupt_offset, dtype=float)
        self.logger.warning(f"Injecting a {np.linalg.norm(offset):.3f} m corruption into sweep {sweep.index}")
        return x_e.replace(translation=x_e.translation + offset)

    def run(self, dataset: Dataset) -> RunResult:
        """Process every sweep of a dataset in time order"""
        started = time.perf_counter()
        sweeps = sorted(dataset.sweeps, key=lambda s: s.t_begin)
        buffer = ImuBuffer(dataset.imu)
        self._check_alignment(buffer, sweeps)

        init = static_init(dataset.imu, self.config.init_window, self.noise, self.config.stationarity_threshold)
        self.logger.info(f"Initialized at t={init.state.timestamp:.3f}s, running {self.estimator.mode.value} mode")
        self.logger.debug(f"Estimator settings: {self.estimator.get_status_summary()}")
        pending = [s for s in sweeps if s.t_begin >= init.state.timestamp - 1e-6]
        if not pending:
            raise AlignmentError("No sweep starts after the initialization window")

        result = RunResult(mode=self.estimator.mode, init=init, log=SweepLog(), voxel_map=self._new_map())
        x_prev = init.state
        if pending[0].t_begin - x_prev.timestamp > 1e-6:
            window = buffer.window(x_prev.timestamp, pending[0].t_begin)
            _, x_prev = self.estimator.predict(x_prev, window)
            x_prev = x_prev.replace(timestamp=pending[0].t_begin)

        for position, sweep in enumerate(tqdm(pending, desc=self.estimator.mode.value,
                                              disable=not self.config.show_progress)):
            x_prev = self._process(sweep, x_prev, buffer, result, bootstrap=position == 0)

        result.elapsed = time.perf_counter() - started
        counts = result.log.counts()
        self.logger.info(
            f"Processed {len(pending)} sweeps in {result.elapsed:.2f}s "
            f"({counts['optimized']} optimized, {counts['fallback']} fallback)"
        )
        self._log_throughput(pending, result)
        return result

    def _log_throughput(self, sweeps: List[Sweep], result: RunResult):
        """Sweeps per second against the sensor's own clock"""
        if result.elapsed <= 0.0:
            return
        covered = sweeps[-1].t_end - sweeps[0].t_begin
        rate = len(sweeps) / result.elapsed
        self.logger.info(
            f"Throughput {rate:.1f} sweeps/s, {1000.0 / rate:.1f} ms per sweep, "
            f"{covered / result.elapsed:.2f}x real time"
        )

    def _process(self, sweep: Sweep, x_prev: NavState, buffer: ImuBuffer, result: RunResult,
                 bootstrap: bool) -> NavState:
        started = time.perf_counter()
        record = result.log.open(sweep.index, sweep.t_begin, sweep.t_end, len(sweep))
        reduced = self._reduce(sweep)
        try:
            window = buffer.window(x_prev.timestamp, sweep.t_end)
        except CoverageError as e:
            raise AlignmentError(f"Sweep {sweep.index}: {e.message}")
        pre = integrate(window, x_prev.accel_bias, x_prev.gyro_bias, self.noise)
        x_b, x_e = self.estimator.predict(x_prev, window, pre)

        if bootstrap:
            estimate = SweepEstimate(x_b=x_b, x_e=x_e, mode=self.estimator.mode, converged=True)
            status = SweepStatus.BOOTSTRAP
        else:
            try:
                estimate = self.estimator.optimize(reduced, result.voxel_map, x_prev, pre, x_e)
                status = SweepStatus.OPTIMIZED
            except DegenerateGeometryError as e:
                self.logger.warning(f"Sweep {sweep.index}: {e.message}; keeping the prediction")
                estimate = e.fallback
                status = SweepStatus.FALLBACK

        registering = time.perf_counter()
        self._register(result.voxel_map, reduced, pre, estimate.x_b, estimate.x_e)
        register_elapsed = time.perf_counter() - registering
        x_e = self._corrupt(sweep, estimate.x_e)

        result.begin_states.append(estimate.x_b)
        result.end_states.append(x_e)
        result.estimates.append(estimate)
        diagnostics: Dict = estimate.as_record()
        diagnostics["begin_gap"] = float(np.linalg.norm(boxminus(estimate.x_b, x_prev)))
        diagnostics["downsampled_points"] = len(reduced)
        diagnostics["register_elapsed"] = register_elapsed
        diagnostics["total_elapsed"] = time.perf_counter() - started
        result.log.close(record.index, status, result.voxel_map.num_points, diagnostics)
        self.logger.debug(
            f"Sweep {sweep.index} {status.value}: t_e={x_e.timestamp:.3f} "
            f"translation {np.round(x_e.translation, 3)} speed {np.linalg.norm(x_e.velocity):.3f}"
        )
        return x_e
