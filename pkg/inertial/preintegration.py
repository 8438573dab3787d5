"""
Discrete quaternion IMU pre-integration between two sweep end times.

The delta quantities are expressed in the IMU frame of the first sample:

    α  translation pre-integral (m)
    β  velocity pre-integral (m/s)
    γ  rotation pre-integral

Specific force still contains the gravity reaction; it is removed in the
residual and in state prediction with the world gravity vector g_w, which
points up (a level IMU at rest measures +g_w).

Error-state ordering for covariance and Jacobians is (δα, δθ, δβ, δb_a, δb_ω),
the same layout as the NavState error state (δt, δθ, δv, δb_a, δb_ω).
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from errors import CoverageError, TimestampMismatchError
from geometry import (
    NavState,
    Rotation,
    skew,
    so3_exp,
    right_jacobian,
    STATE_DIM,
)
from geometry.rotation import quaternion_left_product_block
from .measurements import ImuNoiseModel, ImuSample, nominal_period

logger = logging.getLogger(__name__)

A_ROWS = slice(0, 3)
TH_ROWS = slice(3, 6)
B_ROWS = slice(6, 9)
BA_COLS = slice(9, 12)
BG_COLS = slice(12, 15)


@dataclass(frozen=True, eq=False)
class Preintegration:
    """Pre-integrated IMU window with covariance and bias Jacobians"""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: Rotation
    delta_t: float
    covariance: np.ndarray
    jacobian: np.ndarray
    accel_bias_ref: np.ndarray
    gyro_bias_ref: np.ndarray
    samples: Tuple[ImuSample, ...]
    noise: ImuNoiseModel

    @property
    def t_start(self) -> float:
        return self.samples[0].timestamp

    @property
    def t_end(self) -> float:
        return self.samples[-1].timestamp

    @property
    def period(self) -> float:
        return nominal_period(np.array([s.timestamp for s in self.samples]))

    @property
    def j_alpha_ba(self) -> np.ndarray:
        return self.jacobian[A_ROWS, BA_COLS]

    @property
    def j_alpha_bg(self) -> np.ndarray:
        return self.jacobian[A_ROWS, BG_COLS]

    @property
    def j_beta_ba(self) -> np.ndarray:
        return self.jacobian[B_ROWS, BA_COLS]

    @property
    def j_beta_bg(self) -> np.ndarray:
        return self.jacobian[B_ROWS, BG_COLS]

    @property
    def j_gamma_bg(self) -> np.ndarray:
        return self.jacobian[TH_ROWS, BG_COLS]


def _validate_samples(samples: Sequence[ImuSample]):
    if len(samples) < 2:
        raise CoverageError(f"Pre-integration needs at least 2 IMU samples, got {len(samples)}")
    times = np.array([s.timestamp for s in samples])
    if np.any(np.diff(times) <= 0.0):
        raise CoverageError("IMU timestamps must be strictly increasing inside a window")


def integrate(samples: Sequence[ImuSample], accel_bias, gyro_bias,
              noise: ImuNoiseModel = None) -> Preintegration:
    """Midpoint pre-integration with covariance and bias-Jacobian propagation"""
    _validate_samples(samples)
    noise = noise or ImuNoiseModel()
    ba = np.asarray(accel_bias, dtype=float).reshape(3)
    bg = np.asarray(gyro_bias, dtype=float).reshape(3)
    if not (np.all(np.isfinite(ba)) and np.all(np.isfinite(bg))):
        raise ValueError("Biases must be finite")

    alpha = np.zeros(3)
    beta = np.zeros(3)
    gamma = Rotation.identity()
    P = np.zeros((STATE_DIM, STATE_DIM))
    J = np.eye(STATE_DIM)
    I3 = np.eye(3)

    for s0, s1 in zip(samples[:-1], samples[1:]):
        dt = s1.timestamp - s0.timestamp
        w = 0.5 * (s0.gyro + s1.gyro) - bg
        step = so3_exp(w * dt)
        gamma_next = gamma * step
        R0 = gamma.matrix
        R1 = gamma_next.matrix
        a0 = s0.accel - ba
        a1 = s1.accel - ba

        f = 0.5 * (R0 @ a0 + R1 @ a1)
        alpha = alpha + beta * dt + 0.5 * f * dt * dt
        beta = beta + f * dt

        # Linearized error-state transition of exactly this discrete step
        Jr = right_jacobian(w * dt)
        F_thth = step.matrix.T
        F_thbg = -Jr * dt
        A0 = R0 @ skew(a0)
        A1 = R1 @ skew(a1)
        df_dth = -0.5 * (A0 + A1 @ F_thth)
        df_dba = -0.5 * (R0 + R1)
        df_dbg = -0.5 * A1 @ F_thbg

        F = np.eye(STATE_DIM)
        F[A_ROWS, TH_ROWS] = 0.5 * df_dth * dt * dt
        F[A_ROWS, B_ROWS] = I3 * dt
        F[A_ROWS, BA_COLS] = 0.5 * df_dba * dt * dt
        F[A_ROWS, BG_COLS] = 0.5 * df_dbg * dt * dt
        F[TH_ROWS, TH_ROWS] = F_thth
        F[TH_ROWS, BG_COLS] = F_thbg
        F[B_ROWS, TH_ROWS] = df_dth * dt
        F[B_ROWS, BA_COLS] = df_dba * dt
        F[B_ROWS, BG_COLS] = df_dbg * dt

        # Noise inputs: (n_a0, n_ω0, n_a1, n_ω1, n_ba, n_bω)
        dth_dnw = 0.5 * Jr * dt
        df_dna0 = 0.5 * R0
        df_dna1 = 0.5 * R1
        df_dnw = -0.5 * A1 @ dth_dnw
        V = np.zeros((STATE_DIM, 18))
        for block, df in ((slice(0, 3), df_dna0), (slice(3, 6), df_dnw),
                          (slice(6, 9), df_dna1), (slice(9, 12), df_dnw)):
            V[A_ROWS, block] = 0.5 * df * dt * dt
            V[B_ROWS, block] = df * dt
        V[TH_ROWS, 3:6] = dth_dnw
        V[TH_ROWS, 9:12] = dth_dnw
        V[BA_COLS, 12:15] = I3 * dt
        V[BG_COLS, 15:18] = I3 * dt

        # continuous densities discretized over the step
        Q = np.diag(np.repeat([
            noise.accel_noise ** 2, noise.gyro_noise ** 2,
            noise.accel_noise ** 2, noise.gyro_noise ** 2,
            noise.accel_bias_walk ** 2, noise.gyro_bias_walk ** 2,
        ], 3) / dt)

        P = F @ P @ F.T + V @ Q @ V.T
        P = 0.5 * (P + P.T)
        J = F @ J
        gamma = gamma_next

    delta_t = samples[-1].timestamp - samples[0].timestamp
    logger.debug(f"Pre-integrated {len(samples)} IMU samples over {delta_t:.4f}s")
    return Preintegration(
        alpha=alpha,
        beta=beta,
        gamma=gamma,
        delta_t=delta_t,
        covariance=P,
        jacobian=J,
        accel_bias_ref=ba,
        gyro_bias_ref=bg,
        samples=tuple(samples),
        noise=noise,
    )


def repropagate(pre: Preintegration, accel_bias, gyro_bias) -> Preintegration:
    """Re-integrate the stored samples at new reference biases"""
    return integrate(pre.samples, accel_bias, gyro_bias, pre.noise)


def bias_corrected(pre: Preintegration, accel_bias, gyro_bias) -> Tuple[np.ndarray, np.ndarray, Rotation]:
    """First-order bias update of (α, β, γ)"""
    dba = np.asarray(accel_bias, dtype=float) - pre.accel_bias_ref
    dbg = np.asarray(gyro_bias, dtype=float) - pre.gyro_bias_ref
    alpha = pre.alpha + pre.j_alpha_ba @ dba + pre.j_alpha_bg @ dbg
    beta = pre.beta + pre.j_beta_ba @ dba + pre.j_beta_bg @ dbg
    gamma = pre.gamma * so3_exp(pre.j_gamma_bg @ dbg)
    return alpha, beta, gamma


def compose(first: Preintegration, second: Preintegration) -> Tuple[np.ndarray, np.ndarray, Rotation, float]:
    """Chain two consecutive windows into (α, β, γ, Δt)"""
    if abs(first.t_end - second.t_start) > 1e-9:
        raise TimestampMismatchError(
            f"Windows are not consecutive: {first.t_end:.9f} != {second.t_start:.9f}"
        )
    R1 = first.gamma.matrix
    alpha = first.alpha + first.beta * second.delta_t + R1 @ second.alpha
    beta = first.beta + R1 @ second.beta
    gamma = first.gamma * second.gamma
    return alpha, beta, gamma, first.delta_t + second.delta_t


def predict_state(pre: Preintegration, x_b: NavState, gravity: np.ndarray) -> NavState:
    """State at the end of the window, biases carried over from x_b"""
    alpha, beta, gamma = bias_corrected(pre, x_b.accel_bias, x_b.gyro_bias)
    R_b = x_b.rotation.matrix
    g = np.asarray(gravity, dtype=float)
    dt = pre.delta_t
    return x_b.replace(
        translation=x_b.translation + x_b.velocity * dt + R_b @ alpha - 0.5 * g * dt * dt,
        rotation=x_b.rotation * gamma,
        velocity=x_b.velocity + R_b @ beta - g * dt,
        timestamp=x_b.timestamp + dt,
    )


def _check_timing(pre: Preintegration, x_b: NavState, x_e: NavState):
    span = x_e.timestamp - x_b.timestamp
    period = pre.period
    if abs(span - pre.delta_t) > max(period, 1e-9):
        raise TimestampMismatchError(
            f"Pre-integration spans {pre.delta_t:.6f}s but states are {span:.6f}s apart"
        )


def imu_residual(pre: Preintegration, x_b: NavState, x_e: NavState, gravity: np.ndarray) -> np.ndarray:
    """15-vector pre-integration residual (translation, rotation, velocity, two bias blocks)"""
    _check_timing(pre, x_b, x_e)
    alpha, beta, gamma = bias_corrected(pre, x_b.accel_bias, x_b.gyro_bias)
    g = np.asarray(gravity, dtype=float)
    dt = pre.delta_t
    Rt = x_b.rotation.matrix.T

    r = np.zeros(STATE_DIM)
    r[0:3] = Rt @ (x_e.translation - x_b.translation + 0.5 * g * dt * dt - x_b.velocity * dt) - alpha
    error = x_b.rotation.inverse() * x_e.rotation * gamma.inverse()
    r[3:6] = 2.0 * error.vec
    r[6:9] = Rt @ (x_e.velocity + g * dt - x_b.velocity) - beta
    r[9:12] = x_e.accel_bias - x_b.accel_bias
    r[12:15] = x_e.gyro_bias - x_b.gyro_bias
    return r


def residual_jacobian(pre: Preintegration, x_b: NavState, x_e: NavState, gravity: np.ndarray) -> np.ndarray:
    """15x30 Jacobian of imu_residual w.r.t. the error states of (x_b, x_e)"""
    _check_timing(pre, x_b, x_e)
    alpha, beta, gamma = bias_corrected(pre, x_b.accel_bias, x_b.gyro_bias)
    g = np.asarray(gravity, dtype=float)
    dt = pre.delta_t
    Rt = x_b.rotation.matrix.T
    I3 = np.eye(3)

    position_term = Rt @ (x_e.translation - x_b.translation + 0.5 * g * dt * dt - x_b.velocity * dt)
    velocity_term = Rt @ (x_e.velocity + g * dt - x_b.velocity)
    error = x_b.rotation.inverse() * x_e.rotation * gamma.inverse()
    left_block = quaternion_left_product_block(error)
    dbg = x_b.gyro_bias - pre.gyro_bias_ref
    Jr_bias = right_jacobian(pre.j_gamma_bg @ dbg)

    J = np.zeros((STATE_DIM, 2 * STATE_DIM))
    e = STATE_DIM

    # translation block
    J[0:3, 0:3] = -Rt
    J[0:3, 3:6] = skew(position_term)
    J[0:3, 6:9] = -Rt * dt
    J[0:3, 9:12] = -pre.j_alpha_ba
    J[0:3, 12:15] = -pre.j_alpha_bg
    J[0:3, e + 0:e + 3] = Rt

    # rotation block
    J[3:6, 3:6] = -(error.w * I3 - skew(error.vec))
    J[3:6, 12:15] = -left_block @ gamma.matrix @ Jr_bias @ pre.j_gamma_bg
    J[3:6, e + 3:e + 6] = left_block @ gamma.matrix

    # velocity block
    J[6:9, 3:6] = skew(velocity_term)
    J[6:9, 6:9] = -Rt
    J[6:9, 9:12] = -pre.j_beta_ba
    J[6:9, 12:15] = -pre.j_beta_bg
    J[6:9, e + 6:e + 9] = Rt

    # bias random walk
    J[9:12, 9:12] = -I3
    J[9:12, e + 9:e + 12] = I3
    J[12:15, 12:15] = -I3
    J[12:15, e + 12:e + 15] = I3
    return J
