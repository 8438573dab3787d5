"""
Damped Gauss-Newton (Levenberg-Marquardt) over a manifold state.

Residual families arrive already whitened. The Huber kernel is applied per
group of rows (a single point residual, or a whole 15-row inertial block) by
iteratively reweighting the normal equations; a step is only accepted when
the robust cost does not increase.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from errors import NumericalError

logger = logging.getLogger(__name__)

DIAGONAL_FLOOR = 1e-9
MAX_LAMBDA = 1e12
MAX_REJECTIONS = 10


@dataclass
class ResidualBlock:
    """One residual family: whitened rows, their Jacobian and the robust kernel setting"""

    name: str
    residual: np.ndarray
    jacobian: Optional[np.ndarray] = None
    huber_delta: Optional[float] = None
    group_size: int = 1

    def group_norms(self) -> np.ndarray:
        return np.linalg.norm(self.residual.reshape(-1, self.group_size), axis=1)

    def robust_weights(self) -> np.ndarray:
        """IRLS weight per row"""
        if self.huber_delta is None:
            return np.ones(self.residual.shape[0])
        norms = self.group_norms()
        weights = np.where(norms <= self.huber_delta, 1.0, self.huber_delta / np.maximum(norms, 1e-300))
        return np.repeat(weights, self.group_size)

    def cost(self) -> float:
        norms = self.group_norms()
        if self.huber_delta is None:
            return float(np.sum(norms ** 2))
        delta = self.huber_delta
        return float(np.sum(np.where(norms <= delta, norms ** 2, 2.0 * delta * norms - delta ** 2)))


def total_cost(blocks: List[ResidualBlock]) -> float:
    return sum(block.cost() for block in blocks)


def cost_breakdown(blocks: List[ResidualBlock]) -> Dict[str, float]:
    breakdown: Dict[str, float] = {}
    for block in blocks:
        breakdown[block.name] = breakdown.get(block.name, 0.0) + block.cost()
    return breakdown


class LeastSquaresProblem(ABC):
    """Residual model over an opaque state with a local parameterization"""

    @property
    @abstractmethod
    def dimension(self) -> int:
        pass

    @abstractmethod
    def evaluate(self, state: Any, jacobians: bool = True) -> List[ResidualBlock]:
        pass

    @abstractmethod
    def retract(self, state: Any, delta: np.ndarray) -> Any:
        pass


@dataclass
class SolverResult:
    state: Any
    cost: float
    iterations: int
    converged: bool
    cost_history: List[float] = field(default_factory=list)
    gradient_norm: float = 0.0


def normal_equations(blocks: List[ResidualBlock], dimension: int):
    H = np.zeros((dimension, dimension))
    g = np.zeros(dimension)
    for block in blocks:
        if block.residual.size == 0:
            continue
        w = block.robust_weights()
        J = block.jacobian
        H += J.T @ (J * w[:, None])
        g += J.T @ (w * block.residual)
    return H, g


class LevenbergMarquardt:
    """Damped Gauss-Newton with multiplicative λ adaptation"""

    def __init__(self, max_iterations: int = 10, tolerance: float = 1e-6, initial_lambda: float = 1e-4):
        if max_iterations < 1 or not tolerance > 0.0:
            raise ValueError("Solver needs max_iterations >= 1 and a positive tolerance")
        self.max_iterations = max_iterations
        self.tolerance = tolerance
        self.initial_lambda = initial_lambda
        self.logger = logging.getLogger(__name__)

    def solve(self, problem: LeastSquaresProblem, state: Any) -> SolverResult:
        lam = self.initial_lambda
        blocks = problem.evaluate(state, jacobians=True)
        cost = total_cost(blocks)
        history = [cost]
        converged = False
        gradient_norm = 0.0
        iterations = 0

        for iterations in range(1, self.max_iterations + 1):
            H, g = normal_equations(blocks, problem.dimension)
            gradient_norm = float(np.linalg.norm(g))
            if not np.all(np.isfinite(H)) or not np.all(np.isfinite(g)):
                raise NumericalError("Non-finite normal equations")
            if gradient_norm < 1e-12:
                converged = True
                break

            accepted = False
            for _ in range(MAX_REJECTIONS):
                damping = lam * np.maximum(np.diag(H), DIAGONAL_FLOOR)
                try:
                    delta = np.linalg.solve(H + np.diag(damping), -g)
                except np.linalg.LinAlgError:
                    lam = min(lam * 10.0, MAX_LAMBDA)
                    continue
                candidate = problem.retract(state, delta)
                candidate_cost = total_cost(problem.evaluate(candidate, jacobians=False))
                if np.isfinite(candidate_cost) and candidate_cost <= cost:
                    accepted = True
                    break
                lam = min(lam * 10.0, MAX_LAMBDA)

            if not accepted:
                # no descent direction left at this damping range
                converged = True
                break

            state = candidate
            cost = candidate_cost
            history.append(cost)
            lam = max(lam / 10.0, 1e-12)
            if np.linalg.norm(delta) < self.tolerance:
                converged = True
                break
            blocks = problem.evaluate(state, jacobians=True)

        self.logger.debug(
            f"Solver finished after {iterations} iterations, cost {history[0]:.6e} -> {cost:.6e}, "
            f"converged={converged}"
        )
        return SolverResult(
            state=state,
            cost=cost,
            iterations=iterations,
            converged=converged,
            cost_history=history,
            gradient_norm=gradient_norm,
        )
