"""
Downhill-simplex (Nelder-Mead) minimizer.

Derivative-free search used by the shooting solver. The simplex is rebuilt
around its best vertex when it stagnates, a bounded number of times.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

logger = logging.getLogger(__name__)


class NelderMeadError(Exception):
    """Custom exception for simplex configuration errors."""
    pass


@dataclass
class SimplexResult:
    """
    Outcome of a simplex search.

    Attributes:
        x: Best vertex found
        fun: Objective value at x
        evaluations: Objective evaluations spent
        iterations: Simplex iterations performed
        restarts: Simplex rebuilds after stagnation
        history: Best value after each iteration (non-increasing)
        reason: Why the search stopped ("target", "budget", "stagnation")
    """
    x: np.ndarray
    fun: float
    evaluations: int
    iterations: int
    restarts: int
    history: List[float] = field(default_factory=list)
    reason: str = ""


class NelderMead:
    """
    Nelder-Mead minimizer with reflection, expansion, inside/outside
    contraction and shrink steps.
    """

    def __init__(
        self,
        reflection: float = 1.0,
        expansion: float = 2.0,
        contraction: float = 0.5,
        shrink: float = 0.5,
        initial_step: float = 0.1,
        max_evaluations: int = 6000,
        target: float = 0.0,
        max_restarts: int = 1,
        xatol: float = 1e-12,
        patience: Optional[int] = None,
        workers: int = 1,
    ):
        """
        Initialize the minimizer.

        Args:
            reflection: Reflection coefficient
            expansion: Expansion coefficient
            contraction: Contraction coefficient (both sides)
            shrink: Shrink coefficient
            initial_step: Per-coordinate offset of the initial simplex vertices
            max_evaluations: Evaluation budget
            target: Stop as soon as the best value drops below this
            max_restarts: Rebuilds allowed on stagnation
            xatol: Simplex diameter (relative to the best vertex) counted as collapsed
            patience: Iterations without improvement counted as stagnation
                (default 100 per dimension)
            workers: Threads used to evaluate shrink steps
        """
        if reflection <= 0 or expansion <= reflection:
            raise NelderMeadError("Need reflection > 0 and expansion > reflection")
        if not (0 < contraction < 1 and 0 < shrink < 1):
            raise NelderMeadError("Contraction and shrink coefficients must lie in (0, 1)")
        if max_evaluations < 1:
            raise NelderMeadError("Evaluation budget must be at least 1")
        self.reflection = reflection
        self.expansion = expansion
        self.contraction = contraction
        self.shrink = shrink
        self.initial_step = initial_step
        self.max_evaluations = max_evaluations
        self.target = target
        self.max_restarts = max_restarts
        self.xatol = xatol
        self.patience = patience
        self.workers = max(1, int(workers))

        self.evaluations = 0
        self._func: Optional[Callable] = None

    @property
    def remaining(self) -> int:
        """Evaluations left in the budget."""
        return max(0, self.max_evaluations - self.evaluations)

    def _evaluate(self, x: np.ndarray) -> float:
        """Count one evaluation; failures and non-finite values score +inf."""
        self.evaluations += 1
        value = self._func(x)
        if value is None or not math.isfinite(value):
            return math.inf
        return float(value)

    def _evaluate_many(self, points: List[np.ndarray]) -> List[float]:
        if self.workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                values = list(executor.map(self._func, points))
            self.evaluations += len(points)
            return [float(v) if v is not None and math.isfinite(v) else math.inf for v in values]
        return [self._evaluate(p) for p in points]

    def _build_simplex(self, x0: np.ndarray, fx0: Optional[float] = None):
        dim = x0.shape[0]
        vertices = [x0.copy()]
        for i in range(dim):
            p = x0.copy()
            p[i] += self.initial_step
            vertices.append(p)
        values = [fx0 if fx0 is not None else self._evaluate(x0)]
        for p in vertices[1:]:
            values.append(self._evaluate(p))
            if values[-1] < self.target or self.evaluations >= self.max_evaluations:
                break
        # vertices left unevaluated score +inf
        while len(values) < dim + 1:
            values.append(math.inf)
        return np.array(vertices), np.array(values)

    def _collapsed(self, vertices: np.ndarray) -> bool:
        best = vertices[0]
        diameter = float(np.max(np.abs(vertices[1:] - best)))
        return diameter <= self.xatol * max(1.0, float(np.max(np.abs(best))))

    def minimize(self, func: Callable[[np.ndarray], float], x0) -> SimplexResult:
        """
        Minimize func starting from x0.

        Args:
            func: Objective mapping a vector to a scalar
            x0: Starting vertex

        Returns:
            SimplexResult with the best vertex found
        """
        self._func = func
        self.evaluations = 0
        x0 = np.asarray(x0, dtype=float).copy()
        dim = x0.shape[0]
        patience = self.patience or 100 * dim

        vertices, values = self._build_simplex(x0)
        order = np.argsort(values, kind="stable")
        vertices, values = vertices[order], values[order]

        history = [float(values[0])]
        iterations = 0
        restarts = 0
        since_improvement = 0
        reason = ""

        while True:
            if values[0] < self.target:
                reason = "target"
                break
            if self.evaluations >= self.max_evaluations:
                reason = "budget"
                break
            if self._collapsed(vertices) or since_improvement >= patience:
                if restarts >= self.max_restarts:
                    reason = "stagnation"
                    break
                restarts += 1
                since_improvement = 0
                logger.debug(
                    f"Simplex stagnated at f={values[0]:.3e} after {self.evaluations} "
                    f"evaluations; restart {restarts}"
                )
                vertices, values = self._build_simplex(vertices[0], fx0=values[0])
                order = np.argsort(values, kind="stable")
                vertices, values = vertices[order], values[order]
                continue

            iterations += 1
            previous_best = values[0]
            centroid = vertices[:-1].mean(axis=0)
            worst = vertices[-1]

            # Reflection
            xr = centroid + self.reflection * (centroid - worst)
            fr = self._evaluate(xr)

            if fr < values[0]:
                # Expansion
                xe = centroid + self.expansion * (centroid - worst)
                fe = self._evaluate(xe) if self.remaining > 0 else math.inf
                if fe < fr:
                    vertices[-1], values[-1] = xe, fe
                else:
                    vertices[-1], values[-1] = xr, fr
            elif fr < values[-2]:
                vertices[-1], values[-1] = xr, fr
            elif fr < values[-1] and self.remaining == 0:
                vertices[-1], values[-1] = xr, fr
            elif self.remaining > 0:
                # Contraction, outside when the reflection beat the worst vertex
                if fr < values[-1]:
                    xc = centroid + self.contraction * (xr - centroid)
                    fc = self._evaluate(xc)
                    accept = fc <= fr
                else:
                    xc = centroid + self.contraction * (worst - centroid)
                    fc = self._evaluate(xc)
                    accept = fc < values[-1]
                if accept:
                    vertices[-1], values[-1] = xc, fc
                else:
                    # Shrink toward the best vertex; only as many as the budget allows
                    best = vertices[0]
                    count = min(dim, self.remaining)
                    shrunk = [best + self.shrink * (p - best) for p in vertices[1:1 + count]]
                    if shrunk:
                        vertices[1:1 + count] = shrunk
                        values[1:1 + count] = self._evaluate_many(shrunk)

            order = np.argsort(values, kind="stable")
            vertices, values = vertices[order], values[order]
            history.append(float(values[0]))
            if values[0] < previous_best:
                since_improvement = 0
            else:
                since_improvement += 1

        logger.debug(
            f"Simplex stopped ({reason}): f={values[0]:.3e}, {self.evaluations} evaluations, "
            f"{iterations} iterations, {restarts} restarts"
        )
        return SimplexResult(
            x=vertices[0].copy(),
            fun=float(values[0]),
            evaluations=self.evaluations,
            iterations=iterations,
            restarts=restarts,
            history=history,
            reason=reason,
        )
