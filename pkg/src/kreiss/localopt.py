"""Local minimization of the inverse-Kreiss objectives.

Newton's method with an Armijo backtracking line search, falling back to
BFGS (when Hessians are disabled or refused) and to steepest descent at
nonsmooth points.  The +inf barrier of the objectives keeps every accepted
iterate feasible; for normal matrices, whose infimum is approached only as
x (or r) grows without bound, iterates are capped so termination stays
well defined.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import objective
from .errors import (
    DegenerateGapError,
    InfeasibleStartError,
    NonsimpleSigmaError,
    ZeroSigmaError,
)
from .matio import MatrixProblem, TimeDomain

__all__ = ["OptStatus", "OptResult", "minimize", "COORD_CAP"]

# plateau cap on x (continuous) or r (discrete); see module docstring
COORD_CAP = 1e8
_ARMIJO_C = 1e-4
_MAX_NONSMOOTH_STEPS = 20


class OptStatus(enum.Enum):
    CONVERGED = "converged"
    MAX_ITER = "max-iter"
    STALLED_NONSMOOTH = "stalled-nonsmooth"


@dataclass
class OptResult:
    minimizer: objective.EvalPoint
    grad_norm: float
    iterations: int
    status: OptStatus

    @property
    def value(self) -> float:
        return self.minimizer.value


def _clip_coords(prob, c1, c2):
    lo = 0.0 if prob.time_domain is TimeDomain.CONTINUOUS else 1.0
    c1 = min(c1, lo + COORD_CAP)
    if prob.time_domain is TimeDomain.DISCRETE:
        c2 = float(np.mod(c2, 2.0 * np.pi))
    return c1, c2


def _newton_direction(grad, hess):
    """Solve (H + mu*I) d = -g with mu escalated from 1e-12 until H is PD."""
    mu = 0.0
    eye = np.eye(2)
    for _ in range(40):
        try:
            L = np.linalg.cholesky(hess + mu * eye)
            d = np.linalg.solve(L.conj().T, np.linalg.solve(L, -grad))
            if np.dot(d, grad) < 0:
                return d
        except np.linalg.LinAlgError:
            pass
        mu = 1e-12 if mu == 0.0 else mu * 10.0
        if mu > 1e16 * max(1.0, np.linalg.norm(hess, np.inf)):
            break
    return None


def _bfgs_update(Hinv, s, y):
    sy = float(np.dot(s, y))
    if sy <= 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
        return Hinv
    rho = 1.0 / sy
    eye = np.eye(2)
    V = eye - rho * np.outer(s, y)
    return V @ Hinv @ V.T + rho * np.outer(s, s)


def minimize(
    prob: MatrixProblem,
    start,
    grad_tol: float = 1e-10,
    max_iter: int = 200,
    use_hessian: bool = True,
) -> OptResult:
    """Minimize g (continuous) or h (discrete) from a feasible start.

    Parameters
    ----------
    prob : MatrixProblem
    start : (float, float)
        Feasible starting coordinates: (x, y) with x > 0, or (r, theta)
        with r > 1.
    grad_tol : float
        Convergence test is ||grad|| <= grad_tol * max(1, value).
    max_iter : int
    use_hessian : bool
        Newton steps when True; BFGS when False.

    Returns
    -------
    OptResult
        Objective values along the iteration are nonincreasing and every
        accepted iterate is feasible; the final value never exceeds the
        starting value.

    Raises
    ------
    InfeasibleStartError
        If the start evaluates to +inf.
    """
    c1, c2 = _clip_coords(prob, float(start[0]), float(start[1]))
    pt = objective.evaluate(prob, c1, c2)
    if not pt.feasible:
        raise InfeasibleStartError(f"objective is +inf at start {tuple(start)}")

    Hinv = np.eye(2)
    prev_grad = prev_coords = None
    nonsmooth_run = 0
    stagnant = 0
    grad_norm = np.inf
    status = OptStatus.MAX_ITER
    iterations = 0

    for iterations in range(1, max_iter + 1):
        try:
            der = objective.gradient(pt, prob, allow_subgradient=True)
        except ZeroSigmaError:
            # sigma_min == 0 cannot happen strictly inside the stable
            # feasible region; treat an exact zero as a converged minimum
            grad_norm = 0.0
            status = OptStatus.CONVERGED
            break
        grad = der.grad
        grad_norm = float(np.linalg.norm(grad))
        at_cap = pt.coords[0] >= COORD_CAP * (1.0 - 1e-12)
        gtol_eff = grad_tol * max(1.0, pt.value)

        if grad_norm <= gtol_eff:
            status = OptStatus.CONVERGED
            break
        if at_cap and abs(grad[1]) <= gtol_eff:
            # normal-matrix plateau: flat in the angular/imaginary direction,
            # value only improves by pushing x, r beyond the cap
            status = OptStatus.CONVERGED
            break

        if der.subgradient:
            nonsmooth_run += 1
            if nonsmooth_run > _MAX_NONSMOOTH_STEPS:
                status = OptStatus.STALLED_NONSMOOTH
                break
            direction = -grad
        else:
            nonsmooth_run = 0
            direction = None
            if use_hessian:
                try:
                    der_h = objective.hessian(pt, prob)
                    direction = _newton_direction(grad, der_h.hess)
                except (NonsimpleSigmaError, DegenerateGapError):
                    direction = None
            if direction is None:
                if prev_grad is not None:
                    Hinv = _bfgs_update(
                        Hinv,
                        np.asarray(pt.coords) - prev_coords,
                        grad - prev_grad,
                    )
                direction = -Hinv @ grad
                if np.dot(direction, grad) >= 0:
                    direction = -grad

        prev_grad, prev_coords = grad, np.asarray(pt.coords, dtype=float)

        new_pt, ok = _armijo(prob, pt, grad, direction)
        if not ok and direction is not None and not np.allclose(direction, -grad):
            new_pt, ok = _armijo(prob, pt, grad, -grad)
        if not ok:
            # numerically flat along every tried direction
            status = (
                OptStatus.CONVERGED
                if grad_norm <= max(1e3 * gtol_eff, 1e2 * np.finfo(float).eps)
                else OptStatus.MAX_ITER
            )
            break
        # improvements below rounding noise cannot continue indefinitely
        if pt.value - new_pt.value <= 8.0 * np.finfo(float).eps * pt.value:
            stagnant += 1
            if stagnant >= 3:
                pt = new_pt
                status = (
                    OptStatus.CONVERGED
                    if grad_norm <= max(1e3 * gtol_eff, 1e2 * np.finfo(float).eps)
                    else OptStatus.MAX_ITER
                )
                break
        else:
            stagnant = 0
        pt = new_pt

    return OptResult(minimizer=pt, grad_norm=grad_norm, iterations=iterations, status=status)


def _armijo(prob, pt, grad, direction, max_halvings=60):
    """Backtracking line search; rejects infeasible (+inf) trial points."""
    slope = float(np.dot(grad, direction))
    if slope >= 0.0:
        return pt, False
    t = 1.0
    for _ in range(max_halvings):
        c1 = pt.coords[0] + t * direction[0]
        c2 = pt.coords[1] + t * direction[1]
        c1, c2 = _clip_coords(prob, c1, c2)
        lo = 0.0 if prob.time_domain is TimeDomain.CONTINUOUS else 1.0
        if c1 > lo:
            trial = objective.evaluate(prob, c1, c2)
            if trial.feasible and trial.value <= pt.value + _ARMIJO_C * t * slope:
                return trial, True
        t *= 0.5
    return pt, False
