"""Inverse-Kreiss objectives in both time domains, with derivatives.

Continuous time works on g(x, y) = sigma_min(((x+iy)I - A)/x) over the open
right half-plane; discrete time on h(r, theta) = sigma_min((r e^{i theta} I
- A)/(r-1)) outside the unit circle.  Infeasible points (x <= 0, r <= 1)
evaluate to +inf so unconstrained optimizers stay in the domain.

Gradients come from singular-value perturbation theory; Hessians from the
eigensystem of the 2n x 2n Hermitian augmentation [[0, G], [G*, 0]], which
is assembled for free from the full SVD.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DegenerateGapError, NonsimpleSigmaError, ZeroSigmaError
from .matio import MatrixProblem, TimeDomain

__all__ = [
    "EvalPoint",
    "Derivatives",
    "g_eval",
    "g_grad",
    "g_hess",
    "h_eval",
    "h_grad",
    "h_hess",
    "evaluate",
    "gradient",
    "hessian",
]

# sigma_min counts as simple when sigma_{n-1} - sigma_n exceeds this times sigma_1
SIMPLE_GAP_RTOL = 1e-10
# eigenvalue-difference denominators below this refuse a Hessian
DEGENERATE_GAP_ATOL = 1e-12
# sigma_min below this times sigma_1 counts as zero
ZERO_SIGMA_RTOL = 1e-14

_CACHE_FIELDS = {"_U", "_S", "_Vh"}


@dataclass
class EvalPoint:
    """One evaluation of g or h: coordinates, value, and singular data.

    ``value`` is +inf exactly when the point is infeasible, in which case
    the singular vectors are absent.  ``simple`` reports whether sigma_min
    passed the relative gap test, deciding if a Hessian is trustworthy.
    """

    coords: tuple[float, float]
    value: float
    u: Optional[np.ndarray] = None
    v: Optional[np.ndarray] = None
    simple: bool = True
    polar: bool = False
    _U: Optional[np.ndarray] = field(default=None, repr=False)
    _S: Optional[np.ndarray] = field(default=None, repr=False)
    _Vh: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def feasible(self) -> bool:
        return np.isfinite(self.value)


@dataclass
class Derivatives:
    """Gradient (and optionally Hessian) of g or h at a point.

    ``subgradient`` flags that sigma_min was not simple there, so the
    gradient is one element of the Clarke subdifferential rather than the
    classical gradient.
    """

    grad: np.ndarray
    hess: Optional[np.ndarray] = None
    subgradient: bool = False


def _theta_mod(theta: float) -> float:
    return float(np.mod(theta, 2.0 * np.pi))


def _matrix_ct(prob, x, y):
    return ((x + 1j * y) * np.eye(prob.n) - prob.A) / x


def _matrix_dt(prob, r, theta):
    return (r * np.exp(1j * theta) * np.eye(prob.n) - prob.A) / (r - 1.0)


def _eval_from_matrix(coords, M, polar):
    U, S, Vh = np.linalg.svd(M)
    n = M.shape[0]
    sigma = float(S[-1])
    simple = True
    if n > 1:
        simple = (S[-2] - S[-1]) > SIMPLE_GAP_RTOL * S[0]
    return EvalPoint(
        coords=coords,
        value=sigma,
        u=U[:, -1].copy(),
        v=Vh[-1, :].conj().copy(),
        simple=bool(simple),
        polar=polar,
        _U=U,
        _S=S,
        _Vh=Vh,
    )


def g_eval(prob: MatrixProblem, x: float, y: float) -> EvalPoint:
    """Evaluate g(x, y); returns value +inf for x <= 0."""
    if prob.time_domain is not TimeDomain.CONTINUOUS:
        raise ValueError("g_eval needs a continuous-time problem")
    x, y = float(x), float(y)
    if x <= 0.0:
        return EvalPoint(coords=(x, y), value=np.inf, polar=False)
    return _eval_from_matrix((x, y), _matrix_ct(prob, x, y), polar=False)


def h_eval(prob: MatrixProblem, r: float, theta: float) -> EvalPoint:
    """Evaluate h(r, theta); returns value +inf for r <= 1.  theta is
    normalized into [0, 2*pi)."""
    if prob.time_domain is not TimeDomain.DISCRETE:
        raise ValueError("h_eval needs a discrete-time problem")
    r, theta = float(r), _theta_mod(theta)
    if r <= 1.0:
        return EvalPoint(coords=(r, theta), value=np.inf, polar=True)
    return _eval_from_matrix((r, theta), _matrix_dt(prob, r, theta), polar=True)


def _first_partials_ct(prob, x, y):
    n = prob.n
    Gx = (prob.A - 1j * y * np.eye(n)) / x**2
    Gy = (1j / x) * np.eye(n)
    return Gx, Gy


def _second_partials_ct(prob, x, y):
    n = prob.n
    Gxx = -2.0 * (prob.A - 1j * y * np.eye(n)) / x**3
    Gyy = np.zeros((n, n), dtype=complex)
    Gxy = (-1j / x**2) * np.eye(n)
    return Gxx, Gyy, Gxy


def _first_partials_dt(prob, r, theta):
    n = prob.n
    e = np.exp(1j * theta)
    Hr = (prob.A - e * np.eye(n)) / (r - 1.0) ** 2
    Ht = (1j * r * e / (r - 1.0)) * np.eye(n)
    return Hr, Ht


def _second_partials_dt(prob, r, theta):
    n = prob.n
    e = np.exp(1j * theta)
    Hrr = -2.0 * (prob.A - e * np.eye(n)) / (r - 1.0) ** 3
    Htt = (-r * e / (r - 1.0)) * np.eye(n)
    Hrt = (-1j * e / (r - 1.0) ** 2) * np.eye(n)
    return Hrr, Htt, Hrt


def _check_derivative_preconditions(pt, allow_subgradient):
    if not pt.feasible:
        raise ValueError("derivatives need a feasible point")
    if pt._S is None:
        raise ValueError("EvalPoint lacks cached SVD data; re-evaluate the objective")
    if pt.value <= ZERO_SIGMA_RTOL * max(float(pt._S[0]), 1e-300):
        raise ZeroSigmaError("sigma_min vanishes; the objective is not differentiable")
    if not pt.simple and not allow_subgradient:
        raise NonsimpleSigmaError("sigma_min is not simple at this point")


def _grad_from_partials(pt, D1, D2):
    u, v = pt.u, pt.v
    return np.array([np.real(u.conj() @ (D1 @ v)), np.real(u.conj() @ (D2 @ v))])


def g_grad(pt: EvalPoint, prob: MatrixProblem, allow_subgradient: bool = False) -> Derivatives:
    """Gradient of g at a previously evaluated point.

    With ``allow_subgradient`` a nonsimple sigma_min yields a flagged
    subgradient element instead of NonsimpleSigmaError.
    """
    _check_derivative_preconditions(pt, allow_subgradient)
    Gx, Gy = _first_partials_ct(prob, *pt.coords)
    return Derivatives(grad=_grad_from_partials(pt, Gx, Gy), subgradient=not pt.simple)


def h_grad(pt: EvalPoint, prob: MatrixProblem, allow_subgradient: bool = False) -> Derivatives:
    """Gradient of h at a previously evaluated point (polar coordinates)."""
    _check_derivative_preconditions(pt, allow_subgradient)
    Hr, Ht = _first_partials_dt(prob, *pt.coords)
    return Derivatives(grad=_grad_from_partials(pt, Hr, Ht), subgradient=not pt.simple)


def _augmented_hessian(pt, D1, D2, D11, D22, D12):
    """Second derivatives of the n-th eigenvalue of [[0, G], [G*, 0]].

    Eigenvalues of the augmentation are +/- sigma_i; for each singular
    triple the eigenvectors are (u_i, +/- v_i)/sqrt(2).  sigma_min is the
    n-th eigenvalue in descending order, and the classical second-order
    perturbation sum over the remaining 2n - 1 eigenvectors gives its
    Hessian.  Denominators below DEGENERATE_GAP_ATOL abort rather than
    amplify rounding noise.
    """
    U, S, Vh = pt._U, pt._S, pt._Vh
    n = U.shape[0]
    V = Vh.conj().T
    lam = np.concatenate([S, -S[::-1]])
    # eigenvector matrix, column k <-> lam[k]
    Q = np.zeros((2 * n, 2 * n), dtype=complex)
    Q[:n, :n] = U
    Q[n:, :n] = V
    Q[:n, n:] = U[:, ::-1]
    Q[n:, n:] = -V[:, ::-1]
    Q /= np.sqrt(2.0)

    def aug(D):
        Z = np.zeros((2 * n, 2 * n), dtype=complex)
        Z[:n, n:] = D
        Z[n:, :n] = D.conj().T
        return Z

    A1, A2 = aug(D1), aug(D2)
    A11, A22, A12 = aug(D11), aug(D22), aug(D12)
    j = n - 1  # index of sigma_min in descending eigenvalue order
    qj = Q[:, j]
    denom = lam[j] - lam
    others = np.arange(2 * n) != j
    if np.any(np.abs(denom[others]) < DEGENERATE_GAP_ATOL):
        raise DegenerateGapError("eigenvalue gap below 1e-12; Hessian refused")

    c1 = Q.conj().T @ (A1 @ qj)   # entries q_k* A1 q_j
    c2 = Q.conj().T @ (A2 @ qj)
    inv = np.zeros(2 * n)
    inv[others] = 1.0 / denom[others]

    def second(curv, ca, cb):
        cross = np.sum(np.conj(ca[others]) * cb[others] * inv[others])
        return float(np.real(qj.conj() @ (curv @ qj)) + 2.0 * np.real(cross))

    H = np.empty((2, 2))
    H[0, 0] = second(A11, c1, c1)
    H[1, 1] = second(A22, c2, c2)
    H[0, 1] = H[1, 0] = second(A12, c1, c2)
    return H


def g_hess(pt: EvalPoint, prob: MatrixProblem) -> Derivatives:
    """Gradient and Hessian of g; requires a simple, nonzero sigma_min."""
    _check_derivative_preconditions(pt, allow_subgradient=False)
    Gx, Gy = _first_partials_ct(prob, *pt.coords)
    Gxx, Gyy, Gxy = _second_partials_ct(prob, *pt.coords)
    grad = _grad_from_partials(pt, Gx, Gy)
    hess = _augmented_hessian(pt, Gx, Gy, Gxx, Gyy, Gxy)
    return Derivatives(grad=grad, hess=hess)


def h_hess(pt: EvalPoint, prob: MatrixProblem) -> Derivatives:
    """Gradient and Hessian of h; requires a simple, nonzero sigma_min."""
    _check_derivative_preconditions(pt, allow_subgradient=False)
    Hr, Ht = _first_partials_dt(prob, *pt.coords)
    Hrr, Htt, Hrt = _second_partials_dt(prob, *pt.coords)
    grad = _grad_from_partials(pt, Hr, Ht)
    hess = _augmented_hessian(pt, Hr, Ht, Hrr, Htt, Hrt)
    return Derivatives(grad=grad, hess=hess)


# --------------------------------------------------------------------------
# time-domain dispatchers (used by the optimizer and solvers)
# --------------------------------------------------------------------------

def evaluate(prob: MatrixProblem, c1: float, c2: float) -> EvalPoint:
    """g_eval or h_eval according to the problem's time domain."""
    if prob.time_domain is TimeDomain.CONTINUOUS:
        return g_eval(prob, c1, c2)
    return h_eval(prob, c1, c2)


def gradient(pt: EvalPoint, prob: MatrixProblem, allow_subgradient: bool = False) -> Derivatives:
    if prob.time_domain is TimeDomain.CONTINUOUS:
        return g_grad(pt, prob, allow_subgradient)
    return h_grad(pt, prob, allow_subgradient)


def hessian(pt: EvalPoint, prob: MatrixProblem) -> Derivatives:
    if prob.time_domain is TimeDomain.CONTINUOUS:
        return g_hess(pt, prob)
    return h_hess(pt, prob)
