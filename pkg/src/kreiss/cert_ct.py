"""Continuous-time 2D level-set globality certificates.

Three tests over the right half-plane domain of g(x, y):

* fixed-distance pairs a distance eta apart at orientation theta_orient
  (vertical pairs by default), driving the backtracking iteration;
* variable-distance vertical pairs (separation x*eta), whose empty outcome
  certifies the coordinate-free lower bound 1/K > gamma - eta/2;
* a horizontal variable-distance variant (separation x*eta/(1+gamma),
  i.e. the pair (x, y), (beta*x, y)) with the same lower-bound semantics.

Each test computes the positive real eigenvalues of a 4n^2 pencil built
from two Kronecker-structured Sylvester forms, then runs a cheap 1D
vertical eigenvalue test on every candidate line.  Detected points are
only reported after direct SVD verification that gamma really is a
singular value there, which keeps the certificate sound regardless of how
the candidate eigenvalues were obtained.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.sparse

from . import objective
from .errors import SingularDError
from .matio import MatrixProblem, TimeDomain

__all__ = [
    "CertificateReport",
    "KroneckerPencil",
    "KronSumInverse",
    "vertical_level_points",
    "build_fixed_pencil",
    "fixed_distance_test",
    "build_variable_pencil",
    "variable_distance_test",
    "horizontal_variable_test",
    "kron_sum_inverse",
]

# eigenvalue lambda of the big pencil counts as real when
# |Im lambda| <= REAL_AXIS_RTOL * max(1, |Re lambda|)
REAL_AXIS_RTOL = 1e-8
# candidates within CAPTURE_FACTOR times the strict band are still forwarded
# to the (cheap, sound) 1D verification stage: defective double roots split
# by ~sqrt(eps) under QR/QZ and would otherwise be lost
CAPTURE_FACTOR = 100.0
# candidate lines closer than this are merged
LINE_DEDUP_ATOL = 1e-12
# verification: some singular value must match gamma to this times ||A||
VERIFY_RTOL = 1e-8
# per-candidate-line 1D tests are independent; >1 enables a thread pool
WORKERS = 1


def _capture_band_rel(strict_rel, eta):
    """Relative half-width of the candidate capture band around the real axis.

    Pair-tangent configurations make the pencil's real root a double root,
    which rounding splits into a conjugate pair with imaginary parts on the
    order of sqrt(eps / eta); the band grows accordingly as eta shrinks.
    Captured candidates only feed the verified 1D stage, so a generous band
    costs time, never correctness.
    """
    eps = np.finfo(float).eps
    split = 10.0 * np.sqrt(eps / max(eta, eps))
    return min(max(CAPTURE_FACTOR * strict_rel, split), 0.05)


@dataclass
class KroneckerPencil:
    """The 4n^2 x 4n^2 pencil m1 - lambda*m2 of a 2D level-set test."""

    m1: np.ndarray
    m2: np.ndarray
    gamma: float
    eta: float
    variant: str
    theta_orient: Optional[float] = None
    beta: Optional[float] = None


@dataclass
class CertificateReport:
    """Outcome of a 2D level-set test.

    ``points`` holds only verified level-set points: at each, gamma is a
    singular value of G (resp. H) to VERIFY_RTOL * ||A||, so the point lies
    on the gamma level set of the objective or below it.  An empty report
    from a variable-distance test certifies 1/K > gamma - eta/2.
    """

    gamma: float
    eta: float
    variant: str
    candidate_lines: list[float] = field(default_factory=list)
    points: list[objective.EvalPoint] = field(default_factory=list)
    large_eig_count: int = 0
    real_eig_tol_used: float = REAL_AXIS_RTOL
    theta_orient: Optional[float] = None
    rejected_points: int = 0

    @property
    def empty(self) -> bool:
        return len(self.points) == 0

    @property
    def candidate_circles(self) -> list[float]:
        """Alias used by the discrete-time radial tests."""
        return self.candidate_lines


def _hamiltonian_vertical(prob, gamma, x):
    n = prob.n
    eye = np.eye(n)
    return np.block([
        [prob.A - x * eye, gamma * x * eye],
        [-gamma * x * eye, x * eye - prob.A.conj().T],
    ])


def vertical_level_points(prob: MatrixProblem, gamma: float, x: float,
                          refine: bool = True) -> list[float]:
    """All y with gamma a singular value of G(x, y), via the Hamiltonian test.

    gamma is a singular value of G(x, y) iff i*y is an eigenvalue of the
    2n x 2n Hamiltonian matrix [[A - xI, gamma*x*I], [-gamma*x*I, xI - A*]].
    Eigenvalues within 1e-8 * max(1, |Im|) * ||A|| of the imaginary axis
    are kept; near-duplicates are merged (a double root perturbs into a
    symmetric pair, whose mean restores the root) and each y is polished by
    a 1D Newton iteration on sigma(G(x, .)) = gamma.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if x == 0.0:
        raise ValueError("x must be nonzero")
    lam = scipy.linalg.eigvals(_hamiltonian_vertical(prob, gamma, x))
    scale = max(prob.norm2, 1e-300)
    band = 1e-8 * np.maximum(1.0, np.abs(lam.imag)) * scale
    keep = np.abs(lam.real) <= CAPTURE_FACTOR * band
    ys = np.sort(lam[keep].imag)
    if ys.size == 0:
        return []
    ys = _merge_close(ys, atol=1e-6 * max(1.0, float(np.max(np.abs(ys)))))
    if refine:
        ys = [_refine_vertical(prob, gamma, x, y) for y in ys]
    return list(map(float, ys))


def _merge_close(vals, atol):
    """Average runs of values closer than atol (restores split double roots)."""
    vals = np.sort(np.asarray(vals, dtype=float))
    groups = [[vals[0]]]
    for v in vals[1:]:
        if v - groups[-1][-1] <= atol:
            groups[-1].append(v)
        else:
            groups.append([v])
    return np.array([np.mean(g) for g in groups])


def _sigma_nearest(M, gamma):
    U, s, Vh = np.linalg.svd(M)
    j = int(np.argmin(np.abs(s - gamma)))
    return s[j], U[:, j], Vh[j, :].conj()


def _refine_vertical(prob, gamma, x, y, steps=25):
    """Newton-polish y so that the singular value nearest gamma hits gamma."""
    n = prob.n
    eye = np.eye(n)
    for _ in range(steps):
        G = ((x + 1j * y) * eye - prob.A) / x
        s, u, v = _sigma_nearest(G, gamma)
        err = s - gamma
        if abs(err) <= 1e-15 * max(1.0, gamma):
            break
        ds = float(np.real(u.conj() @ ((1j / x) * v)))
        if abs(ds) < 1e-14:
            break
        step = -err / ds
        if abs(step) > 0.5 * max(1.0, abs(y)):
            break
        y = y + step
    return y


def _verify_point_ct(prob, gamma, x, y):
    """Directly confirm gamma is a singular value of G(x, y); return EvalPoint."""
    pt = objective.g_eval(prob, x, y)
    if not pt.feasible:
        return None
    s = pt._S
    if np.min(np.abs(s - gamma)) <= VERIFY_RTOL * prob.norm2:
        return pt
    return None


# --------------------------------------------------------------------------
# pencil assembly
# --------------------------------------------------------------------------

def _gamma_block(n, gamma):
    eye = np.eye(n)
    return np.block([[eye, -gamma * eye], [gamma * eye, -eye]])


def build_fixed_pencil(prob: MatrixProblem, gamma: float, eta: float,
                       theta_orient: float = np.pi / 2) -> KroneckerPencil:
    """Assemble the fixed-distance pencil for pairs eta apart at a given angle.

    Real positive eigenvalues x of m1 w = x m2 w locate vertical lines that
    may carry level-set points of the pair condition
    g(x, y) = g(x + eta*cos(theta), y + eta*sin(theta)) = gamma.
    """
    _check_gamma_eta(gamma, eta, allow_zero_eta=True)
    if not (-np.pi / 2 < theta_orient <= np.pi / 2):
        raise ValueError("theta_orient must lie in (-pi/2, pi/2]")
    n = prob.n
    A = prob.A
    eye = np.eye(n)
    eye2 = np.eye(2 * n)
    e_p = np.exp(1j * theta_orient)
    e_m = np.exp(-1j * theta_orient)
    ct = np.cos(theta_orient)
    left = np.block([[A, 0 * eye], [0 * eye, -A.conj().T]])
    right = np.block([
        [A.conj() - eta * e_m * eye, gamma * eta * ct * eye],
        [-gamma * eta * ct * eye, eta * e_p * eye - A.T],
    ])
    m1 = np.kron(eye2, left) + np.kron(right, eye2)
    C = _gamma_block(n, gamma)
    m2 = np.kron(eye2, C) + np.kron(C, eye2)
    return KroneckerPencil(m1, m2, gamma, eta, "fixed", theta_orient=theta_orient)


def build_variable_pencil(prob: MatrixProblem, gamma: float, eta: float) -> KroneckerPencil:
    """Pencil for vertically oriented pairs a variable distance x*eta apart."""
    _check_gamma_eta(gamma, eta)
    n = prob.n
    A = prob.A
    eye = np.eye(n)
    eye2 = np.eye(2 * n)
    left = np.block([[A, 0 * eye], [0 * eye, -A.conj().T]])
    right = np.block([[A.conj(), 0 * eye], [0 * eye, -A.T]])
    m1 = np.kron(eye2, left) + np.kron(right, eye2)
    C = _gamma_block(n, gamma)
    D = np.block([
        [(1 - 1j * eta) * eye, -gamma * eye],
        [gamma * eye, -(1 + 1j * eta) * eye],
    ])
    m2 = np.kron(eye2, C) + np.kron(D, eye2)
    return KroneckerPencil(m1, m2, gamma, eta, "variable-vertical")


def build_horizontal_pencil(prob: MatrixProblem, gamma: float, eta: float) -> KroneckerPencil:
    """Pencil for horizontal pairs (x, y), (beta*x, y), beta = 1 + eta/(1+gamma)."""
    _check_gamma_eta(gamma, eta)
    n = prob.n
    A = prob.A
    eye = np.eye(n)
    eye2 = np.eye(2 * n)
    beta = 1.0 + eta / (1.0 + gamma)
    left = np.block([[A, 0 * eye], [0 * eye, -A.conj().T]])
    right = np.block([[A.conj(), 0 * eye], [0 * eye, -A.T]])
    m1 = np.kron(eye2, left) + np.kron(right, eye2)
    C = _gamma_block(n, gamma)
    m2 = np.kron(eye2, C) + beta * np.kron(C, eye2)
    return KroneckerPencil(m1, m2, gamma, eta, "variable-horizontal", beta=beta)


def _check_gamma_eta(gamma, eta, allow_zero_eta=False):
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must be in (0, 1); got {gamma}")
    if eta < 0.0 or (eta == 0.0 and not allow_zero_eta):
        raise ValueError("eta must be positive")


# --------------------------------------------------------------------------
# real-eigenvalue extraction and the tests themselves
# --------------------------------------------------------------------------

def _real_positive_eigs_dense(pencil, real_rtol, b2inv_tol=None):
    """Positive real eigenvalues of the pencil via dense QZ.

    When ``b2inv_tol`` is given (variable-distance pencils only, where m2
    is invertible) the real-axis band is the absolute tolerance
    b2inv_tol * eps_mach * ||m2^{-1} m1||_inf instead of the relative one.
    """
    alpha, beta = scipy.linalg.eigvals(pencil.m1, pencil.m2, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-14 * (np.abs(alpha) + 1.0)
    lam = alpha[finite] / beta[finite]
    if b2inv_tol is not None:
        T = np.linalg.solve(pencil.m2, pencil.m1)
        band = b2inv_tol * np.finfo(float).eps * np.linalg.norm(T, np.inf)
        keep = np.abs(lam.imag) <= max(CAPTURE_FACTOR * band,
                                       _capture_band_rel(0.0, pencil.eta))
        tol_used = band
    else:
        rel = _capture_band_rel(real_rtol, pencil.eta)
        keep = np.abs(lam.imag) <= rel * np.maximum(1.0, np.abs(lam.real))
        tol_used = real_rtol
    xs = lam[keep].real
    xs = xs[xs > LINE_DEDUP_ATOL]
    return np.sort(xs), len(lam), tol_used


def _real_positive_eigs_dnc(pencil_builder, op, lo, hi, k_per_shift, seed):
    from .dnc import real_eigs_in_interval

    vals = real_eigs_in_interval(op, lo, hi, k_per_shift=k_per_shift, seed=seed)
    return np.sort(np.asarray(vals, dtype=float)), op.dim, REAL_AXIS_RTOL


def _collect_points(prob, gamma, lines):
    """Run the 1D vertical test on each candidate line; verify what it finds."""

    def one_line(x):
        pts, rej = [], 0
        for y in vertical_level_points(prob, gamma, x):
            pt = _verify_point_ct(prob, gamma, x, y)
            if pt is None:
                rej += 1
            else:
                pts.append(pt)
        return pts, rej

    results = _fan_out(one_line, lines, WORKERS)
    points, rejected = [], 0
    for pts, rej in results:
        points.extend(pts)
        rejected += rej
    return points, rejected


def _fan_out(fn, items, workers):
    if workers > 1 and len(items) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


def _dedupe_lines(xs):
    if len(xs) == 0:
        return []
    merged = [xs[0]]
    for x in xs[1:]:
        if x - merged[-1] > LINE_DEDUP_ATOL:
            merged.append(x)
    return merged


def _augment_with_midpoints(xs, window_rel=0.02):
    """Insert midpoints of nearby candidate pairs.

    A double real eigenvalue (pair-tangent configuration) is extremely
    ill-conditioned and splits under rounding into two candidates that can
    each miss the level set; their midpoint cancels the first-order error.
    Extra lines only feed the verified 1D stage, so this is cost, not risk.
    """
    xs = sorted(xs)
    extra = []
    for a, b in zip(xs, xs[1:]):
        if b - a <= window_rel * max(1.0, abs(a)):
            extra.append(0.5 * (a + b))
    return sorted(set(xs) | set(extra))


def _require_ct(prob):
    if prob.time_domain is not TimeDomain.CONTINUOUS:
        raise ValueError("continuous-time certificate needs a continuous-time problem")


def fixed_distance_test(prob: MatrixProblem, gamma: float, eta: float,
                        theta_orient: float = np.pi / 2,
                        real_rtol: float = REAL_AXIS_RTOL,
                        use_dnc: bool = False, dnc_interval=None,
                        k_per_shift: int = 6, seed: int = 0) -> CertificateReport:
    """2D level-set test for fixed-distance pairs (backtracking certificate).

    Returns every verified level-set point found on the candidate vertical
    lines x and (when the orientation is not vertical) x + eta*cos(theta).
    Any returned point witnesses gamma >= 1/K; emptiness carries no bound
    by itself, which is why the backtracking iteration shrinks eta.
    """
    _require_ct(prob)
    pencil = build_fixed_pencil(prob, gamma, eta, theta_orient)
    if use_dnc:
        from .dnc import op_fixed_ct

        op = op_fixed_ct(prob, gamma, eta, theta_orient)
        lo, hi = dnc_interval or (0.0, _default_dnc_hi(prob, gamma))
        xs, count, tol_used = _real_positive_eigs_dnc(None, op, lo, hi, k_per_shift, seed)
    else:
        xs, count, tol_used = _real_positive_eigs_dense(pencil, real_rtol)
    lines = _augment_with_midpoints(_dedupe_lines(list(xs)))
    if abs(theta_orient) < np.pi / 2 and eta > 0:
        shifted = [x + eta * np.cos(theta_orient) for x in lines]
        lines = _dedupe_lines(sorted(lines + shifted))
    points, rejected = _collect_points(prob, gamma, lines)
    return CertificateReport(
        gamma=gamma, eta=eta, variant="fixed", candidate_lines=lines,
        points=points, large_eig_count=count, real_eig_tol_used=tol_used,
        theta_orient=theta_orient, rejected_points=rejected,
    )


def variable_distance_test(prob: MatrixProblem, gamma: float, eta: float,
                           real_rtol: float = REAL_AXIS_RTOL,
                           b2inv_tol: Optional[float] = None,
                           use_dnc: bool = False, dnc_interval=None,
                           k_per_shift: int = 6, seed: int = 0) -> CertificateReport:
    """2D level-set test for vertical pairs a variable distance x*eta apart.

    An empty report certifies the coordinate-free bound 1/K > gamma - eta/2;
    a nonempty one returns verified points, each witnessing gamma >= 1/K.
    """
    _require_ct(prob)
    pencil = build_variable_pencil(prob, gamma, eta)
    if use_dnc:
        from .dnc import op_variable_ct

        op = op_variable_ct(prob, gamma, eta)
        lo, hi = dnc_interval or (0.0, _default_dnc_hi(prob, gamma))
        xs, count, tol_used = _real_positive_eigs_dnc(None, op, lo, hi, k_per_shift, seed)
    else:
        xs, count, tol_used = _real_positive_eigs_dense(pencil, real_rtol, b2inv_tol)
    lines = _augment_with_midpoints(_dedupe_lines(list(xs)))
    points, rejected = _collect_points(prob, gamma, lines)
    return CertificateReport(
        gamma=gamma, eta=eta, variant="variable-vertical", candidate_lines=lines,
        points=points, large_eig_count=count, real_eig_tol_used=tol_used,
        rejected_points=rejected,
    )


def horizontal_variable_test(prob: MatrixProblem, gamma: float, eta: float,
                             real_rtol: float = REAL_AXIS_RTOL,
                             use_dnc: bool = False, dnc_interval=None,
                             k_per_shift: int = 6, seed: int = 0) -> CertificateReport:
    """Horizontal variable-distance test on pairs (x, y), (beta*x, y).

    Same lower-bound semantics as the vertical variable-distance test;
    selectable as an alternative backend.
    """
    _require_ct(prob)
    pencil = build_horizontal_pencil(prob, gamma, eta)
    beta = pencil.beta
    if use_dnc:
        from .dnc import op_horizontal_ct

        op = op_horizontal_ct(prob, gamma, eta)
        lo, hi = dnc_interval or (0.0, _default_dnc_hi(prob, gamma))
        xs, count, tol_used = _real_positive_eigs_dnc(None, op, lo, hi, k_per_shift, seed)
    else:
        xs, count, tol_used = _real_positive_eigs_dense(pencil, real_rtol)
    base = _augment_with_midpoints(_dedupe_lines(list(xs)))
    lines = _dedupe_lines(sorted(base + [beta * x for x in base]))
    points, rejected = _collect_points(prob, gamma, lines)
    return CertificateReport(
        gamma=gamma, eta=eta, variant="variable-horizontal", candidate_lines=lines,
        points=points, large_eig_count=count, real_eig_tol_used=tol_used,
        rejected_points=rejected,
    )


def _default_dnc_hi(prob, gamma):
    # sigma_min((x+iy)I - A) >= x - ||A||, so gamma-level points need
    # x <= ||A||/(1 - gamma): a proven enclosure, no doubling ever needed
    return 1.1 * max(prob.norm2 / (1.0 - gamma), 4.0 * max(prob.norm2, 1.0))


# --------------------------------------------------------------------------
# structured Kronecker-sum inverse (variable-distance m2)
# --------------------------------------------------------------------------

@dataclass
class KronSumInverse:
    """Factored inverse of D = I_{2k} (x) C + (C + s I_{2n}) (x) I_{2k}.

    C is the 2n x 2n block matrix [[a I, -b I], [b I, -a I]].  The inverse
    is s^{-1} I - beta^{-1} U_k (I - 2 s^{-1} I_k (x) C) V_k with
    beta = s^2 + 4 (b^2 - a^2), applied to a vector in O(k n^2) beyond the
    two thin products.
    """

    a: complex
    b: complex
    k: int
    n: int
    s: complex
    beta: complex
    u_factor: scipy.sparse.spmatrix
    v_factor: scipy.sparse.spmatrix
    middle: scipy.sparse.spmatrix

    @property
    def dim(self) -> int:
        return 4 * self.k * self.n

    def matvec(self, y):
        y = np.asarray(y, dtype=complex)
        t = self.v_factor @ y
        t = t - (2.0 / self.s) * (self.middle @ t)
        return y / self.s - (self.u_factor @ t) / self.beta

    def dense(self) -> np.ndarray:
        eye = np.eye(self.dim, dtype=complex)
        return np.column_stack([self.matvec(eye[:, j]) for j in range(self.dim)])


def _structured_factors(a, b, k, n):
    eye_n = scipy.sparse.identity(n, format="csr", dtype=complex)
    eye_k = scipy.sparse.identity(k, format="csr", dtype=complex)
    top = scipy.sparse.bmat([[2 * a * eye_n, -b * eye_n], [b * eye_n, None]], format="csr")
    Uk = scipy.sparse.vstack([
        scipy.sparse.kron(eye_k, top, format="csr"),
        b * scipy.sparse.identity(2 * k * n, dtype=complex, format="csr"),
    ], format="csr")
    rightblk = scipy.sparse.bmat(
        [[None, -eye_n], [eye_n, -2 * a / b * eye_n]], format="csr"
    )
    Vk = scipy.sparse.hstack([
        scipy.sparse.identity(2 * k * n, dtype=complex, format="csr"),
        scipy.sparse.kron(eye_k, rightblk, format="csr"),
    ], format="csr")
    C = scipy.sparse.bmat([[a * eye_n, -b * eye_n], [b * eye_n, -a * eye_n]], format="csr")
    middle = scipy.sparse.kron(eye_k, C, format="csr")
    return Uk, Vk, middle


def kron_sum_inverse(a, b, k: int, n: int, s) -> KronSumInverse:
    """Structured inverse of the shifted Kronecker sum (see KronSumInverse).

    Raises SingularDError when s = 0 or beta = s^2 + 4(b^2 - a^2) = 0, the
    exact singularity conditions.
    """
    a, b, s = complex(a), complex(b), complex(s)
    if b == 0:
        raise ValueError("b must be nonzero")
    beta = s**2 + 4.0 * (b**2 - a**2)
    scale = abs(s) ** 2 + 4.0 * (abs(b) ** 2 + abs(a) ** 2)
    if abs(s) == 0.0 or abs(beta) <= 1e-14 * scale:
        raise SingularDError(f"shifted Kronecker sum is singular (s={s}, beta={beta})")
    Uk, Vk, middle = _structured_factors(a, b, k, n)
    return KronSumInverse(a=a, b=b, k=k, n=n, s=s, beta=beta,
                          u_factor=Uk, v_factor=Vk, middle=middle)
