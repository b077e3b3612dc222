"""Discrete-time 2D level-set globality certificates.

The search domain of h(r, theta) is the exterior of the unit disk.  Level
pairs are sought along rays from the origin: a fixed distance eta apart,
h(r, theta) = h(r + eta, theta) = gamma, or a variable distance
(r - 1) * eta / (1 + gamma) apart, h(r, theta) = h(beta*r + delta, theta)
= gamma with delta = -eta/(1+gamma) and beta = 1 - delta.  Either pair
condition leads to a 4n^2 quadratic eigenvalue problem in r, solved here
through its companion linearization; candidate radii r > 1 are then probed
by a 1D circular test built on the symplectic pencil of the ray condition,
and every detected point is verified by a direct SVD before being
reported.  The empty outcome of the variable-distance test certifies
1/K > gamma - eta/2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from . import objective
from .cert_ct import (CAPTURE_FACTOR, CertificateReport, LINE_DEDUP_ATOL,
                      REAL_AXIS_RTOL, VERIFY_RTOL, _augment_with_midpoints,
                      _capture_band_rel, _merge_close)
from .errors import IllPosedError, SingularPencilError
from .linalg import eig_quadratic
from .matio import MatrixProblem, TimeDomain

__all__ = [
    "QuadPencil",
    "circular_level_points",
    "build_quad_pencil_fixed",
    "build_quad_pencil_variable",
    "fixed_distance_test_dt",
    "variable_distance_test_dt",
]

# eigenvalue of the symplectic pencil counts as unimodular when ||lam|-1| <= this
UNIMODULAR_ATOL = 1e-8
# candidate radii must exceed 1 by this margin
RADIUS_MARGIN = 1e-12
# gamma closer than this (times max(1, ||A||)) to a singular value of A gets nudged
GAMMA_SV_GUARD = 1e-8
# per-candidate-circle 1D tests are independent; >1 enables a thread pool
WORKERS = 1


@dataclass
class QuadPencil:
    """Coefficients of the 4n^2 quadratic problem (q0 + r q1 + r^2 q2) w = 0."""

    q0: np.ndarray
    q1: np.ndarray
    q2: np.ndarray
    gamma: float
    eta: float
    variant: str
    delta: Optional[float] = None
    beta: Optional[float] = None


# --------------------------------------------------------------------------
# 1D circular test
# --------------------------------------------------------------------------

def _symplectic_pencil(prob, gamma, r):
    n = prob.n
    eye = np.eye(n)
    M = np.block([[prob.A, gamma * (r - 1.0) * eye], [0 * eye, r * eye]])
    N = np.block([[r * eye, 0 * eye], [gamma * (r - 1.0) * eye, prob.A.conj().T]])
    return M, N


def circular_level_points(prob: MatrixProblem, gamma: float, r: float,
                          refine: bool = True) -> list[float]:
    """All theta in [0, 2*pi) with gamma a singular value of H(r, theta).

    gamma is a singular value of H(r, theta) iff e^{i theta} is an
    eigenvalue of the symplectic pencil
    [[A, gamma(r-1)I], [0, rI]] - lam [[rI, 0], [gamma(r-1)I, A*]],
    which is regular since A is nonsingular (problem invariant) and r != 0.
    Unimodular eigenvalues are clustered on the circle (double roots split
    symmetrically; the circular mean restores them) and polished by a 1D
    Newton iteration on sigma(H(r, .)) = gamma.
    """
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if r == 1.0 or r == 0.0:
        raise ValueError("r must differ from 0 and 1")
    M, N = _symplectic_pencil(prob, gamma, r)
    alpha, beta = scipy.linalg.eigvals(M, N, homogeneous_eigvals=True)
    finite = np.abs(beta) > 1e-14 * (np.abs(alpha) + 1.0)
    lam = alpha[finite] / beta[finite]
    if lam.size < M.shape[0] // 4:
        # mostly infinite eigenvalues would mean a (near-)singular pencil
        if not np.isfinite(lam).any():
            raise SingularPencilError("symplectic pencil has no finite eigenvalues")
    lam = lam[np.abs(np.abs(lam) - 1.0) <= CAPTURE_FACTOR * UNIMODULAR_ATOL]
    if lam.size == 0:
        return []
    thetas = _cluster_on_circle(lam)
    if refine:
        thetas = [_refine_circular(prob, gamma, r, t) for t in thetas]
    return sorted(float(np.mod(t, 2.0 * np.pi)) for t in thetas)


def _cluster_on_circle(lam, atol=1e-6):
    """Merge near-duplicate unimodular eigenvalues via their circular mean."""
    z = lam / np.abs(lam)
    order = np.argsort(np.angle(z))
    z = z[order]
    groups = [[z[0]]]
    for w in z[1:]:
        if abs(w - groups[-1][-1]) <= atol:
            groups[-1].append(w)
        else:
            groups.append([w])
    # the first and last group may wrap around the circle seam
    if len(groups) > 1 and abs(groups[0][0] - groups[-1][-1]) <= atol:
        groups[0].extend(groups.pop())
    return [float(np.angle(np.mean(g))) for g in groups]


def _sigma_nearest(M, gamma):
    U, s, Vh = np.linalg.svd(M)
    j = int(np.argmin(np.abs(s - gamma)))
    return s[j], U[:, j], Vh[j, :].conj()


def _refine_circular(prob, gamma, r, theta, steps=25):
    n = prob.n
    eye = np.eye(n)
    for _ in range(steps):
        H = (r * np.exp(1j * theta) * eye - prob.A) / (r - 1.0)
        s, u, v = _sigma_nearest(H, gamma)
        err = s - gamma
        if abs(err) <= 1e-15 * max(1.0, gamma):
            break
        ds = float(np.real(u.conj() @ ((1j * r * np.exp(1j * theta) / (r - 1.0)) * v)))
        if abs(ds) < 1e-14:
            break
        step = -err / ds
        if abs(step) > 0.5:
            break
        theta = theta + step
    return theta


def _verify_point_dt(prob, gamma, r, theta):
    pt = objective.h_eval(prob, r, theta)
    if not pt.feasible:
        return None
    if np.min(np.abs(pt._S - gamma)) <= VERIFY_RTOL * prob.norm2:
        return pt
    return None


# --------------------------------------------------------------------------
# quadratic pencil assembly
# --------------------------------------------------------------------------

def _ray_factor_blocks(prob, gamma, eta):
    """Constant/linear factors of M(r), Mt(r+eta)*, N(r), Nt(r+eta)*."""
    n = prob.n
    A = prob.A
    eye = np.eye(n)
    Z = 0 * eye
    C0 = np.block([[A, -gamma * eye], [Z, Z]])
    C1 = np.block([[Z, gamma * eye], [Z, eye]])
    D0 = np.block([[A.conj().T, Z], [gamma * (eta - 1.0) * eye, eta * eye]])
    D1 = np.block([[Z, Z], [gamma * eye, eye]])
    E0 = np.block([[Z, Z], [-gamma * eye, A.conj().T]])
    E1 = np.block([[eye, Z], [gamma * eye, Z]])
    F0 = np.block([[eta * eye, gamma * (eta - 1.0) * eye], [Z, A]])
    F1 = np.block([[eye, gamma * eye], [Z, Z]])
    return C0, C1, D0, D1, E0, E1, F0, F1


def build_quad_pencil_fixed(prob: MatrixProblem, gamma: float, eta: float) -> QuadPencil:
    """Quadratic problem whose real roots r > 1 locate fixed-distance ray pairs.

    Built from vec(M(r) W Mt(r+eta)* - N(r) W Nt(r+eta)*) = 0 with the
    symplectic-pencil factors of the 1D circular test; q2 is structurally
    singular while q0 is nonsingular exactly when gamma is not a singular
    value of A (A itself is nonsingular by the problem invariant), which
    keeps the companion linearization regular.
    """
    _check_gamma_eta_dt(gamma, eta)
    C0, C1, D0, D1, E0, E1, F0, F1 = _ray_factor_blocks(prob, gamma, eta)
    kr = np.kron
    q0 = kr(D0.T, C0) - kr(F0.T, E0)
    q1 = kr(D1.T, C0) + kr(D0.T, C1) - kr(F1.T, E0) - kr(F0.T, E1)
    q2 = kr(D1.T, C1) - kr(F1.T, E1)
    return QuadPencil(q0, q1, q2, gamma, eta, "fixed")


def build_quad_pencil_variable(prob: MatrixProblem, gamma: float, eta: float) -> QuadPencil:
    """Quadratic problem for variable-distance ray pairs (r, beta*r + delta).

    delta = -eta/(1+gamma) < 0 and beta = 1 - delta > 1; the pair
    separation is (beta*r + delta) - r = (r-1)*eta/(1+gamma).  q0 equals
    the fixed build's q0 with eta replaced by delta, and q2 is beta times
    the fixed q2.
    """
    _check_gamma_eta_dt(gamma, eta)
    delta = -eta / (1.0 + gamma)
    beta = 1.0 - delta
    C0, C1, D0d, D1, E0, E1, F0d, F1 = _ray_factor_blocks(prob, gamma, delta)
    kr = np.kron
    q0 = kr(D0d.T, C0) - kr(F0d.T, E0)
    q1 = beta * (kr(D1.T, C0) - kr(F1.T, E0)) + (kr(D0d.T, C1) - kr(F0d.T, E1))
    q2 = beta * (kr(D1.T, C1) - kr(F1.T, E1))
    return QuadPencil(q0, q1, q2, gamma, eta, "variable", delta=delta, beta=beta)


def _check_gamma_eta_dt(gamma, eta):
    if not (0.0 < gamma < 1.0):
        raise ValueError(f"gamma must be in (0, 1); got {gamma}")
    if eta <= 0.0:
        raise ValueError("eta must be positive")


def _nudge_gamma(prob, gamma):
    """Move gamma off the Thm-7.3 boundary (a singular value of A)."""
    svals = np.linalg.svd(prob.A, compute_uv=False)
    guard = GAMMA_SV_GUARD * max(1.0, float(svals[0]))
    gaps = gamma - svals
    j = int(np.argmin(np.abs(gaps)))
    if abs(gaps[j]) > guard:
        return gamma, False
    direction = 1.0 if gaps[j] >= 0 else -1.0
    nudged = gamma + direction * 1e-6 * gamma
    if not (0.0 < nudged < 1.0):
        nudged = gamma - direction * 1e-6 * gamma
    return nudged, True


# --------------------------------------------------------------------------
# the radial tests
# --------------------------------------------------------------------------

def _require_dt(prob):
    if prob.time_domain is not TimeDomain.DISCRETE:
        raise ValueError("discrete-time certificate needs a discrete-time problem")


def _real_radii(pencil, real_rtol, use_dnc, prob, dnc_interval, k_per_shift, seed):
    if use_dnc:
        from .dnc import op_quad_dt, real_eigs_in_interval

        op = op_quad_dt(prob, pencil.gamma, pencil.eta, variant=pencil.variant)
        lo, hi = dnc_interval or (1.0, _default_radius_hi(prob, pencil.gamma))
        vals = real_eigs_in_interval(op, lo, hi, k_per_shift=k_per_shift, seed=seed)
        lam = np.asarray(vals, dtype=float)
        count = op.dim
    else:
        # eta -> 0 drives the pencil toward singularity by design; results
        # are verified by direct SVD downstream, so skip the regularity probe
        spec = eig_quadratic(pencil.q0, pencil.q1, pencil.q2, check_regular=False)
        lam_c = spec.finite_values
        rel = _capture_band_rel(real_rtol, pencil.eta)
        keep = np.abs(lam_c.imag) <= rel * np.maximum(1.0, np.abs(lam_c.real))
        lam = lam_c[keep].real
        count = len(spec)
    lam = lam[lam > 1.0 + RADIUS_MARGIN]
    if lam.size == 0:
        return [], count
    radii = list(_merge_close(np.sort(lam), atol=LINE_DEDUP_ATOL))
    return _augment_with_midpoints(radii), count


def _default_radius_hi(prob, gamma):
    # sigma_min(r e^{i t} I - A) >= r - ||A||, so gamma-level points need
    # gamma (r - 1) >= r - ||A||, i.e. r <= (||A|| - gamma)/(1 - gamma)
    return 1.0 + 1.1 * max((prob.norm2 - gamma) / (1.0 - gamma),
                           4.0 * (prob.norm2 + 1.0))


def _collect_points_dt(prob, gamma, radii):
    from .cert_ct import _fan_out

    def one_circle(r):
        pts, rej = [], 0
        for theta in circular_level_points(prob, gamma, r):
            pt = _verify_point_dt(prob, gamma, r, theta)
            if pt is None:
                rej += 1
            else:
                pts.append(pt)
        return pts, rej

    points, rejected = [], 0
    for pts, rej in _fan_out(one_circle, list(radii), WORKERS):
        points.extend(pts)
        rejected += rej
    return points, rejected


def fixed_distance_test_dt(prob: MatrixProblem, gamma: float, eta: float,
                           real_rtol: float = REAL_AXIS_RTOL,
                           use_dnc: bool = False, dnc_interval=None,
                           k_per_shift: int = 6, seed: int = 0) -> CertificateReport:
    """Radial fixed-distance level-set test (discrete-time backtracking).

    Candidate circles come from the real roots r > 1 of the quadratic
    problem; the circles r and r + eta are both probed.  Any verified point
    witnesses gamma >= 1/K.
    """
    _require_dt(prob)
    _check_gamma_eta_dt(gamma, eta)
    gamma, _ = _nudge_gamma(prob, gamma)
    pencil = build_quad_pencil_fixed(prob, gamma, eta)
    try:
        radii, count = _real_radii(pencil, real_rtol, use_dnc, prob, dnc_interval,
                                   k_per_shift, seed)
    except IllPosedError as exc:
        raise IllPosedError(
            f"quadratic problem ill posed at gamma={gamma:.6g} "
            "(gamma coincides with a singular value of A)"
        ) from exc
    circles = sorted(set(radii) | {r + eta for r in radii})
    points, rejected = _collect_points_dt(prob, gamma, circles)
    return CertificateReport(
        gamma=gamma, eta=eta, variant="fixed-dt", candidate_lines=list(circles),
        points=points, large_eig_count=count, real_eig_tol_used=real_rtol,
        rejected_points=rejected,
    )


def variable_distance_test_dt(prob: MatrixProblem, gamma: float, eta: float,
                              real_rtol: float = REAL_AXIS_RTOL,
                              use_dnc: bool = False, dnc_interval=None,
                              k_per_shift: int = 6, seed: int = 0) -> CertificateReport:
    """Radial variable-distance test; empty certifies 1/K > gamma - eta/2."""
    _require_dt(prob)
    _check_gamma_eta_dt(gamma, eta)
    gamma, _ = _nudge_gamma(prob, gamma)
    pencil = build_quad_pencil_variable(prob, gamma, eta)
    try:
        radii, count = _real_radii(pencil, real_rtol, use_dnc, prob, dnc_interval,
                                   k_per_shift, seed)
    except IllPosedError as exc:
        raise IllPosedError(
            f"quadratic problem ill posed at gamma={gamma:.6g} "
            "(gamma coincides with a singular value of A)"
        ) from exc
    circles = sorted(set(radii) | {pencil.beta * r + pencil.delta for r in radii})
    points, rejected = _collect_points_dt(prob, gamma, circles)
    return CertificateReport(
        gamma=gamma, eta=eta, variant="variable-dt", candidate_lines=list(circles),
        points=points, large_eig_count=count, real_eig_tol_used=real_rtol,
        rejected_points=rejected,
    )
