"""Globally convergent Kreiss-constant iterations.

Three methods, each pairing local optimization of the inverse-Kreiss
objective with a 2D level-set globality certificate:

* ``solve_owr_backtracking``: optimization-with-restarts where the
  fixed-distance certificate is retried with eta shrunk by a factor c
  until it either finds restart points or eta falls below eta_tol;
* ``solve_owr``: optimization-with-restarts without backtracking, using a
  variable-distance certificate at gamma = g_k (1 - 0.5 tol),
  eta = g_k tol, whose empty outcome certifies 1/K > g_k (1 - tol);
* ``solve_trisection``: lower/upper bound trisection on the same
  variable-distance certificate, shrinking the bracket by 2/3 per step.

All three support both time domains; the certificate backend is
selectable, with fixed variants reserved for the backtracking method and
variable variants for the other two (their termination semantics require
the coordinate-free lower bound).
"""

from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import cert_ct, cert_dt, localopt, objective
from .errors import InfeasibleStartError, KreissError
from .matio import MatrixProblem, TimeDomain

__all__ = [
    "SolveStatus",
    "TraceEntry",
    "Bounds",
    "KreissResult",
    "default_start",
    "solve_owr_backtracking",
    "solve_owr",
    "solve_trisection",
    "compute_kreiss",
    "CERTIFICATE_CHOICES",
]

CERTIFICATE_CHOICES = ("fixed-v", "fixed-h", "variable-v", "variable-h")
_MAX_RESTARTS = 100
_MAX_TRISECTION_ITERS = 1000
# optimization can stall on the large-x plateau (value >= 1) even for
# nonnormal matrices, so a plateau value alone never decides K = 1: the
# certificates are probed at 1 - _PLATEAU_PROBE_GAP, where emptiness
# genuinely bounds K below 1/(1 - gap) and detection restarts the descent
_PLATEAU_PROBE_GAP = 1e-9
# detected points with gradient norm below this are considered stationary
# and never used for restarting
_STATIONARY_GRAD_TOL = 1e-12


class SolveStatus(enum.Enum):
    CONVERGED = "converged"
    TOLERANCE_REACHED = "tolerance-reached"
    FAILED = "failed"


@dataclass
class TraceEntry:
    phase: str
    gamma: float
    eta: float
    verdict: str
    points: int = 0


@dataclass
class Bounds:
    lb: float
    ub: float

    @property
    def width(self) -> float:
        return self.ub - self.lb


@dataclass
class KreissResult:
    kreiss: float
    gamma_inv: float
    minimizer: Optional[objective.EvalPoint]
    restarts: int
    certificate_calls: int
    trace: list[TraceEntry]
    status: SolveStatus
    wall_time: float
    method: str
    bounds_history: list[Bounds] = field(default_factory=list)
    message: str = ""
    reports: list = field(default_factory=list)


def default_start(prob: MatrixProblem):
    """Heuristic feasible starting coordinates.

    Continuous: x0 = max(1, -2 alpha(A)) on the height of the rightmost
    eigenvalue; discrete: radius halfway to 1/rho(A) at the angle of a
    largest-modulus eigenvalue.  The first coordinate is doubled (measured
    from the barrier) while the objective is infinite, which cannot happen
    for stable problems but keeps the helper total.
    """
    eigs = prob.eigenvalues
    if prob.time_domain is TimeDomain.CONTINUOUS:
        lead = eigs[int(np.argmax(eigs.real))]
        c1, c2 = max(1.0, -2.0 * prob.spectral_abscissa), float(lead.imag)
        lo = 0.0
    else:
        lead = eigs[int(np.argmax(np.abs(eigs)))]
        c1 = 1.0 + 0.5 * (1.0 / prob.spectral_radius - 1.0)
        c2 = float(np.angle(lead))
        lo = 1.0
    for _ in range(200):
        if np.isfinite(objective.evaluate(prob, c1, c2).value):
            break
        c1 = lo + 2.0 * (c1 - lo)
    return (c1, c2)


def _certificate_runner(prob, certificate, use_dnc, seed):
    """Bind the chosen certificate backend to a (gamma, eta) callable."""
    if certificate not in CERTIFICATE_CHOICES:
        raise ValueError(f"certificate must be one of {CERTIFICATE_CHOICES}")
    continuous = prob.time_domain is TimeDomain.CONTINUOUS
    if continuous:
        if certificate == "fixed-v":
            return lambda g, e: cert_ct.fixed_distance_test(
                prob, g, e, theta_orient=np.pi / 2, use_dnc=use_dnc, seed=seed)
        if certificate == "fixed-h":
            return lambda g, e: cert_ct.fixed_distance_test(
                prob, g, e, theta_orient=0.0, use_dnc=use_dnc, seed=seed)
        if certificate == "variable-v":
            return lambda g, e: cert_ct.variable_distance_test(
                prob, g, e, use_dnc=use_dnc, seed=seed)
        return lambda g, e: cert_ct.horizontal_variable_test(
            prob, g, e, use_dnc=use_dnc, seed=seed)
    # the discrete tests are radial; both orientations map to the same test
    if certificate.startswith("fixed"):
        return lambda g, e: cert_dt.fixed_distance_test_dt(
            prob, g, e, use_dnc=use_dnc, seed=seed)
    return lambda g, e: cert_dt.variable_distance_test_dt(
        prob, g, e, use_dnc=use_dnc, seed=seed)


def _initial_minimum(prob, start, opt_opts):
    start = default_start(prob) if start is None else tuple(map(float, start))
    return localopt.minimize(prob, start, **opt_opts)


def _usable_restart_points(prob, report, gamma):
    """Verified points that are neither stationary nor above the level."""
    out = []
    for pt in report.points:
        if not pt.feasible or pt.value > gamma * (1.0 + 1e-10):
            continue
        try:
            der = objective.gradient(pt, prob, allow_subgradient=True)
        except KreissError:
            continue
        if np.linalg.norm(der.grad) <= _STATIONARY_GRAD_TOL:
            continue
        out.append(pt)
    return sorted(out, key=lambda p: p.value)


def _finish(result_args, t0):
    result_args["wall_time"] = time.perf_counter() - t0
    gamma_inv = result_args.pop("final_gamma_inv")
    kreiss = max(1.0, 1.0 / gamma_inv) if gamma_inv > 0 else np.inf
    result_args["kreiss"] = kreiss
    result_args["gamma_inv"] = 1.0 / kreiss
    return KreissResult(**result_args)


def solve_owr_backtracking(
    prob: MatrixProblem,
    start=None,
    eta_tol: Optional[float] = None,
    eta0: Optional[float] = None,
    c: float = 0.5,
    certificate: str = "fixed-v",
    use_dnc: bool = False,
    seed: int = 0,
    **opt_opts,
) -> KreissResult:
    """Optimization-with-restarts using a backtracked fixed-distance test.

    After each local minimization (value g_k) the fixed-distance test runs
    at gamma = g_k with eta shrunk by the factor ``c`` until either
    level-set points are found (restart) or eta <= eta_tol (terminate:
    g_k is the global minimum to tolerance, so K = 1/g_k).
    """
    if not certificate.startswith("fixed"):
        raise ValueError("the backtracking method needs a fixed-distance certificate")
    if not (0.0 < c < 1.0):
        raise ValueError("c must lie in (0, 1)")
    t0 = time.perf_counter()
    runner = _certificate_runner(prob, certificate, use_dnc, seed)
    trace: list[TraceEntry] = []
    res = _initial_minimum(prob, start, opt_opts)
    lo = 0.0 if prob.time_domain is TimeDomain.CONTINUOUS else 1.0
    if eta0 is None:
        eta0 = 0.1 * (res.minimizer.coords[0] - lo)
    if eta_tol is None:
        eta_tol = 1e-8 * eta0
    restarts = 0
    cert_calls = 0
    status = SolveStatus.CONVERGED
    message = ""
    reports: list = []

    for _ in range(_MAX_RESTARTS):
        g_k = res.value
        trace.append(TraceEntry("optimize", g_k, 0.0, "minimized"))
        # a plateau value >= 1 is no proof of normality: probe just below 1,
        # where the test either finds a way down or backs the value K = 1
        gamma = min(g_k, 1.0 - _PLATEAU_PROBE_GAP)
        eta = eta0
        restarted = False
        while True:
            try:
                report = runner(gamma, eta)
            except KreissError as exc:
                status = SolveStatus.FAILED
                message = f"certificate failure: {exc}"
                break
            cert_calls += 1
            reports.append(report)
            trace.append(TraceEntry("certificate", gamma, eta,
                                    "points" if report.points else "empty",
                                    len(report.points)))
            candidates = _usable_restart_points(prob, report, gamma)
            if candidates:
                nxt = localopt.minimize(prob, candidates[0].coords, **opt_opts)
                if nxt.value < g_k * (1.0 - 1e-14):
                    res = nxt
                    restarts += 1
                    restarted = True
                    break
                # detection did not lead anywhere lower; keep backtracking
            if eta <= eta_tol:
                break
            eta = c * eta
        if status is SolveStatus.FAILED or not restarted:
            break
    else:
        status = SolveStatus.FAILED
        message = "restart budget exhausted"

    return _finish(dict(
        final_gamma_inv=res.value, minimizer=res.minimizer, restarts=restarts,
        certificate_calls=cert_calls, trace=trace, status=status,
        method="owr-bt", message=message, reports=reports,
    ), t0)


def solve_owr(
    prob: MatrixProblem,
    start=None,
    gamma_tol: float = 1e-10,
    certificate: str = "variable-v",
    use_dnc: bool = False,
    seed: int = 0,
    **opt_opts,
) -> KreissResult:
    """Optimization-with-restarts without backtracking.

    Each round runs the variable-distance test at
    gamma = g_k (1 - 0.5 gamma_tol), eta = g_k gamma_tol.  Points restart
    optimization strictly below the previous minimum; an empty test proves
    1/K > g_k (1 - gamma_tol) and the iteration stops with 1/g_k.
    """
    if not certificate.startswith("variable"):
        raise ValueError("this method needs a variable-distance certificate")
    if gamma_tol <= 0:
        raise ValueError("gamma_tol must be positive")
    t0 = time.perf_counter()
    runner = _certificate_runner(prob, certificate, use_dnc, seed)
    trace: list[TraceEntry] = []
    res = _initial_minimum(prob, start, opt_opts)
    restarts = 0
    cert_calls = 0
    status = SolveStatus.CONVERGED
    message = ""
    reports: list = []

    for _ in range(_MAX_RESTARTS):
        g_k = res.value
        trace.append(TraceEntry("optimize", g_k, 0.0, "minimized"))
        if g_k >= 1.0 - _PLATEAU_TOL:
            message = "objective has no levels below 1 (normal-matrix plateau)"
            break
        gamma = g_k * (1.0 - 0.5 * gamma_tol)
        eta = g_k * gamma_tol
        try:
            report = runner(gamma, eta)
        except KreissError as exc:
            status = SolveStatus.FAILED
            message = f"certificate failure: {exc}"
            break
        cert_calls += 1
        reports.append(report)
        trace.append(TraceEntry("certificate", gamma, eta,
                                "points" if report.points else "empty",
                                len(report.points)))
        candidates = _usable_restart_points(prob, report, gamma)
        if not candidates:
            message = f"certified 1/K > {g_k * (1.0 - gamma_tol):.17g}"
            break
        nxt = localopt.minimize(prob, candidates[0].coords, **opt_opts)
        if nxt.value >= g_k * (1.0 - 1e-14):
            message = "detected points did not improve the minimum; accepting g_k"
            break
        res = nxt
        restarts += 1
    else:
        status = SolveStatus.FAILED
        message = "restart budget exhausted"

    return _finish(dict(
        final_gamma_inv=res.value, minimizer=res.minimizer, restarts=restarts,
        certificate_calls=cert_calls, trace=trace, status=status,
        method="owr", message=message, reports=reports,
    ), t0)


def solve_trisection(
    prob: MatrixProblem,
    start=None,
    gamma_tol: float = 1e-10,
    certificate: str = "variable-v",
    use_dnc: bool = False,
    seed: int = 0,
    **opt_opts,
) -> KreissResult:
    """Trisection on [lb, ub] with the variable-distance certificate.

    Initialized with lb = 0 and ub = the objective value at the start
    (optimized below 1 first when necessary).  Each step tests
    gamma = lb + (2/3)(ub - lb) with eta = (2/3)(ub - lb): points give
    ub = gamma, emptiness gives lb += (1/3)(ub - lb), so the bracket width
    shrinks by 2/3 per certificate call until ub - lb <= ub * gamma_tol.
    """
    if not certificate.startswith("variable"):
        raise ValueError("trisection needs a variable-distance certificate")
    if gamma_tol <= 0:
        raise ValueError("gamma_tol must be positive")
    t0 = time.perf_counter()
    runner = _certificate_runner(prob, certificate, use_dnc, seed)
    trace: list[TraceEntry] = []
    cert_calls = 0
    restarts = 0
    status = SolveStatus.TOLERANCE_REACHED
    message = ""
    reports: list = []

    start = default_start(prob) if start is None else tuple(map(float, start))
    ub = objective.evaluate(prob, *start).value
    if not np.isfinite(ub):
        raise InfeasibleStartError(f"objective is +inf at start {start}")
    if ub >= 1.0:
        # the certificate needs gamma < 1; pull the upper bound below it
        res = localopt.minimize(prob, start, **opt_opts)
        ub = res.value
        trace.append(TraceEntry("optimize", ub, 0.0, "minimized"))
        if ub >= 1.0 - _PLATEAU_TOL:
            return _finish(dict(
                final_gamma_inv=ub, minimizer=None, restarts=0,
                certificate_calls=0, trace=trace, status=SolveStatus.CONVERGED,
                method="trisection", bounds_history=[],
                message="objective has no levels below 1 (normal-matrix plateau)",
            ), t0)
    lb = 0.0
    history = [Bounds(lb, ub)]

    for _ in range(_MAX_TRISECTION_ITERS):
        if (ub - lb) <= ub * gamma_tol:
            break
        diff = ub - lb
        eta = (2.0 / 3.0) * diff
        gamma = lb + eta
        try:
            report = runner(gamma, eta)
        except KreissError as exc:
            status = SolveStatus.FAILED
            message = f"certificate failure: {exc}"
            break
        cert_calls += 1
        reports.append(report)
        if report.points:
            ub = gamma
            verdict = "points"
        else:
            lb = lb + diff / 3.0
            verdict = "empty"
        trace.append(TraceEntry("trisection", gamma, eta, verdict, len(report.points)))
        history.append(Bounds(lb, ub))
    else:
        status = SolveStatus.FAILED
        message = "trisection iteration budget exhausted"

    return _finish(dict(
        final_gamma_inv=ub, minimizer=None, restarts=restarts,
        certificate_calls=cert_calls, trace=trace, status=status,
        method="trisection", bounds_history=history, message=message,
        reports=reports,
    ), t0)


def compute_kreiss(prob: MatrixProblem, method: str = "owr", **kwargs) -> KreissResult:
    """Dispatch to one of the three iterations (or the grid oracle).

    ``method`` is one of 'owr-bt', 'owr', 'trisection', 'grid'.  The grid
    method is the brute-force oracle, returned in the same result type with
    no certificate guarantees.
    """
    if method == "owr-bt":
        return solve_owr_backtracking(prob, **kwargs)
    if method == "owr":
        return solve_owr(prob, **kwargs)
    if method == "trisection":
        return solve_trisection(prob, **kwargs)
    if method == "grid":
        from . import oracle

        t0 = time.perf_counter()
        kwargs.pop("start", None)
        val, coords = oracle.grid_min(prob, **kwargs)
        pt = objective.evaluate(prob, *coords)
        return _finish(dict(
            final_gamma_inv=val, minimizer=pt, restarts=0, certificate_calls=0,
            trace=[TraceEntry("grid", val, 0.0, "minimized")],
            status=SolveStatus.CONVERGED, method="grid",
            message="brute-force oracle estimate (no globality certificate)",
        ), t0)
    raise ValueError(f"unknown method {method!r}")
