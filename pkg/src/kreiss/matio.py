"""Matrix input/output, stability validation, and test-matrix generation."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse

from .errors import (
    MissingBaseMatrixError,
    NotSquareError,
    ParseError,
    UnknownKindError,
    UnstableError,
    ZeroEigenvalueError,
)

__all__ = [
    "TimeDomain",
    "MatrixKind",
    "MatrixProblem",
    "load_matrix",
    "save_matrix",
    "gen_test_matrix",
]

# Relative threshold below which an eigenvalue modulus counts as zero.
_ZERO_EIG_RTOL = 1e-14


class TimeDomain(str, enum.Enum):
    CONTINUOUS = "continuous"
    DISCRETE = "discrete"


class MatrixKind(str, enum.Enum):
    JORDAN_SHIFTED = "jordan-shifted"
    RANDOM_STABLE_SHIFTED = "random-stable-shifted"
    COMPANION_SHIFTED = "companion-shifted"
    CONVDIFF_SHIFTED = "convdiff-shifted"


@dataclass(frozen=True)
class MatrixProblem:
    """A validated stable matrix together with its time domain.

    Construction enforces the stability assumption the search algorithms
    rely on: all eigenvalues strictly in the open left half-plane
    (continuous) or strictly inside the unit disk with no zero eigenvalue
    (discrete).  Instances are immutable and safe to share across threads.
    """

    A: np.ndarray
    time_domain: TimeDomain
    n: int = field(init=False)
    spectral_abscissa: float = field(init=False)
    spectral_radius: float = field(init=False)
    eigenvalues: np.ndarray = field(init=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=complex))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise NotSquareError(f"matrix has shape {A.shape}")
        if A.shape[0] < 1:
            raise NotSquareError("matrix must be at least 1 x 1")
        if not np.all(np.isfinite(A)):
            raise ParseError("matrix has non-finite entries")
        A = A.copy()
        A.setflags(write=False)
        td = TimeDomain(self.time_domain)
        eigs = np.linalg.eigvals(A)
        eigs.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "time_domain", td)
        object.__setattr__(self, "n", A.shape[0])
        object.__setattr__(self, "eigenvalues", eigs)
        object.__setattr__(self, "spectral_abscissa", float(np.max(eigs.real)))
        object.__setattr__(self, "spectral_radius", float(np.max(np.abs(eigs))))
        self._validate()

    def _validate(self):
        if self.time_domain is TimeDomain.CONTINUOUS:
            # Strict margin with zero tolerance: borderline matrices rejected.
            if not self.spectral_abscissa < 0:
                raise UnstableError(
                    f"not Hurwitz stable: spectral abscissa = {self.spectral_abscissa:.6g} >= 0"
                )
        else:
            if not self.spectral_radius < 1:
                raise UnstableError(
                    f"not Schur stable: spectral radius = {self.spectral_radius:.6g} >= 1"
                )
            moduli = np.abs(self.eigenvalues)
            if np.min(moduli) <= _ZERO_EIG_RTOL * max(1.0, self.spectral_radius):
                raise ZeroEigenvalueError(
                    "zero is (numerically) an eigenvalue; the discrete-time "
                    "certificates require a nonsingular matrix"
                )

    @property
    def is_continuous(self) -> bool:
        return self.time_domain is TimeDomain.CONTINUOUS

    @property
    def norm2(self) -> float:
        """Spectral norm of A (cached)."""
        cached = getattr(self, "_norm2", None)
        if cached is None:
            cached = float(np.linalg.norm(self.A, 2))
            object.__setattr__(self, "_norm2", cached)
        return cached


# --------------------------------------------------------------------------
# file I/O
# --------------------------------------------------------------------------

_FORMATS = ("mm", "csv", "json")


def _normalize_format(fmt, path):
    if fmt is not None:
        fmt = {"matrixmarket": "mm", "mtx": "mm"}.get(str(fmt).lower(), str(fmt).lower())
        if fmt not in _FORMATS:
            raise ParseError(f"unknown matrix format {fmt!r}; expected one of {_FORMATS}")
        return fmt
    suffix = Path(path).suffix.lower()
    by_ext = {".mtx": "mm", ".mm": "mm", ".csv": "csv", ".json": "json"}
    if suffix not in by_ext:
        raise ParseError(f"cannot infer format from extension {suffix!r}")
    return by_ext[suffix]


def _parse_complex(token: str) -> complex:
    txt = token.strip().replace(" ", "")
    if not txt:
        raise ValueError("empty entry")
    return complex(txt.replace("i", "j").replace("I", "j"))


def _format_complex(z) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return repr(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real!r}{sign}{abs(z.imag)!r}i"


def load_matrix(path, fmt=None, time_domain=None) -> MatrixProblem:
    """Load and validate a matrix from a Matrix Market, CSV, or JSON file.

    Parameters
    ----------
    path : path-like
        File to read.
    fmt : {'mm', 'csv', 'json'}, optional
        Format; inferred from the extension when omitted.
    time_domain : TimeDomain or str, optional
        Declared time domain.  Required for 'mm' and 'csv'; for 'json' the
        embedded ``time_domain`` field is used unless overridden here.

    Raises
    ------
    ParseError, NotSquareError, UnstableError, ZeroEigenvalueError
    """
    path = Path(path)
    fmt = _normalize_format(fmt, path)
    if not path.exists():
        raise ParseError(f"no such file: {path}")

    if fmt == "mm":
        try:
            A = scipy.io.mmread(path)
        except Exception as exc:
            raise ParseError(f"Matrix Market parse failure: {exc}") from exc
        A = np.asarray(A.todense() if scipy.sparse.issparse(A) else A, dtype=complex)
    elif fmt == "csv":
        rows = []
        try:
            for line in path.read_text().splitlines():
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                rows.append([_parse_complex(tok) for tok in line.split(",")])
        except (ValueError, OSError) as exc:
            raise ParseError(f"CSV parse failure: {exc}") from exc
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise ParseError("CSV rows are empty or ragged")
        A = np.array(rows, dtype=complex)
    else:
        try:
            doc = json.loads(path.read_text())
            re_part = np.array(doc["real"], dtype=float)
            im_part = np.array(doc.get("imag", np.zeros_like(re_part).tolist()), dtype=float)
            A = re_part + 1j * im_part
            if time_domain is None:
                time_domain = doc.get("time_domain")
            if int(doc.get("n", A.shape[0])) != A.shape[0]:
                raise ParseError("JSON 'n' field disagrees with the matrix shape")
        except ParseError:
            raise
        except (KeyError, ValueError, TypeError, OSError) as exc:
            raise ParseError(f"JSON parse failure: {exc}") from exc

    if time_domain is None:
        raise ParseError("time_domain must be supplied for this format")
    return MatrixProblem(A, TimeDomain(time_domain))


def save_matrix(prob: MatrixProblem, path, fmt=None) -> None:
    """Write a problem's matrix to disk in Matrix Market, CSV, or JSON form."""
    path = Path(path)
    fmt = _normalize_format(fmt, path)
    A = np.asarray(prob.A)
    if fmt == "mm":
        scipy.io.mmwrite(path, A)
    elif fmt == "csv":
        lines = [",".join(_format_complex(z) for z in row) for row in A]
        path.write_text("\n".join(lines) + "\n")
    else:
        doc = {
            "n": prob.n,
            "real": A.real.tolist(),
            "imag": A.imag.tolist(),
            "time_domain": prob.time_domain.value,
        }
        path.write_text(json.dumps(doc))


# --------------------------------------------------------------------------
# test-matrix generation
# --------------------------------------------------------------------------

def _jordan_block(n, lam):
    return np.diag(np.full(n, lam, dtype=complex)) + np.diag(np.ones(n - 1), 1) if n > 1 \
        else np.array([[lam]], dtype=complex)


def gen_test_matrix(
    kind,
    n: int,
    seed: int = 0,
    time_domain=TimeDomain.CONTINUOUS,
    eps: float = 0.3,
    base_matrix=None,
) -> MatrixProblem:
    """Generate a deterministic stable test matrix.

    Parameters
    ----------
    kind : MatrixKind or str
        'jordan-shifted': a single Jordan block with eigenvalue ``-eps``
        (continuous) or ``1 - eps`` (discrete).
        'random-stable-shifted': a seeded Gaussian matrix shifted
        (continuous) or scaled (discrete) into the stable region.
        'companion-shifted' / 'convdiff-shifted': the shifted/scaled
        constructions ``B - 1.001*alpha(B)*I`` and ``B/13 + (11/10)*I``
        applied to an externally supplied base matrix ``B``.
    n : int
        Dimension (ignored for the base-matrix kinds, which take the base's).
    seed : int
        RNG seed; generation is deterministic for a fixed seed.
    time_domain : TimeDomain or str
        Target time domain.
    eps : float
        Stability margin for the Jordan kind, in (0, 1) for discrete.
    base_matrix : ndarray or path-like, optional
        Base matrix ``B`` for the two shifted EigTool-style kinds.  May be a
        file path loadable by :func:`load_matrix` conventions.
    """
    try:
        kind = MatrixKind(kind)
    except ValueError as exc:
        raise UnknownKindError(f"unknown test-matrix kind {kind!r}") from exc
    td = TimeDomain(time_domain)
    if n < 1:
        raise ValueError("n must be >= 1")

    if kind is MatrixKind.JORDAN_SHIFTED:
        lam = -eps if td is TimeDomain.CONTINUOUS else 1.0 - eps
        return MatrixProblem(_jordan_block(n, lam), td)

    if kind is MatrixKind.RANDOM_STABLE_SHIFTED:
        rng = np.random.default_rng(seed)
        B = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        if td is TimeDomain.CONTINUOUS:
            alpha = np.max(np.linalg.eigvals(B).real)
            kappa = alpha + 0.05 * max(1.0, abs(alpha))
            A = B - kappa * np.eye(n)
        else:
            rho = np.max(np.abs(np.linalg.eigvals(B)))
            A = B / (rho / 0.95)
        return MatrixProblem(A, td)

    # the two section-8 style constructions need an external base matrix
    if base_matrix is None:
        raise MissingBaseMatrixError(
            f"kind {kind.value!r} needs a base matrix (EigTool demo); none supplied"
        )
    if isinstance(base_matrix, (str, Path)):
        raw = np.loadtxt(base_matrix, dtype=complex) if str(base_matrix).endswith(".txt") \
            else load_matrix(base_matrix, time_domain=td).A
        B = np.atleast_2d(np.asarray(raw, dtype=complex))
    else:
        B = np.atleast_2d(np.asarray(base_matrix, dtype=complex))

    if kind is MatrixKind.COMPANION_SHIFTED:
        alpha = np.max(np.linalg.eigvals(B).real)
        A = B - 1.001 * alpha * np.eye(B.shape[0])
        return MatrixProblem(A, TimeDomain.CONTINUOUS)
    # MatrixKind.CONVDIFF_SHIFTED
    A = B / 13.0 + (11.0 / 10.0) * np.eye(B.shape[0])
    return MatrixProblem(A, TimeDomain.DISCRETE)
