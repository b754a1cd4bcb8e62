"""Finite-volume spectral kernel for H_[a,b] (diagonal V, off-diagonals 1).

Determinant convention, pinned against dense linear algebra in the tests:
write D[i, j] = det(E - H_[i,j]) with D = 1 for an empty window.  Then
D[i, j] is the (1,1) entry of the transfer product over sites i..j, i.e.
``entry_11_signed_log(E, path, i - 1, j)``, and for a <= x <= y <= b

    G_[a,b](x, y) = -D[a, x-1] * D[y+1, b] / D[a, b].

So the right boundary entry of the box [x - L/2, x + L/2] is
-D[a, x-1] / D[a, b] and the left one is -D[x+1, b] / D[a, b].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from andersonlab import _kernels as K
from andersonlab.cocycle import entry_11_signed_log
from andersonlab.distributions import DistributionSpec
from andersonlab.errors import DomainError, NoConvergenceError, PathRangeError, ResonanceError
from andersonlab.lattice import Box, as_path, sample_box_path
from andersonlab.parallel import map_trials
from andersonlab.rng import SeedSpec
from andersonlab.signedlog import SignedLog

RESONANCE_RTOL = 1e-12
DENSE_LIMIT = 64


@dataclass(frozen=True, eq=False)
class TridiagonalHamiltonian:
    diag: np.ndarray
    offset: int = 0

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise DomainError("need a nonempty 1-D diagonal")
        object.__setattr__(self, "diag", d)

    @property
    def size(self) -> int:
        return self.diag.size

    @property
    def norm_bound(self) -> float:
        return 2.0 + float(np.max(np.abs(self.diag)))

    def dense(self) -> np.ndarray:
        n = self.size
        return np.diag(self.diag) + np.eye(n, k=1) + np.eye(n, k=-1)


def hamiltonian(path, box: Box) -> TridiagonalHamiltonian:
    path = as_path(path)
    return TridiagonalHamiltonian(path.sites(box.a, box.b).copy(), offset=box.a)


def sturm_count(H: TridiagonalHamiltonian, E: float) -> int:
    """Number of eigenvalues strictly below E."""
    return int(K.sturm_count(H.diag, float(E)))


def _gershgorin(H):
    return float(H.diag.min()) - 2.0, float(H.diag.max()) + 2.0


def eigenvalues(H: TridiagonalHamiltonian, lo: float | None = None, hi: float | None = None, tol: float = 1e-12):
    """Sorted eigenvalues in [lo, hi] by Sturm bisection, to absolute tolerance tol."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    g_lo, g_hi = _gershgorin(H)
    lo = g_lo if lo is None else float(lo)
    hi = g_hi if hi is None else float(hi)
    if not lo < hi:
        raise DomainError("need lo < hi")
    lo_b, hi_b = max(lo, g_lo - 1.0), np.nextafter(min(hi, g_hi + 1.0), np.inf)
    k0, k1 = K.sturm_count(H.diag, lo_b), K.sturm_count(H.diag, hi_b)
    out = np.empty(k1 - k0)
    for j, k in enumerate(range(k0, k1)):
        a, b = K.bisect_eigenvalue(H.diag, k, lo_b, hi_b, tol, 0.0, 0.0)
        out[j] = 0.5 * (a + b)
    return out


def nearest_eigenvalue(H: TridiagonalHamiltonian, E: float, tol: float = 1e-13, rtol: float = 1e-10) -> float:
    """The eigenvalue closest to E, bisecting only the two neighbours of E.

    Each neighbour's bracket is refined until its width is below tol and
    below rtol times its distance to E, so tiny distances keep relative accuracy.
    """
    E = float(E)
    k = K.sturm_count(H.diag, E)
    if K.sturm_count(H.diag, np.nextafter(E, np.inf)) > k:
        return E
    g_lo, g_hi = _gershgorin(H)
    best, best_d = math.nan, math.inf
    if k > 0:
        a, b = K.bisect_eigenvalue(H.diag, k - 1, min(g_lo, E) - 1.0, E, tol, rtol, E)
        best, best_d = 0.5 * (a + b), E - 0.5 * (a + b)
    if k < H.size:
        a, b = K.bisect_eigenvalue(H.diag, k, E, max(g_hi, E) + 1.0, tol, rtol, E)
        if 0.5 * (a + b) - E < best_d:
            best = 0.5 * (a + b)
    return float(best)


def spectral_distance(H: TridiagonalHamiltonian, E: float, tol: float = 1e-13, rtol: float = 1e-10) -> float:
    """dist(sigma(H), E) from Sturm bisection (no diagonalization)."""
    return abs(nearest_eigenvalue(H, E, tol, rtol) - float(E))


def has_eigenvalue_within(H: TridiagonalHamiltonian, E: float, t: float) -> bool:
    """Whether sigma(H) meets [E - t, E + t], via two Sturm counts."""
    if t == math.inf:
        return True
    lo, hi = E - t, E + t
    if lo == E or hi == E:
        return spectral_distance(H, E, tol=0.0) <= t
    return K.sturm_count(H.diag, np.nextafter(hi, np.inf)) > K.sturm_count(H.diag, lo)


def resonance_tolerance(H: TridiagonalHamiltonian) -> float:
    return RESONANCE_RTOL * H.norm_bound


def eigenvector(
    H: TridiagonalHamiltonian, eigenvalue: float, iterations: int = 3, max_iterations: int = 30
) -> np.ndarray:
    """Unit eigenvector by shifted inverse iteration from a fixed seeded start.

    At least ``iterations`` solves are done; iteration then continues until
    log|x| is stationary.  Three solves leave a floor of other eigenvectors
    near 1e-36 that hides the true exponential tails of localized states.
    Sign convention: the first nonzero component is positive.
    """
    n = H.size
    if n == 1:
        if abs(H.diag[0] - eigenvalue) > 1e-8 * H.norm_bound:
            raise NoConvergenceError("shift is not an eigenvalue of the 1x1 operator")
        return np.ones(1)
    off = np.ones(n - 1)
    shift = float(eigenvalue)
    for attempt in range(8):
        dl, d, du, du2, ipiv, info = lapack.dgttrf(off, H.diag - shift, off)
        if info == 0:
            break
        # exactly singular: nudge the shift off the eigenvalue
        shift = float(eigenvalue) + (2.0**attempt) * np.finfo(float).eps * H.norm_bound
    else:
        raise NoConvergenceError("could not factor H - shift")
    x = SeedSpec(0x5EED_0F_E16E).generator().standard_normal(n)
    x /= np.linalg.norm(x)
    profile = None
    for it in range(max_iterations):
        x, info = lapack.dgttrs(dl, d, du, du2, ipiv, x)
        if info != 0 or not np.all(np.isfinite(x)):
            raise NoConvergenceError("inverse iteration broke down")
        x /= np.linalg.norm(x)
        with np.errstate(divide="ignore"):
            new_profile = np.log(np.maximum(np.abs(x), 1e-300))
        if it + 1 >= iterations and profile is not None:
            if np.max(np.abs(new_profile - profile)) < 1e-6:
                break
        profile = new_profile
    resid = np.linalg.norm(_matvec(H, x) - eigenvalue * x)
    if resid > 1e-8 * H.norm_bound:
        raise NoConvergenceError(f"residual {resid:.3g} too large: shift is not near the spectrum")
    nz = np.flatnonzero(x)
    if nz.size and x[nz[0]] < 0:
        x = -x
    return x


def _matvec(H, x):
    y = H.diag * x
    y[:-1] += x[1:]
    y[1:] += x[:-1]
    return y


# -- Green's functions -------------------------------------------------------

@dataclass(frozen=True)
class GreensValue:
    value: SignedLog
    resonant: bool

    @property
    def log_abs(self) -> float:
        return self.value.log_abs


def _det_window(E, path, i, j) -> SignedLog:
    """D[i, j] = det(E - H_[i,j]); 1 for an empty window."""
    if j < i:
        return SignedLog.one()
    return entry_11_signed_log(E, path, i - 1, j)


def greens_from_determinants(path, a: int, b: int, E: float, x: int, y: int) -> SignedLog:
    """G_[a,b](x, y) as a SignedLog via determinant ratios (no resonance check)."""
    if x > y:
        x, y = y, x
    if not a <= x <= y <= b:
        raise PathRangeError(f"({x}, {y}) not inside [{a}, {b}]")
    num = _det_window(E, path, a, x - 1) * _det_window(E, path, y + 1, b)
    den = _det_window(E, path, a, b)
    if den.is_zero:
        return SignedLog(1, math.inf)
    return -(num / den)


def is_resonant(H: TridiagonalHamiltonian, E: float) -> bool:
    return has_eigenvalue_within(H, float(E), resonance_tolerance(H))


def greens_entry(path, box: Box, E: float, side: str) -> GreensValue:
    """Boundary entry G(x, x + L/2) (``right``) or G(x, x - L/2) (``left``).

    Resonant boxes get the formal value +inf with ``resonant=True``.
    """
    if side not in ("left", "right"):
        raise DomainError("side must be 'left' or 'right'")
    path = as_path(path)
    H = hamiltonian(path, box)
    if is_resonant(H, E):
        return GreensValue(SignedLog(1, math.inf), True)
    y = box.b if side == "right" else box.a
    val = greens_from_determinants(path, box.a, box.b, E, box.center, y)
    return GreensValue(val, val.log_abs == math.inf)


def greens_direct(H: TridiagonalHamiltonian, E: float, x: int, y: int) -> float:
    """Dense oracle: solve (H - E) w = delta_y and return w(x). Sites are absolute."""
    if H.size > DENSE_LIMIT:
        raise DomainError(f"dense oracle limited to size <= {DENSE_LIMIT}")
    i, j = x - H.offset, y - H.offset
    if not (0 <= i < H.size and 0 <= j < H.size):
        raise PathRangeError("site outside the box")
    A = H.dense() - E * np.eye(H.size)
    if np.min(np.abs(np.linalg.eigvalsh(H.dense()) - E)) < 1e-12:
        raise ResonanceError("E is within 1e-12 of the spectrum")
    rhs = np.zeros(H.size)
    rhs[j] = 1.0
    return float(np.linalg.solve(A, rhs)[i])


def poisson_residual(path, a: int, b: int, E: float, psi_left: float, psi_right: float) -> float:
    """Max relative violation of psi(x) = -G(x,a) psi(a-1) - G(x,b) psi(b+1) on [a, b].

    psi solves H psi = E psi on [a, b] with psi(a-1) = psi_left and
    psi(b+1) = psi_right; psi(a) is chosen to hit psi_right.  It is built as a
    combination of two recurrence solutions, each run in the direction in
    which it grows, so no cancellation enters the construction.
    """
    path = as_path(path)
    v = path.sites(a, b)
    H = TridiagonalHamiltonian(v.copy(), offset=a)
    if is_resonant(H, E):
        raise ResonanceError("E is resonant for the box")
    n = v.size
    # u: u(b+1) = 0, u(b) = 1, run leftwards; w: w(a-1) = 0, w(a) = 1, run rightwards
    u = np.zeros(n + 2)
    u[n] = 1.0
    for k in range(n, 0, -1):
        u[k - 1] = (E - v[k - 1]) * u[k] - u[k + 1]
    w = np.zeros(n + 2)
    w[1] = 1.0
    for k in range(1, n + 1):
        w[k + 1] = (E - v[k - 1]) * w[k] - w[k - 1]
    psi = psi_left * u / u[0] + psi_right * w / w[n + 1]
    scale = np.max(np.abs(psi))
    if scale == 0:
        return 0.0
    worst = 0.0
    for k in range(1, n + 1):
        x = a + k - 1
        g_a = greens_from_determinants(path, a, b, E, x, a).to_float()
        g_b = greens_from_determinants(path, a, b, E, x, b).to_float()
        rhs = -g_a * psi_left - g_b * psi_right
        worst = max(worst, abs(psi[k] - rhs) / scale)
    return float(worst)


def ids_estimate(
    dist: DistributionSpec,
    E: float,
    L: int,
    trials: int,
    seed: SeedSpec | int | None = None,
    workers: int = 1,
) -> float:
    """Average fraction of eigenvalues below E over random boxes of length L."""
    if L < 10:
        raise DomainError("ids_estimate needs L >= 10")
    return float(np.mean(ids_samples(dist, E, L, trials, seed, workers)))


def ids_samples(dist, E, L, trials, seed=None, workers=1) -> np.ndarray:
    box = Box(0, L if L % 2 == 0 else L + 1)

    def one(s):
        v = sample_box_path(dist, box, s).values
        return K.sturm_count(v, float(E)) / v.size

    return np.array(map_trials(one, SeedSpec.coerce(seed), trials, workers))
