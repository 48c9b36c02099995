"""Fourth-order cumulant virtual array and spatial-smoothing MUSIC.

The virtual lag vector ``z[u]``, ``u = -U..U``, averages the sample
fourth-order cumulants of every sensor quadruple whose co-array lag is ``u``.
For independent sources it estimates ``sum_i c4_i exp(-1j*pi*u*sin(theta_i))``,
i.e. the output of a virtual uniform linear array, which is fed to
spatial-smoothing MUSIC.
"""

from __future__ import annotations

import dataclasses
import functools
from typing import Sequence

import numpy as np
import scipy.linalg

from .coarray import BOTH_FORMS, Form, SensorArray, fodca_lag_matrix


class UnresolvedError(ValueError):
    """MUSIC found fewer distinct spectrum peaks than requested sources."""

    def __init__(self, message: str, peaks_deg: np.ndarray):
        super().__init__(message)
        self.peaks_deg = peaks_deg


@dataclasses.dataclass(frozen=True)
class VirtualLagVector:
    """Complex values ``z[u]`` for ``u = -U..U``, stored with offset ``U``."""

    U: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (2 * self.U + 1,):
            raise ValueError("need 2U + 1 lag values")

    def __getitem__(self, u: int) -> complex:
        if abs(u) > self.U:
            raise IndexError(f"lag {u} outside [-{self.U}, {self.U}]")
        return self.values[u + self.U]

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-self.U, self.U + 1)

    def symmetrized(self) -> "VirtualLagVector":
        z = self.values
        return VirtualLagVector(self.U, 0.5 * (z + np.conj(z[::-1])))


@dataclasses.dataclass(frozen=True)
class DoaResult:
    angles_deg: np.ndarray
    grid_sin: np.ndarray
    spectrum: np.ndarray

    @property
    def D(self) -> int:
        return len(self.angles_deg)


# --- sample cumulants -------------------------------------------------------

def sample_cumulant(X: np.ndarray, k1: int, k2: int, k3: int, k4: int,
                    form: Form = Form.SUM_DIFF) -> complex:
    """Sample fourth-order circular cumulant of four sensor streams.

    ``SumDiff`` is ``cum(x1, x2, x3*, x4*)``, ``DiffSum`` is
    ``cum(x1, x2*, x3, x4*)``; expectations are sample means over the K
    snapshots. Sensor indices are 0-based.
    """
    X = np.asarray(X)
    if X.shape[1] < 2:
        raise ValueError("need at least two snapshots")
    form = Form(form)
    x1, x2, x3, x4 = X[k1], X[k2], X[k3], X[k4]
    E = np.mean
    if form is Form.SUM_DIFF:
        a, b, c, d = x1, x2, np.conj(x3), np.conj(x4)
    else:
        a, b, c, d = x1, np.conj(x2), x3, np.conj(x4)
    return complex(E(a * b * c * d) - E(a * b) * E(c * d)
                   - E(a * c) * E(b * d) - E(a * d) * E(b * c))


def cumulant_tensors(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """All sample cumulants of both forms as N x N x N x N tensors.

    Second-order moments are computed once, and the fourth moments come from
    one product of the N^2 x K matrix of pairwise products with its conjugate
    transpose.
    """
    X = np.asarray(X, dtype=complex)
    N, K = X.shape
    if K < 2:
        raise ValueError("need at least two snapshots")
    R1 = X @ X.conj().T / K          # E[x_a x_b*]
    R2 = X @ X.T / K                 # E[x_a x_b]
    Y = (X[:, None, :] * X[None, :, :]).reshape(N * N, K)
    M4 = (Y @ Y.conj().T / K).reshape(N, N, N, N)  # E[x_a x_b x_c* x_d*]
    sum_diff = (M4
                - np.einsum("ab,cd->abcd", R2, R2.conj())
                - np.einsum("ac,bd->abcd", R1, R1)
                - np.einsum("ad,bc->abcd", R1, R1))
    # E[x1 x2* x3 x4*] = M4[k1, k3, k2, k4]; E[x2* x3] = R1[k3, k2]
    diff_sum = (M4.transpose(0, 2, 1, 3)
                - np.einsum("ab,cd->abcd", R1, R1)
                - np.einsum("ac,bd->abcd", R2, R2.conj())
                - np.einsum("ad,cb->abcd", R1, R1))
    return sum_diff, diff_sum


@functools.lru_cache(maxsize=32)
def _lag_layout(positions: tuple[int, ...], forms: tuple[Form, ...]):
    P = SensorArray(positions)
    N = len(P)
    sum_diff_lags = fodca_lag_matrix(P).reshape(N, N, N, N)
    layout = {}
    if Form.SUM_DIFF in forms:
        layout[Form.SUM_DIFF] = sum_diff_lags.ravel()
    if Form.DIFF_SUM in forms:
        # DiffSum lag of (k1,k2,k3,k4) is p1 - p2 + p3 - p4
        layout[Form.DIFF_SUM] = sum_diff_lags.transpose(0, 2, 1, 3).ravel()
    return layout


def virtual_lag_vector(X: np.ndarray, P: SensorArray, U: int,
                       forms: Sequence[Form] = BOTH_FORMS,
                       symmetrize: bool = True) -> VirtualLagVector:
    """Redundancy-averaged cumulant per co-array lag.

    Every quadruple with lag ``u`` (in each requested form) contributes with
    equal weight. The result is then Hermitian-symmetrized,
    ``z[u] <- (z[u] + conj(z[-u])) / 2``.

    Raises:
        ValueError: if some lag in ``[-U, U]`` has no generating quadruple.
    """
    forms = tuple(sorted({Form(f) for f in forms}, key=lambda f: f.value))
    if not forms:
        raise ValueError("at least one form is required")
    layout = _lag_layout(P.positions, forms)
    tensors = dict(zip((Form.SUM_DIFF, Form.DIFF_SUM), cumulant_tensors(X)))
    size = 2 * U + 1
    acc = np.zeros(size, dtype=complex)
    counts = np.zeros(size, dtype=np.int64)
    for form in forms:
        lags = layout[form]
        keep = np.abs(lags) <= U
        idx = lags[keep] + U
        vals = tensors[form].ravel()[keep]
        acc += np.bincount(idx, weights=vals.real, minlength=size)
        acc += 1j * np.bincount(idx, weights=vals.imag, minlength=size)
        counts += np.bincount(idx, minlength=size)
    if np.any(counts == 0):
        u = int(np.flatnonzero(counts == 0)[0]) - U
        raise ValueError(f"hole at lag {u}")
    z = VirtualLagVector(U, acc / counts)
    return z.symmetrized() if symmetrize else z


def population_lag_vector(U, angles_deg: Sequence[float],
                          c4_per_source) -> VirtualLagVector:
    """Noise-free ``z[u] = sum_i c4_i exp(-1j*pi*u*sin(theta_i))``.

    Args:
        U: One-sided extent, or a design whose ``E`` is used.
        angles_deg: Source directions.
        c4_per_source: Scalar or one cumulant per source.
    """
    U = int(getattr(U, "E", U))
    s = np.sin(np.deg2rad(np.asarray(angles_deg, dtype=float)))
    c4 = np.broadcast_to(np.asarray(c4_per_source, dtype=complex), s.shape)
    u = np.arange(-U, U + 1)
    z = np.exp(-1j * np.pi * np.outer(u, s)) @ c4
    return VirtualLagVector(U, z)


# --- virtual-array covariance -------------------------------------------------

def _lag_toeplitz(z: VirtualLagVector) -> np.ndarray:
    # T[m, i] = z[m - i], m, i = 0..U
    v = z.values
    U = z.U
    return scipy.linalg.toeplitz(v[U:], v[U::-1])


def smoothed_matrix(z: VirtualLagVector) -> np.ndarray:
    """Spatially smoothed (U+1) x (U+1) matrix ``(1/(U+1)) sum_i z_i z_i^H``.

    Window ``i`` is ``[z[-i], z[1-i], ..., z[U-i]]``; for a source at
    ``theta`` it is proportional to the virtual steering vector
    ``exp(-1j*pi*m*sin(theta))``, ``m = 0..U``.
    """
    T = _lag_toeplitz(z)
    return T @ T.conj().T / (z.U + 1)


def toeplitz_matrix(z: VirtualLagVector) -> np.ndarray:
    """Direct Toeplitz augmentation; shares the noise subspace with smoothing."""
    return _lag_toeplitz(z)


# --- MUSIC ----------------------------------------------------------------------

def sin_grid(grid_size: int) -> np.ndarray:
    """Uniform grid on [-1, 1], exactly antisymmetric about 0 for odd sizes."""
    if grid_size < 3:
        raise ValueError("grid needs at least 3 points")
    half = (grid_size - 1) / 2
    return (np.arange(grid_size) - half) / half


@functools.lru_cache(maxsize=8)
def _grid_steering(M: int, grid_size: int) -> tuple[np.ndarray, np.ndarray]:
    grid = sin_grid(grid_size)
    A = np.exp(-1j * np.pi * np.outer(np.arange(M), grid))
    A.setflags(write=False)
    return grid, A


def virtual_steering(M: int, sin_theta) -> np.ndarray:
    return np.exp(-1j * np.pi * np.outer(np.arange(M), np.atleast_1d(sin_theta)))


def subspaces(R: np.ndarray, D: int) -> tuple[np.ndarray, np.ndarray]:
    """Signal and noise eigenvectors, ranked by eigenvalue magnitude."""
    w, V = np.linalg.eigh(R)
    order = np.argsort(-np.abs(w), kind="stable")
    return V[:, order[:D]], V[:, order[D:]]


def noise_projection(R: np.ndarray, D: int, angles_deg) -> np.ndarray:
    """``||E_n^H a(theta)||`` for each angle."""
    _, En = subspaces(R, D)
    a = virtual_steering(R.shape[0], np.sin(np.deg2rad(np.asarray(angles_deg, dtype=float))))
    return np.linalg.norm(En.conj().T @ a, axis=0)


def music_estimate(R: np.ndarray, D: int, grid_size: int = 4001) -> DoaResult:
    """MUSIC on a virtual-ULA matrix over a uniform ``sin(theta)`` grid.

    The null spectrum ``d(s) = ||E_n^H a(s)||^2`` is evaluated as
    ``M - ||E_s^H a(s)||^2``. The D deepest local minima of ``d`` (peaks of
    ``1/d``) are refined by a three-point parabola in ``sin(theta)``.

    Raises:
        UnresolvedError: fewer than ``D`` distinct peaks on the grid.
    """
    M = R.shape[0]
    if not 1 <= D < M:
        raise ValueError(f"need 1 <= D < {M}, got D={D}")
    Es, _ = subspaces(R, D)
    grid, A = _grid_steering(M, grid_size)
    proj = Es.conj().T @ A
    d = np.maximum(M - np.einsum("ij,ij->j", proj.real, proj.real)
                   - np.einsum("ij,ij->j", proj.imag, proj.imag), 1e-300)
    spectrum = 1.0 / d
    inner = d[1:-1]
    minima = np.flatnonzero((inner < d[:-2]) & (inner <= d[2:])) + 1
    order = minima[np.argsort(d[minima], kind="stable")]
    picked = order[:D]
    estimates = []
    step = grid[1] - grid[0]
    for i in picked:
        left, mid, right = d[i - 1], d[i], d[i + 1]
        curvature = left - 2 * mid + right
        offset = 0.5 * (left - right) / curvature if curvature > 0 else 0.0
        s = np.clip(grid[i] + offset * step, -1.0, 1.0)
        estimates.append(np.rad2deg(np.arcsin(s)))
    estimates = np.sort(np.asarray(estimates))
    if len(picked) < D:
        raise UnresolvedError(f"unresolved sources: {len(picked)} peaks for D={D}",
                              estimates)
    return DoaResult(estimates, grid, spectrum)


def estimate_doa(X: np.ndarray, P: SensorArray, U: int, D: int,
                 grid_size: int = 4001, method: str = "smoothing") -> DoaResult:
    """Snapshots to DOA estimates: lag vector, virtual covariance, MUSIC."""
    z = virtual_lag_vector(X, P, U)
    if method == "smoothing":
        R = smoothed_matrix(z)
    elif method == "toeplitz":
        R = toeplitz_matrix(z)
    else:
        raise ValueError(f"unknown method {method!r}")
    return music_estimate(R, D, grid_size)


def rmse(trials, truth: Sequence[float]) -> float:
    """Root-mean-square angle error in degrees over trials and sources.

    Estimates and truth are paired after sorting both.
    """
    truth = np.sort(np.asarray(truth, dtype=float))
    if len(trials) == 0:
        raise ValueError("no trials")
    total = 0.0
    for trial in trials:
        est = np.sort(np.asarray(getattr(trial, "angles_deg", trial), dtype=float))
        if est.shape != truth.shape:
            raise ValueError(f"trial has {est.size} estimates, expected {truth.size}")
        total += float(np.sum((est - truth) ** 2))
    return float(np.sqrt(total / (len(trials) * truth.size)))
