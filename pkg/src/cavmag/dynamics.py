"""Steady-state amplitudes, drift/diffusion matrices and the stability verdict.

Quadrature ordering of the 10-dimensional fluctuation vector: cavity-1 (U, W),
cavity-2 (U, W), magnon (u, w), phonon (x, y), ensemble (u, w).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import SystemParams

MODE_LABELS = ("a1", "a2", "n", "d", "e")

STABILITY_EPS_FACTOR = 1e-9  # stability threshold is -1e-9 * omega_d


class SteadyStateError(RuntimeError):
    """Raised when the mean-field steady state cannot be computed."""


@dataclass(frozen=True)
class SteadyState:
    """Mean amplitudes of the five modes and the effective magnon detuning."""

    a1: complex
    a2: complex
    e: complex
    n: complex
    x_mean: float
    y_mean: float
    delta_n_tilde: float
    converged: bool
    iterations: int


@dataclass(frozen=True)
class DriftMatrix:
    """10x10 drift matrix of the linearized quadrature dynamics.

    Mode order (1-based row pairs): a1 rows 1-2, a2 rows 3-4, magnon rows 5-6,
    phonon rows 7-8, ensemble rows 9-10.
    """

    entries: np.ndarray
    omega_d: float


@dataclass(frozen=True)
class DiffusionMatrix:
    """Diagonal input-noise strength matrix matching the drift ordering."""

    entries: np.ndarray


@dataclass(frozen=True)
class StabilityVerdict:
    stable: bool
    spectral_abscissa: float  # max real part of the drift spectrum, rad/s
    margin: float  # distance of the abscissa below the threshold, rad/s


def _amplitudes(p: SystemParams, dnt: float):
    """Closed-form driven steady state at a fixed effective magnon detuning.

    Derived by eliminating the ensemble, magnon and cavity-2 amplitudes from
    the mean-field fixed-point equations.
    """
    ka1 = p.kappa_a + 1j * p.delta_1
    ka2 = p.kappa_a + 1j * p.delta_2
    kn = p.kappa_n + 1j * dnt
    ge = p.gamma_e + 1j * p.delta_e
    beta = ka2 * kn + p.g_na**2
    S = ka1 * ge * beta + p.G_ae**2 * beta + p.J**2 * ge * kn
    scale = p.omega_d**4
    if abs(S) < 1e-30 * scale or abs(beta) < 1e-30 * p.omega_d**2:
        raise SteadyStateError(
            f"singular denominator in steady-state solve (|S|={abs(S):.3e})"
        )
    num = (p.Omega_l * ka2 * kn * ge + p.g_na**2 * p.Omega_l * ge
           - p.g_na * p.Omega_n * p.J * ge)
    a1 = num / S
    a2 = (-1j * p.J * kn * a1 - 1j * p.g_na * p.Omega_n) / beta
    e = -1j * p.G_ae * a1 / ge
    n = (p.Omega_n - 1j * p.g_na * a2) / kn
    x = -(p.g_nd / p.omega_d) * abs(n) ** 2
    return a1, a2, e, n, x


_SC_MIXING = 0.5
_SC_MAX_ITER = 10_000


def steady_state(p: SystemParams) -> SteadyState:
    """Driven steady state of the five-mode network.

    With ``delta_n_tilde_override`` set, the closed form is evaluated once at
    that detuning.  Otherwise the effective detuning is found by damped
    fixed-point iteration of ``delta_n + g_nd * <x>`` (mixing 0.5) to
    1e-12 * omega_d, with a 10^4 iteration cap.
    """
    if p.delta_n_tilde_override is not None:
        dnt = p.delta_n_tilde_override
        a1, a2, e, n, x = _amplitudes(p, dnt)
        return SteadyState(a1, a2, e, n, x, 0.0, dnt, True, 0)

    tol = 1e-12 * p.omega_d
    dnt = p.delta_n
    for it in range(1, _SC_MAX_ITER + 1):
        a1, a2, e, n, x = _amplitudes(p, dnt)
        target = p.delta_n + p.g_nd * x
        if abs(target - dnt) < tol:
            return SteadyState(a1, a2, e, n, x, 0.0, dnt, True, it)
        dnt = (1.0 - _SC_MIXING) * dnt + _SC_MIXING * target
    raise SteadyStateError(
        f"non-convergent self-consistency after {_SC_MAX_ITER} iterations "
        f"(last delta_n_tilde = {dnt!r})"
    )


def drift_matrix(p: SystemParams, ss: SteadyState) -> DriftMatrix:
    """Drift matrix of the linearized quadrature dynamics at the steady state."""
    d1, d2, de = p.delta_1, p.delta_2, p.delta_e
    dnt = ss.delta_n_tilde
    ka, kn, ge, gd = p.kappa_a, p.kappa_n, p.gamma_e, p.gamma_d
    gna, Gnd, Gae, J, wd = p.g_na, p.G_nd, p.G_ae, p.J, p.omega_d
    A = np.array([
        [-ka,   d1,   0.0,  J,    0.0,  0.0,  0.0,  0.0,  0.0,  Gae],
        [-d1,  -ka,  -J,    0.0,  0.0,  0.0,  0.0,  0.0, -Gae,  0.0],
        [0.0,   J,   -ka,   d2,   0.0,  gna,  0.0,  0.0,  0.0,  0.0],
        [-J,    0.0, -d2,  -ka,  -gna,  0.0,  0.0,  0.0,  0.0,  0.0],
        [0.0,   0.0,  0.0,  gna, -kn,   dnt, -Gnd,  0.0,  0.0,  0.0],
        [0.0,   0.0, -gna,  0.0, -dnt, -kn,   0.0,  0.0,  0.0,  0.0],
        [0.0,   0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  wd,   0.0,  0.0],
        [0.0,   0.0,  0.0,  0.0,  0.0,  Gnd, -wd,  -gd,   0.0,  0.0],
        [0.0,   Gae,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0, -ge,   de],
        [-Gae,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0,  0.0, -de,  -ge],
    ])
    return DriftMatrix(entries=A, omega_d=wd)


def diffusion_matrix(p: SystemParams) -> DiffusionMatrix:
    """Noise-strength matrix fixed by the input-noise correlations.

    The ensemble rows carry bare ``gamma_e`` (vacuum atomic noise), unlike the
    thermally weighted photon/magnon/phonon rows.
    """
    z = p.occupations()
    diag = np.array([
        p.kappa_a * (2.0 * z.Z_a1 + 1.0),
        p.kappa_a * (2.0 * z.Z_a1 + 1.0),
        p.kappa_a * (2.0 * z.Z_a2 + 1.0),
        p.kappa_a * (2.0 * z.Z_a2 + 1.0),
        p.kappa_n * (2.0 * z.Z_n + 1.0),
        p.kappa_n * (2.0 * z.Z_n + 1.0),
        0.0,
        p.gamma_d * (2.0 * z.Z_d + 1.0),
        p.gamma_e,
        p.gamma_e,
    ])
    return DiffusionMatrix(entries=np.diag(diag))


def spectral_abscissa(A: np.ndarray) -> float:
    try:
        eigenvalues = np.linalg.eigvals(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise RuntimeError(f"eigen-solver failure: {exc}") from exc
    return float(np.max(eigenvalues.real))


def stability(A: DriftMatrix) -> StabilityVerdict:
    """Spectral stability test: stable iff all drift eigenvalues decay.

    Marginal systems within 1e-9 * omega_d of the imaginary axis are declared
    unstable.
    """
    abscissa = spectral_abscissa(A.entries)
    threshold = -STABILITY_EPS_FACTOR * A.omega_d
    return StabilityVerdict(
        stable=abscissa < threshold,
        spectral_abscissa=abscissa,
        margin=threshold - abscissa,
    )


def export_matrix(matrix, destination) -> None:
    """Plain-text numeric dump of a drift/diffusion/covariance matrix."""
    np.savetxt(destination, np.asarray(getattr(matrix, "entries", matrix),
                                       dtype=float), fmt="%+.12e")
