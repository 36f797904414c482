"""Kuramoto-Sivashinsky right-hand sides:  u_t + u_xxxx + u_xx + u u_x = 0.

Two discretizations are provided for the two boundary conditions:

* periodic      -- Fourier pseudospectral.  The state is the real
                   parametrization of the conjugate-symmetric spectrum:
                   ``[c_0, Re c_1..Re c_n, Im c_1..Im c_n]`` with
                   wavenumbers k_j = 2*pi*j/L.  The quadratic term is
                   evaluated on a physical grid large enough (>= 3n+1 points)
                   that the retained band is alias-free, i.e. the 2/3 rule.
* odd-periodic  -- second-order central finite differences on the interior
                   grid, with u = u_xx = 0 at both ends enforced by
                   odd-reflection ghost points.  The nonlinearity is the
                   conservative form (u^2/2)_x.

Both models resolve wavenumbers up to at least ``k_max_target`` (default 9).
"""

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.fft import next_fast_len

from .dynamics import DynamicalSystem
from .errors import ResolutionTooCoarse

PERIODIC = "periodic"
ODD_PERIODIC = "odd"

DEFAULT_K_MAX = 9.0


@dataclass
class DomainSpec:
    """Domain length, boundary condition, and target resolved wavenumber."""

    L: float
    bc: str = PERIODIC
    k_max_target: float = DEFAULT_K_MAX

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("domain length L must be positive")
        if self.bc not in (PERIODIC, ODD_PERIODIC):
            raise ValueError(f"bc must be {PERIODIC!r} or {ODD_PERIODIC!r}")
        min_k = (2 * np.pi if self.bc == PERIODIC else np.pi) / self.L
        if self.k_max_target < min_k:
            raise ValueError(
                f"k_max_target={self.k_max_target:g} resolves no mode on L={self.L:g} "
                f"(need >= {min_k:g})")


class PeriodicSpectralModel:
    """Pseudospectral evaluation machinery for the periodic case."""

    def __init__(self, spec, n_modes=None):
        L = spec.L
        if n_modes is None:
            n_modes = int(np.ceil(spec.k_max_target * L / (2 * np.pi)))
        if n_modes < 4:
            raise ResolutionTooCoarse(
                f"n_modes={n_modes} < 4 for L={L:g}, k_max={spec.k_max_target:g}")
        self.spec = spec
        self.L = L
        self.n_modes = n_modes
        self.dim = 2 * n_modes + 1
        # physical grid for the quadratic term; >= 3n+1 makes the retained
        # band alias-free, padded up to an FFT-friendly length
        self.grid_size = next_fast_len(3 * n_modes + 1)
        self.dealias_cut = n_modes
        self.k = 2 * np.pi * np.arange(n_modes + 1) / L
        growth = self.k**2 - self.k**4
        self.stiff_linear_part = np.concatenate([growth, growth[1:]])

    def pack(self, coeffs):
        """Complex spectrum (..., n+1) -> real state (..., 2n+1)."""
        return np.concatenate([coeffs.real, coeffs[..., 1:].imag], axis=-1)

    def unpack(self, state):
        """Real state (..., 2n+1) -> complex spectrum (..., n+1)."""
        n = self.n_modes
        coeffs = state[..., : n + 1].astype(complex)
        coeffs[..., 1:] += 1j * state[..., n + 1 :]
        return coeffs

    def rhs(self, t, state):
        n, M = self.n_modes, self.grid_size
        coeffs = self.unpack(np.atleast_2d(state))
        full = np.zeros((coeffs.shape[0], M // 2 + 1), dtype=complex)
        full[:, : n + 1] = coeffs * M  # rfft normalization
        u = np.fft.irfft(full, M, axis=-1)
        sq = np.fft.rfft(u * u, axis=-1)[:, : n + 1] / M
        dcoeffs = (self.k**2 - self.k**4) * coeffs - 0.5j * self.k * sq
        out = self.pack(dcoeffs)
        return out[0] if np.ndim(state) == 1 else out

    def to_physical(self, state, n_points=None):
        """Evaluate u(x) on a uniform grid; returns (x, u)."""
        if n_points is None:
            n_points = self.grid_size
        if n_points < 2 * self.n_modes + 1:
            raise ValueError("n_points too small to represent the retained modes")
        coeffs = self.unpack(np.atleast_1d(np.asarray(state, dtype=float)))
        full = np.zeros(n_points // 2 + 1, dtype=complex)
        full[: self.n_modes + 1] = coeffs * n_points
        x = self.L * np.arange(n_points) / n_points
        return x, np.fft.irfft(full, n_points)

    def from_physical(self, u):
        """Project grid values (uniform, length M) onto the retained modes."""
        u = np.asarray(u, dtype=float)
        coeffs = np.fft.rfft(u)[: self.n_modes + 1] / u.size
        return self.pack(coeffs)

    def field_mean(self, state):
        return float(np.asarray(state)[..., 0])

    def build_system(self):
        return DynamicalSystem(
            dim=self.dim, rhs=self.rhs, stiff_linear_part=self.stiff_linear_part,
            batched=True, label=f"ks-periodic(L={self.L:g},n={self.n_modes})")


class OddPeriodicFDModel:
    """Finite-difference machinery for the odd-periodic case.

    Interior grid x_i = i*h, i = 1..n, h = L/(n+1); boundary values and
    odd reflections handled through ghost points.
    """

    def __init__(self, spec, n_interior=None):
        L = spec.L
        if n_interior is None:
            n_interior = int(np.ceil(spec.k_max_target * L / np.pi)) - 1
            while L / (n_interior + 1) > np.pi / spec.k_max_target:
                n_interior += 1
        self.spec = spec
        self.L = L
        self.n = n_interior
        self.h = L / (n_interior + 1)
        if self.h > np.pi / spec.k_max_target:
            raise ResolutionTooCoarse(
                f"h={self.h:g} > pi/k_max={np.pi / spec.k_max_target:g}")
        self.dim = n_interior
        self.x = self.h * np.arange(1, n_interior + 1)
        self.linear_matrix = self._build_linear_matrix()
        self.stiff_linear_part = self.linear_matrix.diagonal()

    def _build_linear_matrix(self):
        n, h = self.n, self.h
        d2 = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(n, n)) / h**2
        d4 = sp.diags([1.0, -4.0, 6.0, -4.0, 1.0], [-2, -1, 0, 1, 2],
                      shape=(n, n), format="lil") / h**4
        # odd reflection through the boundary: u_{-1} = -u_1, u_{n+2} = -u_n
        d4[0, 0] += -1.0 / h**4
        d4[n - 1, n - 1] += -1.0 / h**4
        return sp.csr_matrix(-(d4.tocsr() + d2))

    def _extend(self, u):
        """Append boundary zeros and odd-reflection ghosts; u is (batch, n)."""
        b, n = u.shape
        z = np.zeros((b, n + 4))
        z[:, 2 : n + 2] = u
        z[:, 0] = -u[:, 0]
        z[:, n + 3] = -u[:, n - 1]
        return z

    def rhs(self, t, state):
        u = np.atleast_2d(state)
        n, h = self.n, self.h
        z = self._extend(u)
        u_xx = (z[:, 1 : n + 1] - 2 * z[:, 2 : n + 2] + z[:, 3 : n + 3]) / h**2
        u_xxxx = (z[:, 0:n] - 4 * z[:, 1 : n + 1] + 6 * z[:, 2 : n + 2]
                  - 4 * z[:, 3 : n + 3] + z[:, 4 : n + 4]) / h**4
        sq = z * z
        flux_x = (sq[:, 3 : n + 3] - sq[:, 1 : n + 1]) / (4 * h)
        out = -u_xxxx - u_xx - flux_x
        return out[0] if np.ndim(state) == 1 else out

    def to_physical(self, state):
        """Full field including the boundary zeros; returns (x, u)."""
        u = np.asarray(state, dtype=float)
        x = self.h * np.arange(self.n + 2)
        return x, np.concatenate([[0.0], u, [0.0]])

    def build_system(self):
        return DynamicalSystem(
            dim=self.dim, rhs=self.rhs, stiff_linear_part=self.stiff_linear_part,
            stiff_linear_matrix=self.linear_matrix, batched=True,
            label=f"ks-odd(L={self.L:g},n={self.n})")


def make_model(spec, **kwargs):
    if spec.bc == PERIODIC:
        return PeriodicSpectralModel(spec, **kwargs)
    return OddPeriodicFDModel(spec, **kwargs)


def make_periodic_ks(spec, n_modes=None):
    """SystemInterface for the periodic pseudospectral discretization."""
    if spec.bc != PERIODIC:
        raise ValueError("spec.bc must be periodic")
    return PeriodicSpectralModel(spec, n_modes=n_modes).build_system()


def make_oddperiodic_ks(spec, n_interior=None):
    """SystemInterface for the odd-periodic finite-difference discretization."""
    if spec.bc != ODD_PERIODIC:
        raise ValueError("spec.bc must be odd-periodic")
    return OddPeriodicFDModel(spec, n_interior=n_interior).build_system()


def make_ks(spec, **kwargs):
    if spec.bc == PERIODIC:
        return make_periodic_ks(spec, **kwargs)
    return make_oddperiodic_ks(spec, **kwargs)


def sample_initial_condition(spec, seed):
    """I.i.d. standard-normal state components from a PCG64 generator.

    The generator is pinned (numpy PCG64) so the same seed yields the same
    vector on every platform.
    """
    model = make_model(spec)
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal(model.dim)


def field_mean(state, model):
    """Spatial mean of the represented field (zero-mode coefficient)."""
    if not isinstance(model, PeriodicSpectralModel):
        raise TypeError("field_mean is defined for the periodic spectral model")
    return model.field_mean(state)
