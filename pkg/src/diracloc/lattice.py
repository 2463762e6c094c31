"""Finite-lattice Dirac and Schrodinger operators.

Site indices run over 0..n_sites-1.  Dirac state vectors use the block layout
``[psi_plus(0..N-1), psi_minus(0..N-1)]`` everywhere in the package, so the
operator matrix has the 2x2 block form

    [[m c^2 + V,   c d^*     ],
     [c d,        -m c^2 + V ]]

with ``(d psi)_n = psi_{n+1} - psi_n`` and ``(d^* psi)_n = psi_{n-1} - psi_n``.
Open boundaries drop out-of-range amplitudes, which keeps ``d`` and ``d^*``
exact adjoints of each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Boundary = Literal["open", "periodic"]

HERMITIAN_TOL = 1e-14


@dataclass(frozen=True)
class LatticeConfig:
    n_sites: int
    boundary: Boundary = "open"
    mass: float = 0.0
    light_speed: float = 1.0

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 4:
            raise ValueError(f"n_sites must be an integer >= 4, got {self.n_sites}")
        if self.boundary not in ("open", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if not self.light_speed > 0:
            raise ValueError(f"light_speed must be > 0, got {self.light_speed}")
        if not self.mass >= 0:
            raise ValueError(f"mass must be >= 0, got {self.mass}")

    @property
    def center(self) -> int:
        """Index of the launch site (the middle of the chain)."""
        return self.n_sites // 2

    def coordinates(self) -> np.ndarray:
        """Site coordinates n - (N-1)/2, centred on the middle of the chain."""
        return np.arange(self.n_sites) - (self.n_sites - 1) / 2.0

    def replace(self, **changes) -> "LatticeConfig":
        kw = dict(n_sites=self.n_sites, boundary=self.boundary,
                  mass=self.mass, light_speed=self.light_speed)
        kw.update(changes)
        return LatticeConfig(**kw)


@dataclass
class SpinorState:
    """Two-component amplitudes (psi_plus_n, psi_minus_n) on n_sites sites."""

    upper: np.ndarray
    lower: np.ndarray

    def __post_init__(self):
        self.upper = np.asarray(self.upper, dtype=complex)
        self.lower = np.asarray(self.lower, dtype=complex)
        if self.upper.shape != self.lower.shape or self.upper.ndim != 1:
            raise ValueError("upper and lower components must be 1D arrays of equal length")

    @property
    def n_sites(self) -> int:
        return self.upper.shape[0]

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.upper, self.lower])

    @classmethod
    def from_vector(cls, vec) -> "SpinorState":
        vec = np.asarray(vec)
        if vec.ndim != 1 or vec.shape[0] % 2:
            raise ValueError("a spinor vector must be 1D with even length")
        n = vec.shape[0] // 2
        return cls(vec[:n], vec[n:])

    @classmethod
    def basis(cls, n_sites: int, site: int, component: str = "+") -> "SpinorState":
        """One-hot state delta_site^+ or delta_site^-."""
        if component not in ("+", "-"):
            raise ValueError("component must be '+' or '-'")
        up = np.zeros(n_sites, dtype=complex)
        lo = np.zeros(n_sites, dtype=complex)
        (up if component == "+" else lo)[site] = 1.0
        return cls(up, lo)

    @classmethod
    def gaussian(cls, n_sites: int, center: float, width: float,
                 momentum: float = 0.0, component: str = "+") -> "SpinorState":
        """Normalized Gaussian packet exp(-(n-center)^2 / (4 width^2) + i k n)."""
        n = np.arange(n_sites)
        amp = np.exp(-((n - center) ** 2) / (4.0 * width ** 2) + 1j * momentum * (n - center))
        zero = np.zeros(n_sites, dtype=complex)
        state = cls(amp, zero) if component == "+" else cls(zero, amp)
        return state.normalized()

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.upper) ** 2) + np.sum(np.abs(self.lower) ** 2)))

    def normalized(self) -> "SpinorState":
        nrm = self.norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero state")
        return SpinorState(self.upper / nrm, self.lower / nrm)

    def site_weights(self) -> np.ndarray:
        return np.abs(self.upper) ** 2 + np.abs(self.lower) ** 2


@dataclass(frozen=True)
class HermitianOperator:
    matrix: np.ndarray
    label: str
    n_sites: int
    kind: str = "dirac"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        mat = self.matrix
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError("operator matrix must be square")
        dev = hermiticity_defect(mat)
        if dev > HERMITIAN_TOL:
            raise ValueError(f"{self.label}: matrix is not Hermitian (defect {dev:.3e})")

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other):
        return self.matrix @ other


def hermiticity_defect(mat: np.ndarray) -> float:
    return float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0


def _check_sequence(psi) -> np.ndarray:
    psi = np.asarray(psi)
    if psi.ndim != 1 or psi.shape[0] < 2:
        raise ValueError("difference operators need a 1D sequence of length >= 2")
    return psi


def apply_d(psi, boundary: Boundary = "open") -> np.ndarray:
    """Forward difference (d psi)_n = psi_{n+1} - psi_n."""
    psi = _check_sequence(psi)
    if boundary == "periodic":
        return np.roll(psi, -1) - psi
    out = -psi.copy()
    out[:-1] += psi[1:]
    return out


def apply_d_star(psi, boundary: Boundary = "open") -> np.ndarray:
    """Adjoint difference (d^* psi)_n = psi_{n-1} - psi_n."""
    psi = _check_sequence(psi)
    if boundary == "periodic":
        return np.roll(psi, 1) - psi
    out = -psi.copy()
    out[1:] += psi[:-1]
    return out


def shift_matrix(n_sites: int, boundary: Boundary = "open") -> np.ndarray:
    """Matrix of (S psi)_n = psi_{n+1}."""
    s = np.eye(n_sites, k=1)
    if boundary == "periodic":
        s[-1, 0] = 1.0
    return s


def difference_matrix(n_sites: int, boundary: Boundary = "open") -> np.ndarray:
    """Matrix of d; its transpose is the matrix of d^*."""
    return shift_matrix(n_sites, boundary) - np.eye(n_sites)


def laplacian_matrix(n_sites: int, boundary: Boundary = "open") -> np.ndarray:
    """Discrete Laplacian psi_{n+1} + psi_{n-1} - 2 psi_n."""
    s = shift_matrix(n_sites, boundary)
    return s + s.T - 2.0 * np.eye(n_sites)


def _potential_values(potential, n_sites: int) -> np.ndarray:
    values = getattr(potential, "values", potential)
    values = np.asarray(values, dtype=float)
    if values.shape != (n_sites,):
        raise ValueError(f"potential has shape {values.shape}, expected ({n_sites},)")
    return values


def build_dirac(config: LatticeConfig, potential) -> HermitianOperator:
    """Dense matrix of H_D(m, c) = H_0(m, c) + V I_2 on the finite chain.

    ``potential`` is a PotentialRealization or any length-n_sites array.
    """
    n = config.n_sites
    c = config.light_speed
    rest = config.mass * c * c
    values = _potential_values(potential, n)
    d = difference_matrix(n, config.boundary)

    h = np.zeros((2 * n, 2 * n))
    h[:n, :n] = np.diag(rest + values)
    h[n:, n:] = np.diag(-rest + values)
    h[:n, n:] = c * d.T
    h[n:, :n] = c * d
    label = f"dirac(N={n}, m={config.mass:g}, c={c:g}, {config.boundary})"
    return HermitianOperator(h, label, n, kind="dirac",
                             meta={"mass": config.mass, "light_speed": c})


def build_schrodinger(config: LatticeConfig, potential) -> HermitianOperator:
    """(H_S psi)_n = (2 psi_n - psi_{n+1} - psi_{n-1}) / 2m + V_n psi_n."""
    if config.mass <= 0:
        raise ValueError("the Schrodinger operator needs mass > 0")
    n = config.n_sites
    values = _potential_values(potential, n)
    h = -laplacian_matrix(n, config.boundary) / (2.0 * config.mass) + np.diag(values)
    label = f"schrodinger(N={n}, m={config.mass:g}, {config.boundary})"
    return HermitianOperator(h, label, n, kind="schrodinger", meta={"mass": config.mass})


def velocity_operator(config: LatticeConfig) -> HermitianOperator:
    """c A with A = i [[0, -d^* - 1], [d + 1, 0]].

    On a ring A^2 = 1.  On an open chain d + 1 loses its last row, so
    A^2 differs from the identity at the two end sites only.
    """
    n = config.n_sites
    s = shift_matrix(n, config.boundary)
    a = np.zeros((2 * n, 2 * n), dtype=complex)
    a[:n, n:] = -1j * s.T
    a[n:, :n] = 1j * s
    c = config.light_speed
    return HermitianOperator(c * a, f"velocity(N={n}, c={c:g}, {config.boundary})", n,
                             kind="velocity", meta={"light_speed": c})


def position_operator(config: LatticeConfig) -> np.ndarray:
    """Diagonal of the position operator on the 2N-dimensional spinor space."""
    x = config.coordinates()
    return np.concatenate([x, x])


def free_dirac_dispersion(config: LatticeConfig) -> np.ndarray:
    """Sorted spectrum of the periodic free Dirac operator."""
    n = config.n_sites
    c = config.light_speed
    k = 2.0 * np.pi * np.arange(n) / n
    e = np.sqrt((config.mass * c * c) ** 2 + 4.0 * c * c * np.sin(k / 2.0) ** 2)
    return np.sort(np.concatenate([e, -e]))


def free_schrodinger_dispersion(config: LatticeConfig) -> np.ndarray:
    n = config.n_sites
    k = 2.0 * np.pi * np.arange(n) / n
    return np.sort((2.0 - 2.0 * np.cos(k)) / (2.0 * config.mass))

