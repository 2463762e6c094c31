"""Exact eigenbasis time evolution and time-averaged second moments.

With H = U diag(E) U^dagger and c = U^dagger psi0, the time average

    M(t) = (1/t) int_0^t <psi(s)| X |psi(s)> ds

of the position-squared operator X is a finite double sum

    M(t) = Re sum_{k,j} conj(c_k) c_j X_{kj} K((E_k - E_j) t),  K(x) = (e^{ix} - 1)/(ix),

evaluated here without any quadrature.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.linalg

from ._parallel import ordered_map
from .disorder import DisorderSpec, sample_potential
from .lattice import (HermitianOperator, LatticeConfig, SpinorState, build_dirac,
                      position_operator)

EDGE_FLAG = 1e-6
KERNEL_SERIES_CUT = 1e-4
_CHUNK = 1024


class DiagonalizationError(RuntimeError):
    pass


@dataclass(frozen=True)
class EvolutionPlan:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    label: str
    coordinates: np.ndarray  # per basis vector; shared by both spinor components of a site

    @property
    def dimension(self) -> int:
        return self.eigenvalues.shape[0]

    def to_eigenbasis(self, psi) -> np.ndarray:
        return self.eigenvectors.conj().T @ _as_vector(psi)

    def from_eigenbasis(self, coeffs) -> np.ndarray:
        return self.eigenvectors @ coeffs


def _as_vector(psi) -> np.ndarray:
    return psi.vector if isinstance(psi, SpinorState) else np.asarray(psi)


def diagonalize(H: HermitianOperator, coordinates: Optional[np.ndarray] = None) -> EvolutionPlan:
    """Full spectral decomposition of a Hermitian operator.

    ``coordinates`` defaults to the centred site coordinate of each basis vector
    (repeated for the two spinor components of Dirac operators).
    """
    mat = H.matrix
    try:
        evals, evecs = scipy.linalg.eigh(mat, driver="evd", check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        cond = np.linalg.cond(mat) if mat.shape[0] <= 2000 else float("nan")
        raise DiagonalizationError(f"{H.label}: eigensolver failed ({exc}); cond={cond:.3e}") from exc
    if coordinates is None:
        x = np.arange(H.n_sites) - (H.n_sites - 1) / 2.0
        coordinates = np.concatenate([x, x]) if H.dimension == 2 * H.n_sites else x
    return EvolutionPlan(evals, evecs, H.label, np.asarray(coordinates, dtype=float))


def evolve_state(plan: EvolutionPlan, psi0, t: float):
    """psi(t) = U exp(-i E t) U^dagger psi0; returns the same type as psi0."""
    vec = _as_vector(psi0)
    if vec.shape != (plan.dimension,):
        raise ValueError(f"state has dimension {vec.shape}, plan expects {plan.dimension}")
    if t == 0:
        out = vec.astype(complex)
    else:
        out = plan.eigenvectors @ (np.exp(-1j * plan.eigenvalues * t) * (plan.eigenvectors.conj().T @ vec))
    return SpinorState.from_vector(out) if isinstance(psi0, SpinorState) else out


def second_moment(psi, plan_or_coords) -> float:
    """sum_n coord(n)^2 (|psi+_n|^2 + |psi-_n|^2)."""
    coords = getattr(plan_or_coords, "coordinates", plan_or_coords)
    vec = _as_vector(psi)
    return float(np.sum(np.asarray(coords) ** 2 * np.abs(vec) ** 2))


def averaging_kernel(x, imaginary: bool = True):
    """Real and imaginary parts of K(x) = (e^{ix} - 1)/(ix), series-expanded near 0."""
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=float))
    small = np.abs(x) < KERNEL_SERIES_CUT
    re = np.sin(x)
    np.divide(re, x, out=re, where=~small)
    re[small] = 1.0 - x[small] ** 2 / 6.0
    if not imaginary:
        return (re[0] if scalar else re), None
    im = 2.0 * np.sin(x / 2.0) ** 2
    np.divide(im, x, out=im, where=~small)
    xs = x[small]
    im[small] = xs / 2.0 - xs ** 3 / 24.0
    return (re[0], im[0]) if scalar else (re, im)


def _moment_weights(plan: EvolutionPlan, psi0) -> np.ndarray:
    coeffs = plan.to_eigenbasis(psi0)
    u = plan.eigenvectors
    x2u = (plan.coordinates ** 2)[:, None] * u
    X = u.conj().T @ x2u
    return (coeffs.conj()[:, None] * coeffs[None, :]) * X


def time_averaged_moment(plan: EvolutionPlan, psi0, t):
    """Closed-form time average of the second moment up to time(s) t > 0."""
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times <= 0):
        raise ValueError("time_averaged_moment needs t > 0")
    B = _moment_weights(plan, psi0)
    out = _closed_form_sum(B, plan.eigenvalues, times)
    return out if np.ndim(t) else float(out[0])


def _closed_form_sum(B: np.ndarray, energies: np.ndarray, times: np.ndarray) -> np.ndarray:
    real_only = not np.iscomplexobj(B) or not np.any(B.imag)
    Br = np.ascontiguousarray(B.real)
    Bi = None if real_only else np.ascontiguousarray(B.imag)
    out = np.zeros(times.shape[0])
    n = energies.shape[0]
    for start in range(0, n, _CHUNK):
        stop = min(n, start + _CHUNK)
        omega = energies[start:stop, None] - energies[None, :]
        br = Br[start:stop]
        bi = None if Bi is None else Bi[start:stop]
        for i, tt in enumerate(times):
            re, im = averaging_kernel(omega * tt, imaginary=bi is not None)
            acc = np.sum(br * re)
            if bi is not None:
                acc -= np.sum(bi * im)
            out[i] += acc
    return out


def edge_weight(psi, coordinates: np.ndarray, n_sites: int, fraction: float = 0.9) -> float:
    """Probability outside the central ``fraction`` of the chain."""
    vec = _as_vector(psi)
    outside = np.abs(coordinates) > fraction * (n_sites - 1) / 2.0
    return float(np.sum(np.abs(vec[outside]) ** 2))


def launch_state(n_sites: int, kind: str = "delta+") -> SpinorState:
    """Initial states: 'delta+', 'delta-' or 'delta+-' ((delta+ + delta-)/sqrt 2) at the centre."""
    centre = n_sites // 2
    if kind == "delta+":
        return SpinorState.basis(n_sites, centre, "+")
    if kind == "delta-":
        return SpinorState.basis(n_sites, centre, "-")
    if kind == "delta+-":
        up = SpinorState.basis(n_sites, centre, "+")
        return SpinorState(up.upper, up.upper).normalized()
    raise ValueError(f"unknown initial state {kind!r}")


@dataclass
class MomentSeries:
    times: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    edge_weights: np.ndarray
    mass: float = 0.0
    light_speed: float = 1.0
    spec: Optional[DisorderSpec] = None
    n_sites: int = 0
    streams: tuple = ()
    samples: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        if self.stderr is None:
            self.stderr = np.zeros_like(self.values)
        if self.edge_weights is None:
            self.edge_weights = np.zeros_like(self.values)

    @property
    def flagged(self) -> np.ndarray:
        """Points whose boundary leakage reached the truncation threshold."""
        return np.asarray(self.edge_weights) >= EDGE_FLAG

    def value_at(self, t: float) -> float:
        idx = np.flatnonzero(np.isclose(self.times, t, rtol=1e-12, atol=0))
        if not idx.size:
            raise KeyError(f"t={t} is not on the grid")
        return float(self.values[idx[0]])


def realization_moments(config: LatticeConfig, potential, psi0, times: np.ndarray):
    """M(t) and instantaneous edge weight for one disorder realization."""
    H = build_dirac(config, potential)
    plan = diagonalize(H, position_operator(config))
    B = _moment_weights(plan, psi0)
    M = _closed_form_sum(B, plan.eigenvalues, times)
    coeffs = plan.to_eigenbasis(psi0)
    edges = np.array([edge_weight(plan.eigenvectors @ (np.exp(-1j * plan.eigenvalues * t) * coeffs),
                                  plan.coordinates, config.n_sites) for t in times])
    return M, edges


def moment_series(config: LatticeConfig, spec: DisorderSpec, time_grid: Sequence[float],
                  n_realizations: int = 1, initial: str = "delta+", stream_offset: int = 0,
                  potentials: Optional[Sequence] = None, threads: int = 1) -> MomentSeries:
    """Disorder-averaged time-averaged second moment on ``time_grid``.

    Realization ``k`` uses stream ``stream_offset + k`` unless ``potentials`` supplies
    the realizations explicitly (used for common random numbers across sizes).
    """
    times = np.asarray(time_grid, dtype=float)
    if times.ndim != 1 or times.size == 0 or np.any(times <= 0) or np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be positive and strictly increasing")
    psi0 = launch_state(config.n_sites, initial)
    if potentials is None:
        streams = tuple(stream_offset + k for k in range(n_realizations))
        get_pot: Callable = lambda k: sample_potential(spec, config.n_sites, streams[k])
    else:
        streams = tuple(getattr(p, "stream_index", k) for k, p in enumerate(potentials))
        n_realizations = len(potentials)
        get_pot = lambda k: potentials[k]

    def one(k):
        return realization_moments(config, get_pot(k), psi0, times)

    results = ordered_map(one, range(n_realizations), threads)

    samples = np.array([r[0] for r in results])
    edges = np.array([r[1] for r in results])
    mean = samples.mean(axis=0)
    err = samples.std(axis=0, ddof=1) / math.sqrt(n_realizations) if n_realizations > 1 \
        else np.zeros_like(mean)
    return MomentSeries(times, mean, err, edges.max(axis=0), config.mass, config.light_speed,
                        spec, config.n_sites, streams, samples)


def mean_position_and_velocity(plan: EvolutionPlan, psi0, t: float,
                               velocity_op: HermitianOperator) -> tuple[float, float]:
    psi = evolve_state(plan, _as_vector(psi0), t)
    pos = float(np.real(np.vdot(psi, plan.coordinates * psi)))
    vel = float(np.real(np.vdot(psi, velocity_op.matrix @ psi)))
    return pos, vel


MOMENT_COLUMNS = ("t", "M_mean", "M_stderr", "edge_weight_max")


def write_moments_csv(series: MomentSeries, path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(MOMENT_COLUMNS)
        for row in zip(series.times, series.values, series.stderr, series.edge_weights):
            w.writerow([f"{x:.17g}" for x in row])
    return path


def read_moments_csv(path) -> MomentSeries:
    data = np.genfromtxt(path, delimiter=",", names=True)
    return MomentSeries(data["t"], data["M_mean"], data["M_stderr"], data["edge_weight_max"])
