"""Transfer matrices of the Dirac eigen-equation and Lyapunov exponents.

For (H_D - E) Psi = 0 the pair (psi+_{n+1}, psi-_n) follows from
(psi+_n, psi-_{n-1}) through

    T = [[1 + (m^2 c^4 - (E - V)^2) / c^2,   (m c^2 + E - V) / c],
         [(m c^2 - E + V) / c,               1                  ]]

which has unit determinant for every (E, V, m, c).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Literal, Sequence

import numpy as np

from ._parallel import ordered_map
from .disorder import DisorderSpec, sample_potential
from .lattice import LatticeConfig, SpinorState

RENORM_THRESHOLD = 1e100
REL_TOL = 1e-9

try:
    import numba

    _jit = numba.njit(cache=True, nogil=True)
except ImportError:  # pragma: no cover - numba is a declared dependency
    def _jit(fn):
        return fn


@_jit
def _product_kernel(energy, values, rest, c, threshold):
    p00 = 1.0
    p01 = 0.0
    p10 = 0.0
    p11 = 1.0
    log_sum = 0.0
    for k in range(values.shape[0]):
        x = energy - values[k]
        t00 = 1.0 + (rest * rest - x * x) / (c * c)
        t01 = (rest + x) / c
        t10 = (rest - x) / c
        q00 = t00 * p00 + t01 * p10
        q01 = t00 * p01 + t01 * p11
        q10 = t10 * p00 + p10
        q11 = t10 * p01 + p11
        nrm2 = q00 * q00 + q01 * q01 + q10 * q10 + q11 * q11
        if nrm2 > threshold * threshold:
            nrm = math.sqrt(nrm2)
            log_sum += math.log(nrm)
            q00 /= nrm
            q01 /= nrm
            q10 /= nrm
            q11 /= nrm
        p00, p01, p10, p11 = q00, q01, q10, q11
    nrm = math.sqrt(p00 * p00 + p01 * p01 + p10 * p10 + p11 * p11)
    log_sum += math.log(nrm)
    return log_sum, p00 / nrm, p01 / nrm, p10 / nrm, p11 / nrm


def transfer_matrix(E: float, V: float, m: float, c: float) -> np.ndarray:
    if not c > 0:
        raise ValueError("light speed must be positive")
    rest = m * c * c
    x = E - V
    return np.array([[1.0 + (rest * rest - x * x) / (c * c), (rest + x) / c],
                     [(rest - x) / c, 1.0]])


def spectral_radius(T) -> float:
    """Largest |eigenvalue|; closed form from the trace for unit-determinant matrices."""
    T = np.asarray(T, dtype=float)
    if abs(np.linalg.det(T) - 1.0) > 1e-9:
        return float(np.max(np.abs(np.linalg.eigvals(T))))
    tau = abs(float(np.trace(T)))
    if tau <= 2.0:
        return 1.0
    return (tau + math.sqrt(tau * tau - 4.0)) / 2.0


def propagate_transfer(E: float, potential, config: LatticeConfig) -> tuple[float, np.ndarray]:
    """Ordered product T_{V_N} ... T_{V_1} with renormalization.

    Returns ``(log_norm_sum, frame)`` such that the product equals
    ``exp(log_norm_sum) * frame`` with ``frame`` of unit Frobenius norm.
    """
    values = np.ascontiguousarray(getattr(potential, "values", potential), dtype=float)
    if values.size == 0:
        raise ValueError("empty potential")
    rest = config.mass * config.light_speed ** 2
    log_sum, a, b, cc, d = _product_kernel(float(E), values, rest,
                                           float(config.light_speed), RENORM_THRESHOLD)
    return float(log_sum), np.array([[a, b], [cc, d]])


def eigen_recursion(E: float, potential, m: float, c: float,
                    start: tuple[float, float] = (1.0, 0.0)) -> SpinorState:
    """Solution of (H_D - E) Psi = 0 generated site by site from the transfer matrices.

    ``start`` is (psi+_0, psi-_{-1}).  Row 0 of the upper component and the last
    row of the lower component involve amplitudes outside the chain, so only the
    interior rows satisfy the open-chain eigen-equation.
    """
    values = np.asarray(getattr(potential, "values", potential), dtype=float)
    n = values.shape[0]
    upper = np.zeros(n)
    lower = np.zeros(n)
    vec = np.array(start, dtype=float)
    for k in range(n):
        upper[k] = vec[0]
        vec = transfer_matrix(E, values[k], m, c) @ vec
        lower[k] = vec[1]
    return SpinorState(upper, lower)


@dataclass
class LyapunovEstimate:
    energy: float
    gamma: float
    n_steps: int
    n_realizations: int
    std_error: float
    loc_length: float
    samples: np.ndarray = field(repr=False, default=None)

    @property
    def resolved(self) -> bool:
        """gamma exceeds 3 standard errors and the 1/n_steps resolution of a finite product."""
        return _resolved(self.gamma, self.std_error, self.n_steps)


def _resolved(gamma: float, std_error: float, n_steps: int) -> bool:
    return gamma > 3.0 * max(std_error, 1.0 / n_steps)


def lyapunov_exponent(E: float, spec: DisorderSpec, m: float, c: float,
                      n_steps: int = 10 ** 6, n_realizations: int = 32,
                      stream_offset: int = 0, threads: int = 1) -> LyapunovEstimate:
    """Disorder-averaged growth rate of ||T_{V_n} ... T_{V_1}|| (Frobenius norm).

    Realization ``k`` uses stream ``stream_offset + k`` of ``spec.seed``; results do not
    depend on ``threads``.
    """
    if n_steps < 10 ** 4:
        raise ValueError("n_steps must be at least 1e4")
    config = LatticeConfig(4, mass=m, light_speed=c)

    def one(k):
        pot = sample_potential(spec, n_steps, stream_offset + k)
        return propagate_transfer(E, pot, config)[0] / n_steps

    rates = np.array(ordered_map(one, range(n_realizations), threads))

    gamma = float(np.mean(rates))
    se = float(np.std(rates, ddof=1) / math.sqrt(n_realizations)) if n_realizations > 1 else 0.0
    loc = 1.0 / gamma if _resolved(gamma, se, n_steps) else math.inf
    return LyapunovEstimate(float(E), gamma, int(n_steps), int(n_realizations), se, loc, rates)


@dataclass(frozen=True)
class CriticalEnergySet:
    energies: tuple
    regime: Literal["massless", "massive_v_eq_special", "massive_v_eq_c_over_sqrt2", "none"]


def _same(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=REL_TOL)


def critical_energies(m: float, c: float, v: float) -> CriticalEnergySet:
    """Energies at which the Lyapunov exponent is claimed to vanish.

    m = 0: E = +-v when 0 < v <= c and v != c/sqrt(2).
    m > 0: E = 0 when v = c sqrt(2 + m^2 c^2); E = +-c/sqrt(2) +- c sqrt(2 + m^2 c^2)
    when v = c/sqrt(2).
    """
    if not (c > 0 and v > 0 and m >= 0):
        raise ValueError("need c > 0, v > 0, m >= 0")
    half = c / math.sqrt(2.0)
    if m == 0:
        if (v < c or _same(v, c)) and not _same(v, half):
            return CriticalEnergySet((-v, v), "massless")
        return CriticalEnergySet((), "none")
    special = c * math.sqrt(2.0 + (m * c) ** 2)
    if _same(v, special):
        return CriticalEnergySet((0.0,), "massive_v_eq_special")
    if _same(v, half):
        energies = sorted(s1 * half + s2 * special for s1 in (1, -1) for s2 in (1, -1))
        return CriticalEnergySet(tuple(energies), "massive_v_eq_c_over_sqrt2")
    return CriticalEnergySet((), "none")


def refined_energy_grid(energies: Iterable[float], m: float, c: float, v: float,
                        width: float = 0.05, levels: int = 4) -> np.ndarray:
    """Energy grid densified geometrically around catalogue energies in its range."""
    grid = list(np.asarray(list(energies), dtype=float))
    if not grid:
        return np.array([])
    lo, hi = min(grid), max(grid)
    for e in critical_energies(m, c, v).energies:
        if lo <= e <= hi:
            grid.append(e)
            for k in range(levels):
                step = width * 0.5 ** k
                grid.extend([e - step, e + step])
    return np.unique(np.clip(grid, lo, hi))


def energy_sweep(energies: Sequence[float], spec: DisorderSpec, m: float, c: float,
                 n_steps: int = 10 ** 5, n_realizations: int = 8, refine: bool = True,
                 threads: int = 1) -> list[LyapunovEstimate]:
    grid = refined_energy_grid(energies, m, c, spec.v) if refine and spec.v > 0 \
        else np.unique(np.asarray(energies, dtype=float))
    return [lyapunov_exponent(e, spec, m, c, n_steps, n_realizations, threads=threads)
            for e in grid]


SWEEP_COLUMNS = ("energy", "gamma", "std_error", "loc_length", "n_steps", "n_realizations")


def write_sweep_csv(estimates: Sequence[LyapunovEstimate], path) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for est in estimates:
            w.writerow([f"{est.energy:.17g}", f"{est.gamma:.17g}", f"{est.std_error:.17g}",
                        "inf" if math.isinf(est.loc_length) else f"{est.loc_length:.17g}",
                        est.n_steps, est.n_realizations])
    return path
