"""Reproducible two-valued random potentials.

Every realization is keyed by ``(seed, stream_index)`` through numpy's
``SeedSequence`` spawn keys, so ensemble member ``k`` is the same sequence no
matter which other members were drawn before it or on which worker.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np

Kind = Literal["bernoulli", "dimer", "constant_zero"]


@dataclass(frozen=True)
class DisorderSpec:
    v: float = 0.5
    p: float = 0.5
    kind: Kind = "bernoulli"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("bernoulli", "dimer", "constant_zero"):
            raise ValueError(f"unknown disorder kind {self.kind!r}")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.kind != "constant_zero":
            if not self.v > 0:
                raise ValueError(f"v must be > 0 for {self.kind} disorder, got {self.v}")
            if not 0 < self.p < 1:
                raise ValueError(f"p must lie in (0, 1), got {self.p}")


@dataclass(frozen=True)
class PotentialRealization:
    values: np.ndarray
    spec: DisorderSpec
    seed: int
    stream_index: int = 0

    @property
    def n_sites(self) -> int:
        return self.values.shape[0]

    def crop(self, n_sites: int) -> "PotentialRealization":
        """Central window of length n_sites (same launch-site neighbourhood)."""
        if n_sites > self.n_sites:
            raise ValueError("cannot crop to a larger lattice")
        start = self.n_sites // 2 - n_sites // 2
        return PotentialRealization(self.values[start:start + n_sites].copy(), self.spec,
                                    self.seed, self.stream_index)


def stream_generator(seed: int, stream_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream_index),))
    return np.random.Generator(np.random.PCG64(ss))


def sample_potential(spec: DisorderSpec, n_sites: int, stream_index: int = 0) -> PotentialRealization:
    if n_sites < 4:
        raise ValueError(f"n_sites must be >= 4, got {n_sites}")
    if spec.kind == "constant_zero":
        values = np.zeros(n_sites)
    else:
        rng = stream_generator(spec.seed, stream_index)
        if spec.kind == "bernoulli":
            minus = rng.random(n_sites) < spec.p
        else:
            minus = np.repeat(rng.random((n_sites + 1) // 2) < spec.p, 2)[:n_sites]
        values = np.where(minus, -spec.v, spec.v)
    values.setflags(write=False)
    return PotentialRealization(values, spec, int(spec.seed), int(stream_index))


def write_potential_csv(realization: PotentialRealization, path) -> Path:
    """One value per line, with a ``V`` header, at full precision."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["V"])
        for x in realization.values:
            writer.writerow([repr(float(x))])
    return path


def read_potential_csv(path, spec: DisorderSpec | None = None, stream_index: int = 0) -> PotentialRealization:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or rows[0] != ["V"]:
        raise ValueError(f"{path}: expected a 'V' header")
    values = np.array([float(r[0]) for r in rows[1:]])
    spec = spec or DisorderSpec(v=float(np.max(np.abs(values))) or 0.0,
                                kind="bernoulli" if np.any(values) else "constant_zero")
    return PotentialRealization(values, spec, spec.seed, stream_index)
