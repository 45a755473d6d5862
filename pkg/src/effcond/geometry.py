"""Disk configurations in the periodic cell.

Random sequential addition (RSA) realizes the uniform non-overlapping
ensemble: candidates are drawn uniformly in the cell and accepted iff their
periodic distance to every accepted center is at least one diameter.
Generation is a pure function of the seed; per-trial seeds for ensembles
derive from a master seed through splitmix64 (trial i uses
master XOR splitmix64(i)), so trials may run concurrently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GenerationError
from .lattice import Cell, make_cell

#: RSA concentrations above this guard are rejected up front (hard-disk RSA
#: jams near 0.547; acceptance probability collapses well before that).
NU_GUARD = 0.5

#: Candidate-draw budget for one configuration.
DEFAULT_ATTEMPT_BUDGET = 10 ** 6

_OVERLAP_TOL = 1e-12


def periodic_reduce(cell: Cell, z):
    """Representative of z in the fundamental parallelogram; idempotent."""
    zr, _, _ = cell.reduce(z)
    if np.isscalar(z) or np.asarray(z).ndim == 0:
        return complex(zr)
    return zr


def periodic_distance(cell: Cell, z1, z2):
    """min over the 9 nearest lattice translates of |z1 - z2 + m1 w1 + m2 w2|."""
    d, _, _ = cell.reduce(np.asarray(z1, dtype=complex) - np.asarray(z2, dtype=complex))
    m = np.arange(-1, 2)
    shifts = (m[:, None] * cell.omega1 + m[None, :] * cell.omega2).ravel()
    dist = np.abs(np.asarray(d)[..., None] - (-shifts)).min(axis=-1)
    if np.isscalar(z1) and np.isscalar(z2):
        return float(dist)
    return dist


def min_image(cell: Cell, d):
    """Minimal-norm lattice translate of a difference vector d."""
    dr, _, _ = cell.reduce(d)
    m = np.arange(-1, 2)
    shifts = (m[:, None] * cell.omega1 + m[None, :] * cell.omega2).ravel()
    cand = np.asarray(dr)[..., None] + shifts
    idx = np.abs(cand).argmin(axis=-1)
    out = np.take_along_axis(cand, idx[..., None], axis=-1)[..., 0]
    if np.isscalar(d) or np.asarray(d).ndim == 0:
        return complex(out)
    return out


@dataclass(frozen=True, eq=False)
class DiskConfiguration:
    """N equal disks of radius r centered at `centers` inside `cell`.

    Centers are stored reduced to the fundamental parallelogram; kernel and
    solver caches attach lazily and are read-only once filled.
    """

    cell: Cell
    centers: np.ndarray
    radius: float
    meta: dict = field(default_factory=dict, repr=False)
    _kernels: dict = field(default_factory=dict, repr=False)
    _solver_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        centers = np.atleast_1d(np.asarray(self.centers, dtype=complex))
        reduced = periodic_reduce(self.cell, centers)
        object.__setattr__(self, "centers", np.atleast_1d(reduced))
        self.validate()

    @property
    def n_disks(self) -> int:
        return len(self.centers)

    @property
    def nu(self) -> float:
        return self.n_disks * math.pi * self.radius ** 2

    def validate(self):
        if self.radius <= 0.0:
            raise DomainError(f"radius must be positive, got {self.radius}")
        if not 0.0 < self.nu < 1.0:
            raise DomainError(f"concentration nu = {self.nu:g} outside (0, 1)")
        n = self.n_disks
        if n > 1:
            diff = self.centers[:, None] - self.centers[None, :]
            dist = periodic_distance(self.cell, diff, 0.0)
            dist[np.diag_indices(n)] = np.inf
            dmin = float(dist.min())
            if dmin < 2.0 * self.radius - _OVERLAP_TOL:
                raise DomainError(
                    f"overlapping disks: min periodic distance {dmin:.17g} "
                    f"< diameter {2 * self.radius:.17g}"
                )

    def pair_separations(self) -> np.ndarray:
        """Minimal-image differences a_j - a_k as an (N, N) complex matrix."""
        diff = self.centers[:, None] - self.centers[None, :]
        return min_image(self.cell, diff)


@dataclass(frozen=True)
class EnsembleDescriptor:
    """Everything needed to reproduce a Monte Carlo ensemble bit-for-bit."""

    n: int
    nu: float
    trials: int
    seed: int
    cell_omega1: float = 1.0
    cell_omega2: complex = 1j
    exclusion_factor: float = 1.0  # candidate spacing >= factor * 2r
    attempt_budget: int = DEFAULT_ATTEMPT_BUDGET

    def __post_init__(self):
        if self.n < 1:
            raise DomainError(f"need at least one disk, got n = {self.n}")
        if self.trials < 1:
            raise DomainError(f"need at least one trial, got {self.trials}")
        if not 0.0 < self.nu <= NU_GUARD:
            raise DomainError(
                f"nu = {self.nu:g} outside (0, {NU_GUARD}] RSA guard"
            )
        if self.exclusion_factor < 1.0:
            raise DomainError("exclusion_factor must be >= 1")

    def cell(self) -> Cell:
        return make_cell(self.cell_omega1, self.cell_omega2)

    @property
    def radius(self) -> float:
        return math.sqrt(self.nu / (self.n * math.pi))


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return x ^ (x >> 31)


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Per-trial seed: master XOR splitmix64(trial index)."""
    return (master_seed & 0xFFFFFFFFFFFFFFFF) ^ _splitmix64(trial_index)


def rsa_generate(desc: EnsembleDescriptor, seed: int | None = None) -> DiskConfiguration:
    """One RSA configuration; deterministic function of the seed.

    Draws uniform candidates and accepts each iff its periodic distance to
    all accepted centers is >= exclusion_factor * 2r.  Raises
    GenerationError (carrying the count placed) when the budget runs out.
    """
    cell = desc.cell()
    r = desc.radius
    min_dist = desc.exclusion_factor * 2.0 * r
    rng = np.random.default_rng(desc.seed if seed is None else seed)
    accepted = np.empty(desc.n, dtype=complex)
    placed = 0
    drawn = 0
    block = np.empty((0, 2))
    cursor = 0
    # inlined periodic distance for the hot loop
    m = np.arange(-1, 2)
    shifts = (m[:, None] * cell.omega1 + m[None, :] * cell.omega2).ravel()
    inv_im = 1.0 / cell.omega2.imag
    re2, w1 = cell.omega2.real, cell.omega1
    while placed < desc.n:
        if cursor >= len(block):
            block = rng.random((1024, 2))
            cursor = 0
        u1, u2 = block[cursor]
        cursor += 1
        drawn += 1
        if drawn > desc.attempt_budget:
            raise GenerationError(
                f"placed {placed}/{desc.n} disks within "
                f"{desc.attempt_budget} candidate draws",
                placed=placed,
            )
        z = (u1 - 0.5) * cell.omega1 + (u2 - 0.5) * cell.omega2
        if placed:
            d = accepted[:placed] - z
            beta = d.imag * inv_im
            alpha = (d.real - beta * re2) / w1
            d = d - np.floor(alpha + 0.5) * w1 - np.floor(beta + 0.5) * cell.omega2
            if np.abs(d[:, None] - (-shifts)).min() < min_dist:
                continue
        accepted[placed] = z
        placed += 1
    meta = {
        "generator": "rsa",
        "seed": int(desc.seed if seed is None else seed),
        "nu": desc.nu,
        "exclusion_factor": desc.exclusion_factor,
        "candidates_drawn": drawn,
    }
    return DiskConfiguration(cell=cell, centers=accepted, radius=r, meta=meta)


def regular_array(cell: Cell, kind: str, n: int, nu: float) -> DiskConfiguration:
    """Benchmark array on a regular sublattice: `square` or `hexagonal`.

    Requires n = m**2 disks on the matching cell shape; for n = 1 the single
    disk sits at the origin.
    """
    if kind not in ("square", "hexagonal"):
        raise DomainError(f"unknown regular array kind {kind!r}")
    m = round(math.sqrt(n))
    if m * m != n or n < 1:
        raise DomainError(f"regular arrays need a perfect-square count, got {n}")
    expected_tau = 1j if kind == "square" else np.exp(1j * math.pi / 3)
    if abs(cell.tau - expected_tau) > 1e-9:
        raise DomainError(
            f"{kind} array needs cell shape omega2/omega1 = {expected_tau:.6g}, "
            f"got {cell.tau:.6g}"
        )
    nu_max = math.pi / 4 if kind == "square" else math.pi / math.sqrt(12)
    if not 0.0 < nu < nu_max:
        raise DomainError(f"nu = {nu:g} outside (0, {nu_max:g}) for {kind} packing")
    # offset sublattice: for m = 1 the disk sits at the origin, for m = 2 at
    # lattice coordinates (+-1/4, +-1/4)
    i, j = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
    frac_i = (i.ravel() + 0.5) / m - 0.5
    frac_j = (j.ravel() + 0.5) / m - 0.5
    centers = frac_i * cell.omega1 + frac_j * cell.omega2
    r = math.sqrt(nu / (n * math.pi))
    meta = {"generator": f"regular-{kind}", "nu": nu}
    return DiskConfiguration(cell=cell, centers=centers, radius=r, meta=meta)


def configuration_to_dict(config: DiskConfiguration) -> dict:
    """JSON-ready dict per the documented configuration schema."""
    return {
        "cell": {
            "omega1": config.cell.omega1,
            "omega2": [config.cell.omega2.real, config.cell.omega2.imag],
        },
        "radius": config.radius,
        "centers": [[z.real, z.imag] for z in config.centers],
        "meta": dict(config.meta),
    }


def configuration_from_dict(data: dict) -> DiskConfiguration:
    omega1 = float(data["cell"]["omega1"])
    omega2 = complex(*data["cell"]["omega2"])
    if abs(omega1 * omega2.imag - 1.0) > 1e-12:
        raise DomainError(
            f"configuration cell area {omega1 * omega2.imag:.17g} != 1"
        )
    cell = make_cell(omega1, omega2)
    centers = np.array([complex(re, im) for re, im in data["centers"]])
    return DiskConfiguration(
        cell=cell,
        centers=centers,
        radius=float(data["radius"]),
        meta=dict(data.get("meta", {})),
    )


def save_configuration(config: DiskConfiguration, path):
    from .serialize import dump_json

    with open(path, "w") as fh:
        fh.write(dump_json(configuration_to_dict(config)))


def load_configuration(path) -> DiskConfiguration:
    with open(path) as fh:
        return configuration_from_dict(json.load(fh))
