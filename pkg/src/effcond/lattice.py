"""Unit cell geometry, lattice sums and the periodic kernels E_n.

The cell is spanned by periods (omega1, omega2) with omega1 > 0,
Im(omega2) > 0 and unit area, omega1 * Im(omega2) = 1.  The kernels

    E_n(z) = sum over lattice translates P of (z + P)^(-n)

are summed in the Eisenstein order: the sum along the omega1 direction
first, the transverse sum second and symmetrically.  The inner sum is taken
in closed trigonometric form,

    sum_m (w + m)^(-n) = pi^n * Q_n(cot(pi*w)),

with Q_n a fixed polynomial, so each transverse row decays exponentially
(the decay ratio is the square of the lattice nome).  This prescription
fixes the values of the conditionally convergent cases n = 1, 2 and gives
E_1 the constant jump -2*pi*i/omega1 across omega2, zero across omega1.

Lattice sums S_n = E_n-minus-pole at 0: S_2, S_4, S_6 come from the same
row summation; higher even orders use the classical quadratic recurrence
seeded by S_4 and S_6; odd orders vanish by central symmetry and are
returned as exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
import math

import numpy as np
from scipy.special import zeta as _riemann_zeta

from .errors import DomainError, InvalidCellError, NearSingularityError

#: Aspect-ratio guard for Im(omega2)/omega1; strongly sheared or elongated
#: cells degrade the row summation and are rejected up front.
ASPECT_RANGE = (0.2, 5.0)

#: Distance (in cell units) below which direct E_n evaluation is refused.
NEAR_SINGULARITY_RADIUS = 1e-9

# Rows switch from the cot form to the exponential series at this |Im w|.
_IM_SWITCH = 0.35

_TWO_PI_I = 2j * math.pi


@lru_cache(maxsize=None)
def _cot_poly(n: int) -> np.ndarray:
    """Coefficients of Q_n with sum_m (w+m)^(-n) = pi^n Q_n(cot(pi w)).

    Q_1 = c, Q_{n+1} = (1 + c^2) Q_n' / n; computed exactly in Fractions.
    """
    coeffs = [Fraction(0), Fraction(1)]  # Q_1
    for k in range(1, n):
        deriv = [coeffs[j + 1] * (j + 1) for j in range(len(coeffs) - 1)]
        nxt = [Fraction(0)] * (len(deriv) + 2)
        for j, c in enumerate(deriv):
            nxt[j] += Fraction(c, k)
            nxt[j + 2] += Fraction(c, k)
        coeffs = nxt
    return np.array([float(c) for c in coeffs])


def _exp_terms(n: int, u_max: float) -> int:
    """Series length with tail k^(n-1) u^k below 1e-18 of the first term."""
    log_u = math.log(max(u_max, 1e-300))
    k = max(8, n)
    while k < 400 and (n - 1) * math.log(k) + (k - 1) * log_u > math.log(1e-18):
        k += 4
    return k


def _row_values(n: int, w: np.ndarray) -> np.ndarray:
    """One-dimensional lattice sums sum_m (w + m)^(-n), elementwise in w."""
    out = np.empty(w.shape, dtype=complex)
    im = w.imag
    central = np.abs(im) < _IM_SWITCH
    if np.any(central):
        c = 1.0 / np.tan(np.pi * w[central])
        q = _cot_poly(n)
        acc = np.full(c.shape, q[-1], dtype=complex)
        for coef in q[-2::-1]:
            acc = acc * c + coef
        out[central] = (np.pi ** n) * acc
    far = ~central
    if np.any(far):
        wf = np.where(im[far] > 0, w[far], -w[far])
        u = np.exp(_TWO_PI_I * wf)
        upow = u.copy()
        acc = np.zeros(wf.shape, dtype=complex)
        for k in range(1, _exp_terms(n, float(np.abs(u).max())) + 1):
            acc += (k ** (n - 1)) * upow
            upow *= u
        val = ((-_TWO_PI_I) ** n / math.factorial(n - 1)) * acc
        if n == 1:
            val -= 1j * np.pi
        sign = 1.0 if n % 2 == 0 else -1.0
        out[far] = np.where(im[far] > 0, val, sign * val)
    return out


@dataclass(frozen=True)
class Cell:
    """Unit-area periodic cell; immutable and shareable after construction.

    Lattice sums and the cot-polynomial tables are cached lazily; the caches
    are append-only, so concurrent readers are safe once warmed.
    """

    omega1: float
    omega2: complex
    _sums: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def tau(self) -> complex:
        return self.omega2 / self.omega1

    @property
    def area(self) -> float:
        return self.omega1 * self.omega2.imag

    @property
    def min_period(self) -> float:
        """Length of the shortest nonzero lattice vector."""
        m = np.arange(-2, 3)
        pts = m[:, None] * self.omega1 + m[None, :] * self.omega2
        d = np.abs(pts)
        d[2, 2] = np.inf
        return float(d.min())

    def row_count(self) -> int:
        """Transverse rows needed for ~1e-17 absolute row tails."""
        return int(math.ceil(0.5 + 7.0 / self.tau.imag)) + 1

    def reduce(self, z):
        """Representative of z in the fundamental parallelogram.

        Returns (z_reduced, k1, k2) with z = z_reduced + k1*omega1 + k2*omega2
        and lattice coordinates of z_reduced in [-1/2, 1/2).
        """
        z = np.asarray(z, dtype=complex)
        beta = z.imag / self.omega2.imag
        alpha = (z.real - beta * self.omega2.real) / self.omega1
        k1 = np.floor(alpha + 0.5)
        k2 = np.floor(beta + 0.5)
        zr = z - k1 * self.omega1 - k2 * self.omega2
        return zr, k1.astype(int), k2.astype(int)

    def lattice_distance(self, z) -> np.ndarray:
        """Distance from z to the nearest lattice point."""
        zr, _, _ = self.reduce(z)
        m = np.arange(-1, 2)
        shifts = (m[:, None] * self.omega1 + m[None, :] * self.omega2).ravel()
        d = np.abs(zr[..., None] - shifts)
        return d.min(axis=-1)


def make_cell(omega1: float, omega2: complex) -> Cell:
    """Build a unit-area cell with the shape of the supplied period pair.

    Both periods are rescaled by the same positive factor so that
    omega1 * Im(omega2) = 1; the shape omega2/omega1 is preserved.  Cells
    are immutable, so equal-period requests share one cached instance (and
    its lattice-sum cache).
    """
    return _make_cell_cached(float(omega1), complex(omega2))


@lru_cache(maxsize=128)
def _make_cell_cached(omega1: float, omega2: complex) -> Cell:
    if not (omega1 > 0.0 and math.isfinite(omega1)):
        raise InvalidCellError(f"omega1 must be positive and finite, got {omega1}")
    if not (omega2.imag > 0.0 and math.isfinite(abs(omega2))):
        raise InvalidCellError(f"Im(omega2) must be positive, got {omega2}")
    aspect = omega2.imag / omega1
    if not (ASPECT_RANGE[0] <= aspect <= ASPECT_RANGE[1]):
        raise InvalidCellError(
            f"cell aspect Im(omega2)/omega1 = {aspect:g} outside supported "
            f"range {ASPECT_RANGE}"
        )
    scale = 1.0 / math.sqrt(omega1 * omega2.imag)
    cell = Cell(omega1 * scale, omega2 * scale)
    assert abs(cell.area - 1.0) <= 1e-14
    return cell


def _eisenstein_reduced(cell: Cell, n: int, zr: np.ndarray) -> np.ndarray:
    """E_n on already-reduced points; rows summed centre-out in pairs.

    The symmetric +-m pairing makes the conditionally convergent n = 1 case
    cancel its constant row limits exactly.
    """
    m_rows = cell.row_count()
    w0 = zr / cell.omega1
    tau = cell.tau
    offsets = np.zeros(1 + 2 * m_rows, dtype=complex)
    m = np.arange(1, m_rows + 1)
    offsets[1::2] = m * tau
    offsets[2::2] = -m * tau
    rows = _row_values(n, w0[..., None] + offsets)
    total = rows[..., 0] + (rows[..., 1::2] + rows[..., 2::2]).sum(axis=-1)
    return total / cell.omega1 ** n


def eisenstein(cell: Cell, n: int, z):
    """E_n(z); scalar in, scalar out, ndarray in, ndarray out.

    n = 1 is quasi-periodic (jump -2*pi*i/omega1 across omega2), n >= 2 is
    doubly periodic.  Points within NEAR_SINGULARITY_RADIUS of a lattice
    point are refused; use eisenstein_regularized near z = 0.
    """
    if n < 1:
        raise DomainError(f"kernel order must be >= 1, got {n}")
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zr, _, k2 = cell.reduce(z)
    dist = cell.lattice_distance(zr)
    if np.any(dist < NEAR_SINGULARITY_RADIUS):
        bad = z[dist < NEAR_SINGULARITY_RADIUS][0]
        raise NearSingularityError(
            f"z = {bad} within {NEAR_SINGULARITY_RADIUS:g} of a lattice point"
        )
    val = _eisenstein_reduced(cell, n, zr)
    if n == 1:
        val = val - k2 * (_TWO_PI_I / cell.omega1)
    return complex(val[0]) if scalar else val


def lattice_sum(cell: Cell, n: int) -> complex:
    """Lattice sum S_n; exact 0 for odd n, cached per cell."""
    if n < 2:
        raise DomainError(f"lattice sum order must be >= 2, got {n}")
    if n % 2 == 1:
        return 0.0 + 0.0j
    cached = cell._sums.get(n)
    if cached is not None:
        return cached
    if n in (2, 4, 6):
        val = _lattice_sum_rows(cell, n)
    else:
        val = _lattice_sum_recurrence(cell, n)
    cell._sums[n] = val
    return val


def _lattice_sum_rows(cell: Cell, n: int) -> complex:
    """S_n from the row summation; the m2 = 0 row minus its pole is 2*zeta(n)."""
    m_rows = cell.row_count()
    tau = cell.tau
    total = 2.0 * float(_riemann_zeta(n)) + 0.0j
    for m in range(1, m_rows + 1):
        pair = _row_values(n, np.array([m * tau, -m * tau]))
        total += pair[0] + pair[1]
    return complex(total / cell.omega1 ** n)


def _lattice_sum_recurrence(cell: Cell, n: int) -> complex:
    """Even S_n for n >= 8 via the quadratic recurrence seeded by S_4, S_6."""
    for low in (4, 6):
        if low not in cell._sums:
            cell._sums[low] = _lattice_sum_rows(cell, low)
    for even in range(8, n + 1, 2):
        if even in cell._sums:
            continue
        k = even // 2
        acc = 0.0 + 0.0j
        for m in range(2, k - 1):
            acc += (
                (2 * m - 1)
                * (2 * (k - m) - 1)
                * cell._sums[2 * m]
                * cell._sums[2 * (k - m)]
            )
        cell._sums[even] = 3.0 * acc / ((2 * k + 1) * (2 * k - 1) * (k - 3))
    return cell._sums[n]


def regularized_taylor_coeff(cell: Cell, n: int, j: int) -> complex:
    """j-th Taylor coefficient of E_n-minus-pole at 0: (-1)^j C(n+j-1, j) S_{n+j}."""
    return ((-1) ** j) * math.comb(n + j - 1, j) * lattice_sum(cell, n + j)


def eisenstein_regularized(cell: Cell, n: int, z):
    """E_n(z) - z^(-n), analytic at z = 0 with value S_n.

    z is taken modulo the lattice (the pole subtracted is the one nearest
    to z).  Near the origin the Taylor series in lattice sums is used;
    elsewhere the direct difference is accurate.
    """
    if n < 2:
        raise DomainError(f"regularized kernel order must be >= 2, got {n}")
    scalar = np.isscalar(z) or np.asarray(z).ndim == 0
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    zr, _, _ = cell.reduce(z)
    # reduce() maps to the centered parallelogram whose nearest lattice point
    # may still be a corner; fold onto the genuinely nearest one.
    m = np.arange(-1, 2)
    shifts = (m[:, None] * cell.omega1 + m[None, :] * cell.omega2).ravel()
    idx = np.abs(zr[..., None] - shifts).argmin(axis=-1)
    zr = zr - shifts[idx]

    out = np.empty(zr.shape, dtype=complex)
    # inside the series region the Taylor expansion in lattice sums is both
    # fast and free of the pole-subtraction cancellation of the direct path
    switch = 0.35 * cell.min_period
    near = np.abs(zr) <= switch
    if np.any(near):
        zn = zr[near]
        acc = np.zeros(zn.shape, dtype=complex)
        power = np.ones(zn.shape, dtype=complex)
        for j in range(0, 141):
            coef = regularized_taylor_coeff(cell, n, j)
            term = coef * power
            acc += term
            power *= zn
            if j > 4 and np.all(np.abs(term) <= 1e-18 * (1.0 + np.abs(acc))):
                break
        out[near] = acc
    far = ~near
    if np.any(far):
        out[far] = _eisenstein_reduced(cell, n, zr[far]) - zr[far] ** (-n)
    return complex(out[0]) if scalar else out
