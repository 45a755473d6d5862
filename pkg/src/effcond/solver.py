"""Direct solution of the disk-composite functional equations.

The complex flux inside each disk is carried as a truncated Taylor
polynomial around the disk center.  One application of the interaction
operator W maps the monomial c*(z - a_m)^l to
conj(c) * r^(2l+2) * E_{l+2}(z - a_m) summed over lattice translates (the
self translate regularized), re-expanded around each target center a_k with
coefficient of (z - a_k)^j equal to

    (-1)^j * C(l+j+1, j) * E_{l+j+2}(a_k - a_m),

again with coincident arguments regularized to lattice sums.  W is
antilinear; with a real contrast rho the fixed-point iteration
psi <- rho*W(psi) + 1 from psi = 1 produces exactly the partial sums of the
contrast power series.  The effective conductivity follows from the mean of
the center values, lambda11 - i*lambda12 = 1 + 2*rho*nu*mean_k psi_k(a_k).

A solve is sequential across iterations; distinct solves share nothing and
may run concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DomainError, KernelOrderError
from .esums import kernel_matrix
from .geometry import DiskConfiguration
from .lattice import Cell
from .series import EffectiveResult

DEFAULT_DEGREE = 14


@dataclass(frozen=True)
class TaylorField:
    """Per-disk Taylor coefficients c[k, l] of the flux around each center."""

    config: DiskConfiguration
    coeffs: np.ndarray  # complex, shape (N, L+1)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[1] - 1

    def center_values(self) -> np.ndarray:
        return self.coeffs[:, 0]

    def __call__(self, z):
        """Evaluate the polynomial attached to the disk nearest to z."""
        z = complex(z)
        k = int(np.abs(self.config.centers - z).argmin())
        return complex(np.polyval(self.coeffs[k, ::-1], z - self.config.centers[k]))


def constant_field(config: DiskConfiguration, degree: int) -> TaylorField:
    coeffs = np.zeros((config.n_disks, degree + 1), dtype=complex)
    coeffs[:, 0] = 1.0
    return TaylorField(config=config, coeffs=coeffs)


@dataclass(frozen=True)
class SolverParams:
    """Iteration controls.

    mode "tolerance" stops on the coefficient change in the disk-scaled max
    norm; mode "order" truncates exactly at the given power of the contrast
    parameter.  When degree is None it defaults to 2*order + 2 in order
    mode and to DEFAULT_DEGREE otherwise.
    """

    degree: int | None = None
    mode: str = "tolerance"
    tolerance: float = 1e-12
    max_iterations: int = 400
    order: int | None = None
    max_kernel_order: int | None = None
    dump_path: str | None = None  # per-iteration field dump (debugging)

    def __post_init__(self):
        if self.mode not in ("tolerance", "order"):
            raise DomainError(f"unknown solver mode {self.mode!r}")
        if self.mode == "order" and (self.order is None or self.order < 0):
            raise DomainError("order mode needs a nonnegative contrast order")
        if self.mode == "tolerance" and not self.tolerance > 0.0:
            raise DomainError("tolerance must be positive")
        if self.degree is not None and self.degree < 0:
            raise DomainError("Taylor degree must be >= 0")

    def resolved_degree(self) -> int:
        if self.degree is not None:
            return self.degree
        if self.mode == "order":
            return 2 * self.order + 2
        return DEFAULT_DEGREE


@dataclass(frozen=True)
class SolveResult:
    field: TaylorField
    lambda11: float
    lambda12: float
    iterations: int
    residual: float
    residual_history: list
    converged: bool
    truncation_tail: float

    def effective(self) -> EffectiveResult:
        return EffectiveResult(
            lambda11=self.lambda11,
            lambda12=self.lambda12,
            method="solver",
            diagnostics={
                "iterations": self.iterations,
                "residual": self.residual,
                "truncation_tail": self.truncation_tail,
            },
        )


class _Workspace:
    """Expansion operator for one (configuration, degree) pair."""

    def __init__(self, config: DiskConfiguration, degree: int, max_kernel_order=None):
        n_disks = config.n_disks
        lp1 = degree + 1
        needed = 2 * degree + 3  # l + j + 2 plus one order for the tail row
        if max_kernel_order is not None and needed > max_kernel_order:
            raise KernelOrderError(
                f"operator needs kernels up to order {needed} but the cache "
                f"is capped at {max_kernel_order}; raise the cap or lower "
                f"the Taylor degree"
            )
        kernels = np.empty((2 * degree + 2, n_disks, n_disks), dtype=complex)
        for n in range(2, needed + 1):
            kernels[n - 2] = kernel_matrix(config, n)
        rpow = config.radius ** (2 * np.arange(lp1) + 2)
        op = np.empty((n_disks, lp1, n_disks, lp1), dtype=complex)
        tail = np.empty((n_disks, n_disks, lp1), dtype=complex)
        for j in range(lp1 + 1):
            sign = -1.0 if j % 2 else 1.0
            for l in range(lp1):
                block = sign * math.comb(l + j + 1, j) * rpow[l] * kernels[l + j]
                if j <= degree:
                    op[:, j, :, l] = block
                else:
                    tail[:, :, l] = block
        self.config = config
        self.degree = degree
        self.op4 = op
        self.op = op.reshape(n_disks * lp1, n_disks * lp1)
        self.tail = tail.reshape(n_disks, n_disks * lp1)

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        flat = self.op @ np.conj(coeffs.reshape(-1))
        return flat.reshape(coeffs.shape)

    def apply_degree(self, coeffs: np.ndarray, l: int) -> np.ndarray:
        """Image of the degree-l slice only (grade bookkeeping helper)."""
        out = np.einsum("kjm,m->kj", self.op4[:, :, :, l], np.conj(coeffs[:, l]))
        return out

    def tail_norm(self, coeffs: np.ndarray) -> float:
        """Dropped degree-(L+1) mass of one W application, disk-scaled."""
        dropped = np.abs(self.tail @ np.conj(coeffs.reshape(-1))).max()
        return float(dropped) * self.config.radius ** (self.degree + 1)


def _workspace(config: DiskConfiguration, degree: int, max_kernel_order=None) -> _Workspace:
    key = (degree, max_kernel_order)
    ws = config._solver_cache.get(key)
    if ws is None:
        ws = _Workspace(config, degree, max_kernel_order)
        config._solver_cache[key] = ws
    return ws


def apply_W(config: DiskConfiguration, field: TaylorField) -> TaylorField:
    """One application of the interaction operator (antilinear, no contrast)."""
    if field.config is not config:
        raise DomainError("field is attached to a different configuration")
    ws = _workspace(config, field.degree)
    return TaylorField(config=config, coeffs=ws.apply(field.coeffs))


def _lambda_pair(config: DiskConfiguration, rho: float, coeffs: np.ndarray):
    value = 1.0 + 2.0 * rho * config.nu * complex(np.mean(coeffs[:, 0]))
    return float(value.real), float(-value.imag)


def _dump_record(iteration: int, coeffs: np.ndarray) -> dict:
    return {
        "iteration": iteration,
        "coeffs": [
            [[c.real, c.imag] for c in row] for row in coeffs
        ],
    }


def solve_contrast(
    config: DiskConfiguration, rho: float, params: SolverParams | None = None
) -> SolveResult:
    """Successive approximations psi <- rho*W(psi) + 1 from psi = 1.

    Tolerance mode iterates until the coefficient change, measured in the
    disk-scaled max norm, drops below the tolerance, and raises
    ConvergenceError (with the residual history) when the iteration budget
    runs out; order mode truncates exactly at rho^order.
    """
    if not -1.0 <= rho <= 1.0:
        raise DomainError(f"contrast rho = {rho:g} outside [-1, 1]")
    params = params or SolverParams()
    degree = params.resolved_degree()
    ws = _workspace(config, degree, params.max_kernel_order)
    # unit external flux: the additive normalization constant of the field
    # problem is exactly one
    ones = constant_field(config, degree).coeffs
    history: list[float] = []
    dump: list[dict] | None = [] if params.dump_path else None
    # residuals measured in the disk-scaled norm max |c_l| r^l (the monomial
    # contribution on the disk boundary); near-contact configurations have
    # raw high-degree coefficients far above the fp floor of an absolute norm
    scale = config.radius ** np.arange(degree + 1)

    def scaled_max(delta):
        return float((np.abs(delta) * scale).max())

    if params.mode == "order":
        g = ones.copy()
        psi = ones.copy()
        power = 1.0
        for _ in range(params.order):
            g = ws.apply(g)
            power *= rho
            step = power * g
            psi = psi + step
            history.append(scaled_max(step))
            if dump is not None:
                dump.append(_dump_record(len(history), psi))
        iterations = params.order
        residual = history[-1] if history else 0.0
        converged = True
    else:
        psi = ones.copy()
        iterations = 0
        converged = False
        residual = math.inf
        while iterations < params.max_iterations:
            new = ones + rho * ws.apply(psi)
            residual = scaled_max(new - psi)
            history.append(residual)
            psi = new
            iterations += 1
            if dump is not None:
                dump.append(_dump_record(iterations, psi))
            if residual <= params.tolerance:
                converged = True
                break
        if not converged:
            raise ConvergenceError(
                f"no convergence to {params.tolerance:g} within "
                f"{params.max_iterations} iterations (last residual "
                f"{residual:g})",
                residual_history=history,
            )

    if dump is not None:
        from .serialize import dump_json

        with open(params.dump_path, "w") as fh:
            fh.write(dump_json(dump))

    lam11, lam12 = _lambda_pair(config, rho, psi)
    return SolveResult(
        field=TaylorField(config=config, coeffs=psi),
        lambda11=lam11,
        lambda12=lam12,
        iterations=iterations,
        residual=residual,
        residual_history=history,
        converged=converged,
        truncation_tail=abs(rho) * ws.tail_norm(psi),
    )


def _field_from_sources(
    config: DiskConfiguration, weights: np.ndarray, base_order: int, degree: int
) -> np.ndarray:
    """Expand sum_k X_k E_n(z - a_k) around every center to the given degree."""
    coeffs = np.empty((config.n_disks, degree + 1), dtype=complex)
    for j in range(degree + 1):
        kern = kernel_matrix(config, base_order + j)
        coeffs[:, j] = ((-1) ** j) * math.comb(base_order + j - 1, j) * (kern @ weights)
    return coeffs


def cluster_parts(config: DiskConfiguration, degree: int) -> dict:
    """Low-order interaction blocks keyed by (contrast power, r^2 grade).

    Grade-n blocks carry their r^(2n) weight.  The exact low-order fields
    are psi0 = 1, psi1 = rho*B[1,1]/r^2, psi2 = rho^2*B[2,2]/r^4 and
    psi3 = (rho^3*B[3,3] + rho^2*B[2,3])/r^6.
    """
    n_disks = config.n_disks
    r2 = config.radius ** 2
    m2 = kernel_matrix(config, 2)
    m3 = kernel_matrix(config, 3)
    ones = np.ones(n_disks, dtype=complex)
    parts = {(0, 0): constant_field(config, degree).coeffs}
    parts[(1, 1)] = r2 * _field_from_sources(config, ones, 2, degree)
    x2 = np.conj(m2) @ ones  # X_k = sum_k1 conj(E2(a_k - a_k1))
    parts[(2, 2)] = r2 ** 2 * _field_from_sources(config, x2, 2, degree)
    # chain: X_k2 = sum_{k,k1} E2(a_k - a_k1) conj(E2(a_k1 - a_k2))
    col = m2.sum(axis=0)
    x3 = col @ np.conj(m2)
    parts[(3, 3)] = r2 ** 3 * _field_from_sources(config, x3, 2, degree)
    x3b = np.conj(m3) @ ones
    parts[(2, 3)] = -2.0 * r2 ** 3 * _field_from_sources(config, x3b, 3, degree)
    return parts


def cluster_terms_exact(
    config: DiskConfiguration, rho: float, upto: int = 3, degree: int | None = None
) -> list:
    """Exact low-order fields psi^(0)..psi^(upto) of the r^2 grading.

    Only the printed low orders are available; upto > 3 is a domain error.
    The fields are the r-free factors (psi = sum_n psi^(n) r^(2n)).
    """
    if not 0 <= upto <= 3:
        raise DomainError(f"exact fields available for orders 0..3, got {upto}")
    degree = DEFAULT_DEGREE if degree is None else degree
    parts = cluster_parts(config, degree)
    r2 = config.radius ** 2
    fields = [parts[(0, 0)]]
    if upto >= 1:
        fields.append(rho * parts[(1, 1)] / r2)
    if upto >= 2:
        fields.append(rho ** 2 * parts[(2, 2)] / r2 ** 2)
    if upto >= 3:
        fields.append((rho ** 3 * parts[(3, 3)] + rho ** 2 * parts[(2, 3)]) / r2 ** 3)
    return [TaylorField(config=config, coeffs=c) for c in fields[: upto + 1]]


def contrast_cluster_grades(
    config: DiskConfiguration, p_max: int, grade_max: int, degree: int
) -> dict:
    """Solver iterates W^p(1) split by r^2 grade.

    Returns {(p, grade): coeff array} for p <= p_max, grade <= grade_max;
    each W application to a degree-l slice raises the grade by l + 1.  The
    grade-resolved blocks match cluster_parts exactly.
    """
    ws = _workspace(config, degree)
    state = {0: constant_field(config, degree).coeffs}
    out = {(0, 0): state[0]}
    for p in range(1, p_max + 1):
        nxt: dict[int, np.ndarray] = {}
        for grade, coeffs in state.items():
            for l in range(degree + 1):
                g_new = grade + l + 1
                if g_new > grade_max:
                    continue
                if not np.any(coeffs[:, l]):
                    continue
                img = ws.apply_degree(coeffs, l)
                if g_new in nxt:
                    nxt[g_new] += img
                else:
                    nxt[g_new] = img
        state = nxt
        for grade, coeffs in state.items():
            out[(p, grade)] = coeffs
    return out


def shape_factor(cell: Cell, r: float, rho: float = 1.0) -> float:
    """Dilute-limit shape factor of one inclusion (1 for disks).

    Solves the one-disk cell problem at radii r and r/2 and removes the
    first-order periodic-image term by Richardson extrapolation toward
    zero concentration; the result is contrast-independent to O(nu^2).
    """
    nu = math.pi * r ** 2
    if not 0.0 < nu < 1.0:
        raise DomainError(f"single-disk concentration {nu:g} outside (0, 1)")
    params = SolverParams(degree=12, tolerance=1e-13)
    alphas = []
    for radius in (r, r / 2.0):
        config = DiskConfiguration(cell=cell, centers=np.array([0j]), radius=radius)
        res = solve_contrast(config, rho, params)
        value = complex(res.lambda11, -res.lambda12)
        alphas.append((value - 1.0) / (2.0 * rho * config.nu))
    alpha0 = (4.0 * alphas[1] - alphas[0]) / 3.0
    return float(alpha0.real)
