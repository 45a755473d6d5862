"""Closed-form effective-conductivity series.

Implements the concentration (cluster) series with coefficients A_1..A_6
built from structural sums, the contrast series through third order in the
contrast parameter, the Torquato-Milton parameter zeta_1, the third-order
contrast-expansion coefficient, and the dilute / Pade(1,1) estimates with a
shape factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DependencyError, DomainError
from .esums import MAX_SERIES_ORDER, as_multi_index

#: A_n = pi^(-n) * sum of (prefactor * rho^power * e_index) per order n.
COEFFICIENT_TABLE = {
    1: [(1, 1, (2,))],
    2: [(1, 2, (2, 2))],
    3: [(-2, 2, (3, 3)), (1, 3, (2, 2, 2))],
    4: [
        (3, 2, (4, 4)),
        (-2, 3, (3, 3, 2)),
        (-2, 3, (2, 3, 3)),
        (1, 4, (2, 2, 2, 2)),
    ],
    5: [
        (-4, 2, (5, 5)),
        (3, 3, (4, 4, 2)),
        (6, 3, (3, 4, 3)),
        (3, 3, (2, 4, 4)),
        (-2, 4, (3, 3, 2, 2)),
        (-2, 4, (2, 3, 3, 2)),
        (-2, 4, (2, 2, 3, 3)),
        (1, 5, (2, 2, 2, 2, 2)),
    ],
    6: [
        (5, 2, (6, 6)),
        (-4, 3, (2, 5, 5)),
        (-12, 3, (3, 5, 4)),
        (-12, 3, (4, 5, 3)),
        (-4, 3, (5, 5, 2)),
        (3, 4, (2, 2, 4, 4)),
        (6, 4, (2, 3, 4, 3)),
        (4, 4, (3, 3, 3, 3)),
        (3, 4, (2, 4, 4, 2)),
        (6, 4, (3, 4, 3, 2)),
        (3, 4, (4, 4, 2, 2)),
        (-2, 5, (2, 2, 2, 3, 3)),
        (-2, 5, (2, 2, 3, 3, 2)),
        (-2, 5, (2, 3, 3, 2, 2)),
        (-2, 5, (3, 3, 2, 2, 2)),
        (1, 6, (2, 2, 2, 2, 2, 2)),
    ],
}


@dataclass(frozen=True)
class ClusterCoefficients:
    """Series coefficients A_1..A_J for a given contrast value."""

    order: int
    values: tuple  # complex A_1..A_order
    rho: float
    provenance: str = "per-config"  # or "ensemble"


@dataclass(frozen=True)
class EffectiveResult:
    """Effective-conductivity estimate with its method tag and diagnostics."""

    lambda11: float
    lambda12: float
    method: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def lambda_e(self) -> float:
        """Isotropic scalar reading (the 11 component)."""
        return self.lambda11

    def to_dict(self) -> dict:
        out = {
            "method": self.method,
            "lambda11": self.lambda11,
            "lambda12": self.lambda12,
            "lambda_e": self.lambda_e,
        }
        out.update(self.diagnostics)
        return out


def _from_complex(value: complex, method: str, **diagnostics) -> EffectiveResult:
    # the series produce lambda11 - i*lambda12
    return EffectiveResult(
        lambda11=float(value.real),
        lambda12=float(-value.imag),
        method=method,
        diagnostics=diagnostics,
    )


def cluster_coeffs(
    esum_values: dict, rho: float, order: int, provenance: str = "per-config"
) -> ClusterCoefficients:
    """A_1..A_order from a map of structural sums.

    Raises DependencyError naming the first missing index.
    """
    if not 1 <= order <= MAX_SERIES_ORDER:
        raise DomainError(
            f"series order must be in 1..{MAX_SERIES_ORDER}, got {order}"
        )
    lookup = {as_multi_index(idx).entries: complex(v) for idx, v in esum_values.items()}
    values = []
    for n in range(1, order + 1):
        acc = 0.0 + 0.0j
        for prefactor, rho_power, entries in COEFFICIENT_TABLE[n]:
            if entries not in lookup:
                label = "-".join(str(m) for m in entries)
                raise DependencyError(
                    f"structural sum e_{label} required for A_{n} is missing",
                    missing=label,
                )
            acc += prefactor * (rho ** rho_power) * lookup[entries]
        values.append(acc / math.pi ** n)
    return ClusterCoefficients(
        order=order, values=tuple(values), rho=float(rho), provenance=provenance
    )


def lambda_cluster(rho: float, nu: float, coeffs: ClusterCoefficients) -> EffectiveResult:
    """Concentration series: 1 + 2*rho*nu*(1 + A_1 nu + ... + A_J nu^J)."""
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu = {nu:g} outside (0, 1)")
    series = 1.0 + 0.0j
    power = 1.0
    for a_n in coeffs.values:
        power *= nu
        series += a_n * power
    value = 1.0 + 2.0 * rho * nu * series
    return _from_complex(value, "cluster", order=coeffs.order)


def contrast_tail(nu: float, e_nn_table: dict, n_max: int):
    """Diagonal-sum tail sum_n (-1)^n (n-1) e_nn nu^(n-2)/pi^n and its
    last retained term."""
    tail = 0.0 + 0.0j
    last_term = 0.0 + 0.0j
    for n in range(2, n_max + 1):
        if n not in e_nn_table:
            raise DependencyError(
                f"e_{n}{n} required for the contrast tail is missing",
                missing=f"{n}-{n}",
            )
        last_term = (
            ((-1) ** n) * (n - 1) * complex(e_nn_table[n]) * nu ** (n - 2) / math.pi ** n
        )
        tail += last_term
    return tail, last_term


def lambda_contrast(
    nu: float,
    e_nn_table: dict,
    rho: float,
    n_max: int = 12,
    e2: complex | None = None,
) -> EffectiveResult:
    """Contrast series through third order in rho.

    1 + 2 rho nu + 2 rho^2 nu^2 (e_2/pi) + 2 rho^3 nu^3 * tail(nu), the tail
    built from the diagonal sums e_nn in e_nn_table and truncated at n_max
    with the last retained term reported.  The per-configuration form passes
    the first-order sum e_2 explicitly; when e2 is omitted the isotropic
    ensemble form is used (ensemble-averaged e_2 equals pi, so the rho^2
    coefficient is exactly 2 nu^2).
    """
    if n_max < 2:
        raise DomainError(f"n_max must be >= 2, got {n_max}")
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu = {nu:g} outside (0, 1)")
    second = 1.0 + 0.0j if e2 is None else complex(e2) / math.pi
    tail, last_term = contrast_tail(nu, e_nn_table, n_max)
    value = (
        1.0
        + 2.0 * rho * nu
        + 2.0 * rho ** 2 * nu ** 2 * second
        + 2.0 * rho ** 3 * nu ** 3 * tail
    )
    return _from_complex(
        value,
        "contrast",
        n_max=n_max,
        isotropic=e2 is None,
        last_tail_term=abs(2.0 * rho ** 3 * nu ** 3 * last_term),
    )


def zeta1(nu: float, ehat_nn_table: dict, n_max: int = 12) -> float:
    """Torquato-Milton parameter from isotropic ensemble averages.

    zeta_1 = nu^2/(1-nu) * [sum_n (-1)^n (n-1) ehat_nn nu^(n-2)/pi^n - 1];
    the imaginary part of the bracket is statistical noise and is dropped
    after an internal sanity bound.
    """
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu = {nu:g} outside (0, 1)")
    tail, _ = contrast_tail(nu, ehat_nn_table, n_max)
    bracket = tail - 1.0
    if abs(bracket.imag) > 1e-6 + 0.05 * abs(bracket):
        raise DomainError(
            f"ehat_nn table is not isotropic: Im(bracket) = {bracket.imag:g}"
        )
    return nu ** 2 / (1.0 - nu) * bracket.real


def a13(nu: float, ehat_nn_table: dict, n_max: int = 12) -> float:
    """Third-order contrast-expansion coefficient, nu^3 * (tail - 1).

    Algebraically equal to zeta1 * nu * (1 - nu); implemented through that
    identity.
    """
    return zeta1(nu, ehat_nn_table, n_max) * nu * (1.0 - nu)


def lambda_dilute(nu: float, rho: float, alpha: float = 1.0) -> EffectiveResult:
    """Leading-order estimate 1 + 2*rho*nu*alpha."""
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu = {nu:g} outside (0, 1)")
    return _from_complex(
        complex(1.0 + 2.0 * rho * nu * alpha), "dilute", alpha=alpha
    )


def lambda_pade(nu: float, rho: float, alpha: float = 1.0) -> EffectiveResult:
    """Pade (1,1) resummation (1 + rho nu alpha)/(1 - rho nu alpha)."""
    if not 0.0 < nu < 1.0:
        raise DomainError(f"nu = {nu:g} outside (0, 1)")
    x = rho * nu * alpha
    if abs(1.0 - x) < 1e-12:
        raise DomainError(f"Pade pole: rho*nu*alpha = {x:g}")
    return _from_complex(complex((1.0 + x) / (1.0 - x)), "pade", alpha=alpha)
