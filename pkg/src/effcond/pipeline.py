"""Monte Carlo ensemble orchestration and reporting.

Trials are deterministic: trial i of a run with master seed s uses the
derived seed s XOR splitmix64(i), so identical descriptors reproduce
byte-identical results and per-trial tables.  Aggregation is a sequential
reduction ordered by trial index (fixed floating-point summation order); a
failed placement aborts the whole run rather than silently resampling.

Output layout of a run directory: manifest.json (descriptor, per-trial
seeds, versions, timestamps), results.json and trials.csv (both free of
timestamps and byte-reproducible).
"""

from __future__ import annotations

import datetime
import math
import platform
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DomainError, GenerationError
from .esums import as_multi_index, esum, esum_nn, required_indices
from .geometry import EnsembleDescriptor, rsa_generate, trial_seed
from .serialize import dump_csv, dump_json
from .series import (
    ClusterCoefficients,
    cluster_coeffs,
    contrast_tail,
    lambda_cluster,
    lambda_contrast,
    lambda_dilute,
    lambda_pade,
)
from .solver import SolverParams, shape_factor, solve_contrast

DEFAULT_CONTRAST_NMAX = 12


@dataclass(frozen=True)
class QuantitySpec:
    """One requested per-trial quantity, parsed from its CLI token."""

    token: str
    kind: str  # esum | lambda_solver | lambda_series | zeta1
    index: tuple = ()
    rho: float = 0.0
    order: int = 6
    n_max: int = DEFAULT_CONTRAST_NMAX

    def columns(self) -> list:
        if self.kind == "esum":
            return [f"{self.token}_re", f"{self.token}_im"]
        if self.kind in ("lambda_solver", "lambda_series"):
            return [f"{self.token}_lambda11", f"{self.token}_lambda12"]
        return [self.token]


def parse_quantity(token: str) -> QuantitySpec:
    """Parse tokens like e2, e332, e3-3-2, lambda-solver:0.8,
    lambda-series:0.8:6, zeta1:12."""
    token = token.strip()
    if token.startswith("e") and len(token) > 1 and token[1].isdigit():
        body = token[1:]
        entries = (
            tuple(int(p) for p in body.split("-"))
            if "-" in body
            else tuple(int(c) for c in body)
        )
        idx = as_multi_index(entries)
        return QuantitySpec(token=f"e{''.join(map(str, idx.entries))}",
                            kind="esum", index=idx.entries)
    parts = token.split(":")
    head = parts[0]
    if head == "lambda-solver":
        if len(parts) != 2:
            raise DomainError(f"expected lambda-solver:RHO, got {token!r}")
        return QuantitySpec(token=token, kind="lambda_solver", rho=float(parts[1]))
    if head == "lambda-series":
        if len(parts) not in (2, 3):
            raise DomainError(f"expected lambda-series:RHO[:ORDER], got {token!r}")
        order = int(parts[2]) if len(parts) == 3 else 6
        return QuantitySpec(
            token=f"lambda-series:{parts[1]}:{order}",
            kind="lambda_series",
            rho=float(parts[1]),
            order=order,
        )
    if head == "zeta1":
        if len(parts) > 2:
            raise DomainError(f"expected zeta1[:NMAX], got {token!r}")
        n_max = int(parts[1]) if len(parts) == 2 else DEFAULT_CONTRAST_NMAX
        return QuantitySpec(token=f"zeta1:{n_max}", kind="zeta1", n_max=n_max)
    raise DomainError(f"unknown quantity token {token!r}")


@dataclass
class EnsembleStats:
    """Means and standard errors of the requested quantities."""

    descriptor: EnsembleDescriptor
    columns: list
    stats: dict  # column -> {"mean": float, "stderr": float | None}
    extras: dict = dc_field(default_factory=dict)
    trial_seeds: list = dc_field(default_factory=list)
    per_trial: list = dc_field(default_factory=list)  # rows aligned to columns

    @property
    def trials(self) -> int:
        return self.descriptor.trials

    def results_dict(self) -> dict:
        return {
            "descriptor": _descriptor_dict(self.descriptor),
            "trials": self.trials,
            "stats": self.stats,
            "extras": self.extras,
        }


def _descriptor_dict(desc: EnsembleDescriptor) -> dict:
    return {
        "n": desc.n,
        "nu": desc.nu,
        "trials": desc.trials,
        "seed": desc.seed,
        "cell": {
            "omega1": desc.cell_omega1,
            "omega2": [complex(desc.cell_omega2).real, complex(desc.cell_omega2).imag],
        },
        "exclusion_factor": desc.exclusion_factor,
        "generator": "rsa",
    }


def _mean_stderr(values: np.ndarray):
    mean = float(values.mean())
    if len(values) < 2:
        return mean, None
    return mean, float(values.std(ddof=1) / math.sqrt(len(values)))


def run_ensemble(desc: EnsembleDescriptor, quantities) -> EnsembleStats:
    """Generate the ensemble and average the requested quantities.

    `quantities` is a sequence of tokens or QuantitySpec instances.  Any
    trial whose placement fails aborts the run (the error names the trial).
    """
    specs = [q if isinstance(q, QuantitySpec) else parse_quantity(q) for q in quantities]
    if not specs:
        raise DomainError("no quantities requested")
    columns: list[str] = []
    for spec in specs:
        columns.extend(spec.columns())

    solver_params = SolverParams()
    series_sums: dict[str, dict] = {
        s.token: {idx.entries: 0.0 + 0.0j for idx in required_indices(s.order)}
        for s in specs
        if s.kind == "lambda_series"
    }

    seeds = [trial_seed(desc.seed, i) for i in range(desc.trials)]
    rows = []
    for i, seed in enumerate(seeds):
        try:
            config = rsa_generate(desc, seed=seed)
        except GenerationError as exc:
            raise GenerationError(
                f"trial {i} failed: {exc}", placed=exc.placed
            ) from exc
        row = []
        for spec in specs:
            if spec.kind == "esum":
                val = esum(config, spec.index)
                row.extend([val.real, val.imag])
            elif spec.kind == "lambda_solver":
                res = solve_contrast(config, spec.rho, solver_params)
                row.extend([res.lambda11, res.lambda12])
            elif spec.kind == "lambda_series":
                table = {
                    idx: esum(config, idx) for idx in required_indices(spec.order)
                }
                coeffs = cluster_coeffs(table, spec.rho, spec.order)
                eff = lambda_cluster(spec.rho, desc.nu, coeffs)
                row.extend([eff.lambda11, eff.lambda12])
                acc = series_sums[spec.token]
                for idx, val in table.items():
                    acc[as_multi_index(idx).entries] += val
            elif spec.kind == "zeta1":
                table = {n: esum_nn(config, n) for n in range(2, spec.n_max + 1)}
                tail, _ = contrast_tail(desc.nu, table, spec.n_max)
                row.append(desc.nu ** 2 / (1.0 - desc.nu) * (tail.real - 1.0))
        rows.append(row)

    data = np.asarray(rows, dtype=float)
    stats = {}
    for j, col in enumerate(columns):
        mean, stderr = _mean_stderr(data[:, j])
        stats[col] = {"mean": mean, "stderr": stderr}

    extras = {}
    for spec in specs:
        if spec.kind in ("lambda_solver", "lambda_series"):
            s11 = stats[f"{spec.token}_lambda11"]
            s12 = stats[f"{spec.token}_lambda12"]
            extras[f"{spec.token}_lambda_e"] = s11["mean"]
            if s12["stderr"] is not None:
                extras[f"{spec.token}_isotropy_ok"] = bool(
                    abs(s12["mean"]) < 3.0 * s12["stderr"] + 1e-15
                )
        if spec.kind == "lambda_series":
            # assemble-after-averaging reduction, reported for comparison
            # with the default average-of-lambda route
            mean_table = {
                entries: val / desc.trials
                for entries, val in series_sums[spec.token].items()
            }
            coeffs = cluster_coeffs(
                mean_table, spec.rho, spec.order, provenance="ensemble"
            )
            eff = lambda_cluster(spec.rho, desc.nu, coeffs)
            extras[f"{spec.token}_from_mean_esums"] = eff.lambda11

    return EnsembleStats(
        descriptor=desc,
        columns=columns,
        stats=stats,
        extras=extras,
        trial_seeds=[int(s) for s in seeds],
        per_trial=rows,
    )


def write_run(outdir, stats: EnsembleStats, quantities=None) -> dict:
    """Write manifest.json, results.json and trials.csv into outdir.

    results.json and trials.csv carry no timestamps and are byte-identical
    across reruns of the same descriptor.
    """
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.json"
    trials_path = out / "trials.csv"
    manifest_path = out / "manifest.json"

    results_path.write_text(dump_json(stats.results_dict()))
    header = ["trial", "seed"] + list(stats.columns)
    rows = [
        [i, stats.trial_seeds[i]] + [float(v) for v in row]
        for i, row in enumerate(stats.per_trial)
    ]
    trials_path.write_text(dump_csv(header, rows))

    manifest = {
        "descriptor": _descriptor_dict(stats.descriptor),
        "quantities": list(quantities or []),
        "trial_seeds": stats.trial_seeds,
        "package_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": {
            "results": results_path.name,
            "trials": trials_path.name,
        },
    }
    manifest_path.write_text(dump_json(manifest))
    return {
        "manifest": manifest_path,
        "results": results_path,
        "trials": trials_path,
    }


def compare_methods(
    desc: EnsembleDescriptor,
    rho: float,
    order: int = 6,
    n_max: int = DEFAULT_CONTRAST_NMAX,
) -> list:
    """Ensemble-averaged effective conductivity by every implemented method.

    Returns one row per method with the difference from the solver value
    and the expected error scale of the method.
    """
    solver_params = SolverParams()
    indices = required_indices(order) if order >= 1 else []
    sums = {"solver": 0.0 + 0.0j, "cluster": 0.0 + 0.0j, "contrast": 0.0 + 0.0j}
    seeds = [trial_seed(desc.seed, i) for i in range(desc.trials)]
    for i, seed in enumerate(seeds):
        try:
            config = rsa_generate(desc, seed=seed)
        except GenerationError as exc:
            raise GenerationError(f"trial {i} failed: {exc}", placed=exc.placed) from exc
        res = solve_contrast(config, rho, solver_params)
        sums["solver"] += complex(res.lambda11, -res.lambda12)
        if rho == 0.0:
            coeffs = ClusterCoefficients(order=0, values=(), rho=0.0)
        else:
            table = {idx: esum(config, idx) for idx in indices}
            coeffs = cluster_coeffs(table, rho, order)
        eff = lambda_cluster(rho, desc.nu, coeffs)
        sums["cluster"] += complex(eff.lambda11, -eff.lambda12)
        nn_table = {n: esum_nn(config, n) for n in range(2, n_max + 1)}
        eff = lambda_contrast(desc.nu, nn_table, rho, n_max, e2=esum(config, (2,)))
        sums["contrast"] += complex(eff.lambda11, -eff.lambda12)

    means = {k: v / desc.trials for k, v in sums.items()}
    alpha = shape_factor(desc.cell(), desc.radius)
    dilute = lambda_dilute(desc.nu, rho, alpha)
    pade = lambda_pade(desc.nu, rho, alpha)
    solver_value = means["solver"].real

    scales = {
        "solver": ("converged", 0.0),
        "cluster": (f"nu^{order + 1}", desc.nu ** (order + 1)),
        "contrast": ("rho^4", abs(rho) ** 4),
        "dilute": ("nu^2", desc.nu ** 2),
        "pade": ("nu^3", desc.nu ** 3),
    }
    rows = []
    for method, value in [
        ("solver", means["solver"].real),
        ("cluster", means["cluster"].real),
        ("contrast", means["contrast"].real),
        ("dilute", dilute.lambda11),
        ("pade", pade.lambda11),
    ]:
        label, scale = scales[method]
        rows.append(
            {
                "method": method,
                "lambda_e": value,
                "diff_solver": value - solver_value,
                "expected_scale": label,
                "scale_value": scale,
            }
        )
    return rows


def compare_csv(rows) -> str:
    header = ["method", "lambda_e", "diff_solver", "expected_scale", "scale_value"]
    return dump_csv(header, [[r[h] for h in header] for r in rows])
