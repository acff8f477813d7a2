"""Fixed points of the renormalization map.

With equal weights the fixed-point equation ``renormalize(rho, M) = M``
reduces to the eigenproblem ``renormalize(1, M) = lam * M`` with
``rho = 1 / lam``, since the map is 1-homogeneous in the weights. It is
solved here by a normalized nonlinear power iteration.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from .network import (
    BoundaryValues,
    QuadraticForm,
    energy,
    harmonic_extension,
    laplacian_of,
    ResistorNetwork,
)
from .structure import CellSchema, renormalize, replicate

log = logging.getLogger(__name__)

SUPPORT_RTOL = 1e-9


class SolverError(RuntimeError):
    pass


class ConvergenceError(SolverError):
    def __init__(self, message: str, report: FixedPointReport | None = None):
        super().__init__(message)
        self.report = report


class SupportEscapeError(SolverError):
    pass


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-12
    max_iter: int = 100_000
    damping: float = 0.0
    symmetrize: bool = True
    normalization_entry: tuple | None = None  # (u, v); default: first base edge
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not 0.0 <= self.damping < 1.0:
            raise ValueError("damping must lie in [0, 1)")


@dataclass(frozen=True)
class FixedPointReport:
    lam: float
    rho: float
    resistance_growth: float
    conductances: QuadraticForm = field(repr=False)
    residual: float
    iterations: int
    spread: float = math.nan

    def class_conductances(self, schema: CellSchema) -> dict:
        """Mean conductance of each edge class of ``schema`` in the fixed point."""
        return class_values_of(schema, self.conductances)

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "rho": self.rho,
            "resistance_growth": self.resistance_growth,
            "conductances": [
                {"u": u, "v": v, "c": c} for (u, v), c in self.conductances.conductances().items()
            ],
            "residual": self.residual,
            "spread": self.spread,
            "iterations": self.iterations,
        }


def _support(schema: CellSchema) -> list:
    seen, out = set(), []
    for u, v, _ in schema.base_edges:
        key = frozenset((u, v))
        if key not in seen:
            seen.add(key)
            out.append((u, v))
    return out


def _edge_values(form: QuadraticForm, pairs) -> np.ndarray:
    return np.array([form.conductance(u, v) for u, v in pairs])


def _form_from_values(schema: CellSchema, pairs, values) -> QuadraticForm:
    return laplacian_of(ResistorNetwork(schema.v0, [(u, v, c) for (u, v), c in zip(pairs, values)]))


def _class_average(schema: CellSchema, pairs, values: np.ndarray) -> np.ndarray:
    pos = {frozenset(p): k for k, p in enumerate(pairs)}
    out = values.copy()
    for edges in schema.edge_classes.values():
        idx = [pos[frozenset(e)] for e in edges]
        out[idx] = values[idx].mean()
    return out


def random_start(schema: CellSchema, seed: int = 0) -> QuadraticForm:
    """Form with conductances drawn uniformly from [0.5, 2] on the base edges."""
    rng = np.random.default_rng(seed)
    pairs = _support(schema)
    return _form_from_values(schema, pairs, rng.uniform(0.5, 2.0, size=len(pairs)))


def power_iterate(
    schema: CellSchema,
    start: QuadraticForm | None = None,
    opts: SolverOptions | None = None,
) -> FixedPointReport:
    """Find ``lam`` and ``M`` with ``renormalize(1, M) = lam * M``.

    Each step maps ``M`` to ``renormalize(1, M)``, optionally averages every
    edge class (symmetry projection), rescales so the normalization edge has
    conductance 1, and blends with the previous iterate by ``damping``.
    Convergence is certified by the Collatz-Wielandt spread: the ratios
    ``renormalize(1, M)_e / M_e`` over all base edges ``e`` must agree to
    within ``tol``. ``lam`` is the geometric mean of the extreme ratios.
    """
    opts = opts or SolverOptions()
    if start is None:
        start = random_start(schema, opts.seed)
    pairs = _support(schema)
    support_keys = {frozenset(p) for p in pairs}
    norm_edge = opts.normalization_entry or pairs[0]
    norm_pos = next((k for k, p in enumerate(pairs) if frozenset(p) == frozenset(norm_edge)), None)
    if norm_pos is None:
        raise ValueError(f"normalization edge {norm_edge} is not a base edge")
    ones = np.ones(schema.n_cells)

    values = _edge_values(start.reorder(schema.v0), pairs)
    if np.any(values <= 0):
        raise ValueError("start form must have positive conductance on every base edge")
    off_support = {k: c for k, c in start.conductances().items() if frozenset(k) not in support_keys}
    if off_support:
        raise ValueError(f"start form has conductance outside the base edges: {off_support}")
    if opts.symmetrize:
        values = _class_average(schema, pairs, values)
    values = values / values[norm_pos]

    spread = math.inf
    lam = math.nan
    for it in range(1, opts.max_iter + 1):
        current = _form_from_values(schema, pairs, values)
        image = renormalize(schema, ones, current)
        escaped = {
            k: c for k, c in image.conductances().items()
            if frozenset(k) not in support_keys and c > SUPPORT_RTOL * image.scale
        }
        if escaped:
            raise SupportEscapeError(f"conductance outside the declared edges: {escaped}")
        new = _edge_values(image, pairs)
        ratios = new / values
        spread = float(ratios.max() - ratios.min())
        lam = math.sqrt(float(ratios.max() * ratios.min()))
        if spread < opts.tol:
            residual = float(np.max(np.abs(image.matrix - lam * current.matrix)))
            log.debug("converged after %d iterations, lambda=%r", it, lam)
            return FixedPointReport(lam, 1.0 / lam, 1.0 / lam, current, residual, it, spread)
        if opts.symmetrize:
            new = _class_average(schema, pairs, new)
        new = new / new[norm_pos]
        values = (1.0 - opts.damping) * new + opts.damping * values
        if it % 1000 == 0:
            log.info("iteration %d: spread %.3e, lambda %.15g", it, spread, lam)

    current = _form_from_values(schema, pairs, values)
    image = renormalize(schema, ones, current)
    residual = float(np.max(np.abs(image.matrix - lam * current.matrix)))
    partial = FixedPointReport(lam, 1.0 / lam, 1.0 / lam, current, residual, opts.max_iter, spread)
    raise ConvergenceError(
        f"not converged after {opts.max_iter} iterations (spread {spread:.3e})", partial
    )


@dataclass(frozen=True)
class ResidualReport:
    residual: float
    entries: dict  # (u, v) -> difference of the (u, v) matrix entries
    passed: bool


def check_fixed_point(schema: CellSchema, rho, form: QuadraticForm, tol: float) -> ResidualReport:
    form = form.reorder(schema.v0)
    diff = renormalize(schema, rho, form).matrix - form.matrix
    nodes = schema.v0
    entries = {(nodes[i], nodes[j]): float(diff[i, j]) for i in range(len(nodes)) for j in range(i, len(nodes))}
    residual = float(np.max(np.abs(diff)))
    return ResidualReport(residual, entries, residual <= tol)


def energy_ratio(schema: CellSchema, form: QuadraticForm, f) -> float:
    """``E_0(f) / E_1(harmonic extension of f)`` with unit cell weights."""
    if isinstance(f, BoundaryValues):
        f = f.assignments
    vals = [float(f[a]) for a in schema.v0]
    if max(vals) == min(vals):
        raise ValueError("energy ratio of a constant function is 0/0")
    fine = replicate(schema, np.ones(schema.n_cells), form)
    extended = harmonic_extension(fine, {a: f[a] for a in schema.v0})
    return energy(form, f) / energy(fine, extended)


def scalar_bisect(g: Callable[[float], float], bracket: tuple[float, float], tol: float = 1e-12) -> float:
    lo, hi = map(float, bracket)
    g_lo, g_hi = g(lo), g(hi)
    if g_lo == 0:
        return lo
    if g_hi == 0:
        return hi
    if (g_lo > 0) == (g_hi > 0):
        raise ValueError(f"no sign change on [{lo}, {hi}]: g = {g_lo}, {g_hi}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        g_mid = g(mid)
        if g_mid == 0:
            return mid
        if (g_mid > 0) == (g_lo > 0):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def class_values_of(schema: CellSchema, form: QuadraticForm) -> dict:
    """Read back per-class conductances (class mean) from a form on ``v0``."""
    return {
        cls: float(np.mean([form.conductance(u, v) for u, v in edges]))
        for cls, edges in schema.edge_classes.items()
    }
