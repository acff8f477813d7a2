"""Acceptance table: the reproduced constants plus randomized property suites.

Each ``criterion_*`` function returns a :class:`Check`. ``run_all`` is what
``fractal-forms verify`` executes; the test-suite runs the same functions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import catalog
from .catalog import (
    FRACTALINA_K,
    FRACTALINA_R1,
    FRACTALINA_SOLUTION,
    PILLOW_C2,
    PILLOW_C3,
    PILLOW_CONFIGS,
    PILLOW_RHO,
    FractalinaParams,
)
from .network import (
    QuadraticForm,
    ResistorNetwork,
    delta_to_y,
    effective_resistance,
    eliminate_series_node,
    energy,
    harmonic_extension,
    laplacian_of,
    parallel_reduce,
    resistance_matrix,
    trace_to,
    y_to_delta,
)
from .solver import SolverOptions, energy_ratio, power_iterate, random_start
from .structure import build_level, renormalize


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.criterion}. {self.name}: {self.detail}"


def _tol(default: float, override: float | None) -> float:
    return default if override is None else override


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# --- randomized networks (shared with the tests) ---------------------------


def random_network(rng: np.random.Generator, n_min: int = 3, n_max: int = 12, extra: float = 0.6) -> ResistorNetwork:
    """Connected network: random spanning tree plus extra (possibly parallel) edges."""
    n = int(rng.integers(n_min, n_max + 1))
    nodes = [f"n{i}" for i in range(n)]
    edges = []
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges.append((nodes[i], nodes[j], float(np.exp(rng.uniform(-2.0, 2.0)))))
    for _ in range(int(extra * n)):
        i, j = rng.choice(n, size=2, replace=False)
        edges.append((nodes[i], nodes[j], float(np.exp(rng.uniform(-2.0, 2.0)))))
    return ResistorNetwork(nodes, edges)


def pinv_resistances(form: QuadraticForm, nodes) -> np.ndarray:
    """Effective resistances from the Laplacian pseudo-inverse (independent of the Schur code)."""
    lp = np.linalg.pinv(form.matrix)
    idx = [form.index(p) for p in nodes]
    d = np.diag(lp)[idx]
    sub = lp[np.ix_(idx, idx)]
    return d[:, None] + d[None, :] - 2.0 * sub


def _random_reduction_step(net: ResistorNetwork, rng: np.random.Generator, fresh) -> tuple[ResistorNetwork, str]:
    moves = ["parallel"]
    series = [p for p in net.nodes if len(net.neighbors(p)) == 2]
    stars = [p for p in net.nodes if len(net.neighbors(p)) == 3]
    triangles = []
    for p in net.nodes:
        nb = sorted(net.neighbors(p), key=str)
        for q, r in itertools.combinations(nb, 2):
            if str(p) < str(q) < str(r) and net.conductance(q, r) > 0:
                triangles.append((p, q, r))
    if series and len(net.nodes) > 3:
        moves.append("series")
    if stars and len(net.nodes) > 4:
        moves.append("y_to_delta")
    if triangles:
        moves.append("delta_to_y")
    move = moves[int(rng.integers(len(moves)))]
    if move == "parallel":
        return parallel_reduce(net), move
    if move == "series":
        return eliminate_series_node(net, series[int(rng.integers(len(series)))]), move
    if move == "y_to_delta":
        return y_to_delta(net, stars[int(rng.integers(len(stars)))]), move
    return delta_to_y(net, triangles[int(rng.integers(len(triangles)))], next(fresh)), move


def reduction_invariance(steps: int = 1000, episode: int = 50, seed: int = 11, rtol: float = 1e-9) -> tuple[bool, float, dict]:
    rng = np.random.default_rng(seed)
    fresh = (f"y{i}" for i in itertools.count())
    worst, counts, done = 0.0, {}, 0
    while done < steps:
        net = random_network(rng, 6, 10, extra=1.2)
        original = set(net.nodes)
        ref_nodes = list(net.nodes)
        ref = pinv_resistances(laplacian_of(net), ref_nodes)
        for _ in range(episode):
            net, move = _random_reduction_step(net, rng, fresh)
            counts[move] = counts.get(move, 0) + 1
            done += 1
            alive = [i for i, p in enumerate(ref_nodes) if p in net.nodes and p in original]
            now = pinv_resistances(laplacian_of(net), [ref_nodes[i] for i in alive])
            expect = ref[np.ix_(alive, alive)]
            off = ~np.eye(len(alive), dtype=bool)
            if off.any():
                worst = max(worst, float(np.max(np.abs(now - expect)[off] / expect[off])))
    return worst <= rtol, worst, counts


def tower_property(count: int = 100, seed: int = 12, rtol: float = 1e-9) -> tuple[bool, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        form = laplacian_of(random_network(rng, 3, 12))
        n = len(form)
        b1 = list(rng.choice(form.nodes, size=int(rng.integers(2, n + 1)), replace=False))
        b2 = list(rng.choice(b1, size=int(rng.integers(1, len(b1) + 1)), replace=False))
        direct = trace_to(form, b2).matrix
        nested = trace_to(trace_to(form, b1), b2).matrix
        worst = max(worst, float(np.max(np.abs(direct - nested))) / form.scale)
    return worst <= rtol, worst


def variational_equality(count: int = 100, seed: int = 13, rtol: float = 1e-10) -> tuple[bool, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        form = laplacian_of(random_network(rng, 3, 12))
        n = len(form)
        bnd = list(rng.choice(form.nodes, size=int(rng.integers(2, n + 1)), replace=False))
        bv = {p: float(rng.normal()) for p in bnd}
        e_ext = energy(form, harmonic_extension(form, bv))
        e_tr = energy(trace_to(form, bnd), bv)
        worst = max(worst, _rel(e_ext, e_tr))
    return worst <= rtol, worst


def metric_property(count: int = 50, seed: int = 14, atol_rel: float = 1e-12) -> tuple[bool, float]:
    """Worst violation of symmetry or the triangle inequality, relative to the largest resistance."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        form = laplacian_of(random_network(rng, 3, 10))
        r = resistance_matrix(form)
        scale = float(r.max())
        worst = max(worst, float(np.max(np.abs(r - r.T))) / scale)
        # slack[i, j, k] = r[i, j] + r[j, k] - r[i, k]
        slack = r[:, :, None] + r[None, :, :] - r[:, None, :]
        worst = max(worst, float(max(0.0, -slack.min())) / scale)
    return worst <= atol_rel, worst


def homogeneity(seed: int = 15, rtol: float = 1e-12) -> tuple[bool, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in catalog.BUILTINS:
        schema = catalog.builtin(name)
        for _ in range(5):
            form = random_start(schema, int(rng.integers(1 << 31)))
            rho = rng.uniform(0.5, 2.0, size=schema.n_cells)
            base = renormalize(schema, rho, form)
            for c in (2.0, 0.5, 3.0):
                scaled_rho = renormalize(schema, c * rho, form).matrix
                scaled_m = renormalize(schema, rho, form.scaled(c)).matrix
                err = max(np.max(np.abs(scaled_rho - c * base.matrix)), np.max(np.abs(scaled_m - c * base.matrix)))
                worst = max(worst, float(err) / (c * base.scale))
    return worst <= rtol, worst


def ratio_universality(count: int = 20, seed: int = 16, rtol: float = 1e-9) -> tuple[bool, float]:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name in catalog.BUILTINS:
        schema = catalog.builtin(name)
        rep = power_iterate(schema, None, SolverOptions(seed=int(rng.integers(1 << 31))))
        for _ in range(count):
            f = {a: float(rng.normal()) for a in schema.v0}
            worst = max(worst, _rel(energy_ratio(schema, rep.conductances, f), 1.0 / rep.lam))
    return worst <= rtol, worst


# --- the criteria ------------------------------------------------------------


def criterion_1(tol: float | None = None) -> Check:
    k, r1 = catalog.fractalina_solve()
    ek, er = abs(k - FRACTALINA_K), abs(r1 - FRACTALINA_R1)
    ok = ek <= _tol(1e-10, tol) and er <= _tol(1e-9, tol)
    return Check(1, "fractalina closed-form route", ok, f"k={k!r} (err {ek:.2e}), R1={r1!r} (err {er:.2e})")


def criterion_2(tol: float | None = None) -> Check:
    schema = catalog.fractalina_schema()
    start = catalog.fractalina_form(FractalinaParams(1.0, 1.0))
    rep = power_iterate(schema, start, SolverOptions())
    m = rep.conductances
    top_bottom = max(
        _rel(m.conductance(t1, t2), m.conductance(b1, b2) / rep.lam)
        for (t1, t2), (b1, b2) in [(("Q1", "Q2"), ("P1", "P2")), (("Q1", "P3"), ("P1", "P3")), (("Q2", "P3"), ("P2", "P3"))]
    )
    err = abs(rep.lam - FRACTALINA_K)
    ok = err <= _tol(1e-8, tol) and rep.residual < _tol(1e-10, tol) and top_bottom <= _tol(1e-6, tol)
    return Check(
        2, "fractalina power iteration", ok,
        f"lambda={rep.lam!r} (err {err:.2e}), residual {rep.residual:.2e}, top/bottom rel err {top_bottom:.2e}",
    )


def criterion_3(tol: float | None = None) -> Check:
    schema = catalog.fractalina_schema()
    coarse = build_level(schema, None, 0)
    fine = build_level(schema, None, 1)
    alpha, beta, gamma = catalog.fractalina_level1_y(FRACTALINA_SOLUTION)
    errs, parts = [], []
    for (p, q), closed in [(("P1", "P2"), 2 * gamma), (("P1", "Q1"), alpha + beta + gamma)]:
        r0 = effective_resistance(coarse.form(), coarse.boundary[p], coarse.boundary[q])
        r1 = effective_resistance(fine.form(), fine.boundary[p], fine.boundary[q])
        errs.append(_rel(r1 * FRACTALINA_K, r0))
        errs.append(_rel(r0, closed))
        parts.append(f"R({p},{q}) {r0:.7f} -> {r1:.7f}")
    expected = [0.8062484, 1.1138668]
    shown = [
        effective_resistance(coarse.form(), "P1", "P2"),
        effective_resistance(coarse.form(), "P1", "Q1"),
    ]
    # the quoted values are truncated to 7 decimals
    printed_ok = all(0.0 <= a - b < 1e-7 for a, b in zip(shown, expected))
    ok = max(errs) <= _tol(1e-9, tol) and printed_ok
    return Check(3, "fractalina resistance ratios", ok, ", ".join(parts) + f", worst rel err {max(errs):.2e}")


def criterion_4(tol: float | None = None) -> Check:
    p, rho = catalog.pillow_solve()
    x_exact = 2.0 ** (-5.0 / 3.0)
    errs = {
        "rho": (abs(rho - PILLOW_RHO), _tol(1e-10, tol)),
        "C2": (abs(p.C2 - PILLOW_C2), _tol(1e-9, tol)),
        "C3": (abs(p.C3 - PILLOW_C3), _tol(1e-9, tol)),
        "x": (abs(catalog.PILLOW_SOLUTION.x - x_exact), _tol(1e-12, tol)),
        "y": (abs(catalog.PILLOW_SOLUTION.y - (0.5 - x_exact)), _tol(1e-12, tol)),
        "x(solved)": (abs(p.x - x_exact), _tol(1e-9, tol)),
    }
    ok = all(e <= t for e, t in errs.values())
    detail = f"rho={rho!r}, C2={p.C2!r}, C3={p.C3!r}; " + ", ".join(f"{k} err {e:.1e}" for k, (e, _) in errs.items())
    return Check(4, "pillow closed-form route", ok, detail)


def criterion_5(tol: float | None = None) -> Check:
    schema = catalog.pillow_schema()
    closed = catalog.pillow_config_ratios(catalog.PILLOW_SOLUTION)
    generic = [energy_ratio(schema, schema.base_form(), PILLOW_CONFIGS[f]) for f in ("f1", "f2", "f3")]
    worst = max(abs(r - PILLOW_RHO) for r in [*closed, *generic])
    ok = worst <= _tol(1e-12, tol)
    return Check(5, "pillow configuration ratios", ok, f"closed {closed}, generic {generic}, worst err {worst:.1e}")


def criterion_6(tol: float | None = None) -> Check:
    schema = catalog.gasket_schema()
    unit = schema.base_form()
    schur = renormalize(schema, 1.0, unit)
    schur_err = float(np.max(np.abs(schur.matrix - 0.6 * unit.matrix)))
    rep = power_iterate(schema, random_start(schema, 3), SolverOptions(symmetrize=False))
    pi_err = abs(rep.lam - 0.6)
    growth = []
    for n in range(7):
        g = build_level(schema, None, n)
        r = effective_resistance(g.form(), g.boundary["p1"], g.boundary["p2"])
        growth.append(_rel(r, (2.0 / 3.0) * (5.0 / 3.0) ** n))
    ok = schur_err <= _tol(1e-10, tol) and pi_err <= _tol(1e-10, tol) and max(growth) <= _tol(1e-8, tol)
    return Check(
        6, "gasket baseline", ok,
        f"Schur err {schur_err:.1e}, power iteration lambda={rep.lam!r}, growth law worst rel err {max(growth):.1e} (n<=6)",
    )


def criterion_7(tol: float | None = None) -> Check:
    results = {
        "reduction invariance": reduction_invariance(rtol=_tol(1e-9, tol))[:2],
        "trace tower": tower_property(rtol=_tol(1e-9, tol)),
        "variational equality": variational_equality(rtol=_tol(1e-10, tol)),
        "triangle inequality": metric_property(atol_rel=_tol(1e-12, tol)),
        "homogeneity": homogeneity(rtol=_tol(1e-12, tol)),
        "ratio universality": ratio_universality(rtol=_tol(1e-9, tol)),
    }
    ok = all(passed for passed, _ in results.values())
    detail = ", ".join(f"{k} {'ok' if p else 'FAILED'} ({w:.1e})" for k, (p, w) in results.items())
    return Check(7, "property suites", ok, detail)


def criterion_8(tol: float | None = None) -> Check:
    p = FRACTALINA_SOLUTION
    alpha, beta, gamma = catalog.fractalina_level1_y(p)
    q, reduced = catalog.fractalina_reduction(p)
    a_s, b_s, g_s = catalog.fractalina_primed(p)
    # the reduced network must be equivalent to the refined one
    boundary = ["P1", "P2", "Q1", "Q2"]
    schur = pinv_resistances(trace_to(catalog.fractalina_fine_form(p), boundary), boundary)
    red = pinv_resistances(laplacian_of(reduced), boundary)
    equiv = float(np.max(np.abs(schur - red)))
    checks = {
        "alpha'=gamma": (a_s, gamma),
        "theta=gamma": (q["theta"], gamma),
        "delta=beta": (q["delta"], beta),
        "eta=beta": (q["eta"], beta),
        "epsilon=2alpha": (q["epsilon"], 2 * alpha),
        "iota=2gamma": (q["iota"], 2 * gamma),
        "beta'(reduction)=beta'(Schur)": (q["beta'"], b_s),
        "gamma'(reduction)=gamma'(Schur)": (q["gamma'"], g_s),
    }
    errs = {k: abs(a - b) for k, (a, b) in checks.items()}
    t = _tol(1e-9, tol)
    ok = all(e <= t for e in errs.values()) and equiv <= t
    worst = max(errs, key=errs.get)
    return Check(8, "fractalina identity audit", ok, f"worst {worst} err {errs[worst]:.1e}, reduction/Schur equivalence err {equiv:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7, criterion_8]


def run_all(tol: float | None = None) -> list[Check]:
    out = []
    for crit in CRITERIA:
        try:
            out.append(crit(tol))
        except Exception as exc:  # a crash is a failed criterion, not an abort
            n = int(crit.__name__.rsplit("_", 1)[1])
            out.append(Check(n, crit.__name__, False, f"raised {type(exc).__name__}: {exc}"))
    return out
