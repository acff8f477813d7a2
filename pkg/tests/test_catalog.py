import math

import numpy as np
import pytest

from fractal_forms import catalog
from fractal_forms.catalog import FRACTALINA_SOLUTION as SOL
from fractal_forms.catalog import FractalinaParams, PillowParams
from fractal_forms.network import effective_resistance
from fractal_forms.solver import power_iterate

K_EXACT = (3 + math.sqrt(41)) / 16
R1_EXACT = (-1 + math.sqrt(41)) / 4


def test_catalog_sizes():
    sizes = {name: (len(s.v0), len(s.v1), s.n_cells) for name, s in ((n, catalog.builtin(n)) for n in catalog.BUILTINS)}
    assert sizes == {"gasket": (3, 6, 3), "fractalina": (5, 12, 3), "pillow": (4, 6, 2)}


def test_unknown_builtin():
    with pytest.raises(KeyError):
        catalog.builtin("carpet")


def test_constants_match_closed_forms():
    assert catalog.FRACTALINA_K == pytest.approx(0.5876952648395531, abs=1e-15)
    assert catalog.FRACTALINA_R1 == pytest.approx(1.3507810593582121, abs=1e-15)
    # k solves 8k^2 - 3k - 1 = 0 and then 2 k R1 = k + 1
    assert 8 * K_EXACT**2 - 3 * K_EXACT - 1 == pytest.approx(0, abs=1e-15)
    assert 2 * K_EXACT * R1_EXACT == pytest.approx(K_EXACT + 1, abs=1e-15)


# --- fractalina ----------------------------------------------------------------------------


def test_params_reject_nonpositive():
    with pytest.raises(ValueError):
        FractalinaParams(0.0, 1.0)
    with pytest.raises(ValueError):
        FractalinaParams(0.5, -1.0)


def test_form_at_hourglass():
    form = catalog.fractalina_form(FractalinaParams(1.0, 1.0))
    assert sorted(form.conductances().values()) == [1.0] * 6


def test_form_at_solution():
    form = catalog.fractalina_form(SOL)
    assert form.conductance("Q1", "Q2") == pytest.approx(1 / (K_EXACT * R1_EXACT), rel=1e-12)
    assert form.conductance("Q1", "P3") == pytest.approx(1 / K_EXACT, rel=1e-12)
    assert form.conductance("P1", "P3") == 1.0


def test_level1_y():
    a, b, g = catalog.fractalina_level1_y(SOL)
    # quoted to 7 decimals, truncated
    for got, shown in ((a, 0.2369142), (b, 0.4738284), (g, 0.4031242)):
        assert 0 <= got - shown < 1e-7
    assert b == pytest.approx(2 * a, rel=1e-12)
    assert catalog.fractalina_level1_y(FractalinaParams(1.0, 1.0)) == pytest.approx((1 / 3, 2 / 3, 1 / 3))


@pytest.mark.parametrize("k, r1", [(1.0, 1.0), (K_EXACT, R1_EXACT), (0.7, 2.3)])
def test_level1_y_two_routes(k, r1):
    p = FractalinaParams(k, r1)
    assert catalog.fractalina_level1_y(p) == pytest.approx(catalog.fractalina_level1_y_by_reduction(p), rel=1e-12)


def test_level1_y_matches_schur():
    # the three Y legs form a tree metric on P1, P2, Q1
    a, b, g = catalog.fractalina_level1_y(SOL)
    form = catalog.fractalina_form(SOL)
    assert effective_resistance(form, "P1", "P2") == pytest.approx(2 * g, rel=1e-12)
    assert effective_resistance(form, "Q1", "Q2") == pytest.approx(2 * a, rel=1e-12)
    assert effective_resistance(form, "P1", "Q1") == pytest.approx(a + b + g, rel=1e-12)


def test_fractalina_solve():
    k, r1 = catalog.fractalina_solve()
    assert k == pytest.approx(K_EXACT, abs=1e-10)
    assert r1 == pytest.approx(R1_EXACT, abs=1e-9)
    e1, e2 = catalog.fractalina_ratio_mismatch(FractalinaParams(k, r1))
    assert abs(e1) < 1e-9 and abs(e2) < 1e-9


def test_primed_scale_by_k():
    a, b, g = catalog.fractalina_level1_y(SOL)
    ap, bp, gp = catalog.fractalina_primed(SOL)
    assert (ap + bp + gp) * K_EXACT == pytest.approx(a + b + g, rel=1e-9)
    assert 2 * gp * K_EXACT == pytest.approx(2 * g, rel=1e-9)


def test_reduction_agrees_with_schur():
    q, _ = catalog.fractalina_reduction(SOL)
    ap, bp, gp = catalog.fractalina_primed(SOL)
    assert q["alpha'"] == pytest.approx(ap, rel=1e-12)
    assert q["beta'"] == pytest.approx(bp, rel=1e-12)
    assert q["gamma'"] == pytest.approx(gp, rel=1e-12)


def test_identity_audit():
    q, _ = catalog.fractalina_reduction(SOL)
    a, b, g = catalog.fractalina_level1_y(SOL)
    assert q["alpha'"] == pytest.approx(g, abs=1e-9)
    assert q["theta"] == pytest.approx(g, abs=1e-9)
    assert q["delta"] == pytest.approx(b, abs=1e-9)
    assert q["eta"] == pytest.approx(b, abs=1e-9)
    assert q["epsilon"] == pytest.approx(2 * a, abs=1e-9)
    assert q["iota"] == pytest.approx(2 * g, abs=1e-9)
    assert q["zeta"] == pytest.approx(a, abs=1e-9)


def test_fractalina_route_agreement(fractalina):
    report = power_iterate(fractalina)
    assert report.lam == pytest.approx(catalog.fractalina_solve()[0], abs=1e-10)


# --- pillow ------------------------------------------------------------------------------------


def test_pillow_potentials():
    p = catalog.PILLOW_SOLUTION
    assert p.x == pytest.approx(0.3149802625, abs=1e-10)
    assert p.y == pytest.approx(0.1850197375, abs=1e-10)
    assert p.x == pytest.approx(2 ** (-5 / 3), abs=1e-12)


def test_pillow_ratios_at_solution():
    assert catalog.pillow_config_ratios(catalog.PILLOW_SOLUTION) == pytest.approx((2 ** (1 / 3),) * 3, abs=1e-12)


def test_pillow_ratios_unit():
    _, r2, r3 = catalog.pillow_config_ratios(PillowParams.from_conductances(1.0, 1.0, 1.0))
    assert r2 == pytest.approx(1.0)
    assert r3 == pytest.approx(2.0)


def test_pillow_solve(pillow):
    params, rho = catalog.pillow_solve()
    assert rho == pytest.approx(2 ** (1 / 3), abs=1e-10)
    assert params.C1 == 1.0
    assert params.C2 == pytest.approx(2.0536215758789736, abs=1e-9)
    assert params.C3 == pytest.approx(0.7937005259840998, abs=1e-9)
    assert power_iterate(pillow).lam == pytest.approx(1 / rho, abs=1e-10)


def test_pillow_mismatch_brackets_root():
    lo, hi = catalog.PILLOW_BRACKET
    assert np.sign(catalog.pillow_mismatch(lo)) != np.sign(catalog.pillow_mismatch(hi))
