import numpy as np
import pytest
from hypothesis import given, settings

from bertrand_lab import policy
from bertrand_lab.equilibrium import closed_form_equilibrium
from bertrand_lab.errors import InvalidInput
from bertrand_lab.policy import (cross_partial_G_cbarL, dGE_dcbarL, dGE_dR, golden_section_max, local_welfare,
                                 marginal_profit_G, optimize_guidance, optimize_guidance_golden)

from conftest import scenario_from_seed, seeds


def test_welfare_at_zero(s0):
    w = local_welfare(*s0, 0.0)
    assert w.W == pytest.approx(49 / 180) and w.conditions_ok


def test_welfare_continuous(s0):
    grid = np.linspace(0, 5, 1001)
    W = np.array([local_welfare(*s0, g).W for g in grid])
    # |W'| is bounded by |dpi/dG| + beta'(5) on this range
    bound = 1.0 + 0.5 * 5
    assert np.max(np.abs(np.diff(W))) <= bound * (grid[1] - grid[0])


def test_marginal_profit_decomposition(s0):
    m = marginal_profit_G(*s0, 0.0)
    assert m.total == pytest.approx(0.5444444444444444)
    assert m.price_channel == pytest.approx((7 / 15) / 0.8 * 1.15 / 3)
    assert m.cost_cut == pytest.approx(7 / 12 * 0.05)
    assert m.probability == pytest.approx(7 / 6 * 5 / 12 * 0.6)
    assert m.envelope == pytest.approx(m.total, abs=1e-12)


def test_envelope_against_brute_force(s0):
    p, f = s0
    G, h = 0.3, 1e-5
    fd = (closed_form_equilibrium(p.replace(G=G + h), f).pi_LE
          - closed_form_equilibrium(p.replace(G=G - h), f).pi_LE) / (2 * h)
    assert marginal_profit_G(p, f, G).total == pytest.approx(fd, rel=1e-5)


def test_degenerate_policy_has_no_effect(s0):
    p, f = s0
    m = marginal_profit_G(p, f.replace(P0=1.0, lambda_alpha=0.0), 0.7)
    assert (m.price_channel, m.cost_cut, m.probability, m.total) == (0.0, 0.0, 0.0, 0.0)
    assert cross_partial_G_cbarL(p, f.replace(P0=1.0, lambda_alpha=0.0), 0.7) == 0.0


def test_baseline_optimum(s0):
    opt = optimize_guidance(*s0)
    assert opt.interior and opt.G_E > 0
    assert opt.foc_residual <= 1e-8
    assert opt.rho < 0 and opt.soc_ok and not opt.multimodal
    d = opt.decomposition
    assert d.price_channel + d.cost_cut + d.probability == pytest.approx(d.total, abs=1e-8)
    grid = np.linspace(0, 50, 1000)
    assert all(opt.W_E >= local_welfare(*s0, g).W - 1e-15 for g in grid)
    assert opt.G_E == pytest.approx(0.6086260586, abs=1e-9)


def test_golden_agrees(s0):
    assert optimize_guidance_golden(*s0) == pytest.approx(optimize_guidance(*s0).G_E, abs=1e-6)
    x, fx = golden_section_max(lambda x: -(x - 0.3) ** 2, 0.0, 1.0, tol=1e-12)
    assert x == pytest.approx(0.3, abs=1e-9) and fx == pytest.approx(0.0, abs=1e-15)


def test_boundaries(s0):
    p, f = s0
    hi = optimize_guidance(p, f.replace(b_beta=1e-30))
    assert hi.boundary == "upper" and hi.G_E == 50.0
    lo = optimize_guidance(p, f.replace(b_beta=1e6))
    assert lo.G_E == pytest.approx(0.0, abs=1e-6)
    flat = optimize_guidance(p, f.replace(P0=1.0, lambda_alpha=0.0))
    assert flat.boundary == "lower" and flat.G_E == 0.0
    with pytest.raises(InvalidInput):
        optimize_guidance(p, f, G_max=float("inf"))


def test_multimodal_scan(s0, monkeypatch):
    # synthetic welfare with local maxima at G = 1 and G = 4, the second higher
    def W(G):
        return -((G - 1) ** 2) * ((G - 4) ** 2) + 0.1 * G

    def dW(G):
        return -2 * (G - 1) * (G - 4) ** 2 - 2 * (G - 1) ** 2 * (G - 4) + 0.1

    monkeypatch.setattr(policy, "foc_gap", lambda p, f, G: dW(G))
    monkeypatch.setattr(policy, "_W", lambda p, f, G: W(G))
    monkeypatch.setattr(policy, "local_welfare", lambda p, f, G: policy.WelfareValue(W(G), True))
    opt = optimize_guidance(*s0, G_max=5.0)
    assert opt.multimodal and len(opt.roots) == 2
    assert opt.G_E == pytest.approx(max(opt.roots))


def test_cross_partial_baseline(s0):
    p, f = s0
    v = cross_partial_G_cbarL(p, f, 0.0)
    assert v == pytest.approx(-0.09722222222222222)
    # mixed finite difference, forward in G because G = 0 is the domain edge
    h = 1e-4

    def piL(G, c):
        return closed_form_equilibrium(p.replace(G=G, c_bar_L=c), f).pi_LE

    def dG(c):
        return (-3 * piL(0, c) + 4 * piL(h, c) - piL(2 * h, c)) / (2 * h)

    mixed = (dG(0.1 + h) - dG(0.1 - h)) / (2 * h)
    assert mixed == pytest.approx(v, rel=1e-4)


def test_prop4_baseline(s0):
    s = dGE_dcbarL(*s0)
    assert s.applicable and s.value < 0 and s.cross_partial < 0
    assert s.rel_gap <= 1e-3
    p, f = s0
    ge = [optimize_guidance(p.replace(c_bar_L=c), f).G_E for c in np.linspace(0, 0.5, 26)]
    assert all(b < a for a, b in zip(ge, ge[1:]))


def test_dGE_dR(s0):
    s = dGE_dR(*s0)
    assert s.applicable and np.isfinite(s.value) and s.rel_gap <= 1e-3
    p, f = s0
    na = dGE_dR(p, f.replace(P0=1.0, lambda_alpha=0.0))
    assert not na.applicable and na.rel_gap is None
    assert not dGE_dcbarL(p, f.replace(P0=1.0, lambda_alpha=0.0)).applicable


@settings(max_examples=15)
@given(seeds)
def test_random_policy_properties(seed):
    sc = scenario_from_seed(seed)
    p, f = sc.prims, sc.funcs
    assert marginal_profit_G(p, f).total > 0
    opt = optimize_guidance(p, f)
    assert opt.foc_residual <= 1e-8 or not opt.interior
    if opt.interior and opt.rho < 0:
        assert cross_partial_G_cbarL(p, f, opt.G_E) < 0
        s = dGE_dcbarL(p, f)
        assert s.value < 0
