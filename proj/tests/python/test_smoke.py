import math

import numpy as np
import pytest

import lortz


def test_c_star_closed_form():
    s = lortz.LatticeSpec()
    k = math.sqrt(2.0)
    # l_kappa(c) = g + sigma k^2 - c^2 kappa1^2 coth(k d)/k = 0
    expected = math.sqrt((1.0 + k * k) * k * math.tanh(k))
    assert lortz.c_star(s) == pytest.approx(expected, rel=1e-13)
    assert abs(lortz.ell(1.0, 1.0, lortz.c_star(s), s)) < 1e-12


def test_kernel_scan_is_simple():
    r = lortz.kernel_scan(lortz.LatticeSpec(), 10)
    assert r["simple_kernel"]
    assert sorted((m["m1"], m["m2"]) for m in r["solutions"]) == [(-1, -1), (-1, 1), (1, -1), (1, 1)]


def test_tori_regimes():
    K = math.log(1.0 + math.sqrt(2.0))
    no = lortz.classify(lortz.LatticeSpec(K * math.sqrt(3) / 2, K / 2, 1.0))
    yes = lortz.classify(lortz.LatticeSpec(K / math.sqrt(2), K / math.sqrt(2), 1.0))
    assert not no["tori_exist"]
    assert yes["tori_exist"]
    assert lortz.tori_conditions(K / math.sqrt(2), K / math.sqrt(2), 1.0)["kappa"]


def test_level_curve_is_a_graph():
    s = lortz.LatticeSpec()
    c = lortz.classify(s)
    lo, hi = c["I_ring"]
    x2, psi, kind = lortz.level_surface_q2(s, 0.5 * (lo + hi), 41)
    assert kind == "torus"
    assert x2.shape == psi.shape == (41,)
    assert np.all((psi > -s.d) & (psi < 0))


def test_expand_and_branch_shapes():
    s = lortz.LatticeSpec(n1=12, n2=12, nz=13)
    e = lortz.expand(s, 0.01)
    assert e["eta1"].shape == (12, 12)
    assert e["omega2"].shape == (3, 13, 12, 12)
    assert e["U2"] > 0
    br = lortz.continue_branch(s, 0.01, [1e-3])
    assert len(br) == 1
    b = br[0]
    assert b["residuals"]["max"] < 1e-8
    eta = b["eta"] - 1e-3 * e["eta1"] - 1e-6 * e["eta2"]
    assert np.abs(eta).max() < 1e-7


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        lortz.LatticeSpec(n1=7)
    with pytest.raises(lortz.OutOfRegimeError):
        lortz.continue_branch(lortz.LatticeSpec(n1=12, n2=12, nz=13), 0.01, [0.5])
    with pytest.raises(ValueError):
        lortz.parse_config("nonsense: 1")


def test_config_round_trip():
    text = lortz.dump_config("lattice: {kappa1: 0.7}\nt_list: [0.001, 0.002]\n")
    assert lortz.dump_config(text) == text
