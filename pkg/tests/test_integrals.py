from fractions import Fraction

import numpy as np
import pytest

from magflow.brackets import dirac_bracket, identity_test
from magflow.integrals import (
    ambient_catalog,
    InconsistentRanks,
    NotApplicable,
    ambient_dimension_check,
    build_catalog,
    commuting_chain,
    jacobian_rank,
    liouville_set,
    mu_observable,
    nc_dimension_check,
    pendulum_catalog,
    random_points,
)
from magflow.phasecore import PhaseState, SystemParams, sample_constrained_point
from magflow.poly import PhaseVars

X0 = [1, 0, 0, 0, 0, 1, 0, 0]


def test_catalog_example_values():
    cat = build_catalog(SystemParams(4), (1.0, 0.0))
    assert cat["H"](X0) == Fraction(1, 2)
    assert cat["J"](X0) == -3
    assert cat["Phi_12"](X0) == Fraction(3, 2)
    assert mu_observable(PhaseVars(4), (1.0, 0.0), 1, 1)(X0) == -2


def test_catalog_contents():
    cat5 = build_catalog(SystemParams(5), (2.0, 2.0))
    assert "Psi1_12;34" in cat5 and "Psi2_12;34" in cat5
    cat3 = build_catalog(SystemParams(3), (1.0,))
    assert [k for k in cat3 if k.startswith("Phi")] == ["Phi_12"]
    cat6 = build_catalog(SystemParams(6), (1.0, 0.0, 0.0))
    assert {"Phi_35", "Phi_36", "Phi_46"} <= set(cat6)
    assert "mu" in build_catalog(SystemParams(4), (1.0, 1.0))
    assert "I" in build_catalog(SystemParams(6), (1.0, 1.0, 1.0))


def test_near_equal_blocks_warn():
    cat = build_catalog(SystemParams(4), (1.0, 1.0 + 1e-9))
    assert cat.warnings
    assert "Psi1_12;34" not in cat
    assert "Psi1_12;34" in build_catalog(SystemParams(4), (1.0, 1.0 + 1e-14))


@pytest.mark.parametrize(
    "n,blocks",
    [(3, (1.0,)), (4, (1.0, 1.0)), (5, (2.0, 2.0)), (6, (1.0, 0.0, 0.0)), (6, (1.0, 1.0, 1.0)), (7, (3.0, 1.0, 0.0))],
)
def test_catalog_entries_are_first_integrals(n, blocks):
    cat = build_catalog(SystemParams(n, 2.0, 0.5), blocks)
    verdicts = cat.verify(trials=64)
    assert all(v.holds for v in verdicts.values()), [k for k, v in verdicts.items() if not v.holds]


def test_so_chain():
    cat = build_catalog(SystemParams(6), (1.0, 0.0, 0.0))
    chain = commuting_chain(cat, "so_chain")
    assert len(chain) == 2
    assert commuting_chain(build_catalog(SystemParams(4), (1.0, 0.0)), "so_chain") == []


def test_u_chain():
    cat = build_catalog(SystemParams(8), (1.0,) * 4)
    assert len(commuting_chain(cat, "u_chain")) == 3


def test_chains_not_applicable():
    with pytest.raises(NotApplicable):
        commuting_chain(build_catalog(SystemParams(6), (1.0, 2.0, 3.0)), "so_chain")
    with pytest.raises(NotApplicable):
        commuting_chain(build_catalog(SystemParams(6), (1.0, 2.0, 3.0)), "u_chain")
    with pytest.raises(ValueError):
        commuting_chain(build_catalog(SystemParams(4), (1.0, 1.0)), "bogus")


@pytest.mark.parametrize("n,blocks", [(6, (1.0, 0.0, 0.0)), (8, (1.0,) * 4), (7, (2.0, 2.0, 0.0))])
def test_liouville_sets_commute(n, blocks):
    params = SystemParams(n)
    cat = build_catalog(params, blocks)
    lv = liouville_set(cat)
    names = list(lv)
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            v = identity_test(dirac_bracket(lv[a], lv[b], cat.field, params), "constrained")
            assert v.holds, (a, b)


def test_jacobian_rank_examples():
    pt = sample_constrained_point(5, seed=1)
    cat = build_catalog(SystemParams(5), (1.0, 2.0))
    assert jacobian_rank(cat.select(["H", "J", "Phi_12", "Phi_34"]), pt) == 4
    assert jacobian_rank([cat["H"]], pt) == 1
    cat6 = build_catalog(SystemParams(6), (1.0, 1.0, 1.0))
    assert jacobian_rank(cat6.select(["H", "J", "Phi_12", "Phi_34", "Phi_56"]), sample_constrained_point(6, seed=2)) == 4


def test_n4_equal_blocks_four_independent():
    cat = build_catalog(SystemParams(4), (1.0, 1.0))
    obs = cat.select(["H", "Phi_12", "Phi_34", "Psi1_12;34", "Psi2_12;34"])
    ranks = [jacobian_rank(obs, p) for p in random_points(4, 20)]
    assert max(ranks) == 4


@pytest.mark.parametrize(
    "n,blocks,names,expected",
    [
        (5, (1.0, 1.0), ["H", "J", "Phi_12", "Phi_34", "Psi1_12;34", "Psi2_12;34"], (5, 3)),
        (5, (1.0, 2.0), ["H", "J", "Phi_12", "Phi_34"], (4, 4)),
    ],
)
def test_dimension_certificates(n, blocks, names, expected):
    params = SystemParams(n)
    cat = build_catalog(params, blocks)
    cert = nc_dimension_check(cat.select(names), random_points(n, 20), cat.field, params)
    assert (cert.ddim, cert.dind) == expected
    assert cert.sum_ok
    assert len(cert.jacobian_spectrum) == len(names)
    assert cert.as_dict()["sum"] == 2 * (n - 1)


def test_dimension_check_needs_twenty_points():
    params = SystemParams(4)
    cat = build_catalog(params, (1.0, 1.0))
    with pytest.raises(ValueError):
        nc_dimension_check([cat["H"]], random_points(4, 5), cat.field, params)


def test_inconsistent_ranks():
    params = SystemParams(4)
    cat = build_catalog(params, (1.0, 1.0))
    # mostly degenerate points (p = 0) with a few generic ones
    degenerate = [PhaseState(p.gamma, np.zeros(4), True) for p in random_points(4, 15)]
    with pytest.raises(InconsistentRanks) as exc:
        nc_dimension_check(cat.select(["H", "Phi_12"]), degenerate + random_points(4, 5, seed=9), cat.field, params)
    assert exc.value.stratification


def test_ambient_check_liouville():
    params = SystemParams(4)
    cat = build_catalog(params, (1.0, 2.0))
    obs = list(ambient_catalog(params, (1.0, 2.0)).values())
    pts = list(np.random.default_rng(0).standard_normal((20, 8)))
    # block energies and gauge integrals commute: a Liouville family in R^4
    cert = ambient_dimension_check(obs[1:], pts, cat.field, params)
    assert (cert.ddim, cert.dind) == (4, 4)


def test_pendulum_catalog():
    cat = pendulum_catalog(1.0, (0, 0, 1))
    assert set(cat) == {"H", "b.Phi", "Phi1", "Phi2", "Phi3"}
    x = [0, 0, 1, 1, 0, 0]
    assert cat["H"](x) == Fraction(1, 2) - 1
    assert cat["b.Phi"](x) == 1
