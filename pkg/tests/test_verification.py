import pytest

from magflow.integrals import NotApplicable
from magflow.phasecore import SystemParams
from magflow.verification import (
    applicable_targets,
    classify,
    leading_equal,
    run_target,
    theorem_family,
    theorem_order,
    u_r_algebra,
)


def asserted_hold(entries):
    return all(e["holds"] for e in entries if e.get("asserted", True))


def test_theorem_order():
    assert theorem_order((1.0, 2.0, 2.0)) == (2.0, 2.0, 1.0)
    assert theorem_order((0.0, 3.0, 1.0)) == (3.0, 1.0, 0.0)
    assert theorem_order((0.0, 0.0)) == (0.0, 0.0)
    assert leading_equal((2.0, 2.0, 1.0)) == 2
    assert leading_equal((0.0, 1.0)) == 0


@pytest.mark.parametrize(
    "n,blocks,item",
    [
        (5, (1.0, 1.0), "glavna-i"),
        (6, (1.0, 1.0, 2.0), "glavna-ii"),
        (6, (1.0, 1.0, 1.0), "glavna-iii"),
        (7, (1.0, 0.0, 0.0), "integrabilni-i"),
        (8, (1.0, 1.0, 1.0, 1.0), "integrabilni2"),
    ],
)
def test_classify(n, blocks, item):
    assert item in classify(n, blocks)


def test_theorem_family_not_applicable():
    with pytest.raises(NotApplicable):
        theorem_family("glavna-iii", 6, (2.0, 1.0, 1.0))


@pytest.mark.parametrize(
    "target,n,blocks",
    [
        ("L1", 5, (1.0, 2.0)),
        ("L2", 4, (1.0, 3.0)),
        ("L3", 6, (1.0, 2.0, 3.0)),
        ("L4", 6, (1.0, 1.0, 1.0)),
        ("L4", 5, (1.0, 2.0)),
        ("L5", 4, (2.0, 2.0)),
        ("dirac", 3, (1.0,)),
        ("ocigledna", 5, (1.0, 2.0)),
        ("stara", 4, (1.0, 2.0)),
        ("glavna", 5, (1.0, 2.0)),
        ("glavna-i", 5, (3.0, 3.0)),
        ("integrabilni-i", 6, (1.0, 0.0, 0.0)),
        ("redukcija", 6, (1.0, 1.0, 0.0)),
        ("pendulum", 3, (0.0,)),
    ],
)
def test_targets_hold(target, n, blocks):
    entries = run_target(target, SystemParams(n), blocks, trials=64)
    assert entries and asserted_hold(entries)


def test_L3_ambient_recorded_not_asserted():
    entries = run_target("L3", SystemParams(4), (1.0, 2.0), trials=64)
    assert any(not e["asserted"] for e in entries)


def test_not_applicable_targets():
    with pytest.raises(NotApplicable):
        run_target("L5", SystemParams(4), (1.0, 2.0))
    with pytest.raises(NotApplicable):
        run_target("pendulum", SystemParams(4), (1.0, 2.0))
    with pytest.raises(ValueError):
        run_target("nonsense", SystemParams(4), (1.0, 2.0))


def test_u2_algebra():
    out = u_r_algebra(SystemParams(4), (1.0, 1.0), 2)
    assert out["holds"] and out["dimension"] == 4
    assert out["killing_signature"] == {"negative": 3, "zero": 1, "positive": 0}


def test_applicable_targets():
    t = applicable_targets(SystemParams(6), (1.0, 1.0, 1.0))
    assert {"L5", "u3", "glavna", "glavna-iii", "redukcija"} <= set(t)
    assert "pendulum" not in t
