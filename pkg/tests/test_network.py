import pytest
from hypothesis import given, strategies as st

from gridloss.network import (
    Branch, Bus, Device, Network, ZeroImpedanceError, branch_admittance, validate,
)

from conftest import two_bus


def test_minimal_network_is_valid():
    assert validate(two_bus()) == []


def test_missing_slack_reported():
    net = Network(buses=[Bus("1"), Bus("2")], branches=[Branch("a", "1", "2", 0.01, 0.1)])
    assert "missing slack" in validate(net).codes()


def test_self_loop_reported():
    net = Network(buses=[Bus("1", "slack"), Bus("2")],
                  branches=[Branch("a", "1", "2", 0.01, 0.1), Branch("b", "2", "2", 0.01, 0.1)])
    report = validate(net)
    assert report.codes() == ["self-loop"]
    assert report[0].element_id == "b"


@pytest.mark.parametrize("net, code", [
    (Network(buses=[Bus("1", "slack"), Bus("1")]), "duplicate bus id"),
    (Network(buses=[Bus("1", "slack"), Bus("2", "slack")], branches=[Branch("a", "1", "2", 0, 1)]),
     "multiple slack"),
    (Network(buses=[Bus("1", "slack"), Bus("2")]), "disconnected"),
    (Network(buses=[Bus("1", "slack")], devices=[Device("d", "9")]), "unknown bus"),
    (Network(buses=[Bus("1", "slack", v_min=1.1, v_max=1.0)]), "bad voltage bounds"),
    (Network(buses=[Bus("1", "slack", q_comp=-0.1)]), "negative compensation"),
    (Network(buses=[Bus("1", "slack"), Bus("2")], branches=[Branch("a", "1", "2", 0.01, 0.0)]),
     "zero reactance"),
    (Network(buses=[Bus("1", "slack"), Bus("2")], branches=[Branch("a", "1", "2", -0.01, 0.1)]),
     "negative resistance"),
    (Network(buses=[Bus("1", "slack"), Bus("2")],
             branches=[Branch("a", "1", "2", 0.01, 0.1), Branch("a", "1", "2", 0.01, 0.1)]),
     "duplicate branch id"),
])
def test_constructed_violations(net, code):
    assert code in validate(net).codes()


def test_validate_is_pure():
    net = Network(buses=[Bus("1"), Bus("1")])
    assert validate(net) == validate(net)


@pytest.mark.parametrize("r, x, expected", [
    (0.0, 1.0, (0.0, -1.0)),
    (1.0, 0.0, (1.0, 0.0)),
    (0.01, 0.1, (100 / 101, -1000 / 101)),
])
def test_branch_admittance(r, x, expected):
    g, b = branch_admittance(Branch("a", "1", "2", r, x))
    assert g == pytest.approx(expected[0], abs=1e-12)
    assert b == pytest.approx(expected[1], abs=1e-12)


def test_zero_impedance_rejected():
    with pytest.raises(ZeroImpedanceError):
        branch_admittance(Branch("a", "1", "2", 0.0, 0.0))


@given(st.floats(0, 10), st.floats(1e-3, 10) | st.floats(-10, -1e-3))
def test_admittance_identity(r, x):
    g, b = branch_admittance(Branch("a", "1", "2", r, x))
    assert g * r + (-b) * x == pytest.approx(1.0, abs=1e-12)


def test_net_demand_sign_convention():
    net = Network(buses=[Bus("1", "slack")],
                  devices=[Device("l", "1", "load", 0.5, 0.2), Device("g", "1", "generator", 0.3, 0.1)])
    assert net.net_demand("1") == pytest.approx((0.2, 0.1))
