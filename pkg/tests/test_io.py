import pytest

from gridloss import data_path
from gridloss.io import (
    FormatError, cost_model_from_dict, network_from_dict, read_cost_model, read_network, read_plan,
    write_network, write_plan,
)
from gridloss.strategy import ADD_COMPENSATION, REPLACE_LINE, Strategy, evaluate_plan

from conftest import random_radial


@pytest.mark.parametrize("seed", range(5))
def test_network_round_trip(tmp_path, seed):
    net = random_radial(seed)
    write_network(net, tmp_path / "n.yaml")
    assert read_network(tmp_path / "n.yaml") == net


def test_shipped_feeder_loads(feeder6):
    assert len(feeder6.buses) == 6 and feeder6.slack.id == "b1"


def test_duplicate_ids_rejected_at_load():
    doc = {"buses": [{"id": "1", "kind": "slack"}, {"id": "1"}]}
    with pytest.raises(FormatError, match="duplicate bus"):
        network_from_dict(doc)


def test_unknown_field_rejected():
    with pytest.raises(FormatError, match="unknown field"):
        network_from_dict({"buses": [{"id": "1", "kind": "slack", "colour": "red"}]})


def test_integer_ids_become_strings():
    net = network_from_dict({"buses": [{"id": 1, "kind": "slack"}, {"id": 2}],
                             "branches": [{"id": 7, "from_bus": 1, "to_bus": 2,
                                           "resistance_r": 0.01, "reactance_x": 0.1}]})
    assert net.branches[0].from_bus == "1" and net.bus_ids == ["1", "2"]


def test_catalog_overrides():
    model, currency = read_cost_model(data_path("catalog6.yaml"), eta=1.0, horizon=None)
    assert model.eta == 1.0 and model.horizon == 8760.0 and currency == "EUR"
    with pytest.raises(FormatError):
        cost_model_from_dict({"energy_price": 1.0})


def test_plan_round_trip(tmp_path, feeder6, catalog6):
    plan = [Strategy(ADD_COMPENSATION, "b4", q_added=0.1, capital_cost=6000.0),
            Strategy(REPLACE_LINE, "l23", "AL-95", capital_cost=60000.0)]
    res = evaluate_plan(feeder6, plan, catalog6)
    write_plan(tmp_path / "p.yaml", "greedy", plan, res)
    method, back, result = read_plan(tmp_path / "p.yaml")
    assert method == "greedy" and back == plan
    assert result["c_loss_after"] == res.c_loss_after
    assert result["mu_lr"] == res.mu_lr
