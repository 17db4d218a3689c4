import datetime as dt
from pathlib import Path

import numpy as np
import pytest

from gridloss import data_path
from gridloss.io import read_cost_model, read_network
from gridloss.network import Branch, Bus, Device, Network
from gridloss.strategy import Catalog, ConductorClass, CostModel

DATA = Path(__file__).parent / "data"
EXCERPT = DATA / "household_excerpt.txt"


def two_bus(p=0.5, q=0.2, r=0.01, x=0.1, **bus_kw) -> Network:
    return Network(
        buses=[Bus("1", "slack"), Bus("2", "load", **bus_kw)],
        branches=[Branch("a", "1", "2", r, x, i_limit=2.0, conductor_class="old")],
        devices=[Device("d2", "2", "load", p, q)],
        name="two-bus",
    )


def random_radial(seed: int, max_buses: int = 6) -> Network:
    """Random tree feeder with at most ``max_buses`` buses and loads <= 0.5 p.u."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_buses + 1))
    buses = [Bus("0", "slack", v_min=0.5, v_max=1.5)]
    branches, devices = [], []
    for k in range(1, n):
        parent = int(rng.integers(0, k))
        buses.append(Bus(str(k), "load", v_min=0.5, v_max=1.5,
                         q_comp=float(rng.choice([0.0, rng.uniform(0, 0.1)]))))
        kind = "transformer" if k == 1 and rng.random() < 0.5 else "line"
        branches.append(Branch(
            f"br{k}", str(parent), str(k),
            resistance_r=float(rng.uniform(0.001, 0.02)),
            reactance_x=float(rng.uniform(0.002, 0.04)),
            shunt_b=float(rng.uniform(0, 0.01)),
            i_limit=5.0, kind=kind,
            core_loss=float(rng.uniform(0, 0.002)) if kind == "transformer" else 0.0,
        ))
        devices.append(Device(f"d{k}", str(k), "load",
                              float(rng.uniform(0, 0.5)), float(rng.uniform(0, 0.3))))
    if n > 2 and rng.random() < 0.3:
        devices.append(Device("g", str(n - 1), "generator", float(rng.uniform(0, 0.2)), 0.0))
    return Network(buses=buses, branches=branches, devices=devices, name=f"random-{seed}")


def simple_cost_model(**kw) -> CostModel:
    catalog = kw.pop("catalog", Catalog(
        conductors=(ConductorClass("new", 0.004, 0.08, 5000.0),),
        compensation_step=0.05, compensation_cost_per_pu=10000.0, compensation_fixed_cost=0.0,
    ))
    params = dict(energy_price=50.0, horizon=8760.0, eta=0.0, q_min=0.0, q_max=0.3)
    params.update(kw)
    return CostModel(catalog=catalog, **params)


def synthetic_household(path: Path, total_rows: int = 15923, seed: int = 7) -> Path:
    """Write a semicolon file whose first and last five rows are the excerpt rows and
    whose middle rows are seeded random values on the same one-minute grid."""
    lines = EXCERPT.read_text().splitlines()
    header, head, tail = lines[0], lines[1:6], lines[6:]
    rng = np.random.default_rng(seed)
    start = dt.datetime(2006, 12, 16, 17, 24)
    middle = []
    for k in range(5, total_rows - 5):
        t = start + dt.timedelta(minutes=k)
        if rng.random() < 0.002:
            vals = ["?"] * 7
        else:
            vals = [f"{rng.uniform(0.1, 6):.3f}", f"{rng.choice([0.0, rng.uniform(0, 0.6)]):.3f}",
                    f"{rng.uniform(230, 245):.2f}", f"{rng.uniform(0.4, 25):.1f}",
                    "0.000", f"{rng.integers(0, 3)}.000", f"{rng.integers(0, 19)}.0"]
        middle.append(";".join([t.strftime("%d/%m/%Y"), t.strftime("%H:%M:%S"), *vals]))
    path.write_text("\n".join([header, *head, *middle, *tail]) + "\n")
    return path


@pytest.fixture
def feeder6():
    return read_network(data_path("feeder6.yaml"))


@pytest.fixture
def catalog6():
    return read_cost_model(data_path("catalog6.yaml"))[0]


def star_instance(mus=(0.5, 0.8, 1.2)):
    """Slack bus feeding three independent radial branches.

    The slack voltage is fixed, so replacing one branch does not change the
    benefit of replacing another. Each replacement's capital cost is set to
    ``mu * benefit`` so the candidate ratios are exactly ``mus``.
    """
    from gridloss.strategy import REPLACE_LINE, Strategy, evaluate_plan

    names = "ABC"[: len(mus)]
    net = Network(
        buses=[Bus("S", "slack"), *[Bus(n, v_min=0.8) for n in names]],
        branches=[Branch(f"l{n}", "S", n, 0.02 + 0.01 * k, 0.05, i_limit=5.0, conductor_class="old")
                  for k, n in enumerate(names)],
        devices=[Device(f"d{n}", n, "load", 0.4, 0.1) for n in names],
        name="star",
    )
    cm = simple_cost_model()
    strategies = []
    for n, mu in zip(names, mus):
        s = Strategy(REPLACE_LINE, f"l{n}", "new")
        benefit = evaluate_plan(net, [s], cm).b_lr
        strategies.append(Strategy(REPLACE_LINE, f"l{n}", "new", capital_cost=mu * benefit))
    return net, cm, strategies


def fixed_source(pool):
    """Candidate source offering a fixed pool, minus what the current network already has."""
    from gridloss.strategy import ADD_COMPENSATION

    def source(network, solution, cost_model, replaced):
        out = []
        for s in pool:
            if s.kind == ADD_COMPENSATION:
                if network.bus(s.element_id).q_comp > 0:
                    continue
            elif s.element_id in replaced:
                continue
            out.append(s)
        return out
    return source
