"""Gauss-Seidel fixed-point power flow used to cross-check the Newton solver.

Deliberately naive: pure-Python complex arithmetic, no matrix assembly
shared with :mod:`gridloss.powerflow`. Total active loss is taken from the
power balance at the slack bus rather than from per-branch flows.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

from .network import Network


@dataclass(frozen=True)
class OracleSolution:
    vm: dict[str, float]
    va: dict[str, float]
    total_loss: float
    converged: bool
    iterations: int


def gauss_seidel(network: Network, tolerance: float = 1e-13, max_iterations: int = 200_000) -> OracleSolution:
    ids = [b.id for b in network.buses]
    slack_id = next(b.id for b in network.buses if b.kind == "slack")
    diag = {i: 0j for i in ids}
    neighbours: dict[str, list[tuple[str, complex]]] = {i: [] for i in ids}
    for br in network.branches:
        y = 1 / complex(br.resistance_r, br.reactance_x)
        diag[br.from_bus] += y + 0.5j * br.shunt_b
        diag[br.to_bus] += y + 0.5j * br.shunt_b
        neighbours[br.from_bus].append((br.to_bus, -y))
        neighbours[br.to_bus].append((br.from_bus, -y))

    demand = {i: 0j for i in ids}
    for d in network.devices:
        s = complex(d.p, d.q)
        demand[d.bus] += s if d.kind == "load" else -s
    for br in network.branches:
        demand[br.from_bus] += br.core_loss
    injection = {b.id: -demand[b.id] + 1j * b.q_comp for b in network.buses}

    v = {i: 1 + 0j for i in ids}
    v[slack_id] = complex(next(b.v_set for b in network.buses if b.kind == "slack"))
    converged = False
    it = 0
    while it < max_iterations:
        it += 1
        worst = 0.0
        for i in ids:
            if i == slack_id:
                continue
            coupled = sum(yik * v[k] for k, yik in neighbours[i])
            new = ((injection[i] / v[i]).conjugate() - coupled) / diag[i]
            worst = max(worst, abs(new - v[i]))
            v[i] = new
        if worst < tolerance:
            converged = True
            break

    current_in = diag[slack_id] * v[slack_id] + sum(y * v[k] for k, y in neighbours[slack_id])
    p_slack_net = (v[slack_id] * current_in.conjugate()).real
    loads = sum(d.p for d in network.devices if d.kind == "load")
    gens = sum(d.p for d in network.devices if d.kind == "generator")
    p_source = p_slack_net + demand[slack_id].real
    total_loss = p_source + gens - loads
    return OracleSolution(
        vm={i: abs(v[i]) for i in ids},
        va={i: cmath.phase(v[i]) for i in ids},
        total_loss=total_loss,
        converged=converged,
        iterations=it,
    )
