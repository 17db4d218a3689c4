"""Reactive compensation sizing with the particle swarm optimizer.

Dimension ``k`` of a particle is the compensation added at the ``k``-th
bus that carries reactive load. The fitness is the loss cost over the
horizon plus capital cost plus a penalty on constraint violations.
"""

from __future__ import annotations

from dataclasses import replace
from typing import NamedTuple

import numpy as np

from .network import Network, require_valid
from .powerflow import PowerFlowError, check_constraints, solve
from .pso import PsoConfig, run
from .strategy import (
    ADD_COMPENSATION,
    CostModel,
    EvaluationResult,
    InfeasibleNetworkError,
    Strategy,
    apply_plan,
    evaluate_plan,
)

# fitness of a particle whose power flow fails to converge
DIVERGED_FITNESS = 1e30


def candidate_buses(network: Network) -> list[str]:
    return [b.id for b in network.buses
            if b.kind != "slack" and network.net_demand(b.id)[1] > 0]


def decode(buses: list[str], position, cost_model: CostModel) -> list[Strategy]:
    plan = []
    for bus_id, q in zip(buses, np.asarray(position, dtype=float)):
        q = float(q)
        if q > 0:
            plan.append(Strategy(ADD_COMPENSATION, bus_id, q_added=q,
                                 capital_cost=cost_model.catalog.compensation_cost(q)))
    return plan


def default_penalty(cost_model: CostModel) -> float:
    return 1e3 * cost_model.energy_price * cost_model.horizon


def make_fitness(network: Network, cost_model: CostModel, penalty: float | None = None):
    buses = candidate_buses(network)
    penalty = default_penalty(cost_model) if penalty is None else penalty

    def fitness(position) -> float:
        plan = decode(buses, position, cost_model)
        modified = apply_plan(network, plan, cost_model.catalog)
        try:
            sol = solve(modified)
        except PowerFlowError:
            return DIVERGED_FITNESS
        if not sol.converged:
            return DIVERGED_FITNESS
        report = check_constraints(modified, sol, cost_model.eta, cost_model.q_min, cost_model.q_max)
        loss = cost_model.loss_cost(network, sol.losses.active_total)
        capital = sum(s.capital_cost for s in plan)
        return loss + capital + penalty * report.total_violation

    return fitness


class CompensationResult(NamedTuple):
    plan: list[Strategy]
    result: EvaluationResult
    trace: list[float]
    best_fitness: float
    buses: list[str]


def optimize_compensation(
    network: Network,
    cost_model: CostModel,
    config: PsoConfig,
    penalty: float | None = None,
) -> CompensationResult:
    """Search compensation sizes in ``[q_min, q_max]`` at every reactive-load bus.

    One particle starts at zero compensation so the swarm can never end up
    worse than doing nothing. The best particle is decoded into a plan and
    priced by :func:`evaluate_plan`, the same way the greedy optimizer is.
    """
    require_valid(network)
    base = solve(network)
    if not base.converged:
        raise InfeasibleNetworkError("base-case power flow did not converge")
    buses = candidate_buses(network)
    if not buses:
        return CompensationResult([], evaluate_plan(network, [], cost_model, before=base), [],
                                  make_fitness(network, cost_model, penalty)(np.zeros(0)), [])
    lo, hi = cost_model.q_min, cost_model.q_max
    if hi <= lo:
        hi = lo + 1e-12
    config = replace(config, dim=len(buses), minx=lo, maxx=hi)
    fitness = make_fitness(network, cost_model, penalty)
    res = run(config, fitness, initial_positions=[np.zeros(len(buses))])
    plan = decode(buses, res.best_position, cost_model)
    return CompensationResult(plan, evaluate_plan(network, plan, cost_model, before=base),
                              res.trace, res.best_fitness, buses)
