"""Combined loss-reduction strategy optimization by cost-benefit ratio.

Three stages: rank the weak points of the feeder, generate candidate
actions for the worst of them, then greedily apply the candidate with the
smallest ratio of capital cost to loss-cost saving until the loss-rate
target is met or nothing worthwhile is left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Sequence

from .network import Network, require_valid
from .powerflow import (
    ConstraintReport,
    NotConvergedError,
    PowerFlowError,
    PowerFlowSolution,
    check_constraints,
    solve,
)

REPLACE_LINE = "replace_line"
REPLACE_TRANSFORMER = "replace_transformer"
ADD_COMPENSATION = "add_compensation"
STRATEGY_KINDS = (REPLACE_LINE, REPLACE_TRANSFORMER, ADD_COMPENSATION)


class PlanError(ValueError):
    """A plan references missing elements or combines incompatible actions."""


class InfeasibleNetworkError(RuntimeError):
    """The unmodified network has no converged power flow."""


@dataclass(frozen=True)
class ConductorClass:
    name: str
    r_per_length: float
    x_per_length: float
    cost_per_length: float
    i_limit: float | None = None


@dataclass(frozen=True)
class TransformerClass:
    name: str
    resistance_r: float
    reactance_x: float
    cost: float
    core_loss: float = 0.0
    i_limit: float | None = None


@dataclass(frozen=True)
class Catalog:
    conductors: tuple[ConductorClass, ...] = ()
    transformers: tuple[TransformerClass, ...] = ()
    compensation_step: float = 0.05
    compensation_cost_per_pu: float = 0.0
    compensation_fixed_cost: float = 0.0

    def conductor(self, name: str) -> ConductorClass:
        for c in self.conductors:
            if c.name == name:
                return c
        raise PlanError(f"unknown conductor class {name!r}")

    def transformer(self, name: str) -> TransformerClass:
        for t in self.transformers:
            if t.name == name:
                return t
        raise PlanError(f"unknown transformer class {name!r}")

    def compensation_cost(self, q_added: float) -> float:
        if q_added <= 0:
            return 0.0
        return self.compensation_fixed_cost + self.compensation_cost_per_pu * q_added


@dataclass(frozen=True)
class CostModel:
    """Economic parameters.

    ``energy_price`` is currency per MWh; loss power in p.u. is converted
    through the network's ``base_mva`` and held for ``horizon`` hours.
    ``q_min``/``q_max`` bound the compensation installed at any one bus.
    """

    energy_price: float
    horizon: float
    eta: float
    catalog: Catalog = field(default_factory=Catalog)
    q_min: float = 0.0
    q_max: float = 1.0
    mu_max: float = 1.0

    def __post_init__(self):
        if self.energy_price < 0:
            raise ValueError("energy_price must be >= 0")
        if self.horizon <= 0:
            raise ValueError("horizon must be > 0")
        if not 0 <= self.q_min <= self.q_max:
            raise ValueError("need 0 <= q_min <= q_max")

    def loss_cost(self, network: Network, p_loss_pu: float) -> float:
        return p_loss_pu * network.base_mva * self.horizon * self.energy_price


@dataclass(frozen=True)
class Strategy:
    kind: str
    element_id: str
    option: str = ""
    q_added: float = 0.0
    capital_cost: float = 0.0

    def __post_init__(self):
        if self.kind not in STRATEGY_KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}")
        if self.capital_cost < 0 or self.q_added < 0:
            raise ValueError("capital_cost and q_added must be >= 0")

    @property
    def sort_key(self):
        return (self.element_id, self.kind, self.option, self.q_added)

    def describe(self) -> str:
        if self.kind == ADD_COMPENSATION:
            return f"{self.kind}({self.element_id}, q={self.q_added:g})"
        return f"{self.kind}({self.element_id} -> {self.option})"


@dataclass(frozen=True)
class WeakPoint:
    element_kind: str  # "bus" or "branch"
    element_id: str
    loss: float
    severity: float = 0.0


@dataclass(frozen=True)
class EvaluationResult:
    c_loss_before: float
    c_loss_after: float
    c_lr: float
    b_lr: float
    mu_lr: float | None
    total_cost: float
    constraints: ConstraintReport | None
    feasible: bool = True
    p_loss_before: float = 0.0
    p_loss_after: float = 0.0
    loss_rate_before: float = 0.0
    loss_rate_after: float = 0.0

    @property
    def mu_defined(self) -> bool:
        return self.mu_lr is not None


def cost_benefit_ratio(c_lr: float, b_lr: float) -> float | None:
    """Capital cost over loss-cost saving; ``None`` when there is no saving."""
    if b_lr <= 0:
        return None
    return c_lr / b_lr


def weak_point_analysis(solution: PowerFlowSolution, network: Network) -> list[WeakPoint]:
    """Rank buses and branches by how much they contribute to the losses.

    Elements violating a voltage or current limit come first, ordered by
    violation size. A bus is credited with half the Joule loss of each
    branch touching it.
    """
    if not solution.converged:
        raise NotConvergedError("weak-point analysis needs a converged solution")
    points = []
    bus_loss = {b.id: 0.0 for b in network.buses}
    for br in network.branches:
        loss = solution.branch_loss[br.id]
        bus_loss[br.from_bus] += 0.5 * loss
        bus_loss[br.to_bus] += 0.5 * loss
        i = solution.branch_current[br.id]
        severity = max(0.0, i - br.i_limit, br.i_min - i)
        points.append(WeakPoint("branch", br.id, loss, severity))
    for bus in network.buses:
        u = solution.vm[bus.id]
        severity = max(0.0, u - bus.v_max, bus.v_min - u)
        points.append(WeakPoint("bus", bus.id, bus_loss[bus.id], severity))
    points.sort(key=lambda p: (p.severity <= 0, -p.severity, -p.loss, p.element_id, p.element_kind))
    return points


def generate_strategies(
    network: Network,
    analysis: Sequence[WeakPoint],
    cost_model: CostModel,
    top_k: int,
    exclude: set[str] = frozenset(),
) -> list[Strategy]:
    """Candidate actions for the ``top_k`` worst weak points.

    Branch ids in ``exclude`` (already replaced) get no further replacements.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    catalog = cost_model.catalog
    out: list[Strategy] = []
    seen = set()
    for wp in analysis[:top_k]:
        key = (wp.element_kind, wp.element_id)
        if key in seen:
            continue
        seen.add(key)
        if wp.element_kind == "branch":
            if wp.element_id in exclude:
                continue
            out.extend(_replacement_options(network.branch(wp.element_id), catalog, wp.loss))
        else:
            out.extend(_compensation_options(network, wp.element_id, cost_model))
    return out


def _replacement_options(branch, catalog: Catalog, loss: float) -> list[Strategy]:
    if loss <= 0 and branch.core_loss <= 0:
        return []
    if branch.kind == "transformer":
        return [
            Strategy(REPLACE_TRANSFORMER, branch.id, t.name, capital_cost=t.cost)
            for t in catalog.transformers
            if t.name != branch.conductor_class
            and (t.resistance_r < branch.resistance_r or t.core_loss < branch.core_loss)
        ]
    if loss <= 0:
        return []
    return [
        Strategy(REPLACE_LINE, branch.id, c.name, capital_cost=c.cost_per_length * branch.length)
        for c in catalog.conductors
        if c.name != branch.conductor_class and c.r_per_length * branch.length < branch.resistance_r
    ]


def _compensation_options(network: Network, bus_id: str, cost_model: CostModel) -> list[Strategy]:
    bus = network.bus(bus_id)
    if bus.kind == "slack":
        return []
    _, q_load = network.net_demand(bus_id)
    if q_load <= 0:
        return []
    step = cost_model.catalog.compensation_step
    if step <= 0:
        return []
    room = min(cost_model.q_max - bus.q_comp, q_load)
    out = []
    k = 1
    # 1e-9 absorbs float error in k * step near the bound
    while k * step <= room + 1e-9:
        q = round(k * step, 12)
        if bus.q_comp + q >= cost_model.q_min - 1e-9:
            out.append(Strategy(ADD_COMPENSATION, bus_id, q_added=q,
                                capital_cost=cost_model.catalog.compensation_cost(q)))
        k += 1
    return out


def apply_strategy(network: Network, strategy: Strategy, catalog: Catalog) -> Network:
    if strategy.kind == ADD_COMPENSATION:
        try:
            bus = network.bus(strategy.element_id)
        except KeyError:
            raise PlanError(f"unknown bus {strategy.element_id!r}") from None
        return network.with_bus(replace(bus, q_comp=bus.q_comp + strategy.q_added))
    try:
        branch = network.branch(strategy.element_id)
    except KeyError:
        raise PlanError(f"unknown branch {strategy.element_id!r}") from None
    if strategy.kind == REPLACE_LINE:
        if branch.kind != "line":
            raise PlanError(f"branch {branch.id!r} is not a line")
        c = catalog.conductor(strategy.option)
        new = replace(branch, resistance_r=c.r_per_length * branch.length,
                      reactance_x=c.x_per_length * branch.length, conductor_class=c.name,
                      i_limit=c.i_limit if c.i_limit is not None else branch.i_limit)
    else:
        if branch.kind != "transformer":
            raise PlanError(f"branch {branch.id!r} is not a transformer")
        t = catalog.transformer(strategy.option)
        new = replace(branch, resistance_r=t.resistance_r, reactance_x=t.reactance_x,
                      core_loss=t.core_loss, conductor_class=t.name,
                      i_limit=t.i_limit if t.i_limit is not None else branch.i_limit)
    return network.with_branch(new)


def apply_plan(network: Network, plan: Sequence[Strategy], catalog: Catalog) -> Network:
    replaced = set()
    for s in plan:
        if s.kind != ADD_COMPENSATION:
            if s.element_id in replaced:
                raise PlanError(f"more than one replacement for branch {s.element_id!r}")
            replaced.add(s.element_id)
    for s in plan:
        network = apply_strategy(network, s, catalog)
    return network


def _solve_or_none(network: Network) -> PowerFlowSolution | None:
    try:
        sol = solve(network)
    except PowerFlowError:
        return None
    return sol if sol.converged else None


def evaluate_plan(
    network: Network,
    plan: Sequence[Strategy],
    cost_model: CostModel,
    before: PowerFlowSolution | None = None,
) -> EvaluationResult:
    """Apply ``plan`` to a copy of ``network`` and price the outcome.

    ``before`` may carry an already-solved base case. A plan whose modified
    network has no converged power flow yields ``feasible=False`` with the
    loss-cost fields of the base case and an undefined ratio.
    """
    modified = apply_plan(network, plan, cost_model.catalog)
    if before is None:
        before = _solve_or_none(network)
        if before is None:
            raise InfeasibleNetworkError("base-case power flow did not converge")
    p_before = before.losses.active_total
    c_before = cost_model.loss_cost(network, p_before)
    c_lr = math.fsum(s.capital_cost for s in plan)

    after = _solve_or_none(modified) if plan else before
    if after is None:
        return EvaluationResult(
            c_loss_before=c_before, c_loss_after=math.inf, c_lr=c_lr, b_lr=-math.inf,
            mu_lr=None, total_cost=math.inf, constraints=None, feasible=False,
            p_loss_before=p_before, p_loss_after=math.inf,
            loss_rate_before=before.loss_rate_percent, loss_rate_after=math.inf,
        )
    p_after = after.losses.active_total
    c_after = cost_model.loss_cost(network, p_after)
    b_lr = c_before - c_after if plan else 0.0
    return EvaluationResult(
        c_loss_before=c_before,
        c_loss_after=c_after,
        c_lr=c_lr,
        b_lr=b_lr,
        mu_lr=cost_benefit_ratio(c_lr, b_lr),
        total_cost=c_after + c_lr,
        constraints=check_constraints(modified, after, cost_model.eta,
                                      cost_model.q_min, cost_model.q_max),
        p_loss_before=p_before,
        p_loss_after=p_after,
        loss_rate_before=before.loss_rate_percent,
        loss_rate_after=after.loss_rate_percent,
    )


@dataclass(frozen=True)
class TraceStep:
    step: int
    strategy: Strategy
    mu_lr: float
    c_lr: float
    b_lr: float
    loss_rate_after: float
    candidates: int
    candidate_mus: tuple[float | None, ...] = ()


class OptimizationResult(NamedTuple):
    plan: list[Strategy]
    result: EvaluationResult
    trace: list[TraceStep]
    stop_reason: str = ""


def _selection_key(strategy: Strategy, result: EvaluationResult):
    return (result.mu_lr, result.c_lr, strategy.sort_key)


def select_best(
    evaluated: Sequence[tuple[Strategy, EvaluationResult]], mu_max: float
) -> tuple[Strategy, EvaluationResult] | None:
    """Smallest defined ratio below ``mu_max``; ties go to the cheaper
    candidate, then to the lexicographically smaller element id."""
    eligible = [(s, r) for s, r in evaluated
                if r.feasible and r.mu_lr is not None and r.mu_lr < mu_max]
    if not eligible:
        return None
    return min(eligible, key=lambda sr: _selection_key(*sr))


CandidateSource = Callable[[Network, PowerFlowSolution, CostModel, set], list[Strategy]]


def default_candidates(top_k: int | None = None) -> CandidateSource:
    def source(network, solution, cost_model, exclude):
        analysis = weak_point_analysis(solution, network)
        k = top_k or len(analysis)
        return generate_strategies(network, analysis, cost_model, k, exclude)
    return source


def optimize(
    network: Network,
    cost_model: CostModel,
    top_k: int | None = None,
    max_steps: int | None = None,
    candidates: CandidateSource | None = None,
) -> OptimizationResult:
    """Greedy combined strategy selection.

    Each step evaluates every candidate against the current (already
    modified) network and applies the one with the smallest cost-benefit
    ratio. Stops when the loss rate is below ``eta``, when no candidate has
    a defined ratio under ``mu_max``, or after ``max_steps`` steps.
    """
    require_valid(network)
    source = candidates or default_candidates(top_k)
    base = _solve_or_none(network)
    if base is None:
        raise InfeasibleNetworkError("base-case power flow did not converge")

    plan: list[Strategy] = []
    trace: list[TraceStep] = []
    current, current_sol = network, base
    replaced: set[str] = set()
    stop = ""
    while True:
        if current_sol.loss_rate_percent < cost_model.eta:
            stop = "loss-rate target met"
            break
        if max_steps is not None and len(trace) >= max_steps:
            stop = "step limit reached"
            break
        pool = sorted(source(current, current_sol, cost_model, replaced), key=lambda s: s.sort_key)
        if not pool:
            stop = "no candidates"
            break
        evaluated = [(s, evaluate_plan(current, [s], cost_model, before=current_sol)) for s in pool]
        best = select_best(evaluated, cost_model.mu_max)
        if best is None:
            stop = "no candidate below mu_max"
            break
        strategy, res = best
        plan.append(strategy)
        if strategy.kind != ADD_COMPENSATION:
            replaced.add(strategy.element_id)
        current = apply_strategy(current, strategy, cost_model.catalog)
        current_sol = _solve_or_none(current)
        trace.append(TraceStep(
            step=len(trace) + 1, strategy=strategy, mu_lr=res.mu_lr, c_lr=res.c_lr,
            b_lr=res.b_lr, loss_rate_after=res.loss_rate_after, candidates=len(pool),
            candidate_mus=tuple(r.mu_lr for _, r in evaluated),
        ))
    return OptimizationResult(plan, evaluate_plan(network, plan, cost_model, before=base), trace, stop)
