"""Steady-state AC power flow (Newton-Raphson, polar form) and constraint checks.

Bus injections follow the full AC form

    P_i = U_i * sum_j U_j (G_ij cos d_ij + B_ij sin d_ij)
    Q_i = U_i * sum_j U_j (G_ij sin d_ij - B_ij cos d_ij)

over the bus admittance matrix. Branch transformer core losses enter as a
constant active demand at the branch's sending bus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .losses import loss_rate
from .network import Network, branch_admittance, require_valid

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 50


class PowerFlowError(RuntimeError):
    """Singular or degenerate system; no Newton step can be taken."""


class NotConvergedError(RuntimeError):
    """An operation required a converged power-flow solution."""


@dataclass(frozen=True)
class LossBreakdown:
    joule_per_branch: dict[str, float]
    joule_total: float
    core_loss_total: float
    reactive_loss_total: float

    @property
    def active_total(self) -> float:
        return self.joule_total + self.core_loss_total


@dataclass(frozen=True)
class PowerFlowSolution:
    """Result of :func:`solve`.

    ``branch_current`` is the larger of the two terminal current magnitudes;
    ``branch_loss`` is the series-element Joule loss. When ``converged`` is
    False the voltages are the last iterate and the loss fields are not
    meaningful.
    """

    vm: dict[str, float]
    va: dict[str, float]
    branch_current: dict[str, float]
    branch_loss: dict[str, float]
    losses: LossBreakdown
    converged: bool
    iterations: int
    max_residual: float
    p_supplied: float = 0.0
    p_sold: float = 0.0
    slack_injection: complex = 0j

    @property
    def loss_rate_percent(self) -> float:
        if self.p_supplied <= 0:
            return 0.0
        return loss_rate(self.p_supplied, min(self.p_sold, self.p_supplied))


def admittance_matrix(network: Network) -> np.ndarray:
    n = len(network.buses)
    y = np.zeros((n, n), dtype=complex)
    for br in network.branches:
        g, b = branch_admittance(br)
        ys = complex(g, b)
        i, j = network.bus_position(br.from_bus), network.bus_position(br.to_bus)
        half = 0.5j * br.shunt_b
        y[i, i] += ys + half
        y[j, j] += ys + half
        y[i, j] -= ys
        y[j, i] -= ys
    return y


def specified_injections(network: Network) -> np.ndarray:
    """Complex net injection at every bus (generation minus demand)."""
    s = np.zeros(len(network.buses), dtype=complex)
    for k, bus in enumerate(network.buses):
        p, q = network.net_demand(bus.id)
        s[k] = complex(-p, -q + bus.q_comp)
    for br in network.branches:
        if br.core_loss:
            s[network.bus_position(br.from_bus)] -= br.core_loss
    return s


def _jacobian(ybus, v):
    ibus = ybus @ v
    vnorm = v / np.abs(v)
    diag_v = np.diag(v)
    ds_dvm = diag_v @ np.conj(ybus @ np.diag(vnorm)) + np.diag(np.conj(ibus) * vnorm)
    ds_dva = 1j * diag_v @ np.conj(np.diag(ibus) - ybus @ diag_v)
    return ds_dvm, ds_dva


def solve(
    network: Network,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> PowerFlowSolution:
    """Newton-Raphson power flow from a flat start.

    Returns a solution with ``converged=False`` if the mismatch is still above
    ``tolerance`` after ``max_iterations``; raises :class:`PowerFlowError` when
    the Jacobian is singular.
    """
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    require_valid(network)

    n = len(network.buses)
    slack = network.bus_position(network.slack.id)
    pq = np.array([k for k in range(n) if k != slack], dtype=int)
    ybus = admittance_matrix(network)
    sbus = specified_injections(network)

    vm = np.ones(n)
    va = np.zeros(n)
    vm[slack] = network.slack.v_set
    v = vm * np.exp(1j * va)

    def mismatch(v):
        mis = v * np.conj(ybus @ v) - sbus
        return np.concatenate([mis[pq].real, mis[pq].imag])

    f = mismatch(v)
    residual = float(np.max(np.abs(f))) if f.size else 0.0
    iterations = 0
    converged = residual < tolerance
    while not converged and iterations < max_iterations:
        ds_dvm, ds_dva = _jacobian(ybus, v)
        jac = np.block([
            [ds_dva[np.ix_(pq, pq)].real, ds_dvm[np.ix_(pq, pq)].real],
            [ds_dva[np.ix_(pq, pq)].imag, ds_dvm[np.ix_(pq, pq)].imag],
        ])
        try:
            dx = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError as exc:
            raise PowerFlowError(f"singular Jacobian at iteration {iterations}") from exc
        m = len(pq)
        va[pq] += dx[:m]
        vm[pq] += dx[m:]
        if np.any(vm <= 0) or not np.all(np.isfinite(vm)):
            break
        v = vm * np.exp(1j * va)
        iterations += 1
        f = mismatch(v)
        residual = float(np.max(np.abs(f)))
        converged = residual < tolerance

    return _build_solution(network, ybus, v, converged, iterations, residual)


def _build_solution(network, ybus, v, converged, iterations, residual) -> PowerFlowSolution:
    ids = network.bus_ids
    current, joule = {}, {}
    q_loss = 0.0
    for br in network.branches:
        i, j = network.bus_position(br.from_bus), network.bus_position(br.to_bus)
        ys = complex(*branch_admittance(br))
        i_series = (v[i] - v[j]) * ys
        i_from = i_series + 0.5j * br.shunt_b * v[i]
        i_to = -i_series + 0.5j * br.shunt_b * v[j]
        current[br.id] = float(max(abs(i_from), abs(i_to)))
        joule[br.id] = float(br.resistance_r * abs(i_series) ** 2)
        q_loss += (v[i] * np.conj(i_from) + v[j] * np.conj(i_to)).imag
    core = sum(br.core_loss for br in network.branches)
    losses = LossBreakdown(
        joule_per_branch=joule,
        joule_total=math.fsum(joule.values()),
        core_loss_total=core,
        reactive_loss_total=float(q_loss),
    )
    slack = network.bus_position(network.slack.id)
    s_slack = complex(v[slack] * np.conj(ybus[slack] @ v))
    # core losses at the slack bus are drawn before the slack's own injection
    s_slack += sum(br.core_loss for br in network.branches if br.from_bus == network.slack.id)
    p_dem_slack, q_dem_slack = network.net_demand(network.slack.id)
    s_slack += complex(p_dem_slack, q_dem_slack)
    return PowerFlowSolution(
        vm={b: float(abs(v[k])) for k, b in enumerate(ids)},
        va={b: float(np.angle(v[k])) for k, b in enumerate(ids)},
        branch_current=current,
        branch_loss=joule,
        losses=losses,
        converged=bool(converged),
        iterations=iterations,
        max_residual=residual,
        p_supplied=s_slack.real + network.total_generation(),
        p_sold=network.total_load(),
        slack_injection=s_slack,
    )


@dataclass(frozen=True)
class ConstraintReport:
    voltage_violations: list[tuple[str, float, float]] = field(default_factory=list)
    current_violations: list[tuple[str, float, float]] = field(default_factory=list)
    compensation_violations: list[tuple[str, float, float]] = field(default_factory=list)
    loss_rate_percent: float = 0.0
    loss_rate_ok: bool = True

    @property
    def feasible(self) -> bool:
        return not (self.voltage_violations or self.current_violations
                    or self.compensation_violations)

    @property
    def total_violation(self) -> float:
        """Sum of the distances of every violating element from its bound."""
        return sum(abs(value - bound) for group in (
            self.voltage_violations, self.current_violations, self.compensation_violations
        ) for _, value, bound in group)


def check_constraints(
    network: Network,
    solution: PowerFlowSolution,
    eta: float,
    q_min: float = 0.0,
    q_max: float = math.inf,
) -> ConstraintReport:
    """Compare a converged solution against the operating limits.

    Each violation is ``(element id, value, violated bound)``. ``q_min`` and
    ``q_max`` bound the installed compensation at buses that carry any.
    """
    if not solution.converged:
        raise NotConvergedError("constraint check needs a converged solution")
    volt, cur, comp = [], [], []
    for bus in network.buses:
        u = solution.vm[bus.id]
        if u < bus.v_min:
            volt.append((bus.id, u, bus.v_min))
        elif u > bus.v_max:
            volt.append((bus.id, u, bus.v_max))
        if bus.q_comp > 0:
            if bus.q_comp < q_min:
                comp.append((bus.id, bus.q_comp, q_min))
            elif bus.q_comp > q_max:
                comp.append((bus.id, bus.q_comp, q_max))
    for br in network.branches:
        i = solution.branch_current[br.id]
        if i > br.i_limit:
            cur.append((br.id, i, br.i_limit))
        elif i < br.i_min:
            cur.append((br.id, i, br.i_min))
    rate = solution.loss_rate_percent
    return ConstraintReport(volt, cur, comp, rate, rate < eta)
