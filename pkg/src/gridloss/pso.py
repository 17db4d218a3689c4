"""Global-best particle swarm optimizer.

Particles are updated one after another within an iteration and the swarm
best is refreshed as soon as a particle improves on it, so later particles
in the same iteration already follow the new best.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

Objective = Callable[[np.ndarray], float]


def rastrigin(x) -> float:
    """Rastrigin function, ``10 n + sum(x_i^2 - 10 cos(2 pi x_i))``; minimum 0 at the origin."""
    x = np.asarray(x, dtype=float)
    return float(10.0 * x.size + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x)))


def sphere(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(np.dot(x, x))


@dataclass(frozen=True)
class PsoConfig:
    """Swarm hyperparameters.

    ``w``, ``c1`` and ``c2`` default to the constriction-equivalent values
    0.729 / 1.49445. ``v_max`` caps each velocity component; ``None`` means
    half the position range.
    """

    num_particles: int = 10
    max_iter: int = 100
    dim: int = 2
    w: float = 0.729
    c1: float = 1.49445
    c2: float = 1.49445
    minx: float = -10.0
    maxx: float = 10.0
    seed: int = 0
    v_max: float | None = None

    def __post_init__(self):
        if self.num_particles < 1:
            raise ValueError("num_particles must be >= 1")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not self.minx < self.maxx:
            raise ValueError("need minx < maxx")

    @property
    def velocity_cap(self) -> float:
        return self.v_max if self.v_max is not None else 0.5 * (self.maxx - self.minx)


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    fitness: float
    best_position: np.ndarray
    best_fitness: float


@dataclass
class Swarm:
    particles: list[Particle]
    global_best_position: np.ndarray
    global_best_fitness: float
    iteration: int = 0
    evaluations: int = field(default=0, repr=False)


def init_swarm(
    config: PsoConfig,
    objective: Objective,
    rng: np.random.Generator,
    initial_positions: Sequence[Sequence[float]] = (),
) -> Swarm:
    """Uniform random positions in the box, zero velocities.

    Rows of ``initial_positions`` (clipped to the box) replace the first
    random positions; the random draws are made regardless so seeding a
    particle does not shift the rest of the stream.
    """
    positions = rng.uniform(config.minx, config.maxx, size=(config.num_particles, config.dim))
    for k, row in enumerate(initial_positions[: config.num_particles]):
        positions[k] = np.clip(np.asarray(row, dtype=float), config.minx, config.maxx)
    particles = []
    best_pos, best_fit = None, np.inf
    for pos in positions:
        fit = float(objective(pos))
        particles.append(Particle(pos.copy(), np.zeros(config.dim), fit, pos.copy(), fit))
        if best_pos is None or fit < best_fit:
            best_pos, best_fit = pos.copy(), fit
    return Swarm(particles, best_pos, best_fit, 0, len(particles))


def step(swarm: Swarm, config: PsoConfig, objective: Objective, rng) -> Swarm:
    """Advance ``swarm`` by one iteration in place and return it.

    ``rng`` only needs a ``random(size)`` method returning Uniform(0, 1)
    draws; all of an iteration's draws are taken before any particle moves.
    """
    n, d = len(swarm.particles), config.dim
    r1 = np.asarray(rng.random((n, d)), dtype=float).reshape(n, d)
    r2 = np.asarray(rng.random((n, d)), dtype=float).reshape(n, d)
    cap = config.velocity_cap
    for i, p in enumerate(swarm.particles):
        v = (config.w * p.velocity
             + r1[i] * config.c1 * (p.best_position - p.position)
             + r2[i] * config.c2 * (swarm.global_best_position - p.position))
        p.velocity = np.clip(v, -cap, cap)
        p.position = np.clip(p.position + p.velocity, config.minx, config.maxx)
        p.fitness = float(objective(p.position))
        swarm.evaluations += 1
        if p.fitness < p.best_fitness:
            p.best_fitness = p.fitness
            p.best_position = p.position.copy()
        if p.fitness < swarm.global_best_fitness:
            swarm.global_best_fitness = p.fitness
            swarm.global_best_position = p.position.copy()
    swarm.iteration += 1
    return swarm


class PsoResult(NamedTuple):
    best_position: np.ndarray
    best_fitness: float
    trace: list[float]
    initial_fitness: float


def run(
    config: PsoConfig,
    objective: Objective,
    initial_positions: Sequence[Sequence[float]] = (),
    callback: Callable[[Swarm], None] | None = None,
) -> PsoResult:
    """Run ``config.max_iter`` iterations from a seeded random swarm.

    ``trace[t]`` is the global best fitness after iteration ``t + 1``.
    """
    rng = np.random.default_rng(config.seed)
    swarm = init_swarm(config, objective, rng, initial_positions)
    initial = swarm.global_best_fitness
    trace = []
    for _ in range(config.max_iter):
        step(swarm, config, objective, rng)
        trace.append(swarm.global_best_fitness)
        if callback is not None:
            callback(swarm)
    return PsoResult(swarm.global_best_position.copy(), swarm.global_best_fitness, trace, initial)
