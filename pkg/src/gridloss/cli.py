"""``gridloss`` command line: dataset ingestion, PSO benchmark, feeder optimization.

Exit codes: 0 success, 1 domain or I/O error, 2 usage error.
"""

from __future__ import annotations

import csv
import time
from pathlib import Path

import click

from . import consumption
from .compensation import optimize_compensation
from .io import FormatError, read_cost_model, read_network, write_plan
from .network import NetworkError, validate
from .pso import PsoConfig, rastrigin, run
from .report import ComparisonReport, MethodOutcome, bar_chart, line_chart, verify_with_oracle
from .strategy import InfeasibleNetworkError, optimize as greedy_optimize

OUTPUT_ENV = "GRIDLOSS_OUTPUT_DIR"
LOG_EVERY = 5


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _open_input(path: str):
    try:
        return open(path, newline="")
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc.strerror}") from None


output_option = click.option(
    "--output-dir", "-o", envvar=OUTPUT_ENV, default="gridloss-out", show_default=True,
    help=f"Directory for output files (env: {OUTPUT_ENV}).",
)


@click.group()
def main():
    """Distribution-feeder loss reduction: cost-benefit greedy vs particle swarm."""


@main.command()
@click.option("--dataset", required=True, help="Household consumption file.")
@click.option("--window", default=20, show_default=True, type=click.IntRange(min=1))
@click.option("--separator", type=click.Choice([";", ","]), default=";", show_default=True)
@click.option("--missing", type=click.Choice(["zero", "skip"]), default="zero", show_default=True,
              help="Treat missing values as 0, or drop windows containing one.")
@output_option
def ingest(dataset, window, separator, missing, output_dir):
    """Parse the dataset and write windowed CLR/BLR/ULR metrics."""
    with _open_input(dataset) as fh:
        try:
            parsed = consumption.parse(fh, separator)
        except consumption.HeaderError as exc:
            raise click.ClickException(f"{dataset}: {exc}") from None
    metrics = consumption.window_metrics(parsed.records, window, missing)
    out = _outdir(output_dir) / "metrics.csv"
    with open(out, "w", newline="") as fh:
        consumption.write_metrics(metrics, fh)
    undefined = sum(1 for m in metrics if m.ulr is None)
    click.echo(f"records={len(parsed.records)} skipped={parsed.skipped} "
               f"windows={len(metrics)} undefined_ulr={undefined}")
    if metrics:
        m = metrics[0]
        click.echo(f"first window: clr={m.clr!r} blr={m.blr!r} "
                   f"ulr={consumption.NA if m.ulr is None else repr(m.ulr)}")
    click.echo(f"wrote {out}")


@main.command("pso-bench")
@click.option("--dim", default=200, show_default=True, type=int)
@click.option("--particles", default=10, show_default=True, type=int)
@click.option("--iters", default=100, show_default=True, type=int)
@click.option("--minx", default=-10.0, show_default=True, type=float)
@click.option("--maxx", default=10.0, show_default=True, type=float)
@click.option("--w", default=0.729, show_default=True, type=float)
@click.option("--c1", default=1.49445, show_default=True, type=float)
@click.option("--c2", default=1.49445, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--plot/--no-plot", default=True, show_default=True)
@output_option
def pso_bench(dim, particles, iters, minx, maxx, w, c1, c2, seed, plot, output_dir):
    """Minimize the Rastrigin function and log the global best every 5 iterations."""
    try:
        config = PsoConfig(num_particles=particles, max_iter=iters, dim=dim, w=w, c1=c1, c2=c2,
                           minx=minx, maxx=maxx, seed=seed)
    except ValueError as exc:
        raise click.ClickException(f"invalid PSO configuration: {exc}") from None
    click.echo(f"rastrigin dim={dim} num_particles={particles} max_iter={iters} seed={seed}")

    def log(swarm):
        if swarm.iteration % LOG_EVERY == 0:
            click.echo(f"Iter = {swarm.iteration} best fitness = {swarm.global_best_fitness:.3f}")

    result = run(config, rastrigin, callback=log)
    click.echo(f"Fitness of best solution = {result.best_fitness:.6f}")
    out = _outdir(output_dir)
    with open(out / "pso_trace.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["iteration", "best_fitness"])
        writer.writerows([k + 1, repr(v)] for k, v in enumerate(result.trace))
    if plot:
        (out / "pso_fitness.svg").write_text(
            line_chart({"global best": result.trace}, "PSO on Rastrigin", "iteration", "fitness"))


def _write_series(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


@main.command()
@click.option("--network", "network_path", required=True, help="Network YAML file.")
@click.option("--catalog", "catalog_path", required=True, help="Catalog / cost model YAML file.")
@click.option("--method", type=click.Choice(["greedy", "pso", "both"]), default="both", show_default=True)
@click.option("--energy-price", type=float, default=None, help="Override: currency per MWh.")
@click.option("--horizon", type=float, default=None, help="Override: hours.")
@click.option("--eta", type=float, default=None, help="Override: loss-rate target in percent.")
@click.option("--top-k", type=click.IntRange(min=1), default=None, help="Weak points considered per step.")
@click.option("--particles", default=20, show_default=True, type=click.IntRange(min=1))
@click.option("--iters", default=60, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--plot-format", type=click.Choice(["svg", "csv"]), default="svg", show_default=True)
@output_option
def optimize(network_path, catalog_path, method, energy_price, horizon, eta, top_k,
             particles, iters, seed, plot_format, output_dir):
    """Run the greedy optimizer, the PSO compensation optimizer, or both."""
    for p in (network_path, catalog_path):
        if not Path(p).is_file():
            raise click.ClickException(f"cannot read {p}: no such file")
    try:
        network = read_network(network_path)
        cost_model, currency = read_cost_model(catalog_path, energy_price=energy_price,
                                               horizon=horizon, eta=eta)
    except FormatError as exc:
        raise click.ClickException(str(exc)) from None
    report = validate(network)
    if report:
        raise click.ClickException(f"{network_path}: invalid network\n{report}")

    out = _outdir(output_dir)
    outcomes = []
    try:
        if method in ("greedy", "both"):
            t0 = time.perf_counter()
            res = greedy_optimize(network, cost_model, top_k=top_k)
            outcomes.append(MethodOutcome("greedy", res.plan, res.result, time.perf_counter() - t0,
                                          [s.mu_lr for s in res.trace], stop_reason=res.stop_reason))
        if method in ("pso", "both"):
            t0 = time.perf_counter()
            res = optimize_compensation(network, cost_model,
                                        PsoConfig(num_particles=particles, max_iter=iters, seed=seed))
            outcomes.append(MethodOutcome("pso", res.plan, res.result, time.perf_counter() - t0,
                                          list(res.trace)))
    except (InfeasibleNetworkError, NetworkError) as exc:
        raise click.ClickException(f"infeasible instance: {exc}") from None

    for o in outcomes:
        o.oracle = verify_with_oracle(network, o.plan, cost_model, o.result)
        write_plan(out / f"plan_{o.method}.yaml", o.method, o.plan, o.result)

    comparison = ComparisonReport(
        header={"network": network.name or Path(network_path).stem, "seed": seed,
                "base_mva": network.base_mva, "base_kv": network.base_kv, "currency": currency,
                "energy_price": cost_model.energy_price, "horizon": cost_model.horizon,
                "eta": cost_model.eta, "method": method},
        outcomes=outcomes,
    )
    (out / "report.json").write_text(comparison.to_json())
    text = comparison.render_text()
    (out / "report.txt").write_text(text)
    _write_plots(out, comparison, plot_format)
    click.echo(text, nl=False)
    click.echo(f"wrote outputs to {out}")


def _write_plots(out: Path, comparison: ComparisonReport, plot_format: str):
    na = lambda v: "NA" if v is None else repr(v)  # noqa: E731
    for o in comparison.outcomes:
        if o.method == "greedy":
            if plot_format == "svg":
                (out / "greedy_mu.svg").write_text(
                    line_chart({"mu_LR": o.trace}, "Greedy: cost-benefit ratio per step", "step", "mu_LR"))
            else:
                _write_series(out / "greedy_mu.csv", ["step", "mu_lr"],
                              [[k + 1, na(v)] for k, v in enumerate(o.trace)])
        else:
            if plot_format == "svg":
                (out / "pso_fitness.svg").write_text(
                    line_chart({"global best": o.trace}, "PSO: global best fitness", "iteration", "fitness"))
            else:
                _write_series(out / "pso_fitness.csv", ["iteration", "best_fitness"],
                              [[k + 1, repr(v)] for k, v in enumerate(o.trace)])
    bars = {o.method: o.mu_lr for o in comparison.outcomes}
    if plot_format == "svg":
        (out / "cost_benefit.svg").write_text(bar_chart(bars, "Cost-benefit ratio by method", "mu_LR"))
    else:
        _write_series(out / "cost_benefit.csv", ["method", "mu_lr"], [[m, na(v)] for m, v in bars.items()])


if __name__ == "__main__":
    main()
