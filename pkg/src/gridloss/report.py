"""Comparison report for the two optimizers and simple SVG line/bar charts."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from html import escape
from typing import Sequence

from .io import result_to_dict
from .network import Network
from .oracle import gauss_seidel
from .strategy import CostModel, EvaluationResult, Strategy, apply_plan

NA = "NA"
METRICS = ("total_cost", "mu_lr", "loss_rate_after")


def fmt(value, digits: int = 4) -> str:
    if value is None:
        return NA
    if isinstance(value, float) and not math.isfinite(value):
        return NA
    return f"{value:.{digits}f}"


def verify_with_oracle(network: Network, plan: Sequence[Strategy], cost_model: CostModel,
                       result: EvaluationResult) -> dict:
    """Re-solve the modified network with Gauss-Seidel and compare the loss."""
    modified = apply_plan(network, plan, cost_model.catalog)
    sol = gauss_seidel(modified)
    c_after = cost_model.loss_cost(network, sol.total_loss)
    rel = abs(c_after - result.c_loss_after) / max(abs(result.c_loss_after), 1e-300)
    return {
        "converged": sol.converged,
        "p_loss_after": sol.total_loss,
        "c_loss_after": c_after,
        "abs_diff_p_loss": abs(sol.total_loss - result.p_loss_after),
        "rel_diff_c_loss": rel,
    }


@dataclass
class MethodOutcome:
    method: str
    plan: list[Strategy]
    result: EvaluationResult
    runtime_s: float
    trace: list[float]
    oracle: dict = field(default_factory=dict)
    stop_reason: str = ""

    @property
    def mu_lr(self) -> float | None:
        return self.result.mu_lr


def _metric(outcome: MethodOutcome, metric: str):
    if metric == "mu_lr":
        return outcome.result.mu_lr
    return getattr(outcome.result, metric)


def winners(outcomes: Sequence[MethodOutcome]) -> dict[str, str]:
    """Lowest value wins for every metric; ``"tie"`` on equality, ``NA`` if no method has a value."""
    out = {}
    for metric in METRICS:
        scored = [(o.method, _metric(o, metric)) for o in outcomes]
        scored = [(m, v) for m, v in scored if v is not None and math.isfinite(v)]
        if not scored:
            out[metric] = NA
            continue
        best = min(v for _, v in scored)
        names = sorted(m for m, v in scored if v == best)
        out[metric] = names[0] if len(names) == 1 else "tie"
    return out


@dataclass
class ComparisonReport:
    header: dict
    outcomes: list[MethodOutcome]

    @property
    def winners(self) -> dict[str, str]:
        return winners(self.outcomes)

    def outcome(self, method: str) -> MethodOutcome:
        for o in self.outcomes:
            if o.method == method:
                return o
        raise KeyError(method)

    def to_dict(self) -> dict:
        return {
            "header": self.header,
            "methods": {
                o.method: {
                    "plan": [s.describe() for s in o.plan],
                    "action": "no action" if not o.plan else f"{len(o.plan)} strategies",
                    "mu_lr": NA if o.mu_lr is None else o.mu_lr,
                    "runtime_s": o.runtime_s,
                    "stop_reason": o.stop_reason,
                    "result": result_to_dict(o.result),
                    "oracle": o.oracle,
                    "trace": [NA if v is None else v for v in o.trace],
                }
                for o in self.outcomes
            },
            "winners": self.winners,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def render_text(self) -> str:
        h = self.header
        lines = [
            f"# network={h.get('network')} seed={h.get('seed')} base_mva={h.get('base_mva')} "
            f"base_kv={h.get('base_kv')} currency={h.get('currency')}",
            "",
        ]
        cols = ["method", "strategies", "c_loss_before", "c_loss_after", "c_lr", "b_lr",
                "mu_lr", "total_cost", "loss_rate_%", "oracle_rel_diff", "runtime_s"]
        rows = []
        for o in self.outcomes:
            r = o.result
            rows.append([
                o.method,
                "no action" if not o.plan else str(len(o.plan)),
                fmt(r.c_loss_before, 2), fmt(r.c_loss_after, 2), fmt(r.c_lr, 2), fmt(r.b_lr, 2),
                fmt(r.mu_lr), fmt(r.total_cost, 2), fmt(r.loss_rate_after, 3),
                fmt(o.oracle.get("rel_diff_c_loss"), 10) if o.oracle else NA,
                fmt(o.runtime_s, 3),
            ])
        widths = [max(len(c), *(len(row[k]) for row in rows)) for k, c in enumerate(cols)]
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)))
        lines.extend("  ".join(v.ljust(w) for v, w in zip(row, widths)) for row in rows)
        lines.append("")
        for o in self.outcomes:
            lines.append(f"{o.method} plan: " + (", ".join(s.describe() for s in o.plan) or "no action"))
        lines.append("")
        lines.extend(f"winner[{k}] = {v}" for k, v in self.winners.items())
        return "\n".join(lines) + "\n"


# --- SVG ------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H, _PAD = 640, 400, 60


def _scale(lo, hi):
    if not math.isfinite(lo) or not math.isfinite(hi):
        return 0.0, 1.0
    if hi == lo:
        pad = abs(hi) * 0.05 or 1.0
        return lo - pad, hi + pad
    return lo, hi


def _frame(title, xlabel, ylabel, y0, y1) -> list[str]:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="16">{escape(title)}</text>',
        f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - 20}" y2="{_H - _PAD}" stroke="black"/>',
        f'<line x1="{_PAD}" y1="{_PAD - 20}" x2="{_PAD}" y2="{_H - _PAD}" stroke="black"/>',
        f'<text x="{_W / 2}" y="{_H - 15}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>',
        f'<text x="15" y="{_H / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {_H / 2})">{escape(ylabel)}</text>',
        f'<text x="{_PAD - 5}" y="{_H - _PAD}" text-anchor="end" font-size="10">{y0:.4g}</text>',
        f'<text x="{_PAD - 5}" y="{_PAD - 15}" text-anchor="end" font-size="10">{y1:.4g}</text>',
    ]
    return parts


def line_chart(series: dict[str, Sequence[float | None]], title: str, xlabel: str, ylabel: str) -> str:
    """Polyline per series; ``None`` points are left out."""
    values = [v for ys in series.values() for v in ys if v is not None and math.isfinite(v)]
    y0, y1 = _scale(min(values, default=0.0), max(values, default=1.0))
    n = max((len(ys) for ys in series.values()), default=1)
    parts = _frame(title, xlabel, ylabel, y0, y1)
    sx = (_W - 20 - _PAD) / max(n - 1, 1)
    sy = (_H - _PAD - (_PAD - 20)) / (y1 - y0)
    for k, (name, ys) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(f"{_PAD + i * sx:.2f},{_H - _PAD - (v - y0) * sy:.2f}"
                       for i, v in enumerate(ys) if v is not None and math.isfinite(v))
        if pts:
            parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{pts}"/>')
        parts.append(f'<text x="{_W - 140}" y="{50 + 16 * k}" font-size="12" fill="{color}">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(bars: dict[str, float | None], title: str, ylabel: str) -> str:
    """One bar per label; undefined values are drawn as an ``NA`` label with no bar."""
    values = [v for v in bars.values() if v is not None and math.isfinite(v)]
    y1 = max(values, default=1.0) or 1.0
    y0 = min(0.0, min(values, default=0.0))
    parts = _frame(title, "", ylabel, y0, y1)
    slot = (_W - 20 - _PAD) / max(len(bars), 1)
    sy = (_H - _PAD - (_PAD - 20)) / (y1 - y0)
    for k, (name, v) in enumerate(bars.items()):
        x = _PAD + k * slot + slot * 0.2
        color = _COLORS[k % len(_COLORS)]
        if v is None or not math.isfinite(v):
            parts.append(f'<text x="{x + slot * 0.3:.2f}" y="{_H - _PAD - 5}" text-anchor="middle" '
                         f'font-size="12">{NA}</text>')
        else:
            h = (v - y0) * sy
            parts.append(f'<rect x="{x:.2f}" y="{_H - _PAD - h:.2f}" width="{slot * 0.6:.2f}" '
                         f'height="{h:.2f}" fill="{color}"/>')
            parts.append(f'<text x="{x + slot * 0.3:.2f}" y="{_H - _PAD - h - 4:.2f}" '
                         f'text-anchor="middle" font-size="11">{v:.4g}</text>')
        parts.append(f'<text x="{x + slot * 0.3:.2f}" y="{_H - _PAD + 16}" text-anchor="middle" '
                     f'font-size="12">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
