"""Readers and writers for the network, catalog and plan documents (YAML)."""

from __future__ import annotations

import math
from dataclasses import asdict, fields
from pathlib import Path
from typing import Any

import yaml

from .network import Branch, Bus, Device, Network
from .strategy import Catalog, ConductorClass, CostModel, EvaluationResult, Strategy, TransformerClass


class FormatError(ValueError):
    """A document is malformed or violates a load-time rule (e.g. duplicate ids)."""


def _build(cls, raw: Any, where: str):
    if not isinstance(raw, dict):
        raise FormatError(f"{where}: expected a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(cls) if f.init and not f.name.startswith("_")}
    unknown = set(raw) - known
    if unknown:
        raise FormatError(f"{where}: unknown field(s) {sorted(unknown)}")
    try:
        obj = cls(**raw)
    except TypeError as exc:
        raise FormatError(f"{where}: {exc}") from None
    for f in fields(cls):
        if f.name in ("id", "bus", "from_bus", "to_bus", "name"):
            val = getattr(obj, f.name)
            if not isinstance(val, str):
                object.__setattr__(obj, f.name, str(val))
    return obj


def _unique(items, label):
    seen = set()
    for item in items:
        key = item.id if hasattr(item, "id") else item.name
        if key in seen:
            raise FormatError(f"duplicate {label} id {key!r}")
        seen.add(key)


def _load_yaml(path_or_text) -> Any:
    if isinstance(path_or_text, Path):
        text = path_or_text.read_text()
    else:
        text = path_or_text
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise FormatError(f"not a valid YAML document: {exc}") from None


def network_from_dict(doc: dict) -> Network:
    if not isinstance(doc, dict):
        raise FormatError("network document must be a mapping")
    extra = set(doc) - {"name", "base_mva", "base_kv", "buses", "branches", "devices"}
    if extra:
        raise FormatError(f"network: unknown field(s) {sorted(extra)}")
    buses = [_build(Bus, b, f"buses[{k}]") for k, b in enumerate(doc.get("buses") or [])]
    branches = [_build(Branch, b, f"branches[{k}]") for k, b in enumerate(doc.get("branches") or [])]
    devices = [_build(Device, d, f"devices[{k}]") for k, d in enumerate(doc.get("devices") or [])]
    _unique(buses, "bus")
    _unique(branches, "branch")
    _unique(devices, "device")
    return Network(buses=buses, branches=branches, devices=devices,
                   base_mva=float(doc.get("base_mva", 10.0)),
                   base_kv=float(doc.get("base_kv", 11.0)),
                   name=str(doc.get("name", "")))


def network_to_dict(network: Network) -> dict:
    return {
        "name": network.name,
        "base_mva": network.base_mva,
        "base_kv": network.base_kv,
        "buses": [asdict(b) for b in network.buses],
        "branches": [asdict(b) for b in network.branches],
        "devices": [asdict(d) for d in network.devices],
    }


def read_network(path) -> Network:
    return network_from_dict(_load_yaml(Path(path)))


def write_network(network: Network, path) -> None:
    Path(path).write_text(yaml.safe_dump(network_to_dict(network), sort_keys=False))


CATALOG_KEYS = {"currency", "energy_price", "horizon", "eta", "q_min", "q_max", "mu_max",
                "conductors", "transformers", "compensation"}


def cost_model_from_dict(doc: dict, **overrides) -> tuple[CostModel, str]:
    """Build a cost model; keyword ``overrides`` that are not ``None`` win over the document."""
    if not isinstance(doc, dict):
        raise FormatError("catalog document must be a mapping")
    extra = set(doc) - CATALOG_KEYS
    if extra:
        raise FormatError(f"catalog: unknown field(s) {sorted(extra)}")
    conductors = [_build(ConductorClass, c, f"conductors[{k}]")
                  for k, c in enumerate(doc.get("conductors") or [])]
    transformers = [_build(TransformerClass, t, f"transformers[{k}]")
                    for k, t in enumerate(doc.get("transformers") or [])]
    _unique(conductors, "conductor")
    _unique(transformers, "transformer")
    comp = doc.get("compensation") or {}
    extra = set(comp) - {"step", "cost_per_pu", "fixed_cost"}
    if extra:
        raise FormatError(f"compensation: unknown field(s) {sorted(extra)}")
    catalog = Catalog(
        conductors=tuple(conductors),
        transformers=tuple(transformers),
        compensation_step=float(comp.get("step", 0.05)),
        compensation_cost_per_pu=float(comp.get("cost_per_pu", 0.0)),
        compensation_fixed_cost=float(comp.get("fixed_cost", 0.0)),
    )
    params = {k: doc[k] for k in ("energy_price", "horizon", "eta", "q_min", "q_max", "mu_max") if k in doc}
    params.update({k: v for k, v in overrides.items() if v is not None})
    missing = {"energy_price", "horizon", "eta"} - set(params)
    if missing:
        raise FormatError(f"cost model needs {sorted(missing)}")
    try:
        model = CostModel(catalog=catalog, **{k: float(v) for k, v in params.items()})
    except ValueError as exc:
        raise FormatError(str(exc)) from None
    return model, str(doc.get("currency", "currency units"))


def read_cost_model(path, **overrides) -> tuple[CostModel, str]:
    return cost_model_from_dict(_load_yaml(Path(path)), **overrides)


def _num(x):
    if x is None:
        return None
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return float(x)


def result_to_dict(result: EvaluationResult) -> dict:
    out = {k: _num(getattr(result, k)) for k in (
        "c_loss_before", "c_loss_after", "c_lr", "b_lr", "total_cost",
        "p_loss_before", "p_loss_after", "loss_rate_before", "loss_rate_after")}
    out["mu_lr"] = "NA" if result.mu_lr is None else float(result.mu_lr)
    out["feasible"] = result.feasible
    c = result.constraints
    if c is not None:
        out["constraints"] = {
            "voltage_violations": [list(v) for v in c.voltage_violations],
            "current_violations": [list(v) for v in c.current_violations],
            "compensation_violations": [list(v) for v in c.compensation_violations],
            "loss_rate_percent": float(c.loss_rate_percent),
            "loss_rate_ok": bool(c.loss_rate_ok),
        }
    return out


def plan_to_dict(method: str, plan, result: EvaluationResult) -> dict:
    return {
        "method": method,
        "strategies": [asdict(s) for s in plan],
        "result": result_to_dict(result),
    }


def write_plan(path, method: str, plan, result: EvaluationResult) -> None:
    Path(path).write_text(yaml.safe_dump(plan_to_dict(method, plan, result), sort_keys=False))


def read_plan(path) -> tuple[str, list[Strategy], dict]:
    doc = _load_yaml(Path(path))
    if not isinstance(doc, dict) or "strategies" not in doc:
        raise FormatError(f"{path}: not a plan document")
    plan = [_build(Strategy, s, f"strategies[{k}]") for k, s in enumerate(doc["strategies"] or [])]
    return str(doc.get("method", "")), plan, doc.get("result") or {}
