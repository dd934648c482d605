"""Scenario configuration: one validated, serializable object describing a
complete experiment (geometry, stations, link models, traffic, rewards,
learner settings and run lengths).

Scenario files are YAML with the exact nested structure produced by
``scenario_to_dict``; unknown keys are rejected so typos fail loudly. Every
artifact written by the harness embeds the scenario's content hash for
provenance.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, fields, replace
from typing import Optional

import yaml

from .constellation import GroundStation, WalkerConfig, gs_id
from .env import RewardConfig
from .errors import ConfigurationError
from .learner import LagrangeState, LearnerConfig
from .linkmodel import GslParams, IslParams, RateModel
from .netsim import SimConfig, TrafficConfig

DEFAULT_STATIONS = (
    ("luxembourg", 49.6116, 6.1319),
    ("dubai", 25.2048, 55.2708),
    ("beijing", 39.9042, 116.4074),
)


@dataclass(frozen=True)
class RunConfig:
    epoch_s: float = 30.0
    epochs: int = 1                     # consecutive training epochs
    report_interval_s: float = 2.0
    train_interval_s: float = 0.001
    dqmax_s: float = 0.01               # per-packet queuing budget
    hidden_dim: int = 512
    seed: int = 0
    eval_epoch_s: Optional[float] = None   # defaults to epoch_s

    def __post_init__(self):
        if self.epoch_s <= 0 or self.epochs < 1:
            raise ConfigurationError("epoch_s must be positive, epochs >= 1")
        if self.report_interval_s <= 0 or self.train_interval_s <= 0:
            raise ConfigurationError("intervals must be positive")
        if self.dqmax_s <= 0:
            raise ConfigurationError("dqmax_s must be positive")


@dataclass(frozen=True)
class MadqnConfig:
    cost_sign: float = 1.0              # shaped reward is r + sign * sum(costs)
    eps_start: float = 1.0
    eps_end: float = 0.05
    eps_decay_steps: int = 2000


@dataclass(frozen=True)
class Scenario:
    name: str = "desk"
    walker: WalkerConfig = WalkerConfig(12, 8, 600e3, 53.0, 1)
    stations: tuple[GroundStation, ...] = tuple(
        GroundStation(gs_id(i), lat, lon, 10.0, name)
        for i, (name, lat, lon) in enumerate(DEFAULT_STATIONS))
    sim: SimConfig = SimConfig()
    traffic: TrafficConfig = TrafficConfig(rate_pps=10_000.0)
    reward: RewardConfig = RewardConfig()
    learner: LearnerConfig = LearnerConfig()
    madqn: MadqnConfig = MadqnConfig()
    run: RunConfig = RunConfig()
    lagrange_thresholds: tuple[float, ...] = (0.1,)   # dqmax / delay_norm
    lagrange_risk_levels: tuple[float, ...] = (0.25,)
    lagrange_alpha0: float = 0.1
    entropy_target: float = 0.067

    @property
    def epoch_s(self) -> float:
        return self.run.epoch_s

    def lagrange_state(self) -> LagrangeState:
        import numpy as np
        k = len(self.lagrange_thresholds)
        return LagrangeState(lam=np.zeros(k), alpha=self.lagrange_alpha0,
                             thresholds=np.array(self.lagrange_thresholds),
                             risk_levels=np.array(self.lagrange_risk_levels),
                             entropy_target=self.entropy_target)


# ---------------------------------------------------------------------------
# dict <-> dataclass plumbing

def _plain(obj):
    if isinstance(obj, (WalkerConfig, SimConfig, TrafficConfig, RewardConfig,
                        LearnerConfig, RunConfig, MadqnConfig, GslParams,
                        IslParams, RateModel)):
        return {f.name: _plain(getattr(obj, f.name)) for f in fields(obj)}
    if isinstance(obj, (list, tuple)):
        return [_plain(x) for x in obj]
    return obj


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "name": s.name,
        "walker": _plain(s.walker),
        "stations": [{"name": gs.name, "latitude_deg": gs.latitude_deg,
                      "longitude_deg": gs.longitude_deg,
                      "min_elevation_deg": gs.min_elevation_deg}
                     for gs in s.stations],
        "sim": _plain(s.sim),
        "traffic": _plain(s.traffic),
        "reward": _plain(s.reward),
        "learner": _plain(s.learner),
        "madqn": _plain(s.madqn),
        "run": _plain(s.run),
        "lagrange": {
            "thresholds": list(s.lagrange_thresholds),
            "risk_levels": list(s.lagrange_risk_levels),
            "alpha0": s.lagrange_alpha0,
            "entropy_target": s.entropy_target,
        },
    }


def _build(cls, data: dict, where: str):
    allowed = {f.name for f in fields(cls)}
    unknown = set(data) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(unknown)}")
    return cls(**data)


def _tupled(data: dict, key: str) -> dict:
    if key in data and isinstance(data[key], list):
        data = dict(data)
        data[key] = tuple(tuple(x) if isinstance(x, list) else x for x in data[key])
    return data


def scenario_from_dict(d: dict) -> Scenario:
    allowed = {"name", "walker", "stations", "sim", "traffic", "reward",
               "learner", "madqn", "run", "lagrange"}
    unknown = set(d) - allowed
    if unknown:
        raise ConfigurationError(f"unknown top-level keys: {sorted(unknown)}")
    kw: dict = {"name": d.get("name", "scenario")}
    if "walker" in d:
        kw["walker"] = _build(WalkerConfig, d["walker"], "walker")
    if "stations" in d:
        sts = []
        for i, st in enumerate(d["stations"]):
            extra = set(st) - {"name", "latitude_deg", "longitude_deg",
                               "min_elevation_deg"}
            if extra:
                raise ConfigurationError(f"unknown keys in stations[{i}]: {sorted(extra)}")
            sts.append(GroundStation(gs_id(i), st["latitude_deg"], st["longitude_deg"],
                                     st.get("min_elevation_deg", 10.0),
                                     st.get("name", f"gs{i}")))
        kw["stations"] = tuple(sts)
    if "sim" in d:
        sim_d = dict(d["sim"])
        for key, cls in (("gsl_params", GslParams), ("isl_params", IslParams),
                         ("gsl_rate_model", RateModel), ("isl_rate_model", RateModel)):
            if key in sim_d:
                sim_d[key] = _build(cls, sim_d[key], f"sim.{key}")
        kw["sim"] = _build(SimConfig, sim_d, "sim")
    if "traffic" in d:
        kw["traffic"] = _build(TrafficConfig, _tupled(dict(d["traffic"]), "size_mix"),
                               "traffic")
    if "reward" in d:
        kw["reward"] = _build(RewardConfig, d["reward"], "reward")
    if "learner" in d:
        kw["learner"] = _build(LearnerConfig, d["learner"], "learner")
    if "madqn" in d:
        kw["madqn"] = _build(MadqnConfig, d["madqn"], "madqn")
    if "run" in d:
        kw["run"] = _build(RunConfig, d["run"], "run")
    if "lagrange" in d:
        lag = d["lagrange"]
        extra = set(lag) - {"thresholds", "risk_levels", "alpha0", "entropy_target"}
        if extra:
            raise ConfigurationError(f"unknown keys in lagrange: {sorted(extra)}")
        kw["lagrange_thresholds"] = tuple(lag.get("thresholds", (0.1,)))
        kw["lagrange_risk_levels"] = tuple(lag.get("risk_levels", (0.25,)))
        kw["lagrange_alpha0"] = lag.get("alpha0", 0.1)
        kw["entropy_target"] = lag.get("entropy_target", 0.067)
    return Scenario(**kw)


def save_scenario(s: Scenario, path) -> None:
    with open(path, "w") as fh:
        yaml.safe_dump(scenario_to_dict(s), fh, sort_keys=False)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(yaml.safe_load(fh))


def scenario_hash(s: Scenario) -> str:
    blob = json.dumps(scenario_to_dict(s), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# presets

def desk_scenario(**overrides) -> Scenario:
    """Desk-scale default: a 12x8 grid at 600 km with three stations and
    25 Mbps ISLs, so the shortest-path corridor between station pairs is
    oversubscribed (a persistent hotspot) while the run stays light enough
    to simulate quickly. At 15 degrees minimum elevation this constellation
    leaves coverage gaps, so stations use 10 degrees."""
    s = Scenario(
        name="desk",
        walker=WalkerConfig(12, 8, 600e3, 53.0, 1),
        sim=SimConfig(ttl_hops=24, link_buffer_bits=2_000_000,
                      node_buffer_bits=4_000_000,
                      isl_rate_model=RateModel("fixed", 25e6)),
        traffic=TrafficConfig(rate_pps=2600.0),
        # drop penalties rescaled to the short desk TTL so terminal targets
        # stay within the critics' working range
        reward=RewardConfig(ttl_penalty_scale=0.25),
        learner=LearnerConfig(batch_size=128, n_quantiles=8, n_target_quantiles=8,
                              n_cvar_samples=8, eta=0.01, lr_actor=3e-4,
                              lr_critic=1e-3, lr_lambda=1e-3, lr_alpha=5e-3,
                              buffer_capacity=200_000),
        run=RunConfig(epoch_s=10.0, epochs=6, report_interval_s=2.0,
                      train_interval_s=0.005, dqmax_s=0.01, hidden_dim=64),
        lagrange_alpha0=0.5,
    )
    return replace(s, **overrides) if overrides else s


def paper_scale_scenario(**overrides) -> Scenario:
    """Full-scale configuration: 72 planes of 22 satellites at 600 km,
    10k packets/s over 30 s epochs, 512-unit networks. Supported as
    configuration; heavy to run on a desk."""
    s = Scenario(
        name="paper-scale",
        walker=WalkerConfig(72, 22, 600e3, 53.0, 1),
        stations=tuple(GroundStation(gs_id(i), lat, lon, 15.0, name)
                       for i, (name, lat, lon) in enumerate(DEFAULT_STATIONS)),
        sim=SimConfig(ttl_hops=64),
        traffic=TrafficConfig(rate_pps=10_000.0),
        learner=LearnerConfig(),
        run=RunConfig(epoch_s=30.0, epochs=5, hidden_dim=512),
    )
    return replace(s, **overrides) if overrides else s
