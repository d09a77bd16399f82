"""Trial and batch configuration."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass

from ..errors import ConfigError

METHODS = ("Manual", "LlmDirect", "NoFeedback", "Full")
REASONERS = ("Rule", "Remote")
POLICIES = ("auto_approve", "wind_aware", "interactive")

ENV_ENDPOINT = "SWARMSAR_LLM_ENDPOINT"
ENV_MODEL = "SWARMSAR_LLM_MODEL"
ENV_API_KEY = "SWARMSAR_LLM_API_KEY"


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str
    model: str = "default"
    timeout: float = 60.0
    max_retries: int = 1
    api_key: str | None = None

    @classmethod
    def from_env(cls, overrides: dict | None = None) -> "RemoteConfig":
        d = dict(overrides or {})
        endpoint = d.get("endpoint") or os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise ConfigError(
                f"remote reasoner needs an endpoint (config or {ENV_ENDPOINT})"
            )
        return cls(
            endpoint=endpoint,
            model=d.get("model") or os.environ.get(ENV_MODEL, "default"),
            timeout=float(d.get("timeout", 60.0)),
            max_retries=int(d.get("max_retries", 1)),
            api_key=d.get("api_key") or os.environ.get(ENV_API_KEY),
        )


@dataclass(frozen=True)
class TrialConfig:
    seeds: tuple[int, ...] = (0,)
    method: str = "Full"
    reasoner: str = "Rule"
    policy: str = "wind_aware"
    obstacle_count: int | None = None
    survivor_count: int | None = None
    wind_zone_count: int | None = None
    utterance: str | None = None
    program_file: str | None = None  # Manual replay source
    remote: RemoteConfig | None = None
    max_replans: int = 3
    output: str | None = None           # results JSON-lines path
    audit_dir: str | None = None        # per-trial audit logs
    trajectory_log: str | None = None   # per-tick JSON-lines (single trial)
    workers: int = 1

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}")
        if self.reasoner not in REASONERS:
            raise ConfigError(f"unknown reasoner {self.reasoner!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.method == "LlmDirect" and self.reasoner != "Remote":
            raise ConfigError("LlmDirect requires the Remote reasoner")
        if self.method == "Manual" and not self.program_file:
            raise ConfigError("Manual method requires a program file")
        if self.reasoner == "Remote" and self.remote is None:
            raise ConfigError("Remote reasoner requires remote endpoint configuration")
        if not self.seeds:
            raise ConfigError("at least one seed required")


def trial_config_from_dict(doc: dict) -> TrialConfig:
    remote = None
    if doc.get("reasoner") == "Remote" or doc.get("remote"):
        remote = RemoteConfig.from_env(doc.get("remote"))
    seeds = doc.get("seeds", doc.get("seed", 0))
    if isinstance(seeds, int):
        seeds = [seeds]
    cfg = TrialConfig(
        seeds=tuple(int(s) for s in seeds),
        method=doc.get("method", "Full"),
        reasoner=doc.get("reasoner", "Rule"),
        policy=doc.get("policy", "wind_aware"),
        obstacle_count=doc.get("obstacle_count"),
        survivor_count=doc.get("survivor_count"),
        wind_zone_count=doc.get("wind_zone_count"),
        utterance=doc.get("utterance"),
        program_file=doc.get("program_file"),
        remote=remote,
        max_replans=int(doc.get("max_replans", 3)),
        output=doc.get("output"),
        audit_dir=doc.get("audit_dir"),
        trajectory_log=doc.get("trajectory_log"),
        workers=int(doc.get("workers", 1)),
    )
    cfg.validate()
    return cfg


def load_trial_config(path: str) -> TrialConfig:
    with open(path, encoding="utf-8") as f:
        return trial_config_from_dict(json.load(f))
