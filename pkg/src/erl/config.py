"""Run configuration: search budgets, logic selection, output control.

Environment variables with the prefix ``ERL_`` (e.g. ``ERL_MAX_CONSTANTS``)
override the defaults; explicit CLI flags override both.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

ERL = "erl"
ERL_STAR = "erl-star"

_LOGICS = (ERL, ERL_STAR)


def is_star(logic: str) -> bool:
    if logic not in _LOGICS:
        raise ValueError(f"unknown logic {logic!r}; expected one of {_LOGICS}")
    return logic == ERL_STAR


@dataclass(frozen=True)
class Budget:
    """Resource limits for proof search and constraint saturation.

    ``closure_max_card`` bounds the cardinality of labels produced by
    closure rules; ``None`` selects 2 + the largest base-constraint label.
    Budgets never fail a computation, they truncate it and set a flag.
    """

    max_constants: int = 8
    max_steps: int = 10_000
    closure_max_card: int | None = 6
    closure_max_facts: int = 200_000

    def __post_init__(self):
        if self.max_constants < 0 or self.max_steps <= 0:
            raise ValueError("budgets must be positive")
        if self.closure_max_card is not None and self.closure_max_card < 1:
            raise ValueError("closure_max_card must be >= 1")


@dataclass(frozen=True)
class RunConfig:
    logic: str = ERL
    budget: Budget = field(default_factory=Budget)
    carrier_bound: int = 4
    output: str = "text"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        is_star(self.logic)
        if self.carrier_bound < 1 or self.workers < 1:
            raise ValueError("budgets must be positive")
        if self.output not in ("text", "json"):
            raise ValueError(f"unknown output mode {self.output!r}")


_ENV_INT = ("MAX_CONSTANTS", "MAX_STEPS", "CLOSURE_BUDGET", "CARRIER_BOUND",
            "SEED", "WORKERS")


def config_from_env(base: RunConfig | None = None,
                    env: dict | None = None) -> RunConfig:
    """Apply ``ERL_*`` environment overrides on top of ``base``."""
    env = os.environ if env is None else env
    cfg = base if base is not None else RunConfig()
    budget = cfg.budget

    def _int(name):
        raw = env.get("ERL_" + name)
        return None if raw is None else int(raw)

    vals = {name: _int(name) for name in _ENV_INT}
    if vals["MAX_CONSTANTS"] is not None:
        budget = replace(budget, max_constants=vals["MAX_CONSTANTS"])
    if vals["MAX_STEPS"] is not None:
        budget = replace(budget, max_steps=vals["MAX_STEPS"])
    if vals["CLOSURE_BUDGET"] is not None:
        budget = replace(budget, closure_max_card=vals["CLOSURE_BUDGET"])
    cfg = replace(cfg, budget=budget)
    if vals["CARRIER_BOUND"] is not None:
        cfg = replace(cfg, carrier_bound=vals["CARRIER_BOUND"])
    if vals["SEED"] is not None:
        cfg = replace(cfg, seed=vals["SEED"])
    if vals["WORKERS"] is not None:
        cfg = replace(cfg, workers=vals["WORKERS"])
    if env.get("ERL_LOGIC"):
        cfg = replace(cfg, logic=env["ERL_LOGIC"])
    if env.get("ERL_OUTPUT"):
        cfg = replace(cfg, output=env["ERL_OUTPUT"])
    return cfg
