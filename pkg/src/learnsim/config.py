"""Declarative run configuration.

A config is a YAML (or JSON) tree validated against ``config_schema.json``
before anything is built from it.  Unknown keys are errors.  Sections with a
``type`` key are validated against the variant that type selects, so error
messages point at the exact key, e.g. ``model.gamma1``.

``variants`` lists labelled dotted-key overrides; each label becomes a
separate run (Task 1's two learners, Task 3's corrected/compat pair).
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import jsonschema
import yaml

from learnsim.engine import SimConfig
from learnsim.models import OneCompParams, TwoCompT1Params, TwoCompT2Params
from learnsim.optimizer import (
    Constraints,
    Durations,
    Levels,
    OptimizationProblem,
    SearchSettings,
)
from learnsim.policies import (
    Congruent,
    ExplicitWindows,
    PerLessonLevels,
    Polynomial,
    SchoolYears,
    TwoTier,
    YearMatrix,
)


class ConfigError(ValueError):
    """Schema or consistency error; the message starts with the offending key."""


def _load_schema() -> dict:
    text = resources.files("learnsim").joinpath("config_schema.json").read_text()
    return json.loads(text)


SCHEMA = _load_schema()
_VARIANTS = {
    "model": ("one_comp", "two_comp_t1", "two_comp_t2"),
    "schedule": ("windows", "school_years"),
    "policy": ("polynomial", "two_tier", "year_matrix", "congruent", "levels"),
}


def _error_key(prefix: str, err: jsonschema.ValidationError) -> str:
    path = [prefix] if prefix else []
    path += [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties":
        extra = sorted(set(err.instance) - set(err.schema.get("properties", {})))
        if extra:
            path.append(extra[0])
    elif err.validator == "required":
        missing = [k for k in err.validator_value if k not in err.instance]
        if missing:
            path.append(missing[0])
    return ".".join(path) or "<root>"


def _validate(instance, schema: dict, prefix: str = "") -> None:
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(instance), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise ConfigError(f"{_error_key(prefix, err)}: {err.message}")


def validate_tree(tree) -> None:
    """Raise ``ConfigError`` unless ``tree`` satisfies the schema."""
    if not isinstance(tree, dict):
        raise ConfigError("<root>: config must be a mapping")
    _validate(tree, SCHEMA)
    defs = SCHEMA["$defs"]
    for section, kinds in _VARIANTS.items():
        kind = tree[section]["type"]
        if kind not in kinds:
            raise ConfigError(f"{section}.type: {kind!r} is not one of {list(kinds)}")
        sub = dict(defs[f"{section}_{kind}"])
        sub["$defs"] = defs
        _validate(tree[section], sub, section)


def apply_overrides(tree: dict, overrides: dict) -> dict:
    """Copy of ``tree`` with ``{"a.b.c": value}`` assignments applied."""
    out = copy.deepcopy(tree)
    for dotted, value in overrides.items():
        node = out
        parts = dotted.split(".")
        for part in parts[:-1]:
            nxt = node.get(part) if isinstance(node, dict) else None
            if nxt is None:
                nxt = node[part] = {}
            if not isinstance(nxt, dict):
                raise ConfigError(f"{dotted}: {part!r} is not a section")
            node = nxt
        node[parts[-1]] = copy.deepcopy(value)
    return out


# -- building typed objects


def _poly(node) -> Polynomial:
    return Polynomial(tuple((float(p), float(c)) for p, c in node["terms"]))


def _build(section: str, fn, node):
    try:
        return fn(node)
    except (ValueError, TypeError) as exc:
        msg = str(exc)
        # dataclass validators name the field first; prefix the section
        key = msg.split(" ", 1)[0] if msg else ""
        if key and key in node:
            raise ConfigError(f"{section}.{msg}") from None
        raise ConfigError(f"{section}: {msg}") from None


def _model(m):
    kind = m["type"]
    if kind == "one_comp":
        return OneCompParams(m["alpha"], m["gamma"], m.get("b", 0.0), m.get("cutoff_c", 15.0))
    if kind == "two_comp_t1":
        return TwoCompT1Params(m["alpha1"], m["alpha2"], m["gamma1"], m["gamma2"], m.get("b", 0.0))
    return TwoCompT2Params(m["alpha1"], m["alpha2"], m["gamma1"], m["gamma2"])


def _schedule(s):
    if s["type"] == "windows":
        return ExplicitWindows(tuple((float(a), float(d)) for a, d in s["windows"]))
    kw = {k: s[k] for k in ("years", "year_length", "session_length", "final_cut") if k in s}
    return SchoolYears(**kw)


def _policy(p):
    kind = p["type"]
    if kind == "polynomial":
        return _poly(p)
    if kind == "two_tier":
        return TwoTier(_poly(p["high"]), _poly(p["low"]), p["cutoff_c"], p.get("latched", True))
    if kind == "year_matrix":
        return YearMatrix(tuple(p["u1"]), tuple(p["u2"]), tuple(p["alpha_scale"]),
                          p.get("year_length", 12.0))
    if kind == "congruent":
        return Congruent(p["cutoff_c"])
    return PerLessonLevels(tuple(float(v) for v in p["levels"]))


def _sim(s):
    return SimConfig(
        t_end=float(s["t_end"]), dt=float(s.get("dt", 0.01)),
        z1_init=float(s.get("z1_init", 0.0)), z2_init=float(s.get("z2_init", 0.0)),
        seed_knowledge=float(s.get("seed_knowledge", 0.0)),
        record_every=int(s.get("record_every", 1)), pr1_compat=bool(s.get("pr1_compat", False)),
    )


def _search(s):
    kw = dict(s)
    if kw.get("init") is not None:
        kw["init"] = tuple(float(v) for v in kw["init"])
    return SearchSettings(**kw)


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration with its typed objects built."""

    tree: dict
    name: str
    params: object
    schedule: object
    policy: object
    sim: SimConfig
    problem: OptimizationProblem | None
    output_format: str
    invented: tuple[str, ...]

    @property
    def variants(self) -> list[tuple[str, dict]]:
        return [(v["label"], v.get("set", {})) for v in self.tree.get("variants", [])]

    def expand(self) -> list[tuple[str | None, "RunConfig"]]:
        """One ``(label, config)`` per variant, or ``[(None, self)]``."""
        if not self.variants:
            return [(None, self)]
        base = {k: v for k, v in self.tree.items() if k != "variants"}
        return [(label, parse_config(apply_overrides(base, sets))) for label, sets in self.variants]

    def with_overrides(self, overrides: dict) -> "RunConfig":
        return parse_config(apply_overrides(self.tree, overrides))


def parse_config(tree: dict) -> RunConfig:
    """Validate ``tree`` and build the typed run configuration."""
    validate_tree(tree)
    params = _build("model", _model, tree["model"])
    schedule = _build("schedule", _schedule, tree["schedule"])
    policy = _build("policy", _policy, tree["policy"])
    sim = _build("sim", _sim, tree["sim"])

    if isinstance(policy, PerLessonLevels) and len(policy.levels) != schedule.n_lessons:
        raise ConfigError(
            f"policy.levels: {len(policy.levels)} levels for {schedule.n_lessons} lesson windows"
        )
    if isinstance(policy, YearMatrix) != isinstance(params, TwoCompT1Params):
        raise ConfigError("policy.type: year_matrix goes with model two_comp_t1 and only with it")

    problem = None
    opt = tree.get("optimize")
    if opt is not None:
        if isinstance(params, TwoCompT1Params):
            raise ConfigError("optimize: two_comp_t1 models cannot be optimized")
        d = opt["decision"]
        starts = tuple(float(v) for v in d["starts"])
        if d["type"] == "durations":
            if "duration" in d or "level_max" in d:
                bad = "duration" if "duration" in d else "level_max"
                raise ConfigError(f"optimize.decision.{bad}: only valid for levels decisions")
            decision = Durations(starts, d.get("shared", True))
        else:
            if "duration" not in d:
                raise ConfigError("optimize.decision.duration: required for levels decisions")
            if "shared" in d:
                raise ConfigError("optimize.decision.shared: only valid for durations decisions")
            decision = Levels(starts, float(d["duration"]), float(d.get("level_max", math.inf)))
        c = opt["constraints"]
        constraints = Constraints(
            t_eval=float(c["t_eval"]), z_min=float(c["z_min"]),
            strength_frac=float(c["strength_frac"]),
            p_max_lesson=None if c.get("p_max_lesson") is None else float(c["p_max_lesson"]),
            strict_eps=float(c.get("strict_eps", 0.0)),
        )
        search = _build("optimize.search", _search, opt.get("search", {}))
        prob_policy = None if isinstance(decision, Levels) else policy
        try:
            problem = OptimizationProblem(params, decision, constraints, prob_policy,
                                          dt=sim.dt, search=search)
        except ValueError as exc:
            raise ConfigError(f"optimize: {exc}") from None

    out = tree.get("output", {})
    return RunConfig(
        tree=copy.deepcopy(tree), name=tree.get("name", "run"), params=params,
        schedule=schedule, policy=policy, sim=sim, problem=problem,
        output_format=out.get("format", "csv"), invented=tuple(tree.get("invented", ())),
    )


def read_tree(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        tree = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"<root>: cannot parse {path}: {exc}") from None
    return tree


def load_config(path) -> RunConfig:
    return parse_config(read_tree(path))


def dump_tree(tree: dict) -> str:
    return yaml.safe_dump(tree, sort_keys=False, default_flow_style=None, width=100)
