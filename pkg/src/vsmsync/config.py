"""
YAML scenario files.

Schema (every key is checked; unknown keys are rejected)::

    name: natural                 # optional label
    network:
      inertia: [2.0, 3.0, 2.5]
      damping: [3.0, 3.0, 3.0]
      coupling: 8.0               # scalar K0 (all-to-all) or full n x n matrix
    control:
      variant: pi-washout         # open-loop | pi | pi-washout | droop
      kp: [8.0, 4.0, 3.0]         # pi, pi-washout
      ki: [4.0, 2.0, 1.0]         # pi, pi-washout
      tau: 1.0                    # pi-washout
      droop_gain: [0.33, ...]     # droop
    disturbance:
      p_base: [0.6, -0.3, -0.3]
      t0: 3.0
      p_step: [...]               # explicit balanced step, or
      step: {node: 0, magnitude: 2.0}   # mean-removed single-node step
    integration:                  # optional section
      dt: 0.001
      t_end: 30.0
      sample_every: 10

``node`` is zero-based. Errors carry the 1-based line of the offending key.
"""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import yaml

from .errors import VsmSyncError
from .netmodel import ControlLaw, NetworkSpec, PowerSchedule, Variant, balanced_step
from .simulate import DEFAULT_DT, DEFAULT_SAMPLE_EVERY, DEFAULT_T_END, Scenario


class ConfigError(VsmSyncError, ValueError):
    def __init__(self, message, line=None, source=None):
        where = f"{source or '<config>'}:{line}: " if line is not None else f"{source or '<config>'}: "
        super().__init__(where + message)
        self.line = line
        self.source = source


_SCHEMA = {
    "name": None,
    "network": {"inertia", "damping", "coupling"},
    "control": {"variant", "kp", "ki", "tau", "droop_gain"},
    "disturbance": {"p_base", "t0", "p_step", "step"},
    "integration": {"dt", "t_end", "sample_every"},
}
_REQUIRED = {
    "network": {"inertia", "damping", "coupling"},
    "control": {"variant"},
    "disturbance": {"p_base", "t0"},
}


def _line(node):
    return node.start_mark.line + 1


class _Reader:
    def __init__(self, text, source):
        self.source = source
        self.loader = yaml.SafeLoader(text)
        try:
            self.root = self.loader.get_single_node()
        except yaml.MarkedYAMLError as exc:
            mark = exc.problem_mark or exc.context_mark
            raise ConfigError(
                f"YAML syntax error: {exc.problem}", mark.line + 1 if mark else None, source
            ) from None

    def error(self, message, node):
        return ConfigError(message, _line(node) if node is not None else None, self.source)

    def value(self, node):
        return self.loader.construct_object(node, deep=True)

    def mapping(self, node, allowed, required=(), what="section"):
        if not isinstance(node, yaml.MappingNode):
            raise self.error(f"{what} must be a mapping", node)
        out = {}
        for key_node, value_node in node.value:
            key = self.value(key_node)
            if key not in allowed:
                raise self.error(f"unknown key {key!r} in {what}", key_node)
            if key in out:
                raise self.error(f"duplicate key {key!r} in {what}", key_node)
            out[key] = (key_node, value_node)
        missing = sorted(set(required) - set(out))
        if missing:
            raise self.error(f"{what} is missing required key(s): {', '.join(missing)}", node)
        return out

    def anchored(self, exc, entries, fallback):
        """ConfigError at the key named earliest in ``exc``'s message, else ``fallback``."""
        message = str(exc)
        hits = []
        for key, (key_node, _) in entries.items():
            m = re.search(rf"(?<![\w-]){re.escape(key)}(?![\w-])", message)
            if m:
                hits.append((m.start(), key_node))
        node = min(hits, key=lambda h: h[0])[1] if hits else fallback
        return self.error(message, node)

    def number(self, entry, what):
        key_node, node = entry
        v = self.value(node)
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise self.error(f"{what} must be a number", node)
        return float(v)

    def vector(self, entry, what):
        key_node, node = entry
        v = self.value(node)
        if not isinstance(v, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in v
        ):
            raise self.error(f"{what} must be a list of numbers", node)
        return np.array(v, dtype=float)


def parse_config(text: str, source: str | None = None) -> tuple[str | None, Scenario]:
    """Parse YAML ``text`` into ``(name, Scenario)``; raises :class:`ConfigError`."""
    r = _Reader(text, source)
    if r.root is None:
        raise ConfigError("empty configuration", None, source)
    top = r.mapping(r.root, set(_SCHEMA), set(_REQUIRED), what="top level")
    name = str(r.value(top["name"][1])) if "name" in top else None

    net = r.mapping(top["network"][1], _SCHEMA["network"], _REQUIRED["network"], "network")
    _, kn = net["coupling"]
    coupling_raw = r.value(kn)
    if isinstance(coupling_raw, list):
        try:
            coupling = np.array(coupling_raw, dtype=float)
        except (TypeError, ValueError):
            raise r.error("coupling matrix must contain only numbers", kn) from None
    else:
        coupling = r.number(net["coupling"], "coupling")
    inertia = r.vector(net["inertia"], "inertia")
    damping = r.vector(net["damping"], "damping")
    try:
        spec = NetworkSpec(inertia, damping, coupling)
    except ValueError as exc:
        raise r.anchored(exc, net, top["network"][0]) from None

    ctl = r.mapping(top["control"][1], _SCHEMA["control"], _REQUIRED["control"], "control")
    variant_node = ctl["variant"][1]
    try:
        variant = Variant(r.value(variant_node))
    except ValueError:
        choices = ", ".join(v.value for v in Variant)
        raise r.error(f"variant must be one of: {choices}", variant_node) from None
    gains = {}
    for key in ("kp", "ki", "droop_gain"):
        if key in ctl:
            gains[key] = r.vector(ctl[key], key)
    if "tau" in ctl:
        gains["tau"] = r.number(ctl["tau"], "tau")
    try:
        law = ControlLaw(variant, **gains)
        law.check_size(spec.n)
    except ValueError as exc:
        raise r.anchored(exc, ctl, top["control"][0]) from None

    dist = r.mapping(
        top["disturbance"][1], _SCHEMA["disturbance"], _REQUIRED["disturbance"], "disturbance"
    )
    if ("p_step" in dist) == ("step" in dist):
        raise r.error("disturbance needs exactly one of p_step or step", top["disturbance"][1])
    p_base = r.vector(dist["p_base"], "p_base")
    try:
        if "p_step" in dist:
            p_step = r.vector(dist["p_step"], "p_step")
        else:
            step = r.mapping(dist["step"][1], {"node", "magnitude"}, {"node", "magnitude"}, "step")
            node_v = r.value(step["node"][1])
            if isinstance(node_v, bool) or not isinstance(node_v, int):
                raise r.error("step node must be an integer index", step["node"][1])
            magnitude = r.number(step["magnitude"], "magnitude")
            try:
                p_step = balanced_step(node_v, magnitude, p_base.size)
            except ValueError as exc:
                raise r.error(str(exc), step["node"][1]) from None
        sched = PowerSchedule(p_base, p_step, r.number(dist["t0"], "t0"))
    except ConfigError:
        raise
    except ValueError as exc:
        raise r.anchored(exc, dist, top["disturbance"][0]) from None

    grid = {"dt": DEFAULT_DT, "t_end": DEFAULT_T_END, "sample_every": DEFAULT_SAMPLE_EVERY}
    integ = {}
    if "integration" in top:
        integ = r.mapping(top["integration"][1], _SCHEMA["integration"], what="integration")
        for key in ("dt", "t_end"):
            if key in integ:
                grid[key] = r.number(integ[key], key)
        if "sample_every" in integ:
            se = r.value(integ["sample_every"][1])
            if isinstance(se, bool) or not isinstance(se, int):
                raise r.error("sample_every must be an integer", integ["sample_every"][1])
            grid["sample_every"] = se
    try:
        scenario = Scenario(spec, law, sched, **grid)
    except ValueError as exc:
        # grid errors name both t0 and dt; blame the integration key first
        err = r.anchored(exc, integ, None)
        if err.line is None:
            err = r.anchored(exc, dist, top["disturbance"][0])
        raise err from None
    return name, scenario


def load_config(path) -> tuple[str | None, Scenario]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, source=str(path))


def _floats(arr):
    return [float(x) for x in np.asarray(arr).ravel()]


def scenario_to_dict(scenario: Scenario, name: str | None = None) -> dict:
    """Plain-data form of a scenario, suitable for YAML or JSON.

    Vectors are written out explicitly, so the round trip is exact.
    """
    spec, law, sched = scenario.spec, scenario.law, scenario.sched
    out = {}
    if name is not None:
        out["name"] = name
    out["network"] = {
        "inertia": _floats(spec.inertia),
        "damping": _floats(spec.damping),
        "coupling": [_floats(row) for row in spec.coupling],
    }
    control = {"variant": law.variant.value}
    for key in ("kp", "ki", "droop_gain"):
        if getattr(law, key) is not None:
            control[key] = _floats(getattr(law, key))
    if law.tau is not None:
        control["tau"] = law.tau
    out["control"] = control
    out["disturbance"] = {
        "p_base": _floats(sched.p_base),
        "p_step": _floats(sched.p_step),
        "t0": sched.t0,
    }
    out["integration"] = {
        "dt": float(scenario.dt),
        "t_end": float(scenario.t_end),
        "sample_every": int(scenario.sample_every),
    }
    return out


def dump_config(scenario: Scenario, name: str | None = None) -> str:
    return yaml.safe_dump(scenario_to_dict(scenario, name), sort_keys=False, default_flow_style=None)
