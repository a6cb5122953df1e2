"""Strict YAML scenario configuration.

Unknown keys are errors, and every error message carries the file name and
line of the offending key. JSON is a subset of YAML, so study manifests
(which embed the config under ``"config"``) load through the same path.
"""
import math
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .asymptotics import ConstantsProvider, Scenario
from .constants_mc import KINDS, ConstantEstimate, ConstantsProtocol
from .errors import ConfigError, DomainError
from .harness import default_grid_n
from .hurst import VARIANTS, hurst_from_dict

SECTIONS = ("hurst", "interval", "case_tag", "study", "constants", "output")
STUDY_KEYS = {"u_list", "grid_n", "reps", "seed", "grid_n_list", "rate"}
CONSTANTS_KEYS = {"overrides", "protocol", "estimate", "estimate_files"}
PROTOCOL_KEYS = {"delta", "S_list", "reps", "method", "richardson"}
OUTPUT_KEYS = {"dir"}
MANIFEST_TAG = "mbm_extremes"


class _LineDict(dict):
    lines: dict
    line: int


class _Loader(yaml.SafeLoader):
    pass


def _construct_mapping(loader, node):
    loader.flatten_mapping(node)
    out = _LineDict()
    out.lines = {}
    out.line = node.start_mark.line + 1
    for key_node, value_node in node.value:
        key = loader.construct_object(key_node, deep=True)
        if key in out:
            raise ConfigError(f"{loader.name}:{key_node.start_mark.line + 1}: duplicate key {key!r}")
        out[key] = loader.construct_object(value_node, deep=True)
        out.lines[key] = key_node.start_mark.line + 1
    return out


_Loader.add_constructor(yaml.resolver.BaseResolver.DEFAULT_MAPPING_TAG, _construct_mapping)


class _Ctx:
    def __init__(self, name):
        self.name = name

    def err(self, mapping, key, msg):
        line = getattr(mapping, "lines", {}).get(key) or getattr(mapping, "line", "?")
        return ConfigError(f"{self.name}:{line}: {msg}")

    def check_keys(self, mapping, allowed, where):
        if not isinstance(mapping, dict):
            raise ConfigError(f"{self.name}: section {where!r} must be a mapping")
        for k in mapping:
            if k not in allowed:
                raise self.err(mapping, k, f"unknown key {k!r} in {where} (allowed: {sorted(allowed)})")

    def number(self, mapping, key, where, positive=False, integer=False, default=None, required=False):
        if key not in mapping:
            if required:
                line = getattr(mapping, "line", "?")
                raise ConfigError(f"{self.name}:{line}: missing required key {key!r} in {where}")
            return default
        v = mapping[key]
        ok = isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
        if integer:
            ok = ok and float(v).is_integer()
        if not ok:
            kind = "an integer" if integer else "a finite number"
            raise self.err(mapping, key, f"{where}.{key} must be {kind}, got {v!r}")
        if positive and not v > 0:
            raise self.err(mapping, key, f"{where}.{key} must be positive, got {v!r}")
        return int(v) if integer else float(v)

    def number_list(self, mapping, key, where, integer=False, default=None):
        if key not in mapping:
            return default
        v = mapping[key]
        if not isinstance(v, list) or not v:
            raise self.err(mapping, key, f"{where}.{key} must be a non-empty list")
        tmp = _LineDict({str(i): x for i, x in enumerate(v)})
        tmp.lines = {str(i): mapping.lines.get(key) for i in range(len(v))}
        return [self.number(tmp, str(i), f"{where}.{key}", integer=integer) for i in range(len(v))]


@dataclass
class RunConfig:
    scenario: Scenario
    u_list: list = None
    grid_n: int = 1025
    reps: int = 100000
    seed: int = 0
    grid_n_list: list = None
    rate: float = None
    overrides: list = field(default_factory=list)
    protocol: ConstantsProtocol = None
    estimate: list = field(default_factory=list)
    estimate_files: list = field(default_factory=list)
    out_dir: str = None
    source: str = "<config>"

    def provider(self):
        p = ConstantsProvider(protocol=self.protocol)
        for o in self.overrides:
            p.add_override(o["kind"], o["alpha"], o["value"], a=o.get("a"))
        for path in self.estimate_files:
            p.estimates.append(ConstantEstimate.from_dict(_read_json(path)))
        return p

    def to_dict(self):
        """Normalised config; parses back into an identical run (output dir excluded)."""
        h = self.scenario.hurst.params()
        interval = [h.pop("t1"), h.pop("t2")]
        if h.get("h_lo") == 0.05:
            h.pop("h_lo")
        if h.get("h_hi") == 0.95:
            h.pop("h_hi")
        study = {"grid_n": self.grid_n, "reps": self.reps, "seed": self.seed}
        if self.u_list is not None:
            study["u_list"] = list(self.u_list)
        if self.grid_n_list is not None:
            study["grid_n_list"] = list(self.grid_n_list)
        if self.rate is not None:
            study["rate"] = self.rate
        d = {"hurst": h, "interval": interval, "case_tag": self.scenario.case, "study": study}
        consts = {}
        if self.overrides:
            consts["overrides"] = [dict(o) for o in self.overrides]
        if self.protocol is not None:
            p = self.protocol
            consts["protocol"] = {"delta": p.delta, "S_list": list(p.S_list), "reps": p.reps,
                                  "method": p.method, "richardson": p.richardson}
        if self.estimate:
            consts["estimate"] = [dict(e) for e in self.estimate]
        if self.estimate_files:
            consts["estimate_files"] = list(self.estimate_files)
        if consts:
            d["constants"] = consts
        return d


def _read_json(path):
    import json
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"constants estimate file not found: {path}")
    return json.loads(p.read_text())


def _parse_kind_entry(ctx, entry, where, need_value):
    allowed = {"kind", "alpha", "a"} | ({"value"} if need_value else set())
    ctx.check_keys(entry, allowed, where)
    kind = entry.get("kind")
    if kind not in KINDS:
        raise ctx.err(entry, "kind", f"{where}.kind must be one of {list(KINDS)}, got {kind!r}")
    alpha = ctx.number(entry, "alpha", where, required=True)
    if not 0 < alpha <= 2:
        raise ctx.err(entry, "alpha", f"{where}.alpha must lie in (0, 2], got {alpha}")
    out = {"kind": kind, "alpha": alpha}
    if kind != "pickands":
        out["a"] = ctx.number(entry, "a", where, positive=True, required=True)
    elif "a" in entry:
        raise ctx.err(entry, "a", f"{where}: the Pickands constant takes no 'a'")
    if need_value:
        out["value"] = ctx.number(entry, "value", where, positive=True, required=True)
    return out


def parse_config(doc, name="<config>", seed_override=None):
    ctx = _Ctx(name)
    if not isinstance(doc, dict):
        raise ConfigError(f"{name}: top level must be a mapping")
    if doc.get("manifest") == MANIFEST_TAG:
        if "config" not in doc:
            raise ctx.err(doc, "manifest", "manifest has no 'config' section")
        doc = doc["config"]
    ctx.check_keys(doc, set(SECTIONS), "top level")
    for key in ("hurst", "interval", "case_tag"):
        if key not in doc:
            raise ConfigError(f"{name}: missing required section {key!r}")

    hurst = doc["hurst"]
    if not isinstance(hurst, dict):
        raise ctx.err(doc, "hurst", "hurst must be a mapping")
    variant = hurst.get("variant")
    if variant not in VARIANTS:
        raise ctx.err(hurst, "variant" if "variant" in hurst else None,
                      f"hurst.variant must be one of {sorted(VARIANTS)}, got {variant!r}")
    interval = doc["interval"]
    if not (isinstance(interval, list) and len(interval) == 2
            and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in interval)):
        raise ctx.err(doc, "interval", f"interval must be [T1, T2], got {interval!r}")
    for k in ("t1", "t2"):
        if k in hurst:
            raise ctx.err(hurst, k, f"hurst.{k} is not allowed; use the interval section")
    params = dict(hurst)
    params["t1"], params["t2"] = float(interval[0]), float(interval[1])
    try:
        hf = hurst_from_dict(params)
    except ConfigError as exc:
        raise ctx.err(doc, "hurst", str(exc)) from None
    except DomainError as exc:
        raise DomainError(f"{name}:{doc.lines.get('hurst', '?')}: {exc}") from None

    case = doc["case_tag"]
    expected = {"thm1": "peak", "thm2_i": "log_reciprocal", "thm2_ii": "power_law"}
    if case not in ("thm1", "thm2_i", "thm2_ii", "thm2_iii"):
        raise ctx.err(doc, "case_tag", f"case_tag must be one of thm1, thm2_i, thm2_ii, thm2_iii; got {case!r}")
    if case in expected and variant != expected[case]:
        raise ctx.err(doc, "case_tag",
                      f"case_tag {case!r} conflicts with hurst variant {variant!r} "
                      f"(case_tag {case!r} needs variant {expected[case]!r})")
    if case == "thm2_iii" and variant in ("peak", "log_reciprocal"):
        raise ctx.err(doc, "case_tag", f"case_tag 'thm2_iii' conflicts with hurst variant {variant!r}")
    try:
        scenario = Scenario(hf, case)
    except DomainError as exc:
        raise DomainError(f"{name}:{doc.lines.get('case_tag', '?')}: {exc}") from None

    cfg = RunConfig(scenario=scenario, source=name)
    study = doc.get("study", _LineDict())
    if not hasattr(study, "lines"):
        study = _LineDict(study)
        study.lines, study.line = {}, doc.lines.get("study", "?")
    ctx.check_keys(study, STUDY_KEYS, "study")
    cfg.u_list = ctx.number_list(study, "u_list", "study")
    cfg.grid_n = ctx.number(study, "grid_n", "study", positive=True, integer=True,
                            default=default_grid_n(scenario))
    cfg.reps = ctx.number(study, "reps", "study", positive=True, integer=True, default=100000)
    cfg.seed = ctx.number(study, "seed", "study", integer=True, default=0)
    if cfg.seed < 0:
        raise ctx.err(study, "seed", "study.seed must be >= 0")
    cfg.grid_n_list = ctx.number_list(study, "grid_n_list", "study", integer=True)
    cfg.rate = ctx.number(study, "rate", "study", positive=True)
    if seed_override is not None:
        cfg.seed = int(seed_override)

    consts = doc.get("constants")
    if consts is not None:
        ctx.check_keys(consts, CONSTANTS_KEYS, "constants")
        for i, o in enumerate(consts.get("overrides") or []):
            cfg.overrides.append(_parse_kind_entry(ctx, o, f"constants.overrides[{i}]", True))
        for i, e in enumerate(consts.get("estimate") or []):
            cfg.estimate.append(_parse_kind_entry(ctx, e, f"constants.estimate[{i}]", False))
        files = consts.get("estimate_files") or []
        if not isinstance(files, list) or not all(isinstance(f, str) for f in files):
            raise ctx.err(consts, "estimate_files", "constants.estimate_files must be a list of paths")
        cfg.estimate_files = list(files)
        proto = consts.get("protocol")
        if proto is not None:
            ctx.check_keys(proto, PROTOCOL_KEYS, "constants.protocol")
            method = proto.get("method", "shift")
            if method not in ("shift", "direct"):
                raise ctx.err(proto, "method", f"constants.protocol.method must be 'shift' or 'direct'")
            rich = proto.get("richardson", True)
            if not isinstance(rich, bool):
                raise ctx.err(proto, "richardson", "constants.protocol.richardson must be true/false")
            cfg.protocol = ConstantsProtocol(
                delta=ctx.number(proto, "delta", "constants.protocol", positive=True, default=0.01),
                S_list=tuple(ctx.number_list(proto, "S_list", "constants.protocol",
                                             default=[4.0, 8.0, 16.0])),
                reps=ctx.number(proto, "reps", "constants.protocol", positive=True, integer=True,
                                default=20000),
                seed=cfg.seed, method=method, richardson=rich,
            )

    out = doc.get("output")
    if out is not None:
        ctx.check_keys(out, OUTPUT_KEYS, "output")
        if "dir" in out and not isinstance(out["dir"], str):
            raise ctx.err(out, "dir", "output.dir must be a string")
        cfg.out_dir = out.get("dir")
    return cfg


def load_config(path, seed_override=None):
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {path}")
    text = p.read_text()
    loader = _Loader(text)
    loader.name = str(path)
    try:
        doc = loader.get_single_data()
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: YAML syntax error: {exc}") from None
    finally:
        loader.dispose()
    return parse_config(doc, str(path), seed_override)
