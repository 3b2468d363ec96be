"""Default configuration loading and merging."""

from __future__ import annotations

import copy
import json
from importlib import resources
from pathlib import Path

from .errors import ConfigError, InputError


def _load_packaged(name: str) -> dict:
    return json.loads(resources.files("panoheat").joinpath("data").joinpath(name).read_text())


DEFAULTS = _load_packaged("defaults.json")


def merge(base: dict, override: dict) -> dict:
    """Recursive dict merge; ``override`` wins, unknown keys are rejected."""
    out = copy.deepcopy(base)
    for key, val in override.items():
        if key.startswith("_"):
            continue
        if key not in out:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(out[key], dict) and isinstance(val, dict):
            out[key] = merge(out[key], val)
        else:
            out[key] = val
    return out


def load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc


def load_config(path=None, overrides: dict | None = None) -> dict:
    """Defaults, then the optional JSON file, then in-code overrides.

    The file may use the sectioned layout of ``defaults.json`` or a flat
    dict; flat keys are routed to the section that defines them.
    """
    cfg = copy.deepcopy(DEFAULTS)
    for layer in (load_json(path) if path else None, overrides):
        if not layer:
            continue
        cfg = merge(cfg, _sectioned(cfg, layer))
    return cfg


def _sectioned(cfg: dict, layer: dict) -> dict:
    out: dict = {}
    for key, val in layer.items():
        if key.startswith("_"):
            continue
        if key in cfg and isinstance(val, dict):
            out.setdefault(key, {}).update(val)
            continue
        owners = [sec for sec, body in cfg.items() if isinstance(body, dict) and key in body]
        if not owners:
            raise ConfigError(f"unknown config key {key!r}")
        out.setdefault(owners[0], {})[key] = val
    return out
