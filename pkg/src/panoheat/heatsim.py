"""Transient surface heat solver on planar vertex lattices.

Each lattice cell is a thin shell of thickness ``thickness``.  Per unit
area the energy balance reads

    rho*cp*d*dT/dt = rho*cp*d*alpha*lap(T)
                     + sigma*eps*(Ts^4 - T^4) + h_c*(Ts - T)
                     + beta*phi + h_out*(T_out - T)

which is the cell-volume form with ``dv = A*d`` divided through by the
cell area ``A``.  Time integration is explicit Euler with a step bounded by
:func:`stable_dt`.  Planes do not exchange heat with each other.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .config import DEFAULTS, _load_packaged
from .errors import ConfigError, InputError, NumericError, StabilityError

SIGMA = 5.670374419e-8
_SIM = DEFAULTS["sim"]


@dataclass(frozen=True)
class MaterialProps:
    name: str
    k: float
    rho: float
    cp: float
    emissivity: float

    def __post_init__(self):
        for key in ("k", "rho", "cp"):
            val = getattr(self, key)
            if not (math.isfinite(val) and val > 0):
                raise InputError(f"material {self.name}: {key} must be positive, got {val}")
        if not (0.0 <= self.emissivity <= 1.0):
            raise InputError(f"material {self.name}: emissivity must lie in [0, 1]")

    @property
    def diffusivity(self) -> float:
        return thermal_diffusivity(self)


def thermal_diffusivity(m: MaterialProps) -> float:
    return m.k / (m.rho * m.cp)


def materials_from_dict(d: dict) -> dict[str, MaterialProps]:
    out = {}
    for name, vals in d.items():
        if name.startswith("_"):
            continue
        try:
            out[name] = MaterialProps(name, float(vals["k"]), float(vals["rho"]), float(vals["cp"]),
                                      float(vals.get("emissivity", 0.9)))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"material {name!r} malformed: {exc}") from exc
    return out


def load_materials(path=None) -> dict[str, MaterialProps]:
    """Packaged material table, or a JSON file of the same shape."""
    if path is None:
        return materials_from_dict(_load_packaged("materials.json"))
    from .config import load_json

    return materials_from_dict(load_json(path))


@dataclass
class SimConfig:
    duration: float = _SIM["duration"]
    dt: float | None = _SIM["dt"]
    thickness: float = _SIM["thickness"]
    t_ambient: float = _SIM["t_ambient"]
    t_surr: float | None = _SIM["t_surr"]
    t_out: float | None = _SIM["t_out"]
    h_c: float = _SIM["h_c"]
    h_out: float = _SIM["h_out"]
    beta: float | None = _SIM["beta"]
    conduction: bool = _SIM["conduction"]
    radiation: bool = _SIM["radiation"]
    convection: bool = _SIM["convection"]
    exchange: bool = _SIM["exchange"]
    reversed_exchange_sign: bool = _SIM["reversed_exchange_sign"]
    record_every: float | None = _SIM["record_every"]
    safety: float = _SIM["safety"]

    def __post_init__(self):
        if not self.duration > 0:
            raise ConfigError(f"duration must be positive, got {self.duration}")
        if not self.thickness > 0:
            raise ConfigError(f"thickness must be positive, got {self.thickness}")
        for name in ("t_ambient", "t_surr", "t_out"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be a positive kelvin temperature, got {val}")
        if self.h_c < 0 or self.h_out < 0:
            raise ConfigError("heat transfer coefficients must be non-negative")
        if self.beta is not None and not (0.0 <= self.beta <= 1.0):
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")
        if self.exchange and self.t_out is None:
            raise ConfigError("indoor-outdoor exchange enabled but t_out is not set")
        if self.dt is not None and not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.record_every is not None and not self.record_every > 0:
            raise ConfigError(f"record_every must be positive, got {self.record_every}")
        if not (0.0 < self.safety <= 1.0):
            raise ConfigError(f"safety must lie in (0, 1], got {self.safety}")

    @property
    def surr(self) -> float:
        return self.t_ambient if self.t_surr is None else self.t_surr

    @property
    def toggles(self) -> dict:
        return {"conduction": self.conduction, "radiation": self.radiation,
                "convection": self.convection, "exchange": self.exchange}

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown sim config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def laplacian(field_, h, active=None) -> np.ndarray:
    """5-point Laplacian with zero-flux (mirror) boundaries.

    ``h`` is a scalar spacing or a ``(h_u, h_v)`` pair.  With an ``active``
    mask, missing neighbors are mirrored from the opposite side; a vertex
    with both neighbors missing along an axis gets no contribution there.
    """
    T = np.asarray(field_, dtype=np.float64)
    if T.ndim != 2 or min(T.shape) < 2:
        raise InputError(f"laplacian needs a grid of at least 2x2, got {T.shape}")
    hu, hv = (h, h) if np.ndim(h) == 0 else h
    if active is None:
        P = np.pad(T, 1, mode="reflect")
        return ((P[:-2, 1:-1] + P[2:, 1:-1] - 2.0 * T) / (hu * hu)
                + (P[1:-1, :-2] + P[1:-1, 2:] - 2.0 * T) / (hv * hv))
    act = np.asarray(active, dtype=bool)
    out = np.zeros_like(T)
    for axis, spacing in ((0, hu), (1, hv)):
        tp = np.moveaxis(np.pad(T, [(1, 1) if a == axis else (0, 0) for a in range(2)]), axis, 0)
        ap = np.moveaxis(np.pad(act, [(1, 1) if a == axis else (0, 0) for a in range(2)]), axis, 0)
        Tm, Tp = np.moveaxis(tp[:-2], 0, axis), np.moveaxis(tp[2:], 0, axis)
        am, apl = np.moveaxis(ap[:-2], 0, axis), np.moveaxis(ap[2:], 0, axis)
        lo = np.where(am, Tm, np.where(apl, Tp, T))
        hi = np.where(apl, Tp, np.where(am, Tm, T))
        out += (lo + hi - 2.0 * T) / (spacing * spacing)
    return np.where(act, out, 0.0)


def _spacing_pair(h):
    return (float(h), float(h)) if np.ndim(h) == 0 else (float(h[0]), float(h[1]))


def stable_dt(m: MaterialProps, h, cfg: SimConfig, t_init=None) -> float:
    """Largest explicit step kept (with ``cfg.safety``) below both bounds.

    The conduction bound is always included, even with conduction off.  The
    surface bound linearizes radiation at 50 K above the hottest expected
    temperature.
    """
    hu, hv = _spacing_pair(h)
    alpha = thermal_diffusivity(m)
    conduction_bound = 1.0 / (2.0 * alpha * (1.0 / hu**2 + 1.0 / hv**2))
    temps = [cfg.t_ambient, cfg.surr]
    if cfg.t_out is not None:
        temps.append(cfg.t_out)
    if t_init is not None:
        temps.append(float(np.max(t_init)))
    t_max = max(temps) + 50.0
    rate = 0.0
    if cfg.convection:
        rate += cfg.h_c
    if cfg.exchange:
        rate += cfg.h_out
    if cfg.radiation:
        rate += 4.0 * SIGMA * m.emissivity * t_max**3
    surface_bound = m.rho * m.cp * cfg.thickness / rate if rate > 0 else math.inf
    return cfg.safety * min(conduction_bound, surface_bound)


def step_heat(T, flux, m: MaterialProps, cfg: SimConfig, dt: float, h=None, beta: float = 1.0,
              active=None, step_index: int | None = None, dt_bound: float | None = None) -> np.ndarray:
    """One explicit Euler step of the surface energy balance.

    ``h`` (scalar or pair) is required when conduction is on.  ``dt_bound``
    defaults to :func:`stable_dt` evaluated on ``T``.
    """
    T = np.asarray(T, dtype=np.float64)
    flux = np.asarray(flux, dtype=np.float64)
    if np.any(flux < 0):
        raise InputError("energy influx must be non-negative")
    if dt_bound is None:
        if h is None and cfg.conduction:
            raise InputError("grid spacing h is required when conduction is enabled")
        dt_bound = stable_dt(m, h if h is not None else 1.0, cfg, T)
    if dt > dt_bound * (1.0 + 1e-12):
        raise StabilityError(f"dt={dt:.6g} s exceeds the stability bound {dt_bound:.6g} s", bound=dt_bound)

    ts = cfg.surr
    cap = m.rho * m.cp * cfg.thickness
    surface = beta * flux
    if cfg.radiation:
        surface = surface + SIGMA * m.emissivity * (ts**4 - T**4)
    if cfg.convection:
        surface = surface + cfg.h_c * (ts - T)
    if cfg.exchange:
        if cfg.reversed_exchange_sign:
            surface = surface + cfg.h_out * (T - cfg.t_out)
        else:
            surface = surface + cfg.h_out * (cfg.t_out - T)
    rate = surface / cap
    if cfg.conduction:
        rate = rate + thermal_diffusivity(m) * laplacian(T, h, active)
    if active is not None:
        rate = np.where(active, rate, 0.0)
    out = T + dt * rate
    if not np.all(np.isfinite(out)) or np.any(out <= 0):
        raise NumericError(f"non-physical temperature at step {step_index}", step=step_index)
    return out


@dataclass
class SimResult:
    times: list
    snapshots: list  # one list of per-plane (n, m) arrays per recorded time
    final: list
    dt_max: float
    dt_bound: float
    n_steps: int
    materials: dict = field(default_factory=dict)
    betas: dict = field(default_factory=dict)


def _plane_beta(grid, cfg: SimConfig) -> float:
    if cfg.beta is not None:
        return cfg.beta
    if grid.plane.props.beta is not None:
        return grid.plane.props.beta
    return 1.0 - grid.plane.reflectance


def record_times(duration: float, record_every: float | None) -> list[float]:
    """0, record_every, 2*record_every, ... up to and including ``duration``."""
    if record_every is None:
        return [0.0]
    n = int(math.floor(duration / record_every + 1e-9))
    return [k * record_every for k in range(n + 1)]


def run_sim(mesh, flux: list, materials: dict, cfg: SimConfig) -> SimResult:
    """Advance every plane from ``cfg.t_ambient`` to ``cfg.duration``.

    ``flux`` holds one per-vertex W/m^2 array per plane; ``materials`` maps
    material names to :class:`MaterialProps`.  Snapshots are taken at the
    times from :func:`record_times`; between two consecutive targets the gap
    is split into equal steps no longer than the stable (or requested) step.
    """
    grids = list(mesh)
    if len(flux) != len(grids):
        raise InputError(f"got {len(flux)} flux arrays for {len(grids)} planes")
    mats, betas, fields_ = [], [], []
    for g, f in zip(grids, flux):
        if g.plane.material not in materials:
            raise InputError(f"surface {g.plane.id}: unknown material {g.plane.material!r}")
        if np.shape(f) != g.shape:
            raise InputError(f"surface {g.plane.id}: flux shape {np.shape(f)} != grid {g.shape}")
        if np.any(~np.isfinite(f)) or np.any(np.asarray(f) < 0):
            raise InputError(f"surface {g.plane.id}: flux must be finite and non-negative")
        mats.append(materials[g.plane.material])
        betas.append(_plane_beta(g, cfg))
        fields_.append(np.full(g.shape, cfg.t_ambient, dtype=np.float64))

    bound = min(stable_dt(m, (g.hu, g.hv), cfg, cfg.t_ambient) for g, m in zip(grids, mats))
    if cfg.dt is not None and cfg.dt > bound * (1.0 + 1e-12):
        raise StabilityError(f"requested dt={cfg.dt:.6g} s exceeds the stability bound {bound:.6g} s", bound=bound)
    dt_cap = bound if cfg.dt is None else cfg.dt

    targets = record_times(cfg.duration, cfg.record_every)
    if targets[-1] < cfg.duration:
        targets.append(cfg.duration)
    recorded = set(record_times(cfg.duration, cfg.record_every))

    times = [0.0]
    snapshots = [[f.copy() for f in fields_]]
    t = 0.0
    step = 0
    dt_max = 0.0
    for target in targets[1:]:
        gap = target - t
        nsub = max(1, math.ceil(gap / dt_cap - 1e-9))
        dt = gap / nsub
        dt_max = max(dt_max, dt)
        for _ in range(nsub):
            fields_ = [
                step_heat(T, f, m, cfg, dt, h=(g.hu, g.hv), beta=b, active=g.active, step_index=step, dt_bound=bound)
                for T, f, m, b, g in zip(fields_, flux, mats, betas, grids)
            ]
            step += 1
        t = target
        if target in recorded:
            times.append(target)
            snapshots.append([f.copy() for f in fields_])
    return SimResult(
        times=times,
        snapshots=snapshots,
        final=fields_,
        dt_max=dt_max,
        dt_bound=bound,
        n_steps=step,
        materials={g.plane.id: m.name for g, m in zip(grids, mats)},
        betas={g.plane.id: b for g, b in zip(grids, betas)},
    )
