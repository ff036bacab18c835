"""Benchmark plants in companion form x^(n) = f(x,t) + b(x,t)*u + d, plus
bounded disturbance generators.

Plant evaluators accept anything indexable as the state (StateVector or a raw
array), so the integrator can pass its working arrays straight through.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import StateVector
from .errors import ControllabilityFault

__all__ = [
    "PlantModel",
    "DisturbanceSpec",
    "eval_dynamics",
    "pendulum_plant",
    "duffing_plant",
    "vanderpol_plant",
    "no_disturbance",
    "constant_disturbance",
    "sinusoid_disturbance",
    "noise_disturbance",
    "disturbance_sample",
]

DISTURBANCE_KINDS = ("none", "constant", "sinusoid", "band-limited-noise")


@dataclass(frozen=True, eq=False)
class PlantModel:
    """Companion-form plant: f and b evaluators, relative degree, and the
    controllability guard b_min (|b| below it is a fault, not a warning)."""

    order: int
    f_eval: object
    b_eval: object
    b_min: float
    name: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("plant order must be >= 1")
        if not (self.b_min > 0.0):
            raise ValueError("b_min must be > 0")


def eval_dynamics(plant: PlantModel, x: StateVector, u: float, d: float, t: float) -> float:
    """Highest output derivative x^(n) = f(x,t) + b(x,t)*u + d."""
    if x.order != plant.order:
        raise ValueError(f"state order {x.order} does not match plant order {plant.order}")
    b = plant.b_eval(x, t)
    if abs(b) < plant.b_min:
        raise ControllabilityFault(
            f"|b|={abs(b):.3g} below guard {plant.b_min:.3g} for plant '{plant.name}'",
            state=x,
            t=t,
        )
    return plant.f_eval(x, t) + b * u + d


def pendulum_plant(m: float = 1.0, l: float = 1.0, c: float = 0.0, g: float = 9.81) -> PlantModel:
    """Damped pendulum: acceleration -(g/l) sin(x) - c*xdot + u/(m l^2)."""
    if not (m > 0.0 and l > 0.0):
        raise ValueError("mass and length must be > 0")
    if c < 0.0 or g < 0.0:
        raise ValueError("damping and gravity must be >= 0")
    b = 1.0 / (m * l * l)
    return PlantModel(
        order=2,
        f_eval=lambda x, t: -(g / l) * math.sin(x[0]) - c * x[1],
        b_eval=lambda x, t: b,
        b_min=b / 2.0,
        name="pendulum",
        params={"m": m, "l": l, "c": c, "g": g},
    )


def duffing_plant(a: float = 0.2, b1: float = 1.0, b2: float = 1.0, gain: float = 1.0) -> PlantModel:
    """Duffing oscillator: acceleration -a*xdot - b1*x - b2*x^3 + gain*u."""
    if gain == 0.0:
        raise ValueError("gain must be nonzero")
    return PlantModel(
        order=2,
        f_eval=lambda x, t: -a * x[1] - b1 * x[0] - b2 * x[0] ** 3,
        b_eval=lambda x, t: gain,
        b_min=abs(gain) / 2.0,
        name="duffing",
        params={"a": a, "b1": b1, "b2": b2, "gain": gain},
    )


def vanderpol_plant(mu: float = 1.0, gain: float = 1.0) -> PlantModel:
    """Van der Pol oscillator: acceleration mu*(1 - x^2)*xdot - x + gain*u."""
    if gain == 0.0:
        raise ValueError("gain must be nonzero")
    return PlantModel(
        order=2,
        f_eval=lambda x, t: mu * (1.0 - x[0] ** 2) * x[1] - x[0],
        b_eval=lambda x, t: gain,
        b_min=abs(gain) / 2.0,
        name="vanderpol",
        params={"mu": mu, "gain": gain},
    )


@dataclass(frozen=True, eq=False)
class DisturbanceSpec:
    """Bounded additive disturbance: |d(t)| <= bound for every t.

    Band-limited noise is a seeded uniform drive put through a first-order
    low-pass (filter constant from cutoff_hz and sample_dt), held constant
    between grid points and clamped to the bound; fixed seed means a
    bit-reproducible signal.
    """

    kind: str
    bound: float
    offset: float = 0.0
    amplitude: float = 0.0
    frequency_hz: float = 0.0
    phase: float = 0.0
    cutoff_hz: float = 0.0
    seed: int = 0
    sample_dt: float = 1e-3
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ValueError(f"unknown disturbance kind '{self.kind}'")
        if self.bound < 0.0 or not math.isfinite(self.bound):
            raise ValueError("bound must be a finite value >= 0")
        if self.kind == "constant" and abs(self.offset) > self.bound:
            raise ValueError("constant offset exceeds the stated bound")
        if self.kind == "sinusoid" and abs(self.amplitude) > self.bound:
            raise ValueError("sinusoid amplitude exceeds the stated bound")
        if self.kind == "band-limited-noise":
            if not (self.cutoff_hz > 0.0):
                raise ValueError("cutoff_hz must be > 0 for noise")
            if not (self.sample_dt > 0.0):
                raise ValueError("sample_dt must be > 0 for noise")
            if self.amplitude < 0.0:
                raise ValueError("noise amplitude must be >= 0")


def no_disturbance() -> DisturbanceSpec:
    return DisturbanceSpec(kind="none", bound=0.0)


def constant_disturbance(offset: float, bound: float | None = None) -> DisturbanceSpec:
    if bound is None:
        bound = abs(offset)
    return DisturbanceSpec(kind="constant", bound=bound, offset=offset)


def sinusoid_disturbance(
    amplitude: float, frequency_hz: float, phase: float = 0.0, bound: float | None = None
) -> DisturbanceSpec:
    if bound is None:
        bound = abs(amplitude)
    return DisturbanceSpec(
        kind="sinusoid",
        bound=bound,
        amplitude=amplitude,
        frequency_hz=frequency_hz,
        phase=phase,
    )


def noise_disturbance(
    amplitude: float,
    cutoff_hz: float,
    seed: int = 0,
    sample_dt: float = 1e-3,
    bound: float | None = None,
) -> DisturbanceSpec:
    if bound is None:
        bound = abs(amplitude)
    return DisturbanceSpec(
        kind="band-limited-noise",
        bound=bound,
        amplitude=amplitude,
        cutoff_hz=cutoff_hz,
        seed=seed,
        sample_dt=sample_dt,
    )


def _noise_series(spec: DisturbanceSpec, count: int) -> np.ndarray:
    """Filtered noise samples 0..count-1; regenerating a longer prefix from the
    same seed reproduces the shorter one exactly."""
    rng = np.random.default_rng(spec.seed)
    drive = rng.uniform(-spec.amplitude, spec.amplitude, size=count)
    beta = 1.0 - math.exp(-2.0 * math.pi * spec.cutoff_hz * spec.sample_dt)
    out = np.empty(count)
    level = 0.0
    for i in range(count):
        level += beta * (drive[i] - level)
        out[i] = level
    np.clip(out, -spec.bound, spec.bound, out=out)
    return out


def disturbance_sample(spec: DisturbanceSpec, t: float) -> float:
    """Disturbance value at time t; deterministic in (spec, t)."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    if spec.kind == "none":
        return 0.0
    if spec.kind == "constant":
        return spec.offset
    if spec.kind == "sinusoid":
        return spec.amplitude * math.sin(2.0 * math.pi * spec.frequency_hz * t + spec.phase)
    # band-limited noise: zero-order hold on the filtered grid sequence
    k = int(math.floor(t / spec.sample_dt + 1e-9))
    series = spec._cache.get("series")
    if series is None or series.size <= k:
        have = 0 if series is None else series.size
        series = _noise_series(spec, max(k + 1, 2 * have, 4096))
        spec._cache["series"] = series
    return float(series[k])
