"""Closed-loop simulation: fixed-step RK4 integration of a truth plant under a
sampled (zero-order-hold) controller, reference trajectory generation, and
trajectory metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import ControllerState, control_step
from .dynamics import StateVector, binomial_coefficient
from .errors import ControllabilityFault, DivergenceFault
from .plants import DisturbanceSpec, PlantModel, disturbance_sample
from .rbf import RbfNetwork

__all__ = [
    "ReferenceSpec",
    "Trajectory",
    "Metrics",
    "constant_reference",
    "sinusoid_reference",
    "sum_of_sinusoids_reference",
    "reference_at",
    "rk4_step",
    "run_closed_loop",
    "compute_metrics",
    "ideal_disturbance_plant",
]

REFERENCE_KINDS = ("constant", "sinusoid", "sum-of-sinusoids")

# A state magnitude past this is treated as divergence even while still finite.
DIVERGENCE_LIMIT = 1e9

EVENT_DIVERGENCE = "divergence"
EVENT_CONTROLLABILITY = "controllability_fault"


@dataclass(frozen=True, eq=False)
class ReferenceSpec:
    """Desired trajectory with exact derivatives of every order.

    Sinusoidal components are (amplitude, omega, phase) triples with omega in
    rad/s; the k-th derivative of A sin(w t + p) is A w^k sin(w t + p + k pi/2).
    """

    kind: str
    order: int
    level: float = 0.0
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in REFERENCE_KINDS:
            raise ValueError(f"unknown reference kind '{self.kind}'")
        if self.order < 1:
            raise ValueError("reference order must be >= 1")
        if self.kind != "constant" and len(self.components) == 0:
            raise ValueError("sinusoidal reference needs at least one component")


def constant_reference(level: float, order: int) -> ReferenceSpec:
    return ReferenceSpec(kind="constant", order=order, level=level)


def sinusoid_reference(amplitude: float, omega: float, phase: float, order: int) -> ReferenceSpec:
    return ReferenceSpec(
        kind="sinusoid", order=order, components=((amplitude, omega, phase),)
    )


def sum_of_sinusoids_reference(components, order: int) -> ReferenceSpec:
    comps = tuple((float(a), float(w), float(p)) for a, w, p in components)
    return ReferenceSpec(kind="sum-of-sinusoids", order=order, components=comps)


def _reference_values(spec: ReferenceSpec, t: float) -> tuple[np.ndarray, float]:
    n = spec.order
    if spec.kind == "constant":
        values = np.zeros(n)
        values[0] = spec.level
        return values, 0.0
    derivs = np.zeros(n + 1)
    for amplitude, omega, phase in spec.components:
        for k in range(n + 1):
            derivs[k] += amplitude * omega**k * math.sin(omega * t + phase + k * math.pi / 2.0)
    return derivs[:n], float(derivs[n])


def reference_at(spec: ReferenceSpec, t: float) -> tuple[StateVector, float]:
    """Reference state [x_d, x_d', ..., x_d^(n-1)] and the n-th derivative."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    values, xd_n = _reference_values(spec, t)
    return StateVector(values), xd_n


def rk4_step(deriv, y: np.ndarray, t: float, dt: float) -> np.ndarray:
    """Classical fourth-order Runge-Kutta update of y over [t, t+dt]."""
    if not (dt > 0.0):
        raise ValueError("dt must be > 0")
    k1 = deriv(y, t)
    k2 = deriv(y + (0.5 * dt) * k1, t + 0.5 * dt)
    k3 = deriv(y + (0.5 * dt) * k2, t + 0.5 * dt)
    k4 = deriv(y + dt * k3, t + dt)
    out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise DivergenceFault(f"non-finite state produced at t={t:.6g}")
    return out


@dataclass
class Trajectory:
    """Uniform-grid record of a closed-loop run. On a fault the arrays hold
    the partial run and terminal_event names the fault."""

    t: np.ndarray
    x: np.ndarray
    x_d: np.ndarray
    u: np.ndarray
    s: np.ndarray
    d_hat: np.ndarray
    d_true: np.ndarray
    w_norm: np.ndarray
    event: list
    order: int
    dt_ctrl: float
    terminal_event: str | None = None
    weights: np.ndarray | None = None

    def __len__(self):
        return self.t.size


@dataclass(frozen=True)
class Metrics:
    rms_error: float
    iae: float
    steady_state_error: float
    max_abs_u: float
    bounded: bool


def _plant_deriv(plant: PlantModel, u: float, dist: DisturbanceSpec):
    """First-order form of x^(n) = f + b*u + d with u held constant."""
    n = plant.order
    f_eval = plant.f_eval
    b_eval = plant.b_eval
    b_min = plant.b_min

    def deriv(y, tau):
        b = b_eval(y, tau)
        if abs(b) < b_min:
            raise ControllabilityFault(
                f"|b|={abs(b):.3g} below guard {b_min:.3g} during integration",
                state=y,
                t=tau,
            )
        out = np.empty(n)
        out[: n - 1] = y[1:]
        out[n - 1] = f_eval(y, tau) + b * u + disturbance_sample(dist, tau)
        return out

    return deriv


def integrate_interval(
    truth: PlantModel,
    y: np.ndarray,
    u: float,
    t0: float,
    dt: float,
    substeps: int,
    dist: DisturbanceSpec,
) -> np.ndarray:
    """Advance the truth plant over one control interval with u held constant;
    the disturbance is evaluated at the true substep times."""
    deriv = _plant_deriv(truth, u, dist)
    h = dt / substeps
    for j in range(substeps):
        y = rk4_step(deriv, y, t0 + j * h, h)
    if np.max(np.abs(y)) > DIVERGENCE_LIMIT:
        raise DivergenceFault(f"state magnitude exceeded {DIVERGENCE_LIMIT:.0e} at t={t0 + dt:.6g}")
    return y


def run_closed_loop(
    truth: PlantModel,
    nominal: PlantModel,
    ctrl: ControllerState,
    ref: ReferenceSpec,
    dist: DisturbanceSpec,
    lam: float,
    T: float,
    dt_ctrl: float,
    substeps: int,
    x0=None,
    record_weights: bool = False,
) -> Trajectory:
    """Simulate the sampled closed loop over [0, T].

    At each control sample the state is read, u is computed and held, the
    truth plant is integrated over dt_ctrl with `substeps` RK4 substeps, and
    (in compensated mode) the weights take one adaptation step. A fault ends
    the run early with the partial trajectory and a terminal event.
    """
    if not (T > 0.0):
        raise ValueError("T must be > 0")
    if not (dt_ctrl > 0.0):
        raise ValueError("dt_ctrl must be > 0")
    if substeps < 1:
        raise ValueError("substeps must be >= 1")
    if truth.order != nominal.order:
        raise ValueError("truth and nominal plant orders differ")
    if ref.order != truth.order:
        raise ValueError("reference order must equal plant order")
    if ctrl.gains.order != truth.order:
        raise ValueError("controller gain order must equal plant order")
    if lam != ctrl.gains.lam:
        raise ValueError("lambda must match the controller gains")

    n = truth.order
    steps = int(math.floor(T / dt_ctrl + 1e-9))
    count = steps + 1

    if x0 is None:
        y = reference_at(ref, 0.0)[0].values.copy()
    else:
        y = np.asarray(x0, dtype=float).copy()
        if y.shape != (n,):
            raise ValueError(f"x0 must have {n} entries")

    t_arr = np.empty(count)
    x_arr = np.empty((count, n))
    xd_arr = np.empty((count, n))
    u_arr = np.empty(count)
    s_arr = np.empty(count)
    dhat_arr = np.empty(count)
    dtrue_arr = np.empty(count)
    wnorm_arr = np.empty(count)
    events: list = [""] * count
    w_hist = None
    if record_weights and ctrl.network is not None:
        w_hist = np.empty((count, ctrl.network.neuron_count))

    terminal = None
    recorded = 0
    for k in range(count):
        t_k = k * dt_ctrl
        x_d, xd_n = reference_at(ref, t_k)
        x_sv = StateVector(y)

        t_arr[k] = t_k
        x_arr[k] = y
        xd_arr[k] = x_d.values
        dtrue_arr[k] = disturbance_sample(dist, t_k)
        if w_hist is not None:
            w_hist[k] = ctrl.network.weights

        try:
            u, ctrl, log = control_step(ctrl, nominal, x_sv, x_d, xd_n, t_k, dt_ctrl)
        except ControllabilityFault:
            u_arr[k] = np.nan
            s_arr[k] = np.nan
            dhat_arr[k] = np.nan
            wnorm_arr[k] = np.nan
            events[k] = EVENT_CONTROLLABILITY
            terminal = EVENT_CONTROLLABILITY
            recorded = k + 1
            break

        u_arr[k] = u
        s_arr[k] = log.s
        dhat_arr[k] = log.d_hat
        wnorm_arr[k] = log.w_norm
        events[k] = log.event
        recorded = k + 1

        if k == steps:
            break
        try:
            y = integrate_interval(truth, y, u, t_k, dt_ctrl, substeps, dist)
        except ControllabilityFault:
            events[k] = _join_event(events[k], EVENT_CONTROLLABILITY)
            terminal = EVENT_CONTROLLABILITY
            break
        except DivergenceFault:
            events[k] = _join_event(events[k], EVENT_DIVERGENCE)
            terminal = EVENT_DIVERGENCE
            break

    sl = slice(0, recorded)
    return Trajectory(
        t=t_arr[sl],
        x=x_arr[sl],
        x_d=xd_arr[sl],
        u=u_arr[sl],
        s=s_arr[sl],
        d_hat=dhat_arr[sl],
        d_true=dtrue_arr[sl],
        w_norm=wnorm_arr[sl],
        event=events[:recorded],
        order=n,
        dt_ctrl=dt_ctrl,
        terminal_event=terminal,
        weights=None if w_hist is None else w_hist[sl],
    )


def _join_event(existing: str, new: str) -> str:
    return new if existing == "" else f"{existing};{new}"


def compute_metrics(traj: Trajectory) -> Metrics:
    """Scalar tracking metrics over a trajectory; the steady-state window is
    the final 10% of samples."""
    if len(traj) == 0:
        raise ValueError("trajectory is empty")
    xt = traj.x[:, 0] - traj.x_d[:, 0]
    rms = float(np.sqrt(np.mean(xt**2)))
    iae = float(np.trapezoid(np.abs(xt), traj.t)) if len(traj) > 1 else 0.0
    tail = max(1, len(traj) // 10)
    sse = float(np.mean(xt[-tail:]))
    max_u = float(np.max(np.abs(traj.u)))
    finite = bool(np.all(np.isfinite(traj.x)) and np.all(np.isfinite(traj.u)))
    bounded = finite and traj.terminal_event is None
    return Metrics(
        rms_error=rms,
        iae=iae,
        steady_state_error=sse,
        max_abs_u=max_u,
        bounded=bounded,
    )


def ideal_disturbance_plant(
    base: PlantModel, target: RbfNetwork, ref: ReferenceSpec, lam: float
) -> PlantModel:
    """Truth plant whose extra forcing is the target network's output at the
    instantaneous combined error: d = sum_i w*_i phi_i(s(x, t)).

    The resulting disturbance lies exactly in the compensator's span when the
    compensator shares the target's centers and widths, which makes adaptation
    descent exact up to discretization.
    """
    if ref.order != base.order:
        raise ValueError("reference order must equal plant order")
    if not (lam > 0.0):
        raise ValueError("lambda must be > 0")
    n = base.order
    filt = np.array(
        [binomial_coefficient(n - 1, i) * lam ** (n - 1 - i) for i in range(n)]
    )
    centers = target.centers
    two_sq_widths = 2.0 * target.widths**2
    w_target = target.weights
    base_f = base.f_eval
    if ref.kind == "constant":
        xd_const = _reference_values(ref, 0.0)[0]
        ref_vals = lambda t: xd_const
    else:
        ref_vals = lambda t: _reference_values(ref, t)[0]

    def f_with_net(x, t):
        vals = x.values if isinstance(x, StateVector) else x
        s = float(np.dot(filt, vals - ref_vals(t)))
        phi = np.exp(-((s - centers) ** 2) / two_sq_widths)
        return base_f(x, t) + float(np.dot(w_target, phi))

    return PlantModel(
        order=base.order,
        f_eval=f_with_net,
        b_eval=base.b_eval,
        b_min=base.b_min,
        name=f"{base.name}+rbf_disturbance",
        params=dict(base.params),
    )
