"""Fixed-step simulation of plants with linear and cubic observers.

The integrator is classical fourth-order Runge-Kutta on a uniform grid;
the final step is shortened so the last sample lands exactly on the
horizon. Everything is deterministic: the same configuration produces the
same floating-point trace, bit for bit.

The cubic observer correction is always evaluated from the output residual
r = y - c xhat, never from the unmeasurable state error, so the simulated
observer only uses quantities it could measure. The linear observer runs
through the identical code path with zero cubic coefficients, which makes
the gamma -> 0 limit exact.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import numlin
from .errors import ContractError, DimensionError, DivergenceError
from .design import CubicObserverDesign, LinearObserverDesign
from .sysmodel import ZeroInput, evaluate_input

# trajectory norm beyond which integration is declared divergent
DIVERGENCE_LIMIT = 1e12
# default band for settling-time detection (absolute)
SETTLE_THRESHOLD = 0.05


@dataclass(frozen=True)
class SimConfig:
    """Grid and initial data for a simulation run.

    x0 is the plant initial state; xhat0 defaults to zero. input defaults
    to the zero signal of the plant's input dimension. eps, when set,
    shifts the dynamics matrix to a + eps*I for both the plant and the
    observer's internal model (the gains stay fixed), so the estimation
    error follows the perturbed error dynamics the robustness bound talks
    about.
    """

    horizon: float
    dt: float = 1e-3
    x0: object = None
    xhat0: object = None
    input: object = None
    eps: float | None = None

    def __post_init__(self):
        horizon = float(self.horizon)
        dt = float(self.dt)
        if not np.isfinite(dt) or dt <= 0.0:
            raise ContractError(f"dt must be a positive real, got {dt}")
        if not np.isfinite(horizon) or horizon < dt:
            raise ContractError(
                f"horizon must cover at least one step: horizon={horizon}, dt={dt}"
            )
        object.__setattr__(self, "horizon", horizon)
        object.__setattr__(self, "dt", dt)
        if self.eps is not None:
            eps = float(self.eps)
            if not np.isfinite(eps):
                raise ContractError("eps must be finite")
            object.__setattr__(self, "eps", eps)


@dataclass
class Trace:
    """Sampled joint trajectory of a plant/observer run.

    lyapunov carries e^T p e when the run had Lyapunov data available;
    lyapunov_zubov is the bounded transform 1 - exp(-e^T p e). control is
    only present for closed-loop runs.
    """

    times: np.ndarray
    plant_states: np.ndarray
    estimates: np.ndarray
    errors: np.ndarray
    outputs: np.ndarray
    inputs: np.ndarray
    lyapunov: np.ndarray | None = None
    lyapunov_zubov: np.ndarray | None = None
    control: np.ndarray | None = None

    @property
    def n(self):
        return self.plant_states.shape[1]

    @property
    def n_outputs(self):
        return self.outputs.shape[1]

    @property
    def n_inputs(self):
        return self.inputs.shape[1]


@dataclass
class Metrics:
    """Scalar and cumulative error measures computed from a trace.

    overshoot_peak is the largest error magnitude after the error first
    changes sign, the usual reading of "peak" off a transient plot; it is
    None for states whose error never crosses zero. settling_time is the
    first time after which the error magnitude stays inside the settle
    band through the end of the horizon (None when it never settles).
    """

    peak_error: np.ndarray
    overshoot_peak: list
    settling_time: list
    cumulative_squared: np.ndarray
    cumulative_total: np.ndarray
    j_final: np.ndarray
    j_total: float
    lqr_cost: float | None = None
    lqr_cost_series: np.ndarray | None = None
    diverged_at: float | None = None


def _time_grid(dt, horizon):
    n_steps = int(np.ceil(horizon / dt - 1e-9))
    times = np.empty(n_steps + 1)
    times[:n_steps] = np.arange(n_steps) * dt
    times[n_steps] = horizon
    return times


def _rk4(field, y0, dt, horizon):
    """March the ODE, returning (times, states) or raising DivergenceError."""
    times = _time_grid(dt, horizon)
    n_steps = times.size - 1
    states = np.empty((times.size, y0.size))
    y = y0.astype(float).copy()
    states[0] = y
    for k in range(n_steps):
        t0 = times[k]
        h = times[k + 1] - t0
        half = 0.5 * h
        k1 = field(t0, y)
        k2 = field(t0 + half, y + half * k1)
        k3 = field(t0 + half, y + half * k2)
        k4 = field(times[k + 1], y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(y)) or float(np.max(np.abs(y))) > DIVERGENCE_LIMIT:
            raise DivergenceError(
                f"trajectory diverged between t={t0:g} and t={times[k + 1]:g}",
                last_time=t0,
                trace=(times[: k + 1].copy(), states[: k + 1].copy()),
            )
        states[k + 1] = y
    return times, states


def integrate_rk4(derivative, x0, cfg):
    """Integrate dy/dt = derivative(t, y) over the grid described by cfg.

    Returns (times, states) with states[k] the solution at times[k]. The
    grid is uniform with step cfg.dt except for a shortened final step
    landing exactly on cfg.horizon. Non-finite states or a norm beyond
    1e12 raise DivergenceError carrying the partial arrays.
    """
    y0 = numlin.as_vector(x0, "x0")
    return _rk4(derivative, y0, cfg.dt, cfg.horizon)


def _bind_config(sys, cfg):
    x0 = np.zeros(sys.n) if cfg.x0 is None else numlin.as_vector(cfg.x0, "x0")
    if x0.size != sys.n:
        raise DimensionError(f"x0 must have {sys.n} entries, got {x0.size}")
    xhat0 = (
        np.zeros(sys.n) if cfg.xhat0 is None else numlin.as_vector(cfg.xhat0, "xhat0")
    )
    if xhat0.size != sys.n:
        raise DimensionError(f"xhat0 must have {sys.n} entries, got {xhat0.size}")
    signal = ZeroInput(sys.n_inputs) if cfg.input is None else cfg.input
    if signal.dimension != sys.n_inputs:
        raise DimensionError(
            f"input signal has dimension {signal.dimension}, plant expects "
            f"{sys.n_inputs}"
        )
    return x0, xhat0, signal


def _run_joint(sys, gain_l, gain_nc, theta, cfg, feedback_k=None, lyapunov_p=None):
    n = sys.n
    x0, xhat0, signal = _bind_config(sys, cfg)
    eps = 0.0 if cfg.eps is None else float(cfg.eps)
    a = sys.a if eps == 0.0 else sys.a + eps * np.eye(n)
    c = sys.c
    b = sys.b

    m = np.zeros((2 * n, 2 * n))
    m[:n, :n] = a
    m[n:, :n] = gain_l @ c
    m[n:, n:] = a - gain_l @ c
    bstack = np.vstack([b, b])
    c_res = np.hstack([c, -c])  # r = y - c xhat

    if feedback_k is None:

        def field(t, z):
            out = m @ z + bstack @ signal.sample(t)
            r = c_res @ z
            out[n:] -= float(r @ theta @ r) * (gain_nc @ r)
            return out

    else:
        k = feedback_k

        def field(t, z):
            out = m @ z + bstack @ (-(k @ z[n:]))
            r = c_res @ z
            out[n:] -= float(r @ theta @ r) * (gain_nc @ r)
            return out

    z0 = np.concatenate([x0, xhat0])
    try:
        times, states = _rk4(field, z0, cfg.dt, cfg.horizon)
    except DivergenceError as exc:
        part_times, part_states = exc.trace
        exc.trace = _assemble_trace(
            sys, part_times, part_states, signal, feedback_k, lyapunov_p
        )
        raise
    return _assemble_trace(sys, times, states, signal, feedback_k, lyapunov_p)


def _assemble_trace(sys, times, states, signal, feedback_k, lyapunov_p):
    n = sys.n
    x = states[:, :n]
    xhat = states[:, n:]
    errors = x - xhat
    outputs = x @ sys.c.T
    if feedback_k is None:
        inputs = np.array([evaluate_input(signal, t) for t in times])
        control = None
    else:
        inputs = -(xhat @ np.asarray(feedback_k).T)
        control = inputs
    lyap = None
    zubov = None
    if lyapunov_p is not None:
        lyap = np.einsum("ij,jk,ik->i", errors, lyapunov_p, errors)
        zubov = -np.expm1(-lyap)
    return Trace(
        times=times,
        plant_states=x,
        estimates=xhat,
        errors=errors,
        outputs=outputs,
        inputs=inputs,
        lyapunov=lyap,
        lyapunov_zubov=zubov,
        control=control,
    )


def _zero_cubic(sys):
    ny = sys.n_outputs
    return np.zeros((sys.n, ny)), np.zeros((ny, ny))


def simulate_linear_observer(sys, obs, cfg, lyapunov_p=None):
    """Simulate the plant with a linear output-injection observer.

    obs is a LinearObserverDesign. Passing lyapunov_p records the energy
    e^T p e along the run (useful for comparing against a cubic observer
    that shares the same p). The run shares the cubic observer's code path
    with zero cubic coefficients, so it is the exact gamma -> 0 limit.
    """
    if obs.gain_l.shape != (sys.n, sys.n_outputs):
        raise DimensionError(
            f"gain_l must have shape ({sys.n}, {sys.n_outputs}), "
            f"got {obs.gain_l.shape}"
        )
    nc, theta = _zero_cubic(sys)
    return _run_joint(sys, obs.gain_l, nc, theta, cfg, lyapunov_p=lyapunov_p)


def simulate_cubic_observer(sys, design, cfg):
    """Simulate the plant with a cubic observer design.

    The correction term is computed from the output residual only. The
    design need not be certified; simulating uncertified gains is exactly
    how one falsifies them.
    """
    if design.n != sys.n or design.gain_lc.shape[1] != sys.n_outputs:
        raise DimensionError("design dimensions do not match the system")
    return _run_joint(
        sys,
        design.gain_lc,
        design.gain_nc,
        design.theta,
        cfg,
        lyapunov_p=design.lyapunov_p,
    )


def simulate_closed_loop(sys, design, k, cfg):
    """Simulate observer-based state feedback u = -k xhat.

    design may be a CubicObserverDesign or a LinearObserverDesign; the
    linear case runs with zero cubic coefficients. The trace's control
    series records the applied input.
    """
    k = numlin.as_matrix(k, "k")
    if k.shape != (sys.n_inputs, sys.n):
        raise DimensionError(
            f"k must have shape ({sys.n_inputs}, {sys.n}), got {k.shape}"
        )
    if isinstance(design, LinearObserverDesign):
        nc, theta = _zero_cubic(sys)
        return _run_joint(sys, design.gain_l, nc, theta, cfg, feedback_k=k)
    if isinstance(design, CubicObserverDesign):
        return _run_joint(
            sys,
            design.gain_lc,
            design.gain_nc,
            design.theta,
            cfg,
            feedback_k=k,
            lyapunov_p=design.lyapunov_p,
        )
    raise ContractError(f"unsupported design type {type(design).__name__}")


def simulate_perturbed(family, design, eps, cfg):
    """Simulate a cubic design on the family member a + eps*I.

    The gains stay as designed for the nominal plant while the dynamics
    matrix is perturbed, so the recorded error follows the perturbed error
    dynamics. eps = 0 reproduces the nominal run exactly.
    """
    from .sysmodel import perturb

    sys_eps = perturb(family, eps)
    return simulate_cubic_observer(sys_eps, design, replace(cfg, eps=None))


def _cumulative_trapezoid(times, values):
    """Cumulative trapezoid along axis 0; first row is zero."""
    dt = np.diff(times)
    avg = 0.5 * (values[:-1] + values[1:])
    out = np.zeros_like(values)
    out[1:] = np.cumsum(avg * dt[:, None] if values.ndim == 2 else avg * dt, axis=0)
    return out


def compute_metrics(trace, settle_threshold=SETTLE_THRESHOLD, lqr_weights=None):
    """Evaluate peak, overshoot, settling, and cumulative squared error.

    settle_threshold is an absolute band: the settling time of a state is
    the first sample time after the last excursion |e_i| >= threshold,
    None if the error is still outside the band at the end, and the first
    sample time when it never leaves the band. lqr_weights, when given as
    a (q, r) pair, adds the cumulative quadratic regulation cost
    integral of x^T q x + u^T r u; this requires a closed-loop trace with
    a control series.
    """
    if settle_threshold <= 0.0:
        raise ContractError("settle_threshold must be positive")
    errors = trace.errors
    times = trace.times
    n = errors.shape[1]

    peak = np.max(np.abs(errors), axis=0)

    overshoot = []
    for i in range(n):
        s = errors[:, i]
        nz = np.nonzero(s)[0]
        if nz.size == 0:
            overshoot.append(0.0)
            continue
        first = nz[0]
        sigma = np.sign(s[first])
        after = np.nonzero(sigma * s[first + 1 :] <= 0.0)[0]
        if after.size == 0:
            overshoot.append(None)
        else:
            start = first + 1 + int(after[0])
            overshoot.append(float(np.max(np.abs(s[start:]))))

    settling = []
    for i in range(n):
        outside = np.nonzero(np.abs(errors[:, i]) >= settle_threshold)[0]
        if outside.size == 0:
            settling.append(float(times[0]))
        elif outside[-1] == times.size - 1:
            settling.append(None)
        else:
            settling.append(float(times[outside[-1] + 1]))

    squared = errors**2
    cum = _cumulative_trapezoid(times, squared)
    cum_total = np.sum(cum, axis=1)

    lqr_cost = None
    lqr_series = None
    if lqr_weights is not None:
        q_lqr, r_lqr = lqr_weights
        q_lqr = numlin.symmetrize(q_lqr, "q_lqr")
        r_lqr = numlin.symmetrize(r_lqr, "r_lqr")
        if trace.control is None:
            raise ContractError(
                "lqr cost requires a closed-loop trace with a control series"
            )
        x = trace.plant_states
        u = trace.control
        integrand = np.einsum("ij,jk,ik->i", x, q_lqr, x) + np.einsum(
            "ij,jk,ik->i", u, r_lqr, u
        )
        lqr_series = _cumulative_trapezoid(times, integrand)
        lqr_cost = float(lqr_series[-1])

    return Metrics(
        peak_error=peak,
        overshoot_peak=overshoot,
        settling_time=settling,
        cumulative_squared=cum,
        cumulative_total=cum_total,
        j_final=cum[-1].copy(),
        j_total=float(cum_total[-1]),
        lqr_cost=lqr_cost,
        lqr_cost_series=lqr_series,
    )


def lyapunov_derivative_at(sys, design, e):
    """Evaluate dV/dt of V = e^T p e at a single error point.

    Returns (vdot_cubic, vdot_linear): the derivative along the cubic
    observer's error dynamics and along the linear observer's (the
    quadratic part alone). Their gap is the quartic damping the cubic
    correction buys at that point.
    """
    e = numlin.as_vector(e, "e")
    if e.size != sys.n:
        raise DimensionError(f"e must have {sys.n} entries, got {e.size}")
    f = sys.a - design.gain_lc @ sys.c
    p = design.lyapunov_p
    w = f.T @ p + p @ f
    s = sys.c.T @ design.theta @ sys.c
    d = p @ design.gain_nc @ sys.c + sys.c.T @ design.gain_nc.T @ p
    vdot_linear = float(e @ w @ e)
    vdot_cubic = vdot_linear + float(e @ s @ e) * float(e @ d @ e)
    return vdot_cubic, vdot_linear
