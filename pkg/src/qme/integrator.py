"""Fixed-step RK4 time stepping for density matrices, with per-step hygiene
and spectral diagnostics.

Positivity is never projected: a state drifting out of the positive cone is a
signal the diagnostics must show, not an artifact to erase.  The only per-step
correction is symmetric hermitization, which on well-conditioned problems
moves the state by less than 1e-12 per step.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .operators import DensityMatrix, Statistics, hermiticity_defect

#: Signature of a right-hand side: (t, rho) -> drho/dt.
RHSCallable = Callable[[float, np.ndarray], np.ndarray]


class IntegrationDivergedError(RuntimeError):
    """Raised when any RK stage produces a NaN or Inf."""

    def __init__(self, t: float):
        super().__init__(f"integration diverged at t = {t:.6g} (NaN/Inf in an RK stage)")
        self.t = t


@dataclass
class EvolutionSpec:
    """A frozen integration plan: which RHS, over which window, at which step.

    ``error_tol`` enables optional step halving: each step is compared against
    two half steps and halved until the difference falls below the tolerance.
    """

    rhs: RHSCallable
    t0: float
    t1: float
    dt: float = 1e-3
    hermitize_each_step: bool = True
    record_every: int = 1
    error_tol: float | None = None

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.t1 <= self.t0:
            raise ValueError(f"t1 ({self.t1}) must exceed t0 ({self.t0})")
        if self.record_every < 1:
            raise ValueError(f"record_every must be a positive integer, got {self.record_every}")


@dataclass
class Trajectory:
    """Recorded snapshots with per-snapshot diagnostics."""

    times: np.ndarray
    states: list[np.ndarray]
    trace: np.ndarray
    min_eig: np.ndarray
    max_eig: np.ndarray
    herm_defect: np.ndarray
    statistics: Statistics | None = None

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _rk4_raw(rho: np.ndarray, rhs: RHSCallable, t: float, dt: float) -> np.ndarray:
    # each stage state is checked before it reaches the RHS, so a blow-up
    # surfaces as a diverged error naming t rather than a validation error
    def stage(t_stage: float, state: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(state.view(float))):
            raise IntegrationDivergedError(t)
        return rhs(t_stage, state)

    with np.errstate(over="ignore", invalid="ignore"):
        k1 = stage(t, rho)
        k2 = stage(t + 0.5 * dt, rho + 0.5 * dt * k1)
        k3 = stage(t + 0.5 * dt, rho + 0.5 * dt * k2)
        k4 = stage(t + dt, rho + dt * k3)
        out = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out.view(float))):
        raise IntegrationDivergedError(t)
    return out


def step_rk4(state: np.ndarray, rhs: RHSCallable, t: float, dt: float,
             hermitize: bool = True) -> np.ndarray:
    """One classical 4-stage Runge-Kutta update of ``state`` from t to t+dt."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    rho = state.matrix if isinstance(state, DensityMatrix) else np.asarray(state, dtype=complex)
    out = _rk4_raw(rho, rhs, t, dt)
    if hermitize:
        out = 0.5 * (out + out.conj().T)
    return out


def _controlled_step(rho, rhs, t, dt, error_tol, min_dt):
    """Step-halving control: accept dt once one full step agrees with two half
    steps within error_tol; returns (state, dt actually used, raw defect)."""
    while True:
        full = _rk4_raw(rho, rhs, t, dt)
        half = _rk4_raw(rho, rhs, t, 0.5 * dt)
        half = _rk4_raw(half, rhs, t + 0.5 * dt, 0.5 * dt)
        err = float(np.abs(full - half).max())
        if err <= error_tol or dt <= min_dt:
            return half, dt, hermiticity_defect(half)
        dt *= 0.5


def evolve(spec: EvolutionSpec, initial: DensityMatrix) -> Trajectory:
    """Integrate ``initial`` under ``spec`` and record snapshots.

    The loop lands exactly on ``spec.t1`` (a final partial step is taken when
    the window is not a multiple of dt).  Every recorded snapshot carries its
    trace, extremal eigenvalues and the hermiticity defect of the raw RK4
    update before hygiene.
    """
    if not isinstance(initial, DensityMatrix):
        raise TypeError("initial state must be a DensityMatrix")
    initial.validate()

    rho = initial.matrix.copy()
    times = [spec.t0]
    states = [rho.copy()]
    defects = [hermiticity_defect(rho)]

    span = spec.t1 - spec.t0
    if spec.error_tol is None:
        n_full = int(np.floor(span / spec.dt + 1e-9))
        remainder = span - n_full * spec.dt
        if remainder < 1e-12 * spec.dt:
            remainder = 0.0
        steps = 0
        t = spec.t0
        for i in range(n_full):
            raw = _rk4_raw(rho, spec.rhs, t, spec.dt)
            defect = hermiticity_defect(raw)
            rho = 0.5 * (raw + raw.conj().T) if spec.hermitize_each_step else raw
            steps += 1
            t = spec.t0 + (i + 1) * spec.dt
            last = i == n_full - 1 and remainder == 0.0
            if steps % spec.record_every == 0 or last:
                times.append(t)
                states.append(rho.copy())
                defects.append(defect)
        if remainder > 0.0:
            raw = _rk4_raw(rho, spec.rhs, t, remainder)
            defect = hermiticity_defect(raw)
            rho = 0.5 * (raw + raw.conj().T) if spec.hermitize_each_step else raw
            times.append(spec.t1)
            states.append(rho.copy())
            defects.append(defect)
    else:
        min_dt = 1e-12 * span
        t = spec.t0
        steps = 0
        while t < spec.t1 - 1e-12 * max(1.0, abs(spec.t1)):
            dt = min(spec.dt, spec.t1 - t)
            raw, used, defect = _controlled_step(rho, spec.rhs, t, dt, spec.error_tol, min_dt)
            rho = 0.5 * (raw + raw.conj().T) if spec.hermitize_each_step else raw
            t += used
            steps += 1
            if steps % spec.record_every == 0 or t >= spec.t1 - 1e-12 * max(1.0, abs(spec.t1)):
                times.append(min(t, spec.t1))
                states.append(rho.copy())
                defects.append(defect)

    trace = np.array([float(np.trace(m).real) for m in states])
    eigs = [np.linalg.eigvalsh(0.5 * (m + m.conj().T)) for m in states]
    return Trajectory(
        times=np.array(times),
        states=states,
        trace=trace,
        min_eig=np.array([e[0] for e in eigs]),
        max_eig=np.array([e[-1] for e in eigs]),
        herm_defect=np.array(defects),
        statistics=initial.statistics,
    )
