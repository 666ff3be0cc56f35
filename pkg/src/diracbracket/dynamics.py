"""RK4 integration of z' = J*(z) grad H(z) with conservation diagnostics."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dirac import DiracSystem
from .kernels import PolyBatch
from .poly import PolyExpr

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_STEPS = 10_000


@dataclass
class Trajectory:
    """Recorded states with per-record constraint and energy drift.

    ``drift_phi[k]`` is max_n |Phi_n(z_k) - Phi_n(z_0)| and ``drift_H[k]``
    is |H(z_k) - H(z_0)|.  ``diagnostic`` is set when integration stopped
    early on a non-finite state.
    """

    var_names: tuple
    times: np.ndarray
    states: np.ndarray
    drift_phi: np.ndarray
    drift_H: np.ndarray
    dt: float
    diagnostic: Optional[str] = None

    @property
    def truncated(self) -> bool:
        return self.diagnostic is not None

    @property
    def max_constraint_drift(self) -> float:
        return float(self.drift_phi.max(initial=0.0))

    @property
    def max_energy_drift(self) -> float:
        return float(self.drift_H.max(initial=0.0))

    def to_csv(self, path) -> None:
        fmt = _format_number
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["t", *self.var_names, "drift_phi_max", "drift_H"])
            for t, z, dp, dh in zip(self.times, self.states, self.drift_phi, self.drift_H):
                w.writerow([fmt(t), *(fmt(x) for x in z), fmt(dp), fmt(dh)])


def _format_number(x) -> str:
    return np.format_float_scientific(x, unique=True, trim="-") if x else "0"


def _gradient_batch(H: PolyExpr) -> PolyBatch:
    return PolyBatch([H.diff(i) for i in range(H.nvars)], H.nvars)


def integrate(sys: DiracSystem, H: PolyExpr, z0, dt: float = DEFAULT_DT,
              n_steps: int = DEFAULT_STEPS, dtype=np.longdouble, record_every: int = 1,
              compensated: bool = True) -> Trajectory:
    """Classical RK4 on z' = J*(z) grad H(z).

    The default ``dtype`` (``np.longdouble``) carries state, stages and
    diagnostics in extended precision; a pointwise D is still computed in
    float64.  With
    ``compensated`` the state update uses Kahan summation so that
    roundoff in the accumulation does not swamp the O(dt^4) truncation
    drift.  A step that leaves the region where the kernel condition holds
    raises :class:`~diracbracket.dirac.ObstructionError`.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    if record_every < 1:
        raise ValueError("record_every must be at least 1")
    if H.nvars != sys.N:
        raise ValueError(f"H has {H.nvars} variables, system has {sys.N}")
    dtype = np.dtype(dtype)
    z = np.array(z0, dtype=dtype)
    if z.shape != (sys.N,):
        raise ValueError(f"initial state has shape {z.shape}, expected ({sys.N},)")
    if not np.all(np.isfinite(z)):
        raise ValueError("initial state is not finite")

    grad = _gradient_batch(H)
    Hb = PolyBatch([H], sys.N)
    phis = sys.constraints._phi_batch if sys.M else None

    def rhs(x):
        Js = np.asarray(sys.Jstar_at(x), dtype=dtype)
        return Js @ grad(x)

    H0 = Hb(z)[0]
    phi0 = phis(z) if phis is not None else None
    h = dtype.type(dt)
    half, sixth = h / 2, h / 6

    times, states, dphi, dH = [], [], [], []

    def record(step, x):
        times.append(step * dt)
        states.append(x.copy())
        dphi.append(np.max(np.abs(phis(x) - phi0)) if phis is not None else dtype.type(0))
        dH.append(abs(Hb(x)[0] - H0))

    record(0, z)
    comp = np.zeros_like(z)
    diagnostic = None
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(1, n_steps + 1):
            k1 = rhs(z)
            k2 = rhs(z + half * k1)
            k3 = rhs(z + half * k2)
            k4 = rhs(z + h * k3)
            dz = sixth * (k1 + 2 * k2 + 2 * k3 + k4)
            if compensated:
                y = dz - comp
                t = z + y
                comp = (t - z) - y
                z = t
            else:
                z = z + dz
            if not np.all(np.isfinite(z)):
                diagnostic = f"non-finite state at step {step} (t = {step * dt:g})"
                logger.warning("integration stopped: %s", diagnostic)
                break
            if step % record_every == 0 or step == n_steps:
                record(step, z)

    return Trajectory(
        var_names=sys.space.var_names,
        times=np.array(times, dtype=float),
        states=np.array(states, dtype=dtype).reshape(-1, sys.N),
        drift_phi=np.array(dphi, dtype=dtype),
        drift_H=np.array(dH, dtype=dtype),
        dt=dt,
        diagnostic=diagnostic,
    )
