"""Time-dependent hopping protocols and a fixed-step RK4 driver."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

ProtocolKind = Literal["sudden", "linear", "tanh"]

# steepness of the normalised tanh ramp
TANH_STEEPNESS = 3.0


@dataclass(frozen=True)
class QuenchProtocol:
    """Hopping ``J(t)``: ``J_initial`` for ``t < 0``, ``J_final`` for ``t >= tau``.

    ``sudden`` jumps at ``t = 0``.  ``linear`` interpolates linearly over
    ``[0, tau]``.  ``tanh`` uses a tanh profile rescaled so that it is
    continuous at both ends of the ramp.
    """

    kind: ProtocolKind = "sudden"
    J_initial: float = 0.0
    J_final: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sudden", "linear", "tanh"):
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.kind != "sudden" and self.tau <= 0:
            raise ValueError(f"{self.kind} ramp needs tau > 0")

    def __call__(self, t: float) -> float:
        if t < 0:
            return self.J_initial
        if self.kind == "sudden" or t >= self.tau:
            return self.J_final
        x = t / self.tau
        if self.kind == "linear":
            s = x
        else:
            a = TANH_STEEPNESS
            s = 0.5 * (1.0 + math.tanh(a * (2 * x - 1)) / math.tanh(a))
        return self.J_initial + (self.J_final - self.J_initial) * s


def rk4(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t_end: float,
    dt: float,
    record_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4 from ``t = 0``.

    Returns the recorded times and states (state axis first).  The last step
    is shortened so the trajectory ends exactly at ``t_end``.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    n_steps = max(1, math.ceil(t_end / dt - 1e-9))
    times = [0.0]
    states = [y0.copy()]
    y = y0.copy()
    t = 0.0
    for step in range(1, n_steps + 1):
        h = min(dt, t_end - t) if step == n_steps else dt
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = step * dt if step < n_steps else t_end
        if step % record_every == 0 or step == n_steps:
            times.append(t)
            states.append(y.copy())
    return np.array(times), np.stack(states)
