"""Forward-process tables and the q-sampling step.

Linear beta ramp; tables carry a t=0 sentinel row (alpha_bar[0] = 1) so the
DDIM previous-step lookup needs no special case at the end of the chain.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError, DomainError


@dataclass
class NoiseSchedule:
    steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    beta: np.ndarray = field(init=False, repr=False)
    alpha: np.ndarray = field(init=False, repr=False)
    alpha_bar: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigurationError("steps must be >= 1")
        if not (0.0 < self.beta_start < 1.0 and 0.0 < self.beta_end < 1.0):
            raise ConfigurationError("betas must lie in (0, 1)")
        ramp = np.linspace(self.beta_start, self.beta_end, self.steps, dtype=np.float64)
        self.beta = np.concatenate([[0.0], ramp])
        self.alpha = 1.0 - self.beta
        self.alpha_bar = np.cumprod(self.alpha)
        if not np.all(np.diff(self.alpha_bar[1:]) < 0):
            raise ConfigurationError("alpha_bar must be strictly decreasing")
        if self.alpha_bar[-1] >= 0.01:
            raise ConfigurationError(
                f"alpha_bar at t={self.steps} is {self.alpha_bar[-1]:.4g}, must be < 0.01"
            )

    def to_meta(self) -> dict:
        return {"steps": self.steps, "beta_start": self.beta_start, "beta_end": self.beta_end}

    @classmethod
    def from_meta(cls, meta: dict) -> "NoiseSchedule":
        return cls(steps=meta["steps"], beta_start=meta["beta_start"], beta_end=meta["beta_end"])


def q_sample(
    x0: np.ndarray, t: int | np.ndarray, eps: np.ndarray, sched: NoiseSchedule
) -> np.ndarray:
    """x_t = sqrt(abar_t) * x0 + sqrt(1 - abar_t) * eps, elementwise."""
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.int64))
    if np.any(t_arr < 1) or np.any(t_arr > sched.steps):
        raise DomainError(f"t must lie in [1, {sched.steps}], got {t}")
    if x0.shape != eps.shape:
        raise DomainError(f"shape mismatch: x0 {x0.shape} vs eps {eps.shape}")
    ab = sched.alpha_bar[t_arr]
    # Broadcast per-sample coefficients over trailing axes.
    extra = x0.ndim - t_arr.ndim if np.ndim(t) else x0.ndim
    coef_shape = t_arr.shape + (1,) * extra if np.ndim(t) else (1,) * x0.ndim
    a = np.sqrt(ab).reshape(coef_shape).astype(x0.dtype)
    b = np.sqrt(1.0 - ab).reshape(coef_shape).astype(x0.dtype)
    return a * x0 + b * eps
