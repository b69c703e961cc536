"""Closed-form constants and sufficient conditions for the Tseng-type schemes.

Every derived quantity is a function of the declared constants (L, rho, l,
lambda, optionally beta): the contraction modulus theta of the projected step
map, the continuous-time exponent Lambda, the discrete alignment constant mu
and squared per-step rate bound r, the two uniqueness bounds on l, and the
moving-set condition. Certificates report the conditions as data; solvers run
regardless and only tag their traces when a condition fails, because problems
routinely converge outside the certified regime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import ValidationError


@dataclass(frozen=True)
class ProblemConstants:
    """Declared constants: operator Lipschitz L, strong monotonicity rho,
    parametric projection constant l, step size lambda, and (for moving-set
    problems) the shift Lipschitz constant beta."""

    L: float
    rho: float
    l: float
    lam: float
    beta: Optional[float] = None

    def __post_init__(self):
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValidationError(f"L must be positive and finite, got {self.L!r}")
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise ValidationError(f"rho must be positive and finite, got {self.rho!r}")
        if self.rho > self.L:
            raise ValidationError(f"rho exceeds L (rho={self.rho}, L={self.L})")
        if not (math.isfinite(self.l) and self.l >= 0):
            raise ValidationError(f"l must be nonnegative and finite, got {self.l!r}")
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ValidationError(f"lambda must be positive and finite, got {self.lam!r}")
        if self.beta is not None and not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError(f"beta must be nonnegative and finite, got {self.beta!r}")


_FLOAT_FIELDS = (
    "gamma", "theta", "radicand", "mu", "Lambda", "rate_r",
    "existence_bound", "nesterov_bound", "discrete_rhs", "moving_rhs",
)
_FLAG_FIELDS = (
    "existence_ok", "nesterov_ok", "continuous_ok", "discrete_ok",
    "moving_ok", "radicand_ok",
)


@dataclass(frozen=True)
class Certificate:
    """All derived constants plus the sufficient-condition flags for one
    (L, rho, l, lambda[, beta]) tuple.

    Flags:
      existence_ok   l <= 1/(gamma*(gamma + sqrt(gamma^2 - 1))), the strict
                     uniqueness bound (gamma = L/rho)
      nesterov_ok    l <= 1/gamma, the weaker uniqueness bound
      continuous_ok  Lambda = (1+lam*L)(1+theta) - 2 < 0 (exponential flow decay)
      discrete_ok    ((1+theta)(1+lam*L) + 1)^2 < 4 - l^2 + 2l (linear rate r < 1)
      moving_ok      the discrete condition after substituting l = 2*beta,
                     against moving_rhs = 2*sqrt(1 - beta^2 + beta) - 1
      radicand_ok    1 - 2*lam*rho + lam^2 L^2 >= 0 (analytically always true)
    """

    gamma: float
    theta: float
    radicand: float
    mu: float
    Lambda: float
    rate_r: float
    existence_bound: float
    nesterov_bound: float
    discrete_rhs: float
    moving_rhs: Optional[float]
    existence_ok: bool
    nesterov_ok: bool
    continuous_ok: bool
    discrete_ok: bool
    moving_ok: bool
    radicand_ok: bool

    def to_dict(self) -> dict:
        """Flat JSON-ready mapping; non-finite floats become null."""
        out = {}
        for name in _FLOAT_FIELDS:
            v = getattr(self, name)
            out[name] = None if v is None or not math.isfinite(v) else float(v)
        for name in _FLAG_FIELDS:
            out[name] = bool(getattr(self, name))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        kw = {}
        for name in _FLOAT_FIELDS:
            v = d[name]
            if name == "moving_rhs":
                kw[name] = None if v is None else float(v)
            else:
                kw[name] = math.nan if v is None else float(v)
        for name in _FLAG_FIELDS:
            kw[name] = bool(d[name])
        return cls(**kw)


def radicand(c: ProblemConstants) -> float:
    """1 - 2*lam*rho + lam^2 L^2; equals (1-lam*rho)^2 + lam^2 (L^2 - rho^2) >= 0."""
    return 1.0 - 2.0 * c.lam * c.rho + (c.lam * c.L) ** 2


def theta(c: ProblemConstants) -> float:
    """Contraction modulus l + sqrt(1 - 2*lam*rho + lam^2 L^2) of the
    projected step map x -> P_{K(x)}(x - lam*F(x))."""
    rad = radicand(c)
    if rad < 0.0:
        raise AssertionError(
            f"negative radicand {rad!r}: impossible for valid constants (bug)"
        )
    return c.l + math.sqrt(rad)


def existence_bounds(gamma: float) -> Tuple[float, float]:
    """The two upper bounds on l guaranteeing a unique solution, as
    (strict, relaxed) = (1/(gamma*(gamma + sqrt(gamma^2 - 1))), 1/gamma)."""
    if not (math.isfinite(gamma) and gamma >= 1.0):
        raise ValidationError(f"gamma must be >= 1 and finite, got {gamma!r}")
    strict = 1.0 / (gamma * (gamma + math.sqrt(gamma * gamma - 1.0)))
    return strict, 1.0 / gamma


def full_certificate(c: ProblemConstants) -> Certificate:
    """Evaluate every derived constant and condition flag for the given
    constants. moving_rhs/moving_ok are populated only when beta is present."""
    gamma = c.L / c.rho
    rad = radicand(c)
    radicand_ok = rad >= 0.0
    th = c.l + math.sqrt(rad) if radicand_ok else math.nan
    lamL = c.lam * c.L
    mu = 0.5 - c.l * c.l / 2.0 - th + c.l - lamL - lamL * th
    Lam = (1.0 + lamL) * (1.0 + th) - 2.0
    rate_r = 1.0 - 2.0 * mu + ((1.0 + th) * (1.0 + lamL)) ** 2
    existence_bound, nesterov_bound = existence_bounds(gamma)
    delta = 4.0 - c.l * c.l + 2.0 * c.l
    discrete_rhs = math.sqrt(delta) - 1.0 if delta >= 0.0 else math.nan
    discrete_ok = radicand_ok and ((1.0 + th) * (1.0 + lamL) + 1.0) ** 2 < delta

    if c.beta is not None:
        mv = 1.0 - c.beta * c.beta + c.beta
        moving_rhs = 2.0 * math.sqrt(mv) - 1.0 if mv >= 0.0 else math.nan
        th_mv = 2.0 * c.beta + math.sqrt(rad) if radicand_ok else math.nan
        moving_ok = radicand_ok and (1.0 + th_mv) * (1.0 + lamL) < moving_rhs
    else:
        moving_rhs = None
        moving_ok = False

    return Certificate(
        gamma=gamma,
        theta=th,
        radicand=rad,
        mu=mu,
        Lambda=Lam,
        rate_r=rate_r,
        existence_bound=existence_bound,
        nesterov_bound=nesterov_bound,
        discrete_rhs=discrete_rhs,
        moving_rhs=moving_rhs,
        existence_ok=c.l <= existence_bound,
        nesterov_ok=c.l <= nesterov_bound,
        continuous_ok=radicand_ok and Lam < 0.0,
        discrete_ok=discrete_ok,
        moving_ok=moving_ok,
        radicand_ok=radicand_ok,
    )


def best_lambda(L: float, rho: float, l: float, grid: int = 1001) -> Tuple[float, Certificate]:
    """Grid-search the step size minimizing the squared per-step rate bound r.

    The scan is a logarithmic grid on (0, 20*rho/L^2] (lower end 1e-6 of the
    upper end, `grid` points). r >= 1 for every admissible step size -- see the
    feasibility sweep -- so the minimizer is a principled default step size, not
    a certified linear rate; it is returned together with its certificate.
    Deterministic for fixed inputs; ties resolve to the smallest lambda.
    """
    if not (isinstance(grid, int) and grid >= 2):
        raise ValidationError(f"grid must be an integer >= 2, got {grid!r}")
    upper = 20.0 * rho / (L * L)
    lams = np.geomspace(upper * 1e-6, upper, grid)
    best_lam, best_cert = None, None
    for lam in lams:
        cert = full_certificate(ProblemConstants(L=L, rho=rho, l=l, lam=float(lam)))
        if best_cert is None or cert.rate_r < best_cert.rate_r:
            best_lam, best_cert = float(lam), cert
    return best_lam, best_cert
