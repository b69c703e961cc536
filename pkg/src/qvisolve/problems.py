"""Concrete QVI instances with closed-form projections and known constants.

Families:

* the truncated sequence-space example (sine-perturbed linear operator with a
  one-sided bound on the first coordinate that moves with the point),
* moving-set problems K(x) = shift(x) + K over a fixed box or ball, projected
  through the translation identity P_{shift+K}(z) = shift + P_K(z - shift),
* plain single-set VIs,
* a seeded affine generator whose constants hold by construction.

Problem descriptors can also be loaded from JSON; see `load_problem`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .core import (
    Array,
    ConstraintSpec,
    OperatorSpec,
    QviProblem,
    ValidationError,
    as_vector,
    oracle_result,
)


# --------------------------------------------------------------------------
# fixed convex sets with closed-form projections
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxSet:
    """Axis-aligned box {z : lo <= z <= hi}; bounds may be +-inf."""

    lo: Array
    hi: Array

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float)
        hi = np.array(self.hi, dtype=float)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValidationError("box bounds must be 1-D arrays of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise ValidationError("box requires lo <= hi with no NaN")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def from_bounds(cls, n: int, lo, hi) -> "BoxSet":
        """Broadcast scalar bounds; None means unbounded on that side."""
        lo = -np.inf if lo is None else lo
        hi = np.inf if hi is None else hi
        return cls(np.broadcast_to(np.asarray(lo, float), (n,)).copy(),
                   np.broadcast_to(np.asarray(hi, float), (n,)).copy())

    def project(self, z) -> Array:
        return np.clip(z, self.lo, self.hi)


@dataclass(frozen=True)
class BallSet:
    """Euclidean ball {z : ||z - center|| <= radius}."""

    center: Array
    radius: float

    def __post_init__(self):
        center = np.array(self.center, dtype=float)
        if center.ndim != 1 or not np.all(np.isfinite(center)):
            raise ValidationError("ball center must be a finite 1-D array")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValidationError(f"ball radius must be positive, got {self.radius!r}")
        center.setflags(write=False)
        object.__setattr__(self, "center", center)

    def project(self, z) -> Array:
        w = np.asarray(z, dtype=float) - self.center
        nw = np.linalg.norm(w)
        if nw <= self.radius:
            return np.array(z, dtype=float)
        return self.center + w * (self.radius / nw)


@dataclass(frozen=True)
class AffineMap:
    """x -> matrix @ x + offset."""

    matrix: Array
    offset: Array

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float)
        offset = np.array(self.offset, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationError("matrix must be square")
        if offset.shape != (matrix.shape[0],):
            raise ValidationError("offset length must match the matrix size")
        matrix.setflags(write=False)
        offset.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)

    def __call__(self, x: Array) -> Array:
        return self.matrix @ x + self.offset


# --------------------------------------------------------------------------
# moving sets
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MovingSetSpec:
    """Moving constraint family K(x) = shift(x) + K for a fixed closed convex K.

    shift_lipschitz is the declared Lipschitz constant of the shift map; the
    resulting parametric projection constant is 2 * shift_lipschitz.
    """

    shift: Callable[[Array], Array]
    shift_lipschitz: float
    base_projection: Callable[[Array], Array]

    def __post_init__(self):
        if not (np.isfinite(self.shift_lipschitz) and self.shift_lipschitz >= 0):
            raise ValidationError(
                f"shift_lipschitz must be nonnegative, got {self.shift_lipschitz!r}"
            )


def moving_set_project(spec: MovingSetSpec, x, z) -> Array:
    """P_{shift(x)+K}(z) = shift(x) + P_K(z - shift(x)) (translation identity)."""
    x = as_vector(x, name="x")
    z = as_vector(z, dim=x.shape[0], name="z")
    m = oracle_result(spec.shift(x), x.shape[0], "shift oracle")
    return m + oracle_result(spec.base_projection(z - m), x.shape[0], "base projection")


def make_moving_set_problem(
    n: int,
    operator: OperatorSpec,
    spec: MovingSetSpec,
    known_solution=None,
    name: str = "moving_set",
) -> QviProblem:
    """QVI over K(x) = shift(x) + K with lip_l = 2 * shift_lipschitz."""
    constraint = ConstraintSpec(
        project=lambda x, z: moving_set_project(spec, x, z),
        lip_l=2.0 * spec.shift_lipschitz,
    )
    return QviProblem(operator=operator, constraint=constraint, dim=n,
                      known_solution=known_solution, name=name)


def make_single_set_problem(
    n: int,
    operator: OperatorSpec,
    base_projection: Callable[[Array], Array],
    known_solution=None,
    name: str = "vi",
) -> QviProblem:
    """Plain VI: the constraint set ignores x, so lip_l = 0."""
    constraint = ConstraintSpec(
        project=lambda x, z: np.asarray(base_projection(z), dtype=float),
        lip_l=0.0,
    )
    return QviProblem(operator=operator, constraint=constraint, dim=n,
                      known_solution=known_solution, name=name)


# --------------------------------------------------------------------------
# named instances
# --------------------------------------------------------------------------

def make_l2_example(n: int, alpha: float = 2.0) -> QviProblem:
    """Truncated sequence-space test problem.

    F(x)_i = alpha*x_i + |sin x_i| on R^n, constrained by
    K(x) = {y : y_0 >= x_0/10, y_k = 0 for k >= 1}, whose metric projection is
    the three-branch closed form (member points are fixed; otherwise the tail
    is zeroed and the first coordinate is floored at x_0/10). Constants:
    L = alpha+1, rho = alpha-1, lip_l = 1/10. The unique solution is the zero
    vector, which is exact for every truncation dimension because the
    constraint already pins all tail coordinates to zero.
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not alpha > 1.0:
        raise ValidationError(
            f"alpha must exceed 1 (strong monotonicity alpha-1 must be positive), got {alpha!r}"
        )

    def op(x):
        return alpha * x + np.abs(np.sin(x))

    def proj(x, z):
        bound = x[0] / 10.0
        # membership and the z_0 comparison are exact: the zero-tail structure
        # is binary and the branch must be deterministic
        if z[0] >= bound and not np.any(z[1:]):
            return z.copy()
        out = np.zeros_like(z)
        out[0] = bound if z[0] < bound else z[0]
        return out

    return QviProblem(
        operator=OperatorSpec(op, lipschitz_L=alpha + 1.0, strong_rho=alpha - 1.0),
        constraint=ConstraintSpec(proj, lip_l=0.1),
        dim=n,
        known_solution=np.zeros(n),
        name=f"l2_example(n={n}, alpha={alpha})",
    )


def make_halfline_vi() -> QviProblem:
    """1-D test VI: K = [1, inf), F(x) = x, solution x* = 1."""
    box = BoxSet.from_bounds(1, 1.0, None)
    op = OperatorSpec(AffineMap(np.eye(1), np.zeros(1)), lipschitz_L=1.0, strong_rho=1.0)
    return make_single_set_problem(1, op, box.project,
                                   known_solution=np.array([1.0]), name="halfline_vi")


def make_affine_qvi(n: int, seed: int, rho_target: float, L_target: float,
                    beta: float) -> QviProblem:
    """Seeded affine QVI with certified constants and a known solution.

    F(x) = A x + b with A = rho*I + (L-rho)*S, where S is a random symmetric
    PSD matrix of unit spectral norm, so the declared rho and L hold by
    construction (and L is attained). The constraint is the unit ball shifted
    by beta*C x for a random linear C of unit spectral norm. b = -A @ x_target
    for a seeded point well inside K(x_target), making x_target the exact
    solution. Deterministic in (n, seed, constants).
    """
    if not (isinstance(n, int) and n >= 1):
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    if not (0 < rho_target <= L_target):
        raise ValidationError(
            f"need 0 < rho_target <= L_target, got rho={rho_target!r}, L={L_target!r}"
        )
    if not beta >= 0:
        raise ValidationError(f"beta must be nonnegative, got {beta!r}")

    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigs = rng.uniform(size=n)
    eigs = eigs / eigs.max()
    s = (q * eigs) @ q.T
    a = rho_target * np.eye(n) + (L_target - rho_target) * s

    c = rng.standard_normal((n, n))
    c = c / np.linalg.svd(c, compute_uv=False)[0]

    g = rng.standard_normal(n)
    x_target = (0.5 / (1.0 + beta)) * g / np.linalg.norm(g)
    b = -a @ x_target

    spec = MovingSetSpec(
        shift=AffineMap(beta * c, np.zeros(n)),
        shift_lipschitz=beta,
        base_projection=BallSet(np.zeros(n), 1.0).project,
    )
    operator = OperatorSpec(AffineMap(a, b), lipschitz_L=L_target, strong_rho=rho_target)
    return make_moving_set_problem(
        n, operator, spec, known_solution=x_target,
        name=f"affine_qvi(n={n}, seed={seed}, beta={beta})",
    )


def make_moving_box_problem(n: int = 4, shift_scale: float = 0.1) -> QviProblem:
    """Moving box K(x) = shift_scale*x + [-1, 1]^n with F(x) = x; solution 0."""
    spec = MovingSetSpec(
        shift=AffineMap(shift_scale * np.eye(n), np.zeros(n)),
        shift_lipschitz=abs(shift_scale),
        base_projection=BoxSet.from_bounds(n, -1.0, 1.0).project,
    )
    op = OperatorSpec(AffineMap(np.eye(n), np.zeros(n)), lipschitz_L=1.0, strong_rho=1.0)
    return make_moving_set_problem(n, op, spec, known_solution=np.zeros(n),
                                   name=f"moving_box(n={n}, scale={shift_scale})")


def default_problem_suite() -> list[QviProblem]:
    """The built-in instances exercised by the property-test suite."""
    return [
        make_l2_example(50, 2.0),
        make_halfline_vi(),
        make_moving_box_problem(4, 0.1),
        make_affine_qvi(6, seed=7, rho_target=1.0, L_target=3.0, beta=0.1),
        make_affine_qvi(4, seed=11, rho_target=0.5, L_target=2.0, beta=0.0),
    ]


# --------------------------------------------------------------------------
# JSON problem descriptors
# --------------------------------------------------------------------------

def _set_from_descriptor(n: int, d: dict):
    kind = d.get("type")
    if kind == "box":
        return BoxSet.from_bounds(n, d.get("lo"), d.get("hi"))
    if kind == "ball":
        center = d.get("center", 0.0)
        center = np.broadcast_to(np.asarray(center, float), (n,)).copy()
        return BallSet(center, float(d.get("radius", 1.0)))
    raise ValidationError(f"set.type must be 'box' or 'ball', got {kind!r}")


def _operator_from_descriptor(n: int, d) -> OperatorSpec:
    if d is None or d == "identity":
        return OperatorSpec(AffineMap(np.eye(n), np.zeros(n)), 1.0, 1.0)
    matrix = d.get("matrix")
    matrix = np.eye(n) if matrix is None else np.asarray(matrix, dtype=float)
    offset = d.get("offset")
    offset = np.zeros(n) if offset is None else np.asarray(offset, dtype=float)
    amap = AffineMap(matrix, offset)
    if matrix.shape != (n, n):
        raise ValidationError(f"operator.matrix must be {n}x{n}, got {matrix.shape}")
    L = d.get("L")
    rho = d.get("rho")
    if L is None:
        L = float(np.linalg.svd(matrix, compute_uv=False)[0])
    if rho is None:
        rho = float(np.linalg.eigvalsh(0.5 * (matrix + matrix.T))[0])
    if rho <= 0:
        raise ValidationError(
            f"operator is not strongly monotone (min symmetric eigenvalue {rho:g})"
        )
    return OperatorSpec(amap, lipschitz_L=L, strong_rho=rho)


def load_problem(source: Union[dict, str, Path]) -> QviProblem:
    """Build a QviProblem from a JSON descriptor (dict, JSON text, or a path).

    Schema: {"family": "l2_example" | "affine" | "moving_set" | "single_set_vi",
    plus family parameters}; see the README for the exact fields.
    """
    if isinstance(source, (str, Path)):
        text = str(source)
        if not text.lstrip().startswith("{"):
            path = Path(text)
            if not path.is_file():
                raise ValidationError(f"problem: file not found: {path}")
            text = path.read_text(encoding="utf-8")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"problem: invalid JSON: {exc}") from None
    else:
        doc = dict(source)

    family = doc.get("family")
    n = doc.get("n")
    if not (isinstance(n, int) and n >= 1):
        raise ValidationError(f"n must be a positive integer, got {n!r}")

    if family == "l2_example":
        return make_l2_example(n, float(doc.get("alpha", 2.0)))

    if family == "affine":
        return make_affine_qvi(
            n,
            seed=int(doc.get("seed", 0)),
            rho_target=float(doc.get("rho", 1.0)),
            L_target=float(doc.get("L", 1.0)),
            beta=float(doc.get("beta", 0.0)),
        )

    known = doc.get("known_solution")
    if known is not None:
        known = as_vector(known, n, name="known_solution")

    if family == "moving_set":
        base = _set_from_descriptor(n, doc.get("base_set") or {})
        scale = float(doc.get("shift_scale", 0.0))
        offset = doc.get("shift_offset", 0.0)
        offset = np.broadcast_to(np.asarray(offset, float), (n,)).copy()
        spec = MovingSetSpec(
            shift=AffineMap(scale * np.eye(n), offset),
            shift_lipschitz=abs(scale),
            base_projection=base.project,
        )
        op = _operator_from_descriptor(n, doc.get("operator"))
        return make_moving_set_problem(n, op, spec, known_solution=known,
                                       name=f"moving_set(n={n}, scale={scale})")

    if family == "single_set_vi":
        base = _set_from_descriptor(n, doc.get("set") or {})
        op = _operator_from_descriptor(n, doc.get("operator"))
        return make_single_set_problem(n, op, base.project, known_solution=known,
                                       name=f"single_set_vi(n={n})")

    raise ValidationError(
        f"family must be one of l2_example/affine/moving_set/single_set_vi, got {family!r}"
    )
