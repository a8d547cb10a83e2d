"""Objectives on domains and their minimization over shape families.

The constrained problem (minimize the h-th buckling eigenvalue among sets of
perimeter at most ``p``) is searched on the saturated slice ``P = p``: every
candidate is dilated to perimeter ``p`` before evaluation, which makes the
objective ``P**2 * lam_h`` (planar scale-invariant form) equal to
``p**2 * lam_h``.  Candidates are optionally replaced by their convex hull.
The search itself is a Nelder-Mead simplex over the family parameters.
"""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import geometry
from .eigensolve import generalized_smallest
from .errors import InvalidDomainError, ResolutionTooCoarseError, SolverFailureError
from .operators import assemble_biharmonic, assemble_laplacian
from .raster import rasterize

log = logging.getLogger(__name__)

SEARCH_RESOLUTION = 96
REPORT_RESOLUTION = 192


@dataclass(frozen=True, eq=False)
class ObjectiveRecord:
    """Buckling eigenvalues of one domain together with the derived objective."""

    domain: object
    grid_h: float
    lambdas: tuple
    perimeter: float
    area: float
    objective_value: float
    extrapolated: bool = False
    eigen_index: int = 1
    dim: int = 2

    def recompute_objective(self) -> float:
        return self.perimeter ** (2.0 / (self.dim - 1)) * self.lambdas[self.eigen_index - 1]

    def to_dict(self) -> dict:
        return {
            "domain": geometry.domain_to_dict(self.domain),
            "grid_h": self.grid_h,
            "lambda": list(self.lambdas),
            "perimeter": self.perimeter,
            "area": self.area,
            "objective_value": self.objective_value,
            "extrapolated": self.extrapolated,
            "eigen_index": self.eigen_index,
        }


def buckling_eigenvalues(domain, grid_h: float, count: int = 1, *, tol: float = 1e-8,
                         seed: int = 0) -> np.ndarray:
    g = rasterize(domain, grid_h)
    spectrum = generalized_smallest(assemble_biharmonic(g), assemble_laplacian(g), count, tol, seed=seed)
    return spectrum.values


def buckling_of_domain(domain, grid_h: float | None = None, h_count: int = 1,
                       extrapolate: bool = False, *, eigen_index: int = 1,
                       tol: float = 1e-8, seed: int = 0) -> ObjectiveRecord:
    """Rasterize, assemble and solve; optionally Richardson-extrapolate.

    With ``extrapolate`` the problem is solved at ``grid_h`` and ``grid_h / 2``
    and each eigenvalue is reported as ``2 lam(h/2) - lam(h)`` (the
    discretization error is first order in ``h``).
    """
    if grid_h is None:
        grid_h = geometry.diameter(domain) / SEARCH_RESOLUTION
    if not 1 <= eigen_index <= h_count:
        raise ValueError("eigen_index must lie in 1..h_count")
    lam = buckling_eigenvalues(domain, grid_h, h_count, tol=tol, seed=seed)
    if extrapolate:
        fine = buckling_eigenvalues(domain, grid_h / 2, h_count, tol=tol, seed=seed)
        lam = np.sort(2.0 * fine - lam)
    per = geometry.perimeter(domain)
    lambdas = tuple(float(v) for v in lam)
    return ObjectiveRecord(
        domain=domain,
        grid_h=float(grid_h),
        lambdas=lambdas,
        perimeter=per,
        area=geometry.area(domain),
        objective_value=per**2 * lambdas[eigen_index - 1],
        extrapolated=bool(extrapolate),
        eigen_index=eigen_index,
    )


def objective_scale_invariant(rec: ObjectiveRecord, d_param: int = 2, index: int = 1) -> float:
    """``P ** (2 / (d - 1)) * lam_index``; unchanged under dilations."""
    return rec.perimeter ** (2.0 / (d_param - 1)) * rec.lambdas[index - 1]


def beta_star(lambda1: float, perimeter: float, d_param: int = 2) -> float:
    """Penalization weight making ``t = 1`` stationary for ``lam(t D) + beta P(t D)``."""
    if not (lambda1 > 0 and perimeter > 0):
        raise ValueError("eigenvalue and perimeter must be positive")
    if d_param < 2:
        raise ValueError("dimension must be at least 2")
    return 2.0 * lambda1 / ((d_param - 1) * perimeter)


def penalized_value(t: float, lambda1: float, perimeter: float, beta: float, d_param: int = 2) -> float:
    return t**-2 * lambda1 + beta * t ** (d_param - 1) * perimeter


def penalized_profile(domain, beta: float, t_grid, grid_h: float | None = None, *,
                      record: ObjectiveRecord | None = None, d_param: int = 2) -> list:
    """``(t, F(t))`` with ``F(t) = lam_1(t D) + beta P(t D)`` from exact scaling laws.

    Only one eigenvalue solve is made (skipped when ``record`` is given).
    """
    t_grid = [float(t) for t in t_grid]
    if any(not t > 0 for t in t_grid):
        raise ValueError("dilation factors must be positive")
    if record is None:
        record = buckling_of_domain(domain, grid_h)
    lam, per = record.lambdas[0], record.perimeter
    return [(t, penalized_value(t, lam, per, beta, d_param)) for t in t_grid]


def convexification_gain(domain, grid_h: float, *, tol: float = 1e-8) -> tuple:
    """``(lam_1(D), lam_1(hull D))`` on one lattice; the second never exceeds the first."""
    hull = geometry.convex_hull(domain)
    return (
        float(buckling_eigenvalues(domain, grid_h, 1, tol=tol)[0]),
        float(buckling_eigenvalues(hull, grid_h, 1, tol=tol)[0]),
    )


# ------------------------------------------------------------------ search

@dataclass
class OptimizerConfig:
    """Settings of a perimeter-constrained shape search.

    ``family`` is ``"star"`` (parameters: Fourier pairs ``(a_k, b_k)``, radius
    offset fixed to 1 before saturation) or ``"polygon"`` (parameters: vertex
    offsets from ``start``).  ``start`` holds the initial coefficient pairs or
    vertices; ``None`` means the disk or the regular ``n``-gon.
    """

    family: str = "star"
    K: int = 4
    n: int = 5
    start: list | None = None
    perimeter: float = 2.0 * math.pi
    eigen_index: int = 1
    convexify: bool = False
    grid_h: float | None = None
    extrapolate: bool = True
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.1
    max_evals: int = 2000
    stop_tol: float = 1e-3
    seed: int = 0
    tol: float = 1e-8
    search_resolution: int = SEARCH_RESOLUTION
    report_resolution: int = REPORT_RESOLUTION

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.family not in ("star", "polygon"):
            raise ValueError(f"unknown family {self.family!r}")
        if not self.perimeter > 0:
            raise ValueError("target perimeter must be positive")
        if self.eigen_index < 1:
            raise ValueError("eigen_index must be >= 1")
        if self.family == "star" and not 1 <= self.K <= 32:
            raise ValueError("star family needs 1 <= K <= 32")
        if self.family == "polygon" and not 3 <= self.n <= 256:
            raise ValueError("polygon family needs 3 <= n <= 256")
        if self.max_evals < 1 or self.initial_step <= 0 or self.stop_tol < 0:
            raise ValueError("max_evals, initial_step and stop_tol must be positive")
        if self.grid_h is not None and not self.grid_h > 0:
            raise ValueError("grid_h must be positive")
        if not (self.reflection > 0 and self.expansion > 1 and 0 < self.contraction < 1
                and 0 < self.shrink < 1):
            raise ValueError("invalid simplex coefficients")
        if self.start is not None:
            start = np.asarray(self.start, dtype=float)
            expected = (self.K, 2) if self.family == "star" else (self.n, 2)
            if start.shape != expected:
                raise ValueError(f"start must have shape {expected}, got {start.shape}")

    @classmethod
    def from_dict(cls, obj: dict) -> "OptimizerConfig":
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class OptTrace:
    """History of a search.

    ``iterations`` holds ``(eval_count, best record so far)`` after every
    evaluation; ``evaluations`` the record of each candidate (``None`` for
    rejected ones).  ``final`` and ``initial`` are the best and the starting
    domain re-evaluated at reporting resolution.
    """

    config: OptimizerConfig
    iterations: list = field(default_factory=list)
    evaluations: list = field(default_factory=list)
    final: ObjectiveRecord | None = None
    initial: ObjectiveRecord | None = None
    converged: bool = False
    hausdorff_to_disk: float = math.nan
    best_params: np.ndarray | None = None


class ShapeFamily:
    """Maps a parameter vector to a saturated (and optionally convexified) domain."""

    def __init__(self, config: OptimizerConfig):
        self.config = config
        if config.family == "star":
            start = np.zeros((config.K, 2)) if config.start is None else np.asarray(config.start, float)
            self.x0 = start.ravel()
        else:
            if config.start is None:
                base = geometry.regular_polygon(config.n).array
            else:
                base = np.asarray(config.start, dtype=float)
            self.base = base
            self.x0 = np.zeros(base.size)

    def domain(self, x):
        cfg = self.config
        if cfg.family == "star":
            shape = geometry.StarShape((0.0, 0.0), 1.0, tuple(map(tuple, np.reshape(x, (-1, 2)))))
        else:
            pts = self.base + np.reshape(x, (-1, 2))
            if cfg.convexify:
                shape = geometry.convex_hull(geometry._polygon_unchecked(pts))
            else:
                shape = geometry.Polygon(tuple(map(tuple, pts)))
        if cfg.convexify and cfg.family == "star":
            shape = geometry.convex_hull(shape)
        return geometry.saturate_perimeter(shape, cfg.perimeter)


def _nelder_mead(fun, x0, step, cfg, on_eval):
    """Minimize ``fun`` with the classic (non-adaptive) simplex.

    Vertices are ordered by ``(value, creation index)``.  Returns
    ``(best_x, best_f, converged)``.
    """
    n = len(x0)
    counter = 0
    simplex = []

    def add(x):
        nonlocal counter
        f = fun(x)
        counter += 1
        on_eval(counter, x, f)
        return [f, counter, np.asarray(x, float)]

    simplex.append(add(x0))
    for i in range(n):
        if counter >= cfg.max_evals:
            break
        x = np.array(x0, dtype=float)
        x[i] += step
        simplex.append(add(x))
    converged = False
    while len(simplex) == n + 1:
        simplex.sort(key=lambda v: (v[0], v[1]))
        fs = [v[0] for v in simplex]
        if math.isfinite(fs[-1]) and fs[-1] - fs[0] <= cfg.stop_tol:
            converged = True
            break
        if counter >= cfg.max_evals:
            break
        best, worst = simplex[0], simplex[-1]
        centroid = np.mean([v[2] for v in simplex[:-1]], axis=0)
        xr = centroid + cfg.reflection * (centroid - worst[2])
        r = add(xr)
        if r[0] < best[0]:
            if counter >= cfg.max_evals:
                simplex[-1] = r
                continue
            e = add(centroid + cfg.expansion * (xr - centroid))
            simplex[-1] = e if e[0] < r[0] else r
            continue
        if r[0] < simplex[-2][0]:
            simplex[-1] = r
            continue
        if counter >= cfg.max_evals:
            if r[0] < worst[0]:
                simplex[-1] = r
            continue
        if r[0] < worst[0]:
            c = add(centroid + cfg.contraction * (xr - centroid))
            if c[0] <= r[0]:
                simplex[-1] = c
                continue
        else:
            c = add(centroid + cfg.contraction * (worst[2] - centroid))
            if c[0] < worst[0]:
                simplex[-1] = c
                continue
        for k in range(1, len(simplex)):
            if counter >= cfg.max_evals:
                break
            simplex[k] = add(best[2] + cfg.shrink * (simplex[k][2] - best[2]))
    simplex.sort(key=lambda v: (v[0], v[1]))
    return simplex[0][2], simplex[0][0], converged


def optimize(config: OptimizerConfig) -> OptTrace:
    """Nelder-Mead search of the saturated (convexified) shape family."""
    config.validate()
    family = ShapeFamily(config)
    trace = OptTrace(config=config)
    start_domain = family.domain(family.x0)
    grid_h = config.grid_h or geometry.diameter(start_domain) / config.search_resolution
    best = {"rec": None, "x": None}

    def fun(x):
        try:
            dom = family.domain(x)
            rec = buckling_of_domain(dom, grid_h, config.eigen_index, eigen_index=config.eigen_index,
                                     tol=config.tol, seed=config.seed)
        except (InvalidDomainError, ResolutionTooCoarseError, SolverFailureError) as exc:
            log.debug("rejected candidate: %s", exc)
            trace.evaluations.append(None)
            return math.inf
        trace.evaluations.append(rec)
        if best["rec"] is None or rec.objective_value < best["rec"].objective_value:
            best["rec"], best["x"] = rec, np.array(x, float)
        return rec.objective_value

    def on_eval(count, x, f):
        trace.iterations.append((count, best["rec"]))
        if count % 50 == 0:
            obj = best["rec"].objective_value if best["rec"] else math.inf
            log.info("eval %d: best objective %.6g", count, obj)

    _, _, trace.converged = _nelder_mead(fun, family.x0, config.initial_step, config, on_eval)
    if best["rec"] is None:
        raise InvalidDomainError("no feasible candidate was evaluated")
    trace.best_params = best["x"]
    trace.final = report_record(best["rec"].domain, config)
    trace.initial = report_record(start_domain, config)
    trace.hausdorff_to_disk = hausdorff_to_disk(trace.final.domain, config.perimeter)
    return trace


def report_record(domain, config: OptimizerConfig) -> ObjectiveRecord:
    """Re-evaluate at ``diameter / report_resolution``.

    With extrapolation the Richardson pair is (2h, h), so the finest grid is
    the reporting one.
    """
    h = geometry.diameter(domain) / config.report_resolution
    if config.extrapolate:
        h *= 2.0
    return buckling_of_domain(domain, h, config.eigen_index, config.extrapolate,
                              eigen_index=config.eigen_index, tol=config.tol, seed=config.seed)


def disk_of_perimeter(p: float, center=(0.0, 0.0)) -> geometry.Disk:
    return geometry.Disk(tuple(center), p / (2.0 * math.pi))


def hausdorff_to_disk(domain, p: float) -> float:
    """Distance from ``domain`` to the disk of perimeter ``p`` sharing its centroid."""
    return geometry.hausdorff_distance(domain, disk_of_perimeter(p, geometry.centroid(domain)))


def trace_rows(trace: OptTrace) -> list:
    """CSV rows ``eval_count, objective, perimeter, lambda_1..lambda_h, hausdorff_to_disk``."""
    h = trace.config.eigen_index
    rows = []
    cache = {}
    for count, rec in trace.iterations:
        if rec is None:
            rows.append([count, math.inf, math.nan] + [math.nan] * h + [math.nan])
            continue
        key = id(rec)
        if key not in cache:
            cache[key] = hausdorff_to_disk(rec.domain, trace.config.perimeter)
        rows.append([count, rec.objective_value, rec.perimeter, *rec.lambdas, cache[key]])
    return rows


def with_overrides(config: OptimizerConfig, **kwargs) -> OptimizerConfig:
    return replace(config, **kwargs)
