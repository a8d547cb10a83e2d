"""scikit-learn style wrappers around the eigenvalue pipeline and the shape search.

``BucklingEigenvalues`` is a stateless transformer mapping domains to their
smallest buckling eigenvalues, so it can sit in a ``Pipeline`` or be used with
``clone``/``get_params``.  ``PerimeterConstrainedOptimizer`` runs the shape
search in ``fit`` and exposes the optimum as fitted attributes.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import geometry
from .errors import SolverFailureError
from .shapeopt import OptimizerConfig, ShapeFamily, buckling_of_domain, optimize
from .validation import check_domains, check_scalar


class BucklingEigenvalues(TransformerMixin, BaseEstimator):
    """Smallest clamped-plate buckling eigenvalues of planar domains.

    Parameters
    ----------
    n_eigenvalues : int, default=1
        Number of eigenvalues per domain.
    grid_h : float or None, default=None
        Grid spacing; ``None`` uses ``diameter / resolution`` per domain.
    resolution : int, default=96
        Points across the diameter when ``grid_h`` is None.
    extrapolate : bool, default=False
        Richardson extrapolation from spacings ``h`` and ``h / 2``.
    tol : float, default=1e-8
        Relative residual of the eigensolver.
    random_state : int, default=0
        Seed of the eigensolver starting block.
    """

    def __init__(self, n_eigenvalues=1, grid_h=None, resolution=96, extrapolate=False,
                 tol=1e-8, random_state=0):
        self.n_eigenvalues = n_eigenvalues
        self.grid_h = grid_h
        self.resolution = resolution
        self.extrapolate = extrapolate
        self.tol = tol
        self.random_state = random_state

    def _validate_params(self):
        check_scalar(self.n_eigenvalues, "n_eigenvalues", min_val=1, include_min=True, integer=True)
        check_scalar(self.grid_h, "grid_h", min_val=0, allow_none=True)
        check_scalar(self.resolution, "resolution", min_val=1, include_min=True, integer=True)
        check_scalar(self.tol, "tol", min_val=0)

    def fit(self, X=None, y=None):
        self._validate_params()
        if X is not None:
            check_domains(X)
        self.is_fitted_ = True
        return self

    def records(self, X) -> list:
        """ObjectiveRecord of every domain in ``X``."""
        check_is_fitted(self, "is_fitted_")
        out = []
        for d in check_domains(X):
            h = self.grid_h or geometry.diameter(d) / self.resolution
            out.append(buckling_of_domain(d, h, self.n_eigenvalues, self.extrapolate,
                                          tol=self.tol, seed=self.random_state))
        return out

    def transform(self, X):
        """Array of shape (n_domains, n_eigenvalues)."""
        return np.array([r.lambdas for r in self.records(X)])

    def get_feature_names_out(self, input_features=None):
        return np.array([f"lambda{i}" for i in range(1, self.n_eigenvalues + 1)], dtype=object)


class PerimeterConstrainedOptimizer(BaseEstimator):
    """Minimize ``lambda_h`` over a shape family at fixed perimeter.

    Parameters mirror :class:`buckleopt.shapeopt.OptimizerConfig`.  After
    ``fit`` the estimator exposes ``domain_``, ``objective_``, ``lambdas_``,
    ``hausdorff_to_disk_``, ``converged_`` and the full ``trace_``.
    """

    def __init__(self, family="star", K=4, n=5, start=None, perimeter=2 * np.pi, eigen_index=1,
                 convexify=False, grid_h=None, extrapolate=True, max_evals=2000, stop_tol=1e-3,
                 initial_step=0.1, random_state=0):
        self.family = family
        self.K = K
        self.n = n
        self.start = start
        self.perimeter = perimeter
        self.eigen_index = eigen_index
        self.convexify = convexify
        self.grid_h = grid_h
        self.extrapolate = extrapolate
        self.max_evals = max_evals
        self.stop_tol = stop_tol
        self.initial_step = initial_step
        self.random_state = random_state

    def _config(self) -> OptimizerConfig:
        params = self.get_params()
        params["seed"] = params.pop("random_state")
        return OptimizerConfig(**params)

    def fit(self, X=None, y=None):
        trace = optimize(self._config())
        self.trace_ = trace
        self.domain_ = trace.final.domain
        self.objective_ = trace.final.objective_value
        self.lambdas_ = np.array(trace.final.lambdas)
        self.hausdorff_to_disk_ = trace.hausdorff_to_disk
        self.converged_ = trace.converged
        self.best_params_ = trace.best_params
        self.n_evaluations_ = len(trace.evaluations)
        return self

    def predict(self, X):
        """Search-resolution objective of each parameter vector (``inf`` if infeasible)."""
        check_is_fitted(self, "trace_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        family = ShapeFamily(self.trace_.config)
        if X.shape[1] != family.x0.size:
            raise ValueError(f"expected {family.x0.size} parameters per row, got {X.shape[1]}")
        h = self.trace_.iterations[-1][1].grid_h
        out = []
        for x in X:
            k = self.eigen_index
            try:
                rec = buckling_of_domain(family.domain(x), h, k, eigen_index=k, seed=self.random_state)
            except (ValueError, SolverFailureError):
                out.append(np.inf)
                continue
            out.append(rec.objective_value)
        return np.array(out)

    def score(self, X, y=None):
        """Negative mean objective (higher is better)."""
        return -float(np.mean(self.predict(X)))
