"""scikit-learn style wrappers around the projector and the solvers.

Fields are passed as rows of flattened grid samples, shape
``(n_fields, n_points * 3)``, with points in the order of ``grid_.points``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .ballgrid import build_grid
from .eigenbasis import enumerate_modes
from .exceptions import IllPosedError
from .solver import build_bases, solve_problem1, solve_problem2
from .spectral import basis_on_grid


class SpectralProjector(TransformerMixin, BaseEstimator):
    """Grid samples to eigenbasis coefficients and back.

    Parameters
    ----------
    family : {'all', 'curl', 'curl_plus', 'curl_minus', 'graddiv'}
    n_max, m_max : int
        Degree and radial truncation.
    radius : float
    grid : tuple of int
        ``(N_r, N_theta, N_phi)``.
    """

    def __init__(self, family="all", n_max=4, m_max=3, radius=1.0, grid=(32, 24, 48)):
        self.family = family
        self.n_max = n_max
        self.m_max = m_max
        self.radius = radius
        self.grid = grid

    def fit(self, X=None, y=None):
        self.basis_ = enumerate_modes(self.family, self.n_max, self.m_max, self.radius)
        self.grid_ = build_grid(self.radius, *self.grid)
        Q = basis_on_grid(self.basis_, self.grid_)
        self.components_ = Q.reshape(len(self.basis_), -1)
        self._weights = np.repeat(self.grid_.weights, 3)
        self.n_features_in_ = self.components_.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "components_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return (X * self._weights) @ self.components_.T

    def inverse_transform(self, C):
        check_is_fitted(self, "components_")
        C = check_array(C)
        return C @ self.components_


class BallSpectralSolver(BaseEstimator):
    """Series solver for ``rot u + shift u = f`` (problem 1) or
    ``grad div w + shift w = f`` (problem 2).

    ``predict`` maps right-hand sides to solution samples on the same grid.
    """

    def __init__(self, problem=1, shift=1.0, n_max=4, m_max=3, radius=1.0, grid=(32, 24, 48)):
        self.problem = problem
        self.shift = shift
        self.n_max = n_max
        self.m_max = m_max
        self.radius = radius
        self.grid = grid

    def fit(self, X=None, y=None):
        if self.problem not in (1, 2):
            raise ValueError("problem must be 1 or 2")
        self.bases_ = build_bases(self.n_max, self.m_max, self.radius)
        self.grid_ = build_grid(self.radius, *self.grid)
        self.n_features_in_ = 3 * self.grid_.n_points
        return self

    def solve(self, f):
        """Full ``Solution`` object for one right-hand side (samples or field object)."""
        check_is_fitted(self, "bases_")
        if isinstance(f, np.ndarray):
            f = self.grid_.samples(f.reshape(-1, 3))
        solve = solve_problem1 if self.problem == 1 else solve_problem2
        return solve(f, self.shift, self.bases_, self.grid_, n_residual=0)

    def predict(self, X):
        check_is_fitted(self, "bases_")
        X = check_array(X)
        out = np.empty_like(X)
        for i, row in enumerate(X):
            sol = self.solve(row)
            if not sol.solvable:
                raise IllPosedError(f"row {i}: right-hand side violates the solvability condition")
            out[i] = sol(self.grid_.points).ravel()
        return out
