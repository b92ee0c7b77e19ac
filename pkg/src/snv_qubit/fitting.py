"""Levenberg-Marquardt least squares with parameter uncertainties.

Bounded parameters are mapped to an unconstrained internal coordinate:

    lower only      p = lo + exp(u)
    upper only      p = hi - exp(u)
    both            p = lo + (hi - lo) / (1 + exp(-u))

The Jacobian is a forward difference in the internal coordinate with step
h = max(1e-8, 1e-6 |u|). Uncertainties are the square roots of the diagonal
of (J^T J)^-1 scaled by the residual variance chi^2 / (m - n).
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from snv_qubit.errors import FitError

logger = logging.getLogger(__name__)

MAX_ITER = 500
COST_RTOL = 1e-10
STEP_TOL = 1e-12
SINGULAR_RTOL = 1e-7
LAMBDA_START = 1e-3
LAMBDA_MAX = 1e16


@dataclass(frozen=True)
class Parameter:
    name: str
    initial: float
    bounds: Tuple[Optional[float], Optional[float]] = (None, None)

    @property
    def kind(self):
        lo, hi = self.bounds
        if lo is not None and hi is not None:
            return "logistic"
        if lo is not None:
            return "log-lower"
        if hi is not None:
            return "log-upper"
        return "none"

    def to_internal(self, p):
        lo, hi = self.bounds
        kind = self.kind
        if kind == "none":
            return float(p)
        if kind == "log-lower":
            if not p > lo:
                raise ValueError(f"{self.name} = {p} must exceed its lower bound {lo}")
            return float(np.log(p - lo))
        if kind == "log-upper":
            if not p < hi:
                raise ValueError(f"{self.name} = {p} must stay below its upper bound {hi}")
            return float(np.log(hi - p))
        if not lo < p < hi:
            raise ValueError(f"{self.name} = {p} must lie strictly inside ({lo}, {hi})")
        frac = (p - lo) / (hi - lo)
        return float(np.log(frac / (1.0 - frac)))

    def to_external(self, u):
        lo, hi = self.bounds
        kind = self.kind
        if kind == "none":
            return u
        if kind == "log-lower":
            return lo + np.exp(u)
        if kind == "log-upper":
            return hi - np.exp(u)
        return lo + (hi - lo) / (1.0 + np.exp(-u))

    def derivative(self, u):
        """dp/du."""
        lo, hi = self.bounds
        kind = self.kind
        if kind == "none":
            return 1.0
        if kind == "log-lower":
            return np.exp(u)
        if kind == "log-upper":
            return -np.exp(u)
        e = np.exp(-u)
        return (hi - lo) * e / (1.0 + e) ** 2


@dataclass(frozen=True)
class FitModel:
    """A named model y = function(params, x) with its parameters.

    ``guess(x, y)`` returns data-driven initial values (dict) when available;
    ``n_inputs`` is the number of x columns the model consumes.
    """

    name: str
    parameters: Tuple[Parameter, ...]
    function: Callable[[np.ndarray, np.ndarray], np.ndarray]
    guess: Optional[Callable[[np.ndarray, np.ndarray], Dict[str, float]]] = None
    n_inputs: int = 1

    @property
    def param_names(self):
        return [p.name for p in self.parameters]

    def evaluate(self, params, x):
        if isinstance(params, dict):
            params = [params[name] for name in self.param_names]
        return np.asarray(self.function(np.asarray(params, dtype=float), x), dtype=float)

    def with_initial(self, values):
        unknown = set(values) - set(self.param_names)
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.name}: {', '.join(sorted(unknown))}")
        params = tuple(
            replace(p, initial=float(values[p.name])) if p.name in values else p
            for p in self.parameters
        )
        return replace(self, parameters=params)

    def guessed(self, x, y):
        """Model whose initial values come from ``guess`` (if defined)."""
        if self.guess is None:
            return self
        return self.with_initial(self.guess(np.asarray(x), np.asarray(y)))


@dataclass
class FitResult:
    model_name: str
    param_names: List[str]
    values: np.ndarray
    uncertainties: np.ndarray
    covariance: np.ndarray
    reduced_chi2: float
    residuals: np.ndarray
    converged: bool
    iterations: int
    cost_history: List[float] = field(default_factory=list)
    degenerate: bool = False
    stalled: bool = False
    derived: Dict[str, Tuple[float, float]] = field(default_factory=dict)

    @property
    def params(self):
        return dict(zip(self.param_names, (float(v) for v in self.values)))

    @property
    def errors(self):
        return dict(zip(self.param_names, (float(v) for v in self.uncertainties)))

    def __getitem__(self, name):
        if name in self.derived:
            return self.derived[name][0]
        return self.params[name]

    def error(self, name):
        if name in self.derived:
            return self.derived[name][1]
        return self.errors[name]


def finite_difference_jacobian(fun, u, f0=None, steps=None):
    """Forward-difference Jacobian of ``fun`` at ``u``; shape (m, n)."""
    u = np.asarray(u, dtype=float)
    if f0 is None:
        f0 = fun(u)
    if steps is None:
        steps = np.maximum(1e-8, 1e-6 * np.abs(u))
    jac = np.empty((f0.size, u.size))
    for j in range(u.size):
        shifted = u.copy()
        shifted[j] += steps[j]
        jac[:, j] = (fun(shifted) - f0) / steps[j]
    return jac


def _direction_text(direction):
    return ", ".join(f"{name}:{weight:+.3g}" for name, weight in direction.items())


def least_squares(model, x, y, sigma=None, max_iter=MAX_ITER, allow_singular=False):
    """Fit ``model`` to (x, y) starting from the model's initial values."""
    y = np.asarray(y, dtype=float)
    n = len(model.parameters)
    m = y.size
    if m < n:
        raise ValueError(f"{model.name}: {m} data points for {n} parameters")
    weights = np.ones_like(y) if sigma is None else 1.0 / np.asarray(sigma, dtype=float)
    if not np.all(np.isfinite(weights)):
        raise ValueError("sigma must be positive and finite")

    def external(u):
        return np.array([p.to_external(ui) for p, ui in zip(model.parameters, u)])

    def residual(u):
        return (model.function(external(u), x) - y) * weights

    u = np.array([p.to_internal(p.initial) for p in model.parameters])
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{model.name}: initial guess must be finite")
    r = residual(u)
    if not np.all(np.isfinite(r)):
        raise FitError(f"{model.name}: model is not finite at the initial guess")
    cost = 0.5 * float(r @ r)
    history = [cost]
    cost_floor = np.finfo(float).eps * float(np.sum((y * weights) ** 2))
    lam = LAMBDA_START
    converged = False
    stalled = False
    iterations = 0

    while iterations < max_iter and not converged:
        iterations += 1
        jac = finite_difference_jacobian(residual, u, r)
        grad = jac.T @ r
        normal = jac.T @ jac
        scale = np.diag(normal).copy()
        scale[scale <= 0] = max(scale.max(), 1.0) * 1e-12
        cost_trial = np.inf
        while True:
            try:
                step = np.linalg.solve(normal + lam * np.diag(scale), -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None:
                trial = u + step
                r_trial = residual(trial)
                cost_trial = 0.5 * float(r_trial @ r_trial) if np.all(np.isfinite(r_trial)) else np.inf
                if cost_trial <= cost:
                    rel_change = (cost - cost_trial) / cost if cost > 0 else 0.0
                    small_step = np.linalg.norm(step) < STEP_TOL * (1.0 + np.linalg.norm(u))
                    u, r, cost = trial, r_trial, cost_trial
                    history.append(cost)
                    lam = max(lam / 10.0, 1e-12)
                    if rel_change < COST_RTOL or small_step or cost == 0.0:
                        converged = True
                    break
            lam *= 10.0
            if lam > LAMBDA_MAX:
                # A minimum is flat to working precision; anything else is a stall.
                converged = cost_trial - cost <= COST_RTOL * cost + cost_floor
                stalled = not converged
                break
        if stalled:
            break
    logger.debug("%s: %d iterations, cost %.6g, converged=%s", model.name, iterations, cost, converged)
    if stalled:
        logger.warning(
            "%s: damping limit reached with residual norm %.4g", model.name, float(np.linalg.norm(r))
        )
    elif not converged:
        logger.warning("%s: iteration cap (%d) reached", model.name, max_iter)

    values = external(u)
    jac_u = finite_difference_jacobian(residual, u, r)
    dpdu = np.array([p.derivative(ui) for p, ui in zip(model.parameters, u)], dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        jac_p = jac_u / dpdu
    names = model.param_names
    dof = m - n
    chi2 = 2.0 * cost
    variance = chi2 / dof if dof > 0 else 1.0

    norms = np.linalg.norm(jac_p, axis=0)
    degenerate = False
    direction = {}
    if np.any(norms == 0) or not np.all(np.isfinite(norms)):
        bad = [nm for nm, v in zip(names, norms) if v == 0 or not np.isfinite(v)]
        direction = {nm: 1.0 for nm in bad}
        degenerate = True
    else:
        _, s, vh = np.linalg.svd(jac_p / norms, full_matrices=False)
        if s[-1] < SINGULAR_RTOL * s[0]:
            null = vh[-1]
            direction = {nm: float(w) for nm, w in zip(names, null) if abs(w) > 0.1}
            degenerate = True

    if degenerate and not allow_singular:
        raise FitError(
            f"{model.name}: singular normal equations; unidentifiable direction "
            f"[{_direction_text(direction)}]",
            direction,
        )

    if degenerate:
        safe = np.where(norms > 0, norms, 1.0)
        cov_n = np.linalg.pinv((jac_p / safe).T @ (jac_p / safe))
        covariance = cov_n / np.outer(safe, safe) * variance
        uncertainties = np.sqrt(np.abs(np.diag(covariance)))
        for k, nm in enumerate(names):
            if nm in direction:
                uncertainties[k] = np.inf
                covariance[k, :] = np.inf
                covariance[:, k] = np.inf
    else:
        _, s, vh = np.linalg.svd(jac_p / norms, full_matrices=False)
        cov_n = (vh.T / s**2) @ vh
        covariance = cov_n / np.outer(norms, norms) * variance
        covariance = 0.5 * (covariance + covariance.T)
        uncertainties = np.sqrt(np.diag(covariance))

    return FitResult(
        model_name=model.name,
        param_names=names,
        values=values,
        uncertainties=uncertainties,
        covariance=covariance,
        reduced_chi2=chi2 / dof if dof > 0 else float("nan"),
        residuals=model.function(values, x) - y,
        converged=converged,
        iterations=iterations,
        stalled=stalled,
        cost_history=history,
        degenerate=degenerate,
    )
