"""Measurement analysis: sine fitting for V_pi and Fabry-Perot loss extraction.

Both fits share a small damped Gauss-Newton engine so results are fully
deterministic and rank deficiency is detected explicitly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import (
    ContrastInconsistencyError,
    DomainError,
    FitFailureError,
    RankDeficiencyError,
)


@dataclass
class SweepData:
    """A voltage (or wavelength-proxy) sweep of normalized intensity."""

    x: np.ndarray
    y: np.ndarray
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.x.shape != self.y.shape:
            raise DomainError("x and y must have equal length")
        if not np.all(np.isfinite(self.y)):
            raise DomainError("y values must be finite")
        if self.weights is not None:
            self.weights = np.asarray(self.weights, dtype=float)
            if self.weights.shape != self.x.shape:
                raise DomainError("weights must match data length")

    @classmethod
    def from_csv(cls, path) -> "SweepData":
        raw = np.loadtxt(path, delimiter=",", ndmin=2)
        weights = raw[:, 2] if raw.shape[1] >= 3 else None
        return cls(raw[:, 0], raw[:, 1], weights)


@dataclass(frozen=True)
class SineFitResult:
    vpi: float
    amplitude: float
    offset: float
    phase: float
    residual_rms: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "vpi_V": self.vpi,
                "amplitude": self.amplitude,
                "offset": self.offset,
                "phase_rad": self.phase,
                "residual_rms": self.residual_rms,
            },
            indent=2,
            sort_keys=True,
        )


@dataclass(frozen=True)
class LeastSquaresResult:
    params: np.ndarray
    residual_rms: float
    converged: bool
    covariance: np.ndarray  # (J^T J)^-1 * rms^2, a covariance proxy


def least_squares(
    model: Callable[[np.ndarray, np.ndarray], np.ndarray],
    data: SweepData,
    init: Sequence[float],
    max_iter: int = 200,
    step_tol: float = 1e-9,
) -> LeastSquaresResult:
    """Damped Gauss-Newton minimisation of sum w*(y - model(x, p))^2.

    model(x, p) must be smooth in p; the Jacobian is taken by central
    differences.  Raises RankDeficiencyError when the normal equations are
    singular (to numerical rank).
    """
    p = np.asarray(init, dtype=float)
    if not np.all(np.isfinite(p)):
        raise DomainError("initial parameters must be finite")
    w = data.weights if data.weights is not None else np.ones_like(data.y)
    sw = np.sqrt(w)

    def residuals(params):
        return sw * (data.y - model(data.x, params))

    def jacobian(params):
        n = len(params)
        cols = []
        for k in range(n):
            h = 1e-7 * max(1.0, abs(params[k]))
            pp = params.copy()
            pm = params.copy()
            pp[k] += h
            pm[k] -= h
            cols.append((residuals(pp) - residuals(pm)) / (2 * h))
        return np.column_stack(cols)

    r = residuals(p)
    cost = float(r @ r)
    damping = 1e-8
    converged = False
    for _ in range(max_iter):
        jac = jacobian(p)
        jtj = jac.T @ jac
        if np.linalg.matrix_rank(jtj, tol=1e-12 * max(1.0, np.abs(jtj).max())) < len(p):
            raise RankDeficiencyError(
                "singular normal equations", {"params": p.tolist()}
            )
        g = jac.T @ r
        # Levenberg damping: grow until the step reduces the cost.
        for _ in range(40):
            try:
                step = np.linalg.solve(jtj + damping * np.diag(np.diag(jtj)), -g)
            except np.linalg.LinAlgError:
                raise RankDeficiencyError(
                    "singular normal equations", {"params": p.tolist()}
                )
            p_new = p + step
            r_new = residuals(p_new)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                break
            damping *= 10.0
        else:
            break
        rel_step = np.max(np.abs(step) / np.maximum(1e-30, np.abs(p_new)))
        p, r, cost = p_new, r_new, cost_new
        damping = max(damping / 10.0, 1e-12)
        if rel_step < step_tol:
            converged = True
            break

    rms = math.sqrt(cost / len(r))
    jac = jacobian(p)
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj) * rms**2
    except np.linalg.LinAlgError:
        cov = np.full((len(p), len(p)), np.nan)
    return LeastSquaresResult(params=p, residual_rms=rms, converged=converged, covariance=cov)


def _sine_model(x, p):
    offset, amplitude, vpi, phase = p
    return offset + amplitude * np.cos(np.pi * x / vpi + phase)


def _linear_sine_init(data: SweepData, vpi: float):
    """Best (offset, a, b) for y = off + a cos(pi x/vpi) + b sin(pi x/vpi)."""
    c = np.cos(np.pi * data.x / vpi)
    s = np.sin(np.pi * data.x / vpi)
    design = np.column_stack([np.ones_like(c), c, s])
    coef, res, *_ = np.linalg.lstsq(design, data.y, rcond=None)
    off, a, b = coef
    amplitude = math.hypot(a, b)
    phase = math.atan2(-b, a)
    pred = design @ coef
    sse = float(np.sum((data.y - pred) ** 2))
    return np.array([off, amplitude, vpi, phase]), sse


def fit_sine_vpi(
    data: SweepData, initial_vpi_hint: Optional[float] = None
) -> SineFitResult:
    """Extract V_pi by fitting y = offset + amplitude*cos(pi*x/vpi + phase).

    The sweep must span at least 1.5x the half-period (1.5 * vpi) to be
    identifiable.  Without a period hint, 20 logarithmic candidates over
    [span/10, 2*span] are screened with a linear subproblem and the best is
    refined by Gauss-Newton.
    """
    if len(data.x) < 4:
        raise FitFailureError("need at least 4 samples for a sine fit")
    span = float(np.max(data.x) - np.min(data.x))
    if span <= 0:
        raise FitFailureError("x span is zero")
    y_swing = float(np.max(data.y) - np.min(data.y))
    if y_swing <= 1e-12 * max(1.0, float(np.max(np.abs(data.y)))):
        raise FitFailureError(
            "constant data: amplitude is not identifiable",
            {"y_swing": y_swing},
        )

    if initial_vpi_hint is not None:
        candidates = [float(initial_vpi_hint)]
    else:
        candidates = list(np.geomspace(span / 10.0, 2.0 * span, 20))

    best = None
    for vpi0 in candidates:
        init, sse = _linear_sine_init(data, vpi0)
        if best is None or sse < best[1]:
            best = (init, sse)

    result = least_squares(_sine_model, data, best[0])
    offset, amplitude, vpi, phase = result.params
    # Normalise the sign/branch ambiguity of the cosine parameterisation.
    vpi = abs(vpi)
    if amplitude < 0:
        amplitude = -amplitude
        phase += math.pi
    phase = math.atan2(math.sin(phase), math.cos(phase))
    if vpi <= 0 or not result.converged:
        raise FitFailureError("sine fit did not converge", {"vpi": vpi})
    if span < 1.5 * vpi:
        raise FitFailureError(
            "sweep span too short for the fitted period",
            {"span": span, "vpi": vpi},
        )
    return SineFitResult(
        vpi=float(vpi),
        amplitude=float(amplitude),
        offset=float(offset),
        phase=float(phase),
        residual_rms=result.residual_rms,
    )


def fringe_contrast(loss_db_per_cm: float, facet_reflectivity: float, length: float) -> float:
    """Forward model: fringe contrast K of a lossy Fabry-Perot waveguide.

    K = 2*R~ / (1 + R~^2) with R~ = R * 10^(-loss*L/10).
    """
    if not 0 < facet_reflectivity < 1:
        raise DomainError("facet_reflectivity must be in (0, 1)")
    if length <= 0:
        raise DomainError("length must be > 0")
    if loss_db_per_cm < 0:
        raise DomainError("loss must be >= 0")
    r_eff = facet_reflectivity * 10.0 ** (-loss_db_per_cm * length / 10.0)
    return 2.0 * r_eff / (1.0 + r_eff**2)


def fabry_perot_loss(
    contrast_k: float, facet_reflectivity: float, length: float
) -> float:
    """Invert R * 10^(-loss*L/10) = (1 - sqrt(1 - K^2)) / K for the loss in dB/cm."""
    if not 0 < contrast_k < 1:
        raise DomainError("contrast must be in (0, 1)")
    if not 0 < facet_reflectivity < 1:
        raise DomainError("facet_reflectivity must be in (0, 1)")
    if length <= 0:
        raise DomainError("length must be > 0")
    r_eff = (1.0 - math.sqrt(1.0 - contrast_k**2)) / contrast_k
    loss = -10.0 * math.log10(r_eff / facet_reflectivity) / length
    if loss < -1e-12:
        raise ContrastInconsistencyError(
            f"contrast {contrast_k} implies negative loss for R={facet_reflectivity}"
        )
    return max(loss, 0.0)
