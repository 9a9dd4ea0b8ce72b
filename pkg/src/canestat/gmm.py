"""Deterministic 1-D Gaussian mixture fitting and modality detection.

EM is initialized from sample quantiles (no randomness), so a given input
always produces the same fit bit for bit. Modality is decided by comparing
the one- and two-component fits: the data counts as bimodal only when the
two-component model wins decisively on BIC *and* the fitted means are far
apart relative to the component spreads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hstats import Histogram, quantile

UNIMODAL = "unimodal"
BIMODAL = "bimodal"

DEFAULT_VARIANCE_FLOOR = 1e-6
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500
DEFAULT_DELTA_BIC = 10.0
DEFAULT_SEPARATION = 2.0

_LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class GmmFit:
    """Parameters and diagnostics of a fitted k-component 1-D mixture.

    For k=2 the components are reported with means sorted ascending, so
    index 0 is the ground candidate and index 1 the canopy candidate.
    ``ll_trace`` holds the log-likelihood before each EM update plus the
    final value, and is non-decreasing by construction.
    """

    k: int
    weights: np.ndarray = field(repr=False)
    means: np.ndarray = field(repr=False)
    variances: np.ndarray = field(repr=False)
    log_likelihood: float
    n_iterations: int
    converged: bool
    ll_trace: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("weights", "means", "variances", "ll_trace"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def sigmas(self) -> np.ndarray:
        return np.sqrt(self.variances)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "variances": self.variances.tolist(),
            "log_likelihood": self.log_likelihood,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class ModalityDecision:
    """Outcome of the unimodal/bimodal choice, with both fits attached."""

    modality: str
    bic_k1: float
    bic_k2: float
    separation: float
    fit_k1: GmmFit
    fit_k2: GmmFit

    def to_dict(self) -> dict:
        return {
            "modality": self.modality,
            "bic_k1": self.bic_k1,
            "bic_k2": self.bic_k2,
            "separation": self.separation,
            "fit_k1": self.fit_k1.to_dict(),
            "fit_k2": self.fit_k2.to_dict(),
        }


def _component_log_pdfs(x, weights, means, variances):
    """(k, n) matrix of log(w_i) + log N(x; mu_i, var_i)."""
    diff = x[None, :] - means[:, None]
    return (
        np.log(weights)[:, None]
        - 0.5 * (_LOG_2PI + np.log(variances))[:, None]
        - diff * diff / (2.0 * variances[:, None])
    )


def _log_likelihood(x, weights, means, variances) -> float:
    logp = _component_log_pdfs(x, weights, means, variances)
    return float(np.logaddexp.reduce(logp, axis=0).sum())


def fit_gmm_1d(
    values,
    k: int,
    variance_floor: float = DEFAULT_VARIANCE_FLOOR,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> GmmFit:
    """Fit a k-component (k in {1, 2}) Gaussian mixture by EM.

    Initialization places the means at the 10th and 90th sample percentiles
    with equal weights and the sample variance, so the fit is deterministic.
    Variances are floored at ``variance_floor`` inside every M-step, which
    keeps the update a constrained maximizer and preserves the monotone
    log-likelihood guarantee. Convergence is a relative log-likelihood
    change below ``tol`` (capped at ``max_iter`` iterations).
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("cannot fit a mixture to an empty sample")
    if not np.all(np.isfinite(x)):
        raise ValueError("input values must be finite")
    if k not in (1, 2):
        raise ValueError(f"k must be 1 or 2, got {k}")
    if not variance_floor > 0:
        raise ValueError("variance_floor must be positive")

    if k == 1:
        mean = float(x.mean())
        var = max(float(x.var()), variance_floor)
        ll = _log_likelihood(x, np.array([1.0]), np.array([mean]), np.array([var]))
        return GmmFit(
            k=1,
            weights=np.array([1.0]),
            means=np.array([mean]),
            variances=np.array([var]),
            log_likelihood=ll,
            n_iterations=0,
            converged=True,
            ll_trace=np.array([ll]),
        )

    weights = np.array([0.5, 0.5])
    means = np.array([quantile(x, 0.10), quantile(x, 0.90)])
    variances = np.full(2, max(float(x.var()), variance_floor))

    trace = []
    converged = False
    for _ in range(max_iter):
        logp = _component_log_pdfs(x, weights, means, variances)
        log_norm = np.logaddexp(logp[0], logp[1])
        trace.append(float(log_norm.sum()))
        if len(trace) > 1:
            prev = trace[-2]
            if abs(trace[-1] - prev) <= tol * max(1.0, abs(prev)):
                converged = True
                break
        resp = np.exp(logp - log_norm[None, :])
        mass = resp.sum(axis=1)
        # A component squeezed to zero mass keeps its parameters.
        safe = mass > 0.0
        new_means = means.copy()
        new_vars = variances.copy()
        if safe[0]:
            new_means[0] = float(resp[0] @ x) / mass[0]
            new_vars[0] = float(resp[0] @ (x - new_means[0]) ** 2) / mass[0]
        if safe[1]:
            new_means[1] = float(resp[1] @ x) / mass[1]
            new_vars[1] = float(resp[1] @ (x - new_means[1]) ** 2) / mass[1]
        means = new_means
        variances = np.maximum(new_vars, variance_floor)
        weights = np.maximum(mass / x.size, 1e-300)
        weights = weights / weights.sum()
    else:
        trace.append(_log_likelihood(x, weights, means, variances))

    if means[0] > means[1]:
        order = np.array([1, 0])
        weights, means, variances = weights[order], means[order], variances[order]

    return GmmFit(
        k=2,
        weights=weights,
        means=means,
        variances=variances,
        log_likelihood=trace[-1],
        n_iterations=len(trace) - 1,
        converged=converged,
        ll_trace=np.array(trace),
    )


def bic(fit: GmmFit, n: int) -> float:
    """Bayesian information criterion with 3k-1 free parameters."""
    p = 3 * fit.k - 1
    return p * float(np.log(n)) - 2.0 * fit.log_likelihood


def classify_modality(
    values,
    variance_floor: float = DEFAULT_VARIANCE_FLOOR,
    delta_bic_threshold: float = DEFAULT_DELTA_BIC,
    separation_threshold: float = DEFAULT_SEPARATION,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> ModalityDecision:
    """Decide between one and two elevation modes.

    Bimodal requires both bic(k=1) - bic(k=2) > delta_bic_threshold and a
    mean separation above separation_threshold times the larger component
    sigma; anything else is unimodal.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    fit1 = fit_gmm_1d(x, 1, variance_floor, tol, max_iter)
    fit2 = fit_gmm_1d(x, 2, variance_floor, tol, max_iter)
    bic1 = bic(fit1, x.size)
    bic2 = bic(fit2, x.size)
    sigma_max = float(fit2.sigmas.max())
    separation = float(abs(fit2.means[1] - fit2.means[0])) / sigma_max
    bimodal = (bic1 - bic2) > delta_bic_threshold and separation > separation_threshold
    return ModalityDecision(
        modality=BIMODAL if bimodal else UNIMODAL,
        bic_k1=bic1,
        bic_k2=bic2,
        separation=separation,
        fit_k1=fit1,
        fit_k2=fit2,
    )


def assign_components(fit: GmmFit, hist: Histogram):
    """Split the non-empty histogram bins into ground and canopy sets.

    Each non-empty bin goes to the component with the higher posterior
    responsibility at its center; exact ties go to the canopy. Ground is
    the lower-mean component (index 0 after sorting).
    """
    if fit.k != 2:
        raise ValueError("component assignment requires a two-component fit")
    occupied = np.flatnonzero(hist.counts > 0)
    centers = hist.centers[occupied]
    logp = _component_log_pdfs(centers, fit.weights, fit.means, fit.variances)
    canopy_wins = logp[1] >= logp[0]
    return occupied[~canopy_wins], occupied[canopy_wins]
