"""Classical and quantum Fisher information and Cramer-Rao machinery.

Internal QFI computations are carried out in the inverse temperature beta;
T-parametrized values are obtained through the exact chain-rule factor
(dbeta/dT)^2 = 1/T^4 rather than by re-differentiation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from qtherm.states import (
    DensityMatrix,
    GibbsEnsemble,
    HermitianOperator,
    gibbs_state,
    hermitian_eig,
    infidelity_from_factors,
)

logger = logging.getLogger(__name__)

EPS_PROB = 1e-12      # outcomes below this probability are excluded from FI sums
EPS_RANK_REL = 1e-12  # spectral support cutoff, relative to the trace


@dataclass
class OutcomeDistribution:
    """Outcome probabilities and their derivative w.r.t. the parameter."""

    probabilities: np.ndarray
    derivative: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float).ravel()
        dp = np.asarray(self.derivative, dtype=float).ravel()
        if p.shape != dp.shape:
            raise ValueError("probabilities and derivative must have equal length")
        if np.any(p < -EPS_PROB):
            raise ValueError(f"negative probability {p.min()!r}")
        if abs(p.sum() - 1.0) > 1e-10:
            raise ValueError(f"probabilities sum to {p.sum()!r}, expected 1")
        if abs(dp.sum()) > 1e-8:
            raise ValueError(f"derivative sums to {dp.sum()!r}, expected 0")
        self.probabilities = p
        self.derivative = dp


@dataclass
class FisherResult:
    """Fisher information value (units 1/parameter^2) for n measurements."""

    value: float
    parameter_label: str = "T"
    n_measurements: int = 1

    def __post_init__(self):
        if self.value < 0.0:
            raise ValueError(f"Fisher information {self.value!r} must be >= 0")
        if self.n_measurements < 1:
            raise ValueError("n_measurements must be >= 1")

    @property
    def rmse_bound(self) -> float:
        return cramer_rao(self)


@dataclass
class UnitaryFamily:
    """Parameter family exp(-i lambda H) rho_0 exp(+i lambda H)."""

    generator: HermitianOperator
    base_state: DensityMatrix


def classical_fisher(
    dist: OutcomeDistribution, parameter_label: str = "T", n_measurements: int = 1
) -> FisherResult:
    """F = sum_theta (dp_theta)^2 / p_theta, skipping outcomes below EPS_PROB."""
    p = dist.probabilities
    dp = dist.derivative
    keep = p >= EPS_PROB
    dropped = float(np.abs(dp[~keep]).sum())
    if dropped > 0.0:
        logger.debug("classical_fisher: dropped derivative weight %.3e on tiny outcomes", dropped)
    value = float(np.sum(dp[keep] ** 2 / p[keep]))
    return FisherResult(value=value, parameter_label=parameter_label, n_measurements=n_measurements)


@dataclass
class SldResult:
    """QFI with the symmetric logarithmic derivative achieving it."""

    qfi: float
    sld: HermitianOperator
    dropped_kernel_weight: float = 0.0

    @property
    def kernel_warning(self) -> bool:
        return self.dropped_kernel_weight > 1e-8


def sld_qfi(rho: DensityMatrix, drho: HermitianOperator) -> SldResult:
    """QFI and SLD of a state with known parameter derivative drho.

    Works in rho's eigenbasis: qfi = sum_{ij} 2 |<i|drho|j>|^2 / (p_i + p_j)
    over pairs with p_i + p_j above the rank cutoff.  Derivative weight
    carried entirely by the kernel is dropped and flagged.
    """
    if rho.dim != drho.dim:
        raise ValueError("dimension mismatch between rho and drho")
    tr = float(np.real(np.trace(drho.entries)))
    if abs(tr) > 1e-8:
        raise ValueError(f"drho has trace {tr!r}, expected 0")
    vals, vecs = np.linalg.eigh(rho.entries)
    eps = EPS_RANK_REL * max(float(np.sum(np.abs(vals))), 1.0)
    d = vecs.conj().T @ drho.entries @ vecs
    denom = vals[:, None] + vals[None, :]
    keep = denom > eps
    qfi = float(np.sum(2.0 * np.abs(d[keep]) ** 2 / denom[keep]))
    l_eig = np.zeros_like(d)
    l_eig[keep] = 2.0 * d[keep] / denom[keep]
    dropped = float(np.sqrt(np.sum(np.abs(d[~keep]) ** 2)))
    if dropped > 1e-8:
        logger.warning("sld_qfi: derivative weight %.3e lies in the state kernel", dropped)
    sld = HermitianOperator(vecs @ l_eig @ vecs.conj().T)
    return SldResult(qfi=qfi, sld=sld, dropped_kernel_weight=dropped)


def qfi_fidelity_limit(
    state_at: Callable[[float], DensityMatrix], beta: float, delta: float | None = None
) -> float:
    """Fidelity-based QFI oracle: Richardson-extrapolated 8(1 - F)/delta^2.

    Uses symmetric increments beta -/+ delta/2 at steps delta and delta/2,
    which makes the leading error O(delta^4) after extrapolation.  The
    infidelity comes from spectral factors via the cancellation-free Bures
    form (states.infidelity_from_factors): at the default step the quotient's
    1 - F sits near or below machine epsilon for strongly mixed or nearly
    pure states, where forming F first loses everything.  This is the
    module's independent check for every spectral QFI formula.
    """
    if delta is None:
        delta = 1e-3 * max(abs(beta), 1.0)
    if delta <= 0.0:
        raise ValueError("delta must be positive")

    def factor(rho: DensityMatrix) -> np.ndarray:
        vals, vecs = rho.clipped_spectrum()
        return vecs * np.sqrt(vals)

    def quotient(d: float) -> float:
        infid = infidelity_from_factors(
            factor(state_at(beta - 0.5 * d)), factor(state_at(beta + 0.5 * d))
        )
        if not math.isfinite(infid):
            raise ValueError("non-finite fidelity in qfi_fidelity_limit")
        return 8.0 * infid / d**2

    v1 = quotient(delta)
    v2 = quotient(0.5 * delta)
    return (4.0 * v2 - v1) / 3.0


def qfi_unitary(family: UnitaryFamily) -> float:
    """QFI of exp(-i lambda H) rho_0 exp(+i lambda H); independent of lambda.

    Q = 4 sum_{i<j} (p_i - p_j)^2 / (p_i + p_j) |<i|H|j>|^2 over the base
    state's eigenpairs; reduces to 4 Var(H) for pure base states.
    """
    vals, vecs = np.linalg.eigh(family.base_state.entries)
    eps = EPS_RANK_REL * max(float(np.sum(np.abs(vals))), 1.0)
    h = vecs.conj().T @ family.generator.entries @ vecs
    num = (vals[:, None] - vals[None, :]) ** 2
    denom = vals[:, None] + vals[None, :]
    keep = np.triu(denom > eps, k=1)
    return float(np.sum(4.0 * num[keep] / denom[keep] * np.abs(h[keep]) ** 2))


def cramer_rao(fisher: FisherResult) -> float:
    """RMSE lower bound 1/sqrt(n F); +inf sentinel for zero information."""
    if fisher.value <= 0.0:
        logger.warning("cramer_rao: zero Fisher information, bound is +inf")
        return math.inf
    return 1.0 / math.sqrt(fisher.n_measurements * fisher.value)


def heisenberg_bound(n_entangled: int, n_repeats: int, qfi: float) -> float:
    """1/(N sqrt(n Q)) for blocks of N entangled probes repeated n times."""
    if qfi <= 0.0:
        return math.inf
    return 1.0 / (n_entangled * math.sqrt(n_repeats * qfi))


def thermal_qfi(h: HermitianOperator, temperature: float) -> float:
    """QFI for temperature of the Gibbs state: Var_beta(H)/T^4 = c_v/T^2."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    ens = gibbs_state(h, 1.0 / temperature)
    return ens.energy_variance() / temperature**4


def heat_capacity(h: HermitianOperator, temperature: float) -> float:
    """c_v = beta^2 Var(H)."""
    ens = gibbs_state(h, 1.0 / temperature)
    return ens.energy_variance() / temperature**2


@dataclass
class ShotNoiseBound:
    """Extensive-thermometer shot-noise bound on beta estimation."""

    delta_beta_bound: float
    energy_per_particle: float
    energy_slope: float   # |d eps_bar / d beta| = per-particle energy variance
    n_particles: int


def extensive_shot_noise(h_single: HermitianOperator, n_particles: int, beta: float) -> ShotNoiseBound:
    """Delta beta >= 1/sqrt(N eps_bar') for N non-interacting copies.

    eps_bar' = |d eps_bar / d beta| equals the per-particle energy variance,
    so the total-energy variance is exactly N times the single-copy variance.
    """
    if n_particles < 1:
        raise ValueError("n_particles must be >= 1")
    ens = gibbs_state(h_single, beta)
    slope = ens.energy_variance()
    if slope <= 0.0:
        logger.warning("extensive_shot_noise: flat spectrum, bound is +inf")
        bound = math.inf
    else:
        bound = 1.0 / math.sqrt(n_particles * slope)
    return ShotNoiseBound(
        delta_beta_bound=bound,
        energy_per_particle=ens.energy_mean(),
        energy_slope=slope,
        n_particles=n_particles,
    )
