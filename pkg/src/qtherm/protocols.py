"""Single-qubit thermometer protocols.

Fisher information of temperature estimation with repeated probe measurements
(fresh probe each shot vs sequential measurements on one probe), optimal
M-level probe spectra, and a Heisenberg-limited excitation-counting toy model.
Units hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from qtherm.channel import (
    BlochVector,
    ThermalQubitChannel,
    apply_superoperator,
    channel_superoperator,
    channel_superoperator_dT,
)
from qtherm.estimation import EPS_PROB, FisherResult, OutcomeDistribution, classical_fisher
from qtherm.states import DensityMatrix

SEQUENTIAL_MAX_STEPS = 20   # 2**N branches for a binary POVM


@dataclass(frozen=True)
class MeasurementModel:
    """POVM with state-update maps, given as Kraus operators M_theta.

    Effects are Pi_theta = M_theta^dag M_theta; the post-measurement update is
    rho -> M rho M^dag (unnormalized branch bookkeeping keeps probabilities in
    the trace).
    """

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ops = tuple(np.asarray(m, dtype=complex) for m in self.kraus)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        dim = ops[0].shape[0]
        if any(m.shape != (dim, dim) for m in ops):
            raise ValueError("Kraus operators must be equal square matrices")
        total = sum(m.conj().T @ m for m in ops)
        if np.max(np.abs(total - np.eye(dim))) > 1e-10:
            raise ValueError("effects do not sum to the identity")
        object.__setattr__(self, "kraus", ops)

    @property
    def n_outcomes(self) -> int:
        return len(self.kraus)

    @property
    def effects(self) -> tuple[np.ndarray, ...]:
        return tuple(m.conj().T @ m for m in self.kraus)

    @classmethod
    def sigma_z_projectors(cls) -> "MeasurementModel":
        """Default projective measurement Pi_+- = (I +- sigma_z)/2."""
        up = np.diag([1.0, 0.0]).astype(complex)
        down = np.diag([0.0, 1.0]).astype(complex)
        return cls(kraus=(up, down))


def _single_shot_distribution(
    rho0: DensityMatrix, ch: ThermalQubitChannel, tau: float, povm: MeasurementModel
) -> OutcomeDistribution:
    s = channel_superoperator(ch, tau)
    s_t = channel_superoperator_dT(ch, tau)
    rho = apply_superoperator(s, rho0.entries)
    drho = apply_superoperator(s_t, rho0.entries)
    p = np.array([float(np.real(np.trace(e @ rho))) for e in povm.effects])
    dp = np.array([float(np.real(np.trace(e @ drho))) for e in povm.effects])
    return OutcomeDistribution(probabilities=p, derivative=dp)


def fisher_iid(
    rho0: DensityMatrix,
    ch: ThermalQubitChannel,
    tau: float,
    povm: MeasurementModel,
    n_steps: int,
) -> FisherResult:
    """FI of N independent probe-measure rounds: exactly N times the single shot.

    The channel's T-dependence enters only through n_th(T); derivatives are
    the closed-form dT superoperator, never finite differences.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    dist = _single_shot_distribution(rho0, ch, tau, povm)
    single = classical_fisher(dist, parameter_label="T")
    return FisherResult(value=n_steps * single.value, parameter_label="T")


def fisher_sequential(
    rho0: DensityMatrix,
    ch: ThermalQubitChannel,
    tau: float,
    povm: MeasurementModel,
    n_steps: int,
) -> FisherResult:
    """FI of N sequential measurements on one probe without reinitialization.

    Enumerates all outcome sequences.  Each branch carries the unnormalized
    conditional operator rho_vec and its analytic T-derivative; the update per
    step is channel (with product-rule dT term) followed by M rho M^dag.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if n_steps > SEQUENTIAL_MAX_STEPS:
        raise ValueError(
            f"n_steps={n_steps} exceeds the branch guard "
            f"({povm.n_outcomes}**{n_steps} branches; max {SEQUENTIAL_MAX_STEPS} steps)"
        )
    if tau <= 0.0:
        raise ValueError("tau must be positive")
    s = channel_superoperator(ch, tau)
    s_t = channel_superoperator_dT(ch, tau)
    rho = rho0.entries[np.newaxis]            # (branches, 2, 2)
    drho = np.zeros_like(rho)
    for _ in range(n_steps):
        drho = apply_superoperator(s, drho) + apply_superoperator(s_t, rho)
        rho = apply_superoperator(s, rho)
        rho = np.stack([m @ rho @ m.conj().T for m in povm.kraus], axis=1).reshape(-1, 2, 2)
        drho = np.stack([m @ drho @ m.conj().T for m in povm.kraus], axis=1).reshape(-1, 2, 2)
    p = np.real(np.trace(rho, axis1=1, axis2=2))
    dp = np.real(np.trace(drho, axis1=1, axis2=2))
    dist = OutcomeDistribution(probabilities=p, derivative=dp)
    return classical_fisher(dist, parameter_label="T")


@dataclass
class InputExtremes:
    """FI extremes over pure probe inputs plus a seeded uniform-input average."""

    maximum: float
    minimum: float
    mean: float
    argmax_polar: float   # polar angle from +z; pi = ground state
    argmin_polar: float

    @property
    def argmax_is_ground(self) -> bool:
        return abs(self.argmax_polar - math.pi) < 1e-6

    @property
    def gap(self) -> float:
        return self.maximum - self.minimum


def fisher_input_extremes(
    ch: ThermalQubitChannel,
    tau: float,
    povm: MeasurementModel,
    n_steps: int,
    protocol: str = "iid",
    n_angles: int = 181,
    n_samples: int = 200,
    seed: int = 0,
) -> InputExtremes:
    """Max/min FI over pure inputs and the mean over Haar-uniform pure states.

    The channel and the default POVM are phase-covariant about z, so the
    extremal search reduces to a polar-angle grid (which contains the ground
    and excited states exactly).  The average keeps full Bloch-sphere sampling.
    """
    if protocol not in ("iid", "sequential"):
        raise ValueError(f"unknown protocol {protocol!r}")
    fi = fisher_iid if protocol == "iid" else fisher_sequential

    def value(r0: BlochVector) -> float:
        return fi(r0.to_density(), ch, tau, povm, n_steps).value

    angles = np.linspace(0.0, math.pi, n_angles)
    vals = np.array([value(BlochVector.from_polar(a)) for a in angles])
    i_max, i_min = int(np.argmax(vals)), int(np.argmin(vals))

    rng = np.random.default_rng(seed)
    z = rng.uniform(-1.0, 1.0, size=n_samples)
    phi = rng.uniform(0.0, 2.0 * math.pi, size=n_samples)
    sampled = [
        value(BlochVector.from_polar(math.acos(zi), float(ph))) for zi, ph in zip(z, phi)
    ]
    return InputExtremes(
        maximum=float(vals[i_max]),
        minimum=float(vals[i_min]),
        mean=float(np.mean(sampled)),
        argmax_polar=float(angles[i_max]),
        argmin_polar=float(angles[i_min]),
    )


# --- optimal probe spectra ---------------------------------------------------

@dataclass
class ProbeSpectrum:
    """Energy levels maximizing the Gibbs energy variance at fixed T."""

    energies: np.ndarray   # ascending, energies[0] = 0 (gauge)
    variance: float
    temperature: float

    @property
    def gap(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    def excited_degeneracy_spread(self) -> float:
        """Max spread among the upper M-1 levels (0 for an exact two-level probe)."""
        upper = self.energies[1:]
        return float(upper.max() - upper.min()) if upper.size else 0.0


def _gibbs_variance(energies: np.ndarray, temperature: float) -> float:
    e = energies - energies.min()
    w = np.exp(-e / temperature)
    p = w / w.sum()
    mean = float(p @ energies)
    return float(p @ (energies - mean) ** 2)


def optimal_gap_oracle(m_levels: int, temperature: float, e_max: float | None = None) -> float:
    """1-D oracle: best gap for a probe with an (M-1)-fold degenerate excited level.

    Maximizes eps^2 p (1 - p) with p = g e^{-eps/T} / (1 + g e^{-eps/T}),
    g = M - 1, by golden-section search; the optimal eps/T solves a
    transcendental equation with no closed form.
    """
    if m_levels < 2:
        raise ValueError("m_levels must be >= 2")
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    g = m_levels - 1
    hi = e_max if e_max is not None else 20.0 * temperature

    def neg_var(eps: float) -> float:
        p = g * math.exp(-eps / temperature) / (1.0 + g * math.exp(-eps / temperature))
        return -(eps**2) * p * (1.0 - p)

    from scipy.optimize import minimize_scalar

    res = minimize_scalar(neg_var, bounds=(1e-12, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.x)


def optimal_probe_spectrum(
    m_levels: int,
    temperature: float,
    e_max: float | None = None,
    n_starts: int = 8,
    seed: int = 0,
) -> ProbeSpectrum:
    """Spectrum (E_1 = 0 <= ... <= E_M) maximizing the Gibbs energy variance.

    Multi-start Nelder-Mead over the M-1 free levels.  The optimum is an
    effective two-level system with an (M-1)-fold degenerate excited level;
    the caller can check that structure via excited_degeneracy_spread().
    """
    if m_levels < 2:
        raise ValueError("m_levels must be >= 2")
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    hi = e_max if e_max is not None else 20.0 * temperature

    from scipy.optimize import minimize

    def neg_var(free: np.ndarray) -> float:
        if np.any(free < 0.0) or np.any(free > hi):
            return 0.0   # outside the box: worst possible value (variance >= 0)
        return -_gibbs_variance(np.concatenate(([0.0], free)), temperature)

    rng = np.random.default_rng(seed)
    best_x, best_f = None, 0.0
    for k in range(n_starts):
        x0 = rng.uniform(0.1 * temperature, 0.8 * hi, size=m_levels - 1)
        res = minimize(neg_var, x0, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
        if res.fun < best_f:
            best_f, best_x = res.fun, res.x
    if best_x is None:
        raise RuntimeError(
            f"probe-spectrum optimizer failed to beat variance 0 after {n_starts} starts"
        )
    energies = np.sort(np.concatenate(([0.0], best_x)))
    return ProbeSpectrum(energies=energies, variance=-best_f, temperature=temperature)


# --- Heisenberg-limited counting toy model -----------------------------------

@dataclass
class ToyModelConfig:
    """Dispersively coupled counter: M bath atoms imprint phase alpha*m*tau.

    A probe of N atoms reads the phase either as N independent single-atom
    interferometers (product) or as one N-atom entangled state acquiring
    N times the phase (noon).  Defaults keep N*alpha*M*tau below the
    phase-wrap guard for the acceptance-scale N <= 16, M = 20.
    """

    m_bath: int = 20
    n_probe: int = 4
    temperature: float = 1.0
    epsilon: float = 1.0        # bath atom splitting
    alpha: float = 0.004        # dispersive coupling strength
    tau: float = 1.0            # interaction time
    n_shots: int = 10_000
    mode: str = "product"       # "product" | "noon"
    seed: int = 0
    sample_bath: bool = True    # False: freeze m at its rounded mean
    n_blocks: int = 100

    def __post_init__(self):
        if self.mode not in ("product", "noon"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.n_shots < 100:
            raise ValueError("n_shots must be >= 100")
        if self.m_bath < 1 or self.n_probe < 1:
            raise ValueError("m_bath and n_probe must be >= 1")
        if self.temperature <= 0.0 or self.epsilon <= 0.0 or self.tau <= 0.0:
            raise ValueError("temperature, epsilon and tau must be positive")
        if self.alpha < 0.0:
            raise ValueError("alpha must be >= 0")

    @property
    def excitation_probability(self) -> float:
        x = self.epsilon / self.temperature
        return math.exp(-x) / (1.0 + math.exp(-x))


@dataclass
class ToyModelResult:
    phase_rmse: float
    temperature_rmse: float
    mean_phase: float
    mode: str
    n_probe: int


def heisenberg_toy(config: ToyModelConfig) -> ToyModelResult:
    """Monte-Carlo RMSEs of the counting toy model.

    Detection probability per interferometer is (1 + sin(phase))/2, whose
    per-probe-atom FI about the phase is exactly 1 (product) or N^2 (noon).
    Shots are pooled into blocks; each block yields one phase estimate by
    inverting the detected fraction, then one temperature estimate through
    m_hat = phase_hat/(alpha tau) and the mean-occupation relation
    <m> = M e^{-eps/T}/(1 + e^{-eps/T}).  Per-shot RNG streams derive from
    (seed, shot index), so results do not depend on evaluation order.
    """
    c = config
    if c.alpha == 0.0:
        return ToyModelResult(
            phase_rmse=0.0, temperature_rmse=math.inf, mean_phase=0.0,
            mode=c.mode, n_probe=c.n_probe,
        )
    p_exc = c.excitation_probability
    if c.n_probe * c.alpha * c.m_bath * c.tau >= math.pi:
        raise ValueError(
            "identifiability guard: N*alpha*M*tau = "
            f"{c.n_probe * c.alpha * c.m_bath * c.tau:.3f} >= pi (phase can wrap)"
        )
    m_frozen = int(round(c.m_bath * p_exc))
    mean_phase = c.alpha * (c.m_bath * p_exc if c.sample_bath else m_frozen) * c.tau

    block = c.n_shots // c.n_blocks
    if block < 1:
        raise ValueError("n_shots must be >= n_blocks")
    detections = np.empty(c.n_shots, dtype=np.int64)
    for shot in range(c.n_shots):
        rng = np.random.default_rng([c.seed, shot])
        m = rng.binomial(c.m_bath, p_exc) if c.sample_bath else m_frozen
        phi = c.alpha * m * c.tau
        if c.mode == "product":
            detections[shot] = rng.binomial(c.n_probe, 0.5 * (1.0 + math.sin(phi)))
        else:
            detections[shot] = rng.binomial(1, 0.5 * (1.0 + math.sin(c.n_probe * phi)))

    per_block = detections[: block * c.n_blocks].reshape(c.n_blocks, block)
    trials = block * (c.n_probe if c.mode == "product" else 1)
    frac = per_block.sum(axis=1) / trials
    arg = np.clip(2.0 * frac - 1.0, -1.0, 1.0)
    phase_hat = np.arcsin(arg)
    if c.mode == "noon":
        phase_hat /= c.n_probe

    phase_rmse = float(np.sqrt(np.mean((phase_hat - mean_phase) ** 2)))
    m_hat = np.clip(phase_hat / (c.alpha * c.tau), 1e-9, c.m_bath - 1e-9)
    t_hat = c.epsilon / np.log(c.m_bath / m_hat - 1.0)
    temperature_rmse = float(np.sqrt(np.mean((t_hat - c.temperature) ** 2)))
    return ToyModelResult(
        phase_rmse=phase_rmse,
        temperature_rmse=temperature_rmse,
        mean_phase=mean_phase,
        mode=c.mode,
        n_probe=c.n_probe,
    )


def toy_scaling_exponent(
    n_values: Sequence[int], base: ToyModelConfig, mode: str
) -> tuple[float, list[ToyModelResult]]:
    """Log-log slope of the frozen-m phase RMSE versus probe size N."""
    from dataclasses import replace

    results = []
    for n in n_values:
        cfg = replace(base, n_probe=int(n), mode=mode, sample_bath=False)
        results.append(heisenberg_toy(cfg))
    lx = np.log([r.n_probe for r in results])
    ly = np.log([r.phase_rmse for r in results])
    slope = float(np.polyfit(lx, ly, 1)[0])
    return slope, results
