"""Thermalizing Lindblad channel for a single qubit and discrimination tasks.

The master equation with detailed-balance rates gamma_plus = (1+n_th) gamma
(decay) and gamma_minus = n_th gamma (excitation) decouples populations from
coherences, so the channel has a closed form: the z component relaxes to
r_z_eq = -1/(2 n_th + 1) = -tanh(omega/(2T)) at rate Gamma = gamma (2 n_th + 1)
while transverse components rotate at omega and damp at Gamma/2.  No ODE
integration happens in production code; an integrator exists only as a test
oracle (lindblad_rhs).  Units hbar = k_B = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qtherm.states import DensityMatrix, gibbs_state, HermitianOperator, trace_distance

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)   # |1><0|: decay
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)    # |0><1|: excitation


@dataclass(frozen=True)
class ThermalQubitChannel:
    """Lindblad thermalizing map parametrized by (omega, gamma, n_th).

    n_th is the average thermal occupation of the bath mode at the qubit
    splitting; detailed balance fixes the excitation/decay ratio to
    n_th/(1 + n_th) = e^{-omega/T}.
    """

    omega: float   # level splitting (energy)
    gamma: float   # bare coupling rate (1/time)
    n_th: float    # thermal occupation, >= 0

    def __post_init__(self):
        if self.omega <= 0.0:
            raise ValueError("omega must be positive")
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.n_th < 0.0:
            raise ValueError("n_th must be >= 0")

    @classmethod
    def from_temperature(cls, omega: float, gamma: float, temperature: float) -> "ThermalQubitChannel":
        if temperature <= 0.0:
            raise ValueError("temperature must be positive")
        n_th = 1.0 / math.expm1(omega / temperature)
        return cls(omega=omega, gamma=gamma, n_th=n_th)

    @property
    def gamma_plus(self) -> float:
        """Decay rate (1 + n_th) gamma."""
        return (1.0 + self.n_th) * self.gamma

    @property
    def gamma_minus(self) -> float:
        """Excitation rate n_th gamma."""
        return self.n_th * self.gamma

    @property
    def big_gamma(self) -> float:
        """Total relaxation rate Gamma = gamma (2 n_th + 1)."""
        return self.gamma * (2.0 * self.n_th + 1.0)

    @property
    def temperature(self) -> float:
        """T with n_th = 1/(e^{omega/T} - 1)."""
        if self.n_th == 0.0:
            raise ValueError("n_th = 0 corresponds to T = 0")
        return self.omega / math.log1p(1.0 / self.n_th)

    @property
    def z_equilibrium(self) -> float:
        """Fixed-point Bloch z component, -1/(2 n_th + 1) = -tanh(omega/(2T))."""
        return -1.0 / (2.0 * self.n_th + 1.0)

    def dn_th_dT(self) -> float:
        """dn_th/dT = (omega/T^2) e^{omega/T} n_th^2, exact chain-rule factor."""
        t = self.temperature
        return (self.omega / t**2) * math.exp(self.omega / t) * self.n_th**2

    def equilibrium_state(self) -> DensityMatrix:
        """Gibbs state of (omega/2) sigma_z at this channel's temperature."""
        h = HermitianOperator((self.omega / 2.0) * SIGMA_Z)
        return gibbs_state(h, 1.0 / self.temperature).density_matrix()


@dataclass(frozen=True)
class BlochVector:
    """Qubit state as rho = (I + r . sigma)/2 with ||r|| <= 1."""

    r: tuple[float, float, float]

    def __post_init__(self):
        r = tuple(float(c) for c in self.r)
        n = math.sqrt(sum(c * c for c in r))
        if n > 1.0 + 1e-10:
            raise ValueError(f"Bloch vector norm {n!r} exceeds 1")
        object.__setattr__(self, "r", r)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(c * c for c in self.r))

    @classmethod
    def from_polar(cls, theta: float, phi: float = 0.0) -> "BlochVector":
        """Pure state at polar angle theta from +z (theta = pi is the ground state)."""
        return cls((math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)))

    @classmethod
    def from_density(cls, rho: DensityMatrix) -> "BlochVector":
        if rho.dim != 2:
            raise ValueError("Bloch vectors describe qubits only")
        m = rho.entries
        return cls((
            float(np.real(np.trace(SIGMA_X @ m))),
            float(np.real(np.trace(SIGMA_Y @ m))),
            float(np.real(np.trace(SIGMA_Z @ m))),
        ))

    def to_density(self) -> DensityMatrix:
        x, y, z = self.r
        m = 0.5 * (np.eye(2, dtype=complex) + x * SIGMA_X + y * SIGMA_Y + z * SIGMA_Z)
        return DensityMatrix(m, check_positivity=False)


GROUND = BlochVector((0.0, 0.0, -1.0))   # |1>, energy -omega/2
EXCITED = BlochVector((0.0, 0.0, 1.0))   # |0>, energy +omega/2


def channel_apply(ch: ThermalQubitChannel, r0: BlochVector, t: float) -> BlochVector:
    """Closed-form action of the channel on a Bloch vector after time t."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    x, y, z = r0.r
    decay = math.exp(-ch.big_gamma * t)
    half = math.exp(-0.5 * ch.big_gamma * t)
    c, s = math.cos(ch.omega * t), math.sin(ch.omega * t)
    z_eq = ch.z_equilibrium
    return BlochVector((
        half * (c * x - s * y),
        half * (s * x + c * y),
        z_eq + (z - z_eq) * decay,
    ))


def channel_superoperator(ch: ThermalQubitChannel, t: float) -> np.ndarray:
    """4x4 matrix acting on row-major vec(rho) = (rho00, rho01, rho10, rho11).

    Linear (not just affine on normalized states): the trace-dependent part is
    carried by the rho00 + rho11 combination, so the map applies verbatim to
    unnormalized conditional operators in sequential-measurement recursions.
    """
    if t < 0.0:
        raise ValueError("t must be >= 0")
    decay = math.exp(-ch.big_gamma * t)
    phase = math.exp(-0.5 * ch.big_gamma * t) * np.exp(-1j * ch.omega * t)
    p_exc = ch.n_th / (2.0 * ch.n_th + 1.0)   # equilibrium excited population
    s = np.zeros((4, 4), dtype=complex)
    # rho00' = decay rho00 + p_exc (1-decay) (rho00 + rho11)
    s[0, 0] = decay + p_exc * (1.0 - decay)
    s[0, 3] = p_exc * (1.0 - decay)
    # rho11' = (rho00 + rho11) - rho00'
    s[3, 0] = 1.0 - s[0, 0]
    s[3, 3] = 1.0 - s[0, 3]
    s[1, 1] = phase
    s[2, 2] = np.conj(phase)
    return s


def channel_superoperator_dT(ch: ThermalQubitChannel, t: float) -> np.ndarray:
    """d/dT of channel_superoperator at fixed (omega, gamma); T enters via n_th."""
    if t < 0.0:
        raise ValueError("t must be >= 0")
    dn = ch.dn_th_dT()
    d_big_gamma = 2.0 * ch.gamma * dn
    decay = math.exp(-ch.big_gamma * t)
    d_decay = -t * decay * d_big_gamma
    phase = math.exp(-0.5 * ch.big_gamma * t) * np.exp(-1j * ch.omega * t)
    d_phase = -0.5 * t * d_big_gamma * phase
    p_exc = ch.n_th / (2.0 * ch.n_th + 1.0)
    d_p_exc = dn / (2.0 * ch.n_th + 1.0) ** 2
    s = np.zeros((4, 4), dtype=complex)
    s[0, 0] = d_decay + d_p_exc * (1.0 - decay) - p_exc * d_decay
    s[0, 3] = d_p_exc * (1.0 - decay) - p_exc * d_decay
    s[3, 0] = -s[0, 0]
    s[3, 3] = -s[0, 3]
    s[1, 1] = d_phase
    s[2, 2] = np.conj(d_phase)
    return s


def apply_superoperator(s: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """Apply a 4x4 superoperator to one or many 2x2 matrices (leading axes free)."""
    lead = rho.shape[:-2]
    v = rho.reshape(lead + (4,))
    return (v @ s.T).reshape(lead + (2, 2))


def apply_to_first_qubit(s: np.ndarray, rho4: np.ndarray) -> np.ndarray:
    """Apply a one-qubit superoperator to the first factor of a two-qubit state."""
    t = rho4.reshape(2, 2, 2, 2)   # indices (a, b, a', b'), probe = (a, a')
    s4 = s.reshape(2, 2, 2, 2)     # s4[i, j, a, a'] maps rho[a, a'] -> rho[i, j]
    out = np.einsum("ijaA,abAB->ibjB", s4, t)
    return out.reshape(4, 4)


def lindblad_rhs(ch: ThermalQubitChannel, rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation (test oracle for the closed form)."""
    h = (ch.omega / 2.0) * SIGMA_Z
    out = -1j * (h @ rho - rho @ h)
    for rate, op in ((ch.gamma_plus, SIGMA_MINUS), (ch.gamma_minus, SIGMA_PLUS)):
        od = op.conj().T @ op
        out += rate * (op @ rho @ op.conj().T - 0.5 * (od @ rho + rho @ od))
    return out


# --- two-temperature discrimination (trace distance) ------------------------

def _channels(omega: float, gamma: float, t_hot: float, t_cold: float):
    if t_cold <= 0.0 or t_hot <= t_cold:
        raise ValueError("need T_hot > T_cold > 0")
    hot = ThermalQubitChannel.from_temperature(omega, gamma, t_hot)
    cold = ThermalQubitChannel.from_temperature(omega, gamma, t_cold)
    return hot, cold


def discrimination_distance(
    t_hot: float,
    t_cold: float,
    r0: BlochVector,
    t: float,
    omega: float,
    gamma: float,
) -> float:
    """Trace distance between the two evolved probes over its equilibrium value.

    For qubits the trace distance is half the Euclidean Bloch distance, so the
    normalization cancels the factor of one half.
    """
    hot, cold = _channels(omega, gamma, t_hot, t_cold)
    d_inf = abs(hot.z_equilibrium - cold.z_equilibrium)
    if d_inf <= 0.0:
        raise ValueError("equilibrium states coincide; nothing to discriminate")
    rh = channel_apply(hot, r0, t).r
    rc = channel_apply(cold, r0, t).r
    d = math.sqrt(sum((a - b) ** 2 for a, b in zip(rh, rc)))
    return d / d_inf


def discrimination_with_ancilla(
    t_hot: float, t_cold: float, t: float, omega: float, gamma: float
) -> float:
    """Same figure of merit with the probe maximally entangled with an idle ancilla."""
    hot, cold = _channels(omega, gamma, t_hot, t_cold)
    phi = np.zeros(4, dtype=complex)
    phi[0] = phi[3] = 1.0 / math.sqrt(2.0)
    bell = np.outer(phi, phi.conj())
    out_h = apply_to_first_qubit(channel_superoperator(hot, t), bell)
    out_c = apply_to_first_qubit(channel_superoperator(cold, t), bell)
    eq_h = apply_to_first_qubit(channel_superoperator(hot, 50.0 / hot.big_gamma), bell)
    eq_c = apply_to_first_qubit(channel_superoperator(cold, 50.0 / cold.big_gamma), bell)
    d = trace_distance(DensityMatrix(out_h, check_positivity=False),
                       DensityMatrix(out_c, check_positivity=False))
    d_inf = trace_distance(DensityMatrix(eq_h, check_positivity=False),
                           DensityMatrix(eq_c, check_positivity=False))
    if d_inf <= 0.0:
        raise ValueError("equilibrium states coincide; nothing to discriminate")
    return d / d_inf


@dataclass
class DiscriminationOptimum:
    t_star: float
    r0_star: BlochVector
    value: float


def optimize_discrimination(
    t_hot: float,
    t_cold: float,
    omega: float,
    gamma: float,
    t_grid: np.ndarray,
    n_angles: int = 181,
) -> DiscriminationOptimum:
    """Best (time, pure input) for single-qubit discrimination.

    The channel and the figure of merit are phase-covariant about z, so pure
    inputs reduce to the polar angle.  A grid search over angle x time is
    refined by golden-section search in t at the best angle.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0:
        raise ValueError("t_grid must be nonempty")
    angles = np.linspace(0.0, math.pi, n_angles)
    best = (-math.inf, 0.0, 0.0)
    for theta in angles:
        r0 = BlochVector.from_polar(theta)
        for t in t_grid:
            v = discrimination_distance(t_hot, t_cold, r0, float(t), omega, gamma)
            if v > best[0]:
                best = (v, theta, float(t))
    _, theta_star, t_coarse = best
    r0_star = BlochVector.from_polar(theta_star)
    lo = max(0.0, t_coarse - float(np.max(np.diff(t_grid), initial=t_coarse)))
    hi = t_coarse + float(np.max(np.diff(t_grid), initial=t_coarse))
    t_star, value = _golden_max(
        lambda t: discrimination_distance(t_hot, t_cold, r0_star, t, omega, gamma), lo, hi
    )
    return DiscriminationOptimum(t_star=t_star, r0_star=r0_star, value=value)


def _golden_max(f, lo: float, hi: float, tol: float = 1e-10) -> tuple[float, float]:
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > tol * max(1.0, abs(a) + abs(b)):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)
