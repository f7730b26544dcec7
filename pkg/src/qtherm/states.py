"""Dense finite-dimensional quantum-state algebra.

Operators, density matrices, Gibbs ensembles, partial traces, fidelities and
purifications.  Everything is dense complex double precision; the intended
working range is dim <= 2**12 (full spectral decompositions dominate the cost
anyway).  Conventions: hbar = k_B = 1, beta = 1/T.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

HERMITICITY_RTOL = 1e-8      # constructor rejects worse asymmetry
TRACE_ATOL = 1e-10
NEG_EIG_ATOL = 1e-10
NORM_ATOL = 1e-12


class EigenSolverError(RuntimeError):
    """Raised when the dense Hermitian eigensolver fails to converge."""


def _as_square_complex(entries) -> np.ndarray:
    a = np.asarray(entries, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("dimension must be >= 1")
    return a


def _symmetrize(a: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    """Return (A + A^dag)/2 and the maximum asymmetry that was removed."""
    asym = float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0
    scale = float(np.max(np.abs(a))) if a.size else 0.0
    if scale > 0.0 and asym > HERMITICITY_RTOL * scale:
        raise ValueError(
            f"{what}: asymmetry {asym:.3e} exceeds {HERMITICITY_RTOL:.0e} * max|A| = "
            f"{HERMITICITY_RTOL * scale:.3e}"
        )
    return 0.5 * (a + a.conj().T), asym


@dataclass
class HermitianOperator:
    """A Hermitian matrix in energy units.

    The constructor symmetrizes its input as (A + A^dag)/2 and records the
    removed asymmetry; inputs with asymmetry above 1e-8 * max|A| are rejected.
    """

    entries: np.ndarray
    max_asymmetry: float = field(init=False, default=0.0)

    def __post_init__(self):
        a = _as_square_complex(self.entries)
        self.entries, self.max_asymmetry = _symmetrize(a, "HermitianOperator")

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def expectation(self, rho: "DensityMatrix") -> float:
        return float(np.real(np.trace(self.entries @ rho.entries)))

    def __matmul__(self, other):
        if isinstance(other, HermitianOperator):
            return self.entries @ other.entries
        return self.entries @ other


@dataclass
class DensityMatrix:
    """Unit-trace positive-semidefinite operator (dimensionless)."""

    entries: np.ndarray
    check_positivity: bool = True

    def __post_init__(self):
        a = _as_square_complex(self.entries)
        a, _ = _symmetrize(a, "DensityMatrix")
        tr = float(np.real(np.trace(a)))
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix trace {tr!r} is not 1 within {TRACE_ATOL}")
        if self.check_positivity:
            lo = float(np.linalg.eigvalsh(a)[0])
            if lo < -NEG_EIG_ATOL:
                raise ValueError(f"density matrix has negative eigenvalue {lo:.3e}")
        self.entries = a

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_spectral(cls, populations: np.ndarray, eigenvectors: np.ndarray) -> "DensityMatrix":
        """Build from a known spectral decomposition, skipping the O(d^3) PSD check."""
        rho = (eigenvectors * populations) @ eigenvectors.conj().T
        return cls(rho, check_positivity=False)

    @classmethod
    def from_pure(cls, psi: "PureState") -> "DensityMatrix":
        v = psi.amplitudes
        return cls(np.outer(v, v.conj()), check_positivity=False)

    def clipped_spectrum(self) -> tuple[np.ndarray, np.ndarray]:
        """Ascending eigenvalues clipped at 0 and renormalized, plus eigenvectors.

        Clipping the slightly-negative tail is the main numerical guard before
        matrix square roots; the removed magnitude is logged.
        """
        vals, vecs = hermitian_eig_raw(self.entries)
        clip = float(-vals[vals < 0].sum()) if np.any(vals < 0) else 0.0
        if clip > 0.0:
            logger.debug("clipped negative density-matrix weight %.3e", clip)
        vals = np.clip(vals, 0.0, None)
        s = vals.sum()
        if s <= 0.0:
            raise ValueError("density matrix has no positive spectral weight")
        return vals / s, vecs


@dataclass
class PureState:
    """Unit-norm complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = float(np.linalg.norm(v))
        if abs(n - 1.0) > 1e-6:
            raise ValueError(f"amplitudes have norm {n!r}, expected 1")
        # renormalize residual error below the tolerance
        self.amplitudes = v / n

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass
class BipartitionSpec:
    """Tensor-factor layout of a chain and the subsystem kept under test.

    Site 0 is the most-significant tensor factor.
    """

    site_dims: tuple[int, ...]
    keep_sites: tuple[int, ...]

    def __post_init__(self):
        self.site_dims = tuple(int(d) for d in self.site_dims)
        self.keep_sites = tuple(sorted(int(s) for s in self.keep_sites))
        n = len(self.site_dims)
        if any(d < 1 for d in self.site_dims):
            raise ValueError("site dimensions must be positive")
        if not self.keep_sites:
            raise ValueError("keep_sites must be nonempty")
        if len(set(self.keep_sites)) != len(self.keep_sites):
            raise ValueError("keep_sites contains duplicates")
        if any(s < 0 or s >= n for s in self.keep_sites):
            raise ValueError(f"keep_sites {self.keep_sites} outside 0..{n - 1}")

    @property
    def n_sites(self) -> int:
        return len(self.site_dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.site_dims))

    @property
    def keep_dim(self) -> int:
        return int(np.prod([self.site_dims[s] for s in self.keep_sites]))

    @property
    def traced_sites(self) -> tuple[int, ...]:
        keep = set(self.keep_sites)
        return tuple(s for s in range(self.n_sites) if s not in keep)

    @classmethod
    def chain_block(cls, n_sites: int, n_keep: int, start: int = 0) -> "BipartitionSpec":
        """Contiguous block of n_keep spin-1/2 sites starting at `start` (periodic)."""
        sites = tuple((start + k) % n_sites for k in range(n_keep))
        return cls(site_dims=(2,) * n_sites, keep_sites=sites)


def hermitian_eig_raw(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigh failed for dim={a.shape[0]}, max|A|={np.max(np.abs(a)):.3e}: {exc}"
        ) from exc


def hermitian_eig(a: HermitianOperator) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns of a."""
    return hermitian_eig_raw(a.entries)


@dataclass
class GibbsEnsemble:
    """A Hamiltonian at inverse temperature beta with cached spectral data.

    Boltzmann weights are computed as exp(-beta (E_i - E_min)) and normalized,
    which keeps large-beta chains (beta up to ~3L/4 at L = 12 scale spectra)
    free of overflow.
    """

    hamiltonian: HermitianOperator
    beta: float
    eigenvalues: np.ndarray = field(init=False)
    eigenvectors: np.ndarray = field(init=False)
    populations: np.ndarray = field(init=False)
    logZ: float = field(init=False)

    def __post_init__(self):
        beta = float(self.beta)
        if not math.isfinite(beta):
            raise ValueError("beta must be finite; use a ground-projector helper for beta = inf")
        if beta < 0.0:
            raise ValueError("beta must be non-negative")
        self.beta = beta
        self.eigenvalues, self.eigenvectors = hermitian_eig(self.hamiltonian)
        e_min = float(self.eigenvalues[0])
        w = np.exp(-beta * (self.eigenvalues - e_min))
        z_shift = float(w.sum())
        self.populations = w / z_shift
        self.logZ = math.log(z_shift) - beta * e_min

    @property
    def dim(self) -> int:
        return self.hamiltonian.dim

    def density_matrix(self) -> DensityMatrix:
        return DensityMatrix.from_spectral(self.populations, self.eigenvectors)

    def energy_mean(self) -> float:
        return float(self.populations @ self.eigenvalues)

    def energy_variance(self) -> float:
        mean = self.energy_mean()
        return float(self.populations @ (self.eigenvalues - mean) ** 2)


def gibbs_state(h: HermitianOperator, beta: float) -> GibbsEnsemble:
    """Canonical ensemble exp(-beta H)/Z for beta >= 0 (beta = 0 is I/d)."""
    return GibbsEnsemble(hamiltonian=h, beta=beta)


def partial_trace(rho: DensityMatrix, layout: BipartitionSpec) -> DensityMatrix:
    """Trace out every site not in layout.keep_sites."""
    d = layout.total_dim
    if rho.dim != d:
        raise ValueError(f"layout implies dim {d}, state has dim {rho.dim}")
    reduced = partial_trace_matrix(rho.entries, layout)
    return DensityMatrix(reduced, check_positivity=False)


def partial_trace_matrix(mat: np.ndarray, layout: BipartitionSpec) -> np.ndarray:
    """Partial trace on a bare matrix (no density-matrix validation)."""
    dims = layout.site_dims
    n = layout.n_sites
    t = mat.reshape(dims + dims)
    keep = list(layout.keep_sites)
    traced = list(layout.traced_sites)
    # move kept row/col axes to the front, traced axes to the back
    order = keep + traced + [n + s for s in keep] + [n + s for s in traced]
    t = np.transpose(t, order)
    dk = layout.keep_dim
    dt = layout.total_dim // dk
    t = t.reshape(dk, dt, dk, dt)
    return np.einsum("itjt->ij", t)


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Tr sqrt(sqrt(rho) sigma sqrt(rho)), via spectral square roots."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    p, v = rho.clipped_spectrum()
    sqrt_rho = (v * np.sqrt(p)) @ v.conj().T
    m = sqrt_rho @ sigma.entries @ sqrt_rho
    vals = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    f = float(np.sqrt(np.clip(vals, 0.0, None)).sum())
    return min(max(f, 0.0), 1.0)


def fidelity_from_factors(x: np.ndarray, y: np.ndarray) -> float:
    """Uhlmann fidelity of rho = X X^dag and sigma = Y Y^dag from the factors.

    F equals the nuclear norm of X^dag Y for any factorization, and singular
    values carry absolute (not square-root-amplified) roundoff, which matters
    for nearly rank-deficient thermal states.
    """
    if x.shape[0] != y.shape[0]:
        raise ValueError("factor row dimensions differ")
    s = np.linalg.svd(x.conj().T @ y, compute_uv=False)
    return min(float(s.sum()), 1.0)


def infidelity_from_factors(x: np.ndarray, y: np.ndarray) -> float:
    """1 - F for rho = X X^dag, sigma = Y Y^dag, free of catastrophic cancellation.

    Uses the Bures identity 1 - F = min_U ||X - Y U||_F^2 / 2 over unitaries,
    minimized by U = W V^dag from the SVD X^dag Y = V S W^dag.  The result is
    a plain sum of squares, so infidelities down to ~1e-30 retain full
    relative precision (computing 1 - nuclear_norm directly loses everything
    below ~1e-15).
    """
    if x.shape[0] != y.shape[0]:
        raise ValueError("factor row dimensions differ")
    v, _, wh = np.linalg.svd(x.conj().T @ y)
    d = x - y @ (wh.conj().T @ v.conj().T)
    return 0.5 * float(np.sum(np.abs(d) ** 2))


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma; for qubits, half the Bloch distance."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    vals = np.linalg.eigvalsh(rho.entries - sigma.entries)
    return float(0.5 * np.abs(vals).sum())


def purify(rho: DensityMatrix) -> PureState:
    """Canonical purification sum_i sqrt(p_i) |i> (x) |i*> on dim**2.

    Tracing the ancilla factor (the second one) returns rho.
    """
    p, v = rho.clipped_spectrum()
    # amplitudes[s, a] = sum_i sqrt(p_i) v[s, i] conj(v[a, i])
    psi = (v * np.sqrt(p)) @ v.conj().T
    return PureState(psi.reshape(-1))


# --- JSON debug serialization (row-major, [re, im] pairs) -------------------

def matrix_to_json(mat: np.ndarray) -> str:
    a = np.asarray(mat, dtype=complex)
    payload = {
        "shape": list(a.shape),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel(order="C")],
    }
    return json.dumps(payload)


def matrix_from_json(text: str) -> np.ndarray:
    payload = json.loads(text)
    flat = np.array([complex(re, im) for re, im in payload["entries"]], dtype=complex)
    return flat.reshape(payload["shape"], order="C")
