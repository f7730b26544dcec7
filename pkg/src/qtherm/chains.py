"""Periodic spin-1/2 chain Hamiltonians.

The bond sum runs literally over i = 0..L-1 with neighbor (i+1) mod L, so the
L = 2 periodic chain counts its single physical bond twice; physics sweeps use
L >= 3.
"""

from __future__ import annotations

from dataclasses import dataclass

from qtherm.pauli import PauliSum, single_site, two_site
from qtherm.states import HermitianOperator

DENSE_EIG_MAX_L = 12      # dense diagonalization guard
PURIFICATION_MAX_L = 10   # purification vector has dim 2**(2L)


@dataclass(frozen=True)
class ChainModel:
    """A periodic Ising or XXZ chain with its single coupling parameter."""

    kind: str               # "ising" | "xxz"
    n_sites: int
    coupling_param: float   # transverse field h for Ising, anisotropy for XXZ

    def __post_init__(self):
        if self.kind not in ("ising", "xxz"):
            raise ValueError(f"unknown chain kind {self.kind!r}")
        if self.n_sites < 2:
            raise ValueError("chains need at least 2 sites")

    def terms(self) -> PauliSum:
        if self.kind == "ising":
            return ising_terms(self.n_sites, self.coupling_param)
        return xxz_terms(self.n_sites, self.coupling_param)

    def hamiltonian(self) -> HermitianOperator:
        return self.terms().to_operator()


def ising_terms(n_sites: int, h: float) -> PauliSum:
    """H = -sum_i [ sx_i sx_{i+1} + h sz_i ], periodic."""
    if n_sites < 2:
        raise ValueError("n_sites must be >= 2")
    terms = []
    for i in range(n_sites):
        j = (i + 1) % n_sites
        terms.append((-1.0, two_site(n_sites, i, j, "X", "X")))
        terms.append((-float(h), single_site(n_sites, i, "Z")))
    return PauliSum(n_sites=n_sites, terms=tuple(terms))


def xxz_terms(n_sites: int, delta: float) -> PauliSum:
    """H = sum_i [ sx_i sx_{i+1} + sy_i sy_{i+1} + delta sz_i sz_{i+1} ], periodic."""
    if n_sites < 2:
        raise ValueError("n_sites must be >= 2")
    terms = []
    for i in range(n_sites):
        j = (i + 1) % n_sites
        terms.append((1.0, two_site(n_sites, i, j, "X", "X")))
        terms.append((1.0, two_site(n_sites, i, j, "Y", "Y")))
        terms.append((float(delta), two_site(n_sites, i, j, "Z", "Z")))
    return PauliSum(n_sites=n_sites, terms=tuple(terms))


def build_ising(n_sites: int, h: float) -> HermitianOperator:
    return ising_terms(n_sites, h).to_operator()


def build_xxz(n_sites: int, delta: float) -> HermitianOperator:
    return xxz_terms(n_sites, delta).to_operator()


class ResourceGuardError(RuntimeError):
    """Raised when a requested chain exceeds the desk-scale limits."""


def check_dense_guard(n_sites: int) -> None:
    if n_sites > DENSE_EIG_MAX_L:
        raise ResourceGuardError(
            f"L={n_sites} exceeds the dense-diagonalization guard L <= {DENSE_EIG_MAX_L}"
        )


def check_purification_guard(n_sites: int) -> None:
    if n_sites > PURIFICATION_MAX_L:
        raise ResourceGuardError(
            f"L={n_sites} exceeds the purification guard L <= {PURIFICATION_MAX_L} "
            f"(vector dim 2**{2 * n_sites})"
        )
