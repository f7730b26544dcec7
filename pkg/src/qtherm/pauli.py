"""Pauli-string sums with matrix-free action on state vectors.

A Hamiltonian kept as (coefficient, string) terms can act on vectors whose
last axis is a 2**L tensor factor without ever materializing a matrix on the
doubled (purification) space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from qtherm.states import HermitianOperator

_SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class PauliSum:
    """Real-coefficient sum of Pauli strings on L spin-1/2 sites."""

    n_sites: int
    terms: tuple[tuple[float, str], ...]

    def __post_init__(self):
        for coeff, s in self.terms:
            if len(s) != self.n_sites:
                raise ValueError(f"term {s!r} does not match n_sites={self.n_sites}")
            if any(c not in "IXYZ" for c in s):
                raise ValueError(f"invalid Pauli string {s!r}")

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def to_dense(self) -> np.ndarray:
        h = np.zeros((self.dim, self.dim), dtype=complex)
        for coeff, s in self.terms:
            op = np.array([[1.0 + 0j]])
            for c in s:
                op = np.kron(op, _SIGMA[c])
            h += coeff * op
        return h

    def to_operator(self) -> HermitianOperator:
        return HermitianOperator(self.to_dense())

    def apply_last_axis(self, vec: np.ndarray) -> np.ndarray:
        """Apply the operator to the last axis of vec (length 2**L).

        Cost is O(n_terms * vec.size); no 2**L x 2**L matrix is formed.
        """
        if vec.shape[-1] != self.dim:
            raise ValueError(f"last axis {vec.shape[-1]} != 2**{self.n_sites}")
        lead = vec.shape[:-1]
        v = vec.reshape(lead + (2,) * self.n_sites)
        out = np.zeros_like(v)
        off = len(lead)
        for coeff, s in self.terms:
            w = v
            for site, c in enumerate(s):
                ax = off + site
                if c == "I":
                    continue
                if c == "X":
                    w = np.flip(w, axis=ax)
                elif c == "Z":
                    w = w * _axis_weights(np.array([1.0, -1.0]), ax, w.ndim)
                else:  # Y: flip then weight by (-i, +i)
                    w = np.flip(w, axis=ax)
                    w = w * _axis_weights(np.array([-1j, 1j]), ax, w.ndim)
            out = out + coeff * w
        return out.reshape(vec.shape)


def _axis_weights(weights: np.ndarray, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = 2
    return weights.reshape(shape)


def single_site(n_sites: int, site: int, pauli: str) -> str:
    s = ["I"] * n_sites
    s[site] = pauli
    return "".join(s)


def two_site(n_sites: int, i: int, j: int, pi: str, pj: str) -> str:
    s = ["I"] * n_sites
    s[i] = pi
    s[j] = pj
    return "".join(s)
