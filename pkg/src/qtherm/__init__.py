"""Quantum thermometry toolkit.

Units: hbar = k_B = 1 everywhere, so beta = 1/T and energies, rates and
inverse temperatures share one scale.
"""

__version__ = "0.1.0"

from qtherm.chains import ChainModel, build_ising, build_xxz
from qtherm.channel import BlochVector, ThermalQubitChannel, channel_apply
from qtherm.estimation import (
    FisherResult,
    OutcomeDistribution,
    classical_fisher,
    cramer_rao,
    sld_qfi,
    thermal_qfi,
)
from qtherm.lqts import LqtsResult, lqts_closed_form, lqts_fidelity_oracle
from qtherm.protocols import MeasurementModel, fisher_iid, fisher_sequential
from qtherm.states import (
    BipartitionSpec,
    DensityMatrix,
    GibbsEnsemble,
    HermitianOperator,
    PureState,
    gibbs_state,
    hermitian_eig,
    partial_trace,
    purify,
    trace_distance,
    uhlmann_fidelity,
)

__all__ = [
    "BipartitionSpec",
    "BlochVector",
    "ChainModel",
    "FisherResult",
    "LqtsResult",
    "MeasurementModel",
    "OutcomeDistribution",
    "ThermalQubitChannel",
    "build_ising",
    "build_xxz",
    "channel_apply",
    "classical_fisher",
    "cramer_rao",
    "fisher_iid",
    "fisher_sequential",
    "lqts_closed_form",
    "lqts_fidelity_oracle",
    "sld_qfi",
    "thermal_qfi",
    "DensityMatrix",
    "GibbsEnsemble",
    "HermitianOperator",
    "PureState",
    "gibbs_state",
    "hermitian_eig",
    "partial_trace",
    "purify",
    "trace_distance",
    "uhlmann_fidelity",
    "__version__",
]
