"""Coined discrete-time quantum walks for quantum state transfer.

Position-dependent coins on an even cycle emulate continuous-time walks on
a chain; the package builds those coin programs, runs them and analyses
their spectra and transfer quality.
"""

__version__ = "0.1.0"

from qwalk.ctqw import (  # noqa: E402
    ChainHamiltonian,
    SpinChainSystem,
    christandl_hamiltonian,
    ctqw_evolve,
    spin_oracle_evolve,
    uniform_chain_hamiltonian,
)
from qwalk.protocols import (  # noqa: E402
    ConversionResult,
    ballistic_program,
    christandl_program,
    ctqw_to_dtqw,
    weak_coupling_program,
)
from qwalk.walk import CoinProgram, CoinSpec, WalkState, evolve  # noqa: E402

__all__ = [
    "__version__",
    "ChainHamiltonian",
    "SpinChainSystem",
    "christandl_hamiltonian",
    "ctqw_evolve",
    "spin_oracle_evolve",
    "uniform_chain_hamiltonian",
    "ConversionResult",
    "ballistic_program",
    "christandl_program",
    "ctqw_to_dtqw",
    "weak_coupling_program",
    "CoinProgram",
    "CoinSpec",
    "WalkState",
    "evolve",
]
