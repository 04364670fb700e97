"""Simplified trusted relay (STR) QKD toolkit.

Submodules: :mod:`strqkd.qubit` (exact quantum algebra and Holevo oracle),
:mod:`strqkd.relay` (protocol Monte Carlo), :mod:`strqkd.keyrate`
(asymptotic rate formulas), :mod:`strqkd.decoy` (weak-coherent physical
layer and intensity optimization), :mod:`strqkd.cli` (command-line surface).
"""

__version__ = "0.1.0"
