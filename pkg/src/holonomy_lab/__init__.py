"""Pulse-level simulator and analysis toolkit for superrobust
nonadiabatic holonomic control of a driven three-level transmon.

Modules: qmath (linear-algebra helpers), model (Hamiltonians and
noise), pulses (gate constructions), evolve (closed/open propagation),
holonomy (dynamical-phase diagnostics and robustness), tomography
(process tomography and readout), rb (randomized benchmarking),
twoqubit (dispersive cavity-transmon gate), cohfit (coherence fits and
error budgets), cli (command-line front end).
"""

__version__ = "0.1.0"
