"""Kirkwood-Dirac quasiprobabilities of work for a driven qubit.

Submodules:

* ``qmath``          small dense linear algebra and spectral decompositions
* ``protocol``       the driven-qubit Hamiltonian, propagators and initial states
* ``kdq``            quasiprobability tables, moments, correlations, uncertainty relation
* ``interferometer`` gate-level ancilla circuit that measures the characteristic function
* ``nvmodel``        pulse-level electron/nuclear spin model of the same circuit
* ``recon``          sampled traces to work spectra and recovered quasiprobabilities
* ``cli``            the ``kdqlab`` command
"""
__version__ = "0.1.0"

from .errors import KdqError  # noqa: E402,F401
from .kdq import (  # noqa: E402,F401
    QuasiprobTable, char_function_analytic, correlation_report, kdq_table, tpm_table,
    work_moments,
)
from .protocol import DriveParams, make_initial_state, make_protocol  # noqa: E402,F401
