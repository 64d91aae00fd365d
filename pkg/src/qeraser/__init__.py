"""Simulation and analysis toolkit for a free-electron quantum eraser.

Submodules
----------
qmat          small dense complex-matrix kernel (basis order LH, LV, RH, RV)
model         joint electron-photon state, photon measurements, screen patterns
entanglement  concurrence, negativity, Bell witness, Pauli tomography
coincidence   event simulation, coincidence matching, estimation from events
cli           command-line front end (``qeraser``)
"""
from . import coincidence, entanglement, model, qmat
from .entanglement import (
    EntanglementReport,
    PauliCorrelators,
    bell_fidelity,
    concurrence,
    entanglement_report,
    eraser_criterion,
    negativity,
    pauli_correlators,
    reconstruct_state,
)
from .model import (
    EraserParams,
    ScreenGeometry,
    build_joint_state,
    condition_on_photon,
    default_geometry,
    electron_state,
    fringe_visibility,
    intensity_pattern,
    photon_projector,
    waveplate_unitary,
)
from .qmat import DensityMatrix, validate_density

__version__ = "0.1.0"
