"""Free-electron quantum optics in hollow-core nanofibers.

Subpackages cover guided photonic modes, ponderomotive electron guiding,
electron-photon coupling and multimode Kerr dynamics.
"""
__version__ = "0.1.0"
