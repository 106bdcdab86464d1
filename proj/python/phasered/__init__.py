"""Standard and augmented phase reduction for planar limit-cycle oscillators.

Thin wrapper over the C++ core: model zoo, periodic-orbit shooting, PRC/IRC
adjoint solvers, Floquet data, brute-force oracles, and the validation
studies (homoclinic box fits, van der Pol relaxation sweep).
"""

try:  # installed wheel: extension lives inside the package
    from ._phasered import *  # noqa: F401,F403
except ImportError:  # build tree: extension next to the package dir
    from _phasered import *  # noqa: F401,F403
