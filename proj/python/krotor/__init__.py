"""Triple-kicked 3D quantum rotor: Floquet bands, multi-gap topology and dynamics."""

from ._krotor import *  # noqa: F401,F403
from ._krotor import KrotorError, __doc__  # noqa: F401
