"""Numerical toolkit for ADHM data on the four-sphere and monad data on the
projective plane: stability checks, moment-map flows, rank-stabilising
homotopies and instanton field reconstruction."""
from .linalg_core import *  # noqa: F401,F403
from .adhm_s4 import *  # noqa: F401,F403
from .monad_p2 import *  # noqa: F401,F403
from .moment_flow import *  # noqa: F401,F403
from .stab_limit import *  # noqa: F401,F403
from .field_recon import *  # noqa: F401,F403
from .cli import RunConfig, ConfigError, main, run  # noqa: F401

__version__ = "0.1.0"
