"""Underwater imaging simulation and active perception.

Thin wrapper around the compiled extension. The bundled water-type and
phase-function tables resolve through ``default_data_dir()``; packaged
installs carry them next to this file, source builds use the repository
``data/`` directory compiled into the extension. ``AQUAPERC_DATA``
overrides both.
"""

import os as _os

_packaged_data = _os.path.join(_os.path.dirname(__file__), "data")
if "AQUAPERC_DATA" not in _os.environ and _os.path.isdir(_packaged_data):
    _os.environ["AQUAPERC_DATA"] = _packaged_data

from ._aquaperc import *  # noqa: F401,F403
from ._aquaperc import (  # noqa: F401
    CalibProfiles,
    MlpModel,
    PhaseSpec,
    SceneConfig,
)

__version__ = "0.1.0"
