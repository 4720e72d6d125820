"""Inverse entropy of non-invertible dynamical systems."""

import json as _json

from ._iel import *  # noqa: F401,F403
from ._iel import __version__, run_config_json


def run_config(config):
    """Run an experiment config (dict or JSON text) and return the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(run_config_json(text))
