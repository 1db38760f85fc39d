"""Python access to the warpimm core: nullities, splittings and warped-product analysis."""

import json

from ._core import WarpimmError, commands, gauss_tensor, group_warping_samples, nullities
from ._core import run_json as _run_json

__all__ = ["WarpimmError", "commands", "gauss_tensor", "group_warping_samples", "nullities", "run"]


def run(command, arguments, config=None):
    """Run a harness command and return its report as a dict."""
    cfg = json.dumps(config) if config else ""
    return json.loads(_run_json(command, json.dumps(arguments), cfg))
