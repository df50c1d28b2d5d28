"""Python front end to the sigmalab core.

Typed objects (meshes, coefficients, solutions, layouts) come straight from
the extension module; descriptor-driven calls take and return plain dicts.
"""
import json

from ._sigmalab import (
    Coefficient,
    Domain,
    Error,
    JacobianReport,
    Layout,
    Mesh,
    Solution,
    bound_chain,
    canned_names,
    cell_energy,
    complex_dilatations,
    constant,
    ellipticity_constant,
    improved_bound,
    isotropic,
    jin_kazdan,
    jin_kazdan_map,
    meyers,
    meyers_map,
    smooth_random,
    solve,
    solve_map,
    translation_bound,
    triangulate,
    unit_square_mesh,
    wiener_bound,
    wood_map,
)
from . import _sigmalab

__all__ = [
    "Coefficient", "Domain", "Error", "JacobianReport", "Layout", "Mesh", "Solution",
    "bound_chain", "canned_config", "canned_names", "cell_energy", "character", "coefficient",
    "complex_dilatations", "constant", "domain", "ellipticity_constant", "improved_bound",
    "isotropic", "jin_kazdan", "jin_kazdan_map", "meyers", "meyers_map", "run_experiment",
    "smooth_random", "solve", "solve_map", "translation_bound", "triangulate",
    "unit_square_mesh", "wiener_bound", "wood_map",
]


def domain(descriptor):
    """Domain from a descriptor such as {"type": "ellipse", "a": 2, "b": 1}."""
    return Domain.from_json(json.dumps(descriptor))


def coefficient(descriptor):
    """Coefficient field from a descriptor such as {"family": "meyers", "alpha": 2}."""
    return Coefficient.from_json(json.dumps(descriptor))


def character(descriptor, directions=64):
    return json.loads(domain(descriptor).character(directions))


def canned_config(name):
    return json.loads(_sigmalab.canned_config(name))


def run_experiment(config, threads=1):
    """Runs a config dict (or a canned name) and returns the report as a dict."""
    if isinstance(config, str):
        config = {"canned": config}
    return json.loads(_sigmalab.run_experiment(json.dumps(config), threads))
