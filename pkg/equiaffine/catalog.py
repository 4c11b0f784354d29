"""
Scenario files: a metric, a curve, parameter values and the evaluation grid.

Scenarios are JSON documents; the built-in ones live in data/catalog/.
"""
import json
import logging
from collections import namedtuple
from pathlib import Path

import numpy as np

import equiaffine.configs as conf
from equiaffine.common import ScenarioError
from equiaffine.curve import curve_spec
from equiaffine.manifold import metric_spec

logger = logging.getLogger(__name__)

Scenario = namedtuple('Scenario', ['name', 'description', 'metric', 'curve', 'grid', 't0',
                                   'options', 'points', 'parameters'])

OPTIONS = ('jet_order', 'classify_threshold', 'relation_threshold', 'quad_tol')


def builtin_names():
    return sorted(p.stem for p in conf.path_catalog.glob('*.json'))


def builtin(name, overrides=None, grid_count=None):
    """Load a scenario of the built-in catalog by name"""
    path = conf.path_catalog / f"{name}.json"
    if not path.exists():
        raise ScenarioError(f"unknown built-in scenario '{name}', choose from {', '.join(builtin_names())}")
    return load_scenario(path, overrides, grid_count)


def describe():
    """(name, description) for every built-in scenario"""
    listing = []
    for name in builtin_names():
        with open(conf.path_catalog / f"{name}.json") as f:
            listing.append((name, json.load(f).get('description', '')))
    return listing


def _read(source):
    if isinstance(source, dict):
        return source
    path = Path(source)
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as err:
        raise ScenarioError(f"cannot read scenario {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ScenarioError(f"{path} is not valid JSON: {err}") from None


def _field(doc, key, kind, where='scenario'):
    try:
        value = doc[key]
    except (KeyError, TypeError):
        raise ScenarioError(f"{where} is missing '{key}'") from None
    if not isinstance(value, kind):
        raise ScenarioError(f"{where} field '{key}' has the wrong type")
    return value


def _number(value, what):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{what} must be a number, got {value!r}") from None
    if not np.isfinite(number):
        raise ScenarioError(f"{what} must be finite, got {value!r}")
    return number


def make_grid(grid, domain, grid_count=None):
    """
    Parameter values of a scenario grid.

    ``{"t": [...]}`` is taken as is. ``{"count": n}`` places n interior points
    evenly inside the open domain; with ``"span": [c, d]`` they go on the
    closed interval [c, d] instead, endpoints included.

    Args:
        grid (dict): grid section of a scenario
        domain (tuple): open curve domain (a, b)
        grid_count (int, optional): overrides the count

    Returns:
        numpy.ndarray
    """
    a, b = domain
    if 't' in grid and grid_count is None:
        values = np.array([_number(t, 'grid value') for t in grid['t']])
    else:
        count = int(grid_count or grid.get('count', conf.grid_count))
        if count < 1:
            raise ScenarioError(f"grid count must be positive, got {count}")
        if 'span' in grid:
            c, d = (_number(v, 'grid span') for v in grid['span'])
            values = np.linspace(c, d, count) if count > 1 else np.array([(c + d) / 2])
        else:
            values = a + (b - a) * np.arange(1, count + 1) / (count + 1)
    if values.size == 0:
        raise ScenarioError("empty grid")
    outside = values[(values <= a) | (values >= b)]
    if outside.size:
        raise ScenarioError(f"grid values outside the open domain ({a}, {b}): {outside[:3].tolist()}")
    return values


def load_scenario(source, overrides=None, grid_count=None):
    """
    Parse and validate a scenario.

    Args:
        source (str, Path or dict): JSON file or already parsed document
        overrides (dict, optional): parameter values replacing the file's
        grid_count (int, optional): replaces the grid by this many points

    Raises:
        ScenarioError: for structural problems
        LexError, ExpressionSyntaxError, UnboundIdentifier: for the expressions

    Returns:
        Scenario
    """
    doc = _read(source)
    if not isinstance(doc, dict):
        raise ScenarioError("a scenario is a JSON object")

    parameters = {k: _number(v, f"parameter '{k}'") for k, v in doc.get('parameters', {}).items()}
    for k, v in (overrides or {}).items():
        parameters[k] = _number(v, f"parameter '{k}'")

    m = _field(doc, 'metric', dict)
    metric = metric_spec(*(str(_field(m, k, str, 'metric')) for k in ('g11', 'g12', 'g22')), parameters)

    c = _field(doc, 'curve', dict)
    domain = _field(c, 'domain', list, 'curve')
    if len(domain) != 2:
        raise ScenarioError("curve domain is a pair [a, b]")
    domain = tuple(_number(v, 'domain endpoint') for v in domain)
    curve = curve_spec(_field(c, 'x', str, 'curve'), _field(c, 'y', str, 'curve'), domain, parameters)

    grid = make_grid(doc.get('grid', {}), curve.domain, grid_count)

    options = dict(doc.get('options', {}))
    unknown = set(options) - set(OPTIONS)
    if unknown:
        raise ScenarioError(f"unknown options: {', '.join(sorted(unknown))}")

    t0 = _number(doc.get('t0', grid[0]), 't0')
    if not domain[0] < t0 < domain[1]:
        raise ScenarioError(f"t0 = {t0} outside the curve domain")

    points = [tuple(_number(v, 'point coordinate') for v in p) for p in doc.get('points', [])]
    if any(len(p) != 2 for p in points):
        raise ScenarioError("structure points are pairs [x, y]")

    name = doc.get('name', Path(source).stem if not isinstance(source, dict) else 'scenario')
    logger.debug(f"loaded scenario {name} with {grid.size} grid points")
    return Scenario(name, doc.get('description', ''), metric, curve, grid, t0, options, points, parameters)
