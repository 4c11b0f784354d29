"""
Command line front end.

    equiaffine catalog
    equiaffine eval      --builtin paper-ex-ii [--format csv|json]
    equiaffine verify    --scenario my.json --param lambda=2
    equiaffine reparam   --builtin euclid-circle --t0 0
    equiaffine structure --builtin sphere-chart --point 1.2,0

Exit codes: 0 success, 1 verification failure, 2 input error, 3 computational
error.
"""
import argparse
import json
import logging
import sys

import numpy as np
import pandas as pd

import equiaffine.configs as conf
from equiaffine import catalog
from equiaffine.common import INPUT_ERRORS, EquiaffineError, ScenarioError, setup_logging
from equiaffine.curvature import reparametrize, sample_curve, samples_frame
from equiaffine.curve import NONDEGENERATE, SINGULAR
from equiaffine.manifold import structure_check
from equiaffine.oracle import cross_validate, summarize

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_COMPUTE = 3

STRUCTURE_RESIDUALS = ['j_square', 'omega_j', 'nabla_j', 'nabla_omega', 'metric_compat']


def _params(pairs):
    params = {}
    for pair in pairs or []:
        name, sep, value = pair.partition('=')
        if not sep or not name.strip():
            raise ScenarioError(f"--param expects name=value, got '{pair}'")
        try:
            params[name.strip()] = float(value)
        except ValueError:
            raise ScenarioError(f"--param {name.strip()} needs a number, got '{value}'") from None
    return params


def _point(text):
    try:
        x, y = (float(v) for v in text.split(','))
    except ValueError:
        raise ScenarioError(f"--point expects X,Y, got '{text}'") from None
    return x, y


def _scenario(args):
    overrides = _params(args.param)
    if args.scenario:
        return catalog.load_scenario(args.scenario, overrides, args.grid)
    if args.builtin:
        return catalog.builtin(args.builtin, overrides, args.grid)
    raise ScenarioError("one of --scenario or --builtin is required")


def _option(args, scenario, name, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    return scenario.options.get(name, default)


def _records(frame):
    # NaN becomes null, floats keep their shortest round-trip repr
    return frame.astype(object).where(frame.notna(), None).to_dict(orient='records')


def _write(frame, args, out):
    if args.format == 'json':
        out.write(json.dumps(_records(frame), default=lambda v: v.item()))
        out.write('\n')
    else:
        frame.to_csv(out, index=False, float_format=conf.float_format)


def _samples(args, scenario, flip_omega=False):
    return sample_curve(
        scenario.curve, scenario.metric, scenario.grid,
        order=_option(args, scenario, 'jet_order', conf.jet_order),
        threads=args.threads,
        threshold=_option(args, scenario, 'classify_threshold', None),
        relation_threshold=_option(args, scenario, 'relation_threshold', None),
        flip_omega=flip_omega,
    )


def cmd_catalog(args, out):
    for name, description in catalog.describe():
        out.write(f"{name:22s}{description}\n")
    return EXIT_OK


def cmd_eval(args, out):
    scenario = _scenario(args)
    _write(samples_frame(_samples(args, scenario)), args, out)
    return EXIT_OK


def _max(values):
    values = np.asarray(list(values), dtype=float)
    values = values[np.isfinite(values)]
    return float(values.max()) if values.size else 0.0


def cmd_verify(args, out):
    scenario = _scenario(args)
    samples = _samples(args, scenario, flip_omega=args.flip_omega)
    nondegenerate = [s for s in samples if s.classification == NONDEGENERATE]
    regular = [s for s in samples if s.classification != SINGULAR]

    relation = _max(s.relation_residual / max(1.0, abs(s.kappa_a_intrinsic)) for s in nondegenerate)
    ode = _max(s.ode_residual_norm for s in nondegenerate)
    formula = _max(s.formula_residual for s in nondegenerate)
    identity = _max(s.identity_residual for s in nondegenerate)
    frenet = _max(s.frenet_residual for s in regular)
    oracle = summarize(cross_validate(
        scenario.curve, scenario.metric, scenario.grid,
        order=_option(args, scenario, 'jet_order', conf.jet_order),
        tol=args.tol_oracle, threads=args.threads,
        threshold=_option(args, scenario, 'classify_threshold', None)))

    tol_relation = conf.tol_relation if args.tol_relation is None else args.tol_relation
    tol_ode = conf.tol_ode if args.tol_ode is None else args.tol_ode
    tol_frenet = conf.tol_frenet if args.tol_frenet is None else args.tol_frenet
    tol_oracle = conf.tol_oracle if args.tol_oracle is None else args.tol_oracle
    checks = [
        ('max_relation_residual', relation, tol_relation, relation < tol_relation),
        ('max_ode_residual', ode, tol_ode, ode < tol_ode),
        ('max_formula_residual', formula, conf.tol_formula, formula < conf.tol_formula),
        ('max_identity_residual', identity, conf.tol_identity, identity < conf.tol_identity),
        ('max_frenet_residual', frenet, tol_frenet, frenet < tol_frenet),
        ('oracle_max_rel_error', oracle.max_rel_error, tol_oracle, oracle.flagged == 0),
    ]
    out.write(f"scenario {scenario.name}: {len(samples)} samples, {len(nondegenerate)} nondegenerate\n")
    for name, value, tol, ok in checks:
        out.write(f"{name:24s}{value:.3e}  (tolerance {tol:.0e})  {'ok' if ok else 'FAIL'}\n")
    out.write(f"oracle_flagged          {oracle.flagged} of {oracle.rows}\n")
    passed = all(ok for *_, ok in checks)
    out.write("PASS\n" if passed else "FAIL\n")
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_reparam(args, out):
    scenario = _scenario(args)
    t0 = scenario.t0 if args.t0 is None else args.t0
    table = reparametrize(scenario.curve, scenario.metric, t0, scenario.grid,
                          tol=_option(args, scenario, 'quad_tol', conf.quad_tol),
                          threads=args.threads,
                          threshold=_option(args, scenario, 'classify_threshold', None))
    _write(table, args, out)
    return EXIT_OK


def cmd_structure(args, out):
    scenario = _scenario(args)
    points = [_point(p) for p in args.point] if args.point else scenario.points
    if not points:
        raise ScenarioError("no structure points: pass --point X,Y or list 'points' in the scenario")
    frame = pd.DataFrame([structure_check(scenario.metric, p)._asdict() for p in points])
    _write(frame, args, out)
    worst = float(frame[STRUCTURE_RESIDUALS].to_numpy().max())
    return EXIT_OK if worst < conf.tol_structure else EXIT_VERIFY


COMMANDS = {
    'catalog': cmd_catalog,
    'eval': cmd_eval,
    'verify': cmd_verify,
    'reparam': cmd_reparam,
    'structure': cmd_structure,
}


def build_parser():
    parser = argparse.ArgumentParser(prog='equiaffine', description="Frenet and equi-affine curvatures of curves "
                                                                     "in pseudo-Riemannian 2-manifolds")
    parser.add_argument('-v', '--verbose', action='store_true', help="debug logging")
    subparsers = parser.add_subparsers(dest='cmd', required=True)

    subparsers.add_parser('catalog', help="list the built-in scenarios")

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument('--scenario', metavar='FILE', help="scenario JSON file")
    source.add_argument('--builtin', metavar='NAME', help="built-in scenario name")
    common.add_argument('--param', action='append', metavar='NAME=VALUE', help="override a parameter")
    common.add_argument('--grid', type=int, metavar='N', help="number of grid points")
    common.add_argument('--format', choices=('csv', 'json'), default='csv')
    common.add_argument('--jet-order', dest='jet_order', type=int)
    common.add_argument('--t0', type=float, help="arclength origin (reparam)")
    common.add_argument('--tol-relation', dest='tol_relation', type=float)
    common.add_argument('--tol-ode', dest='tol_ode', type=float)
    common.add_argument('--threads', type=int, default=conf.cli_threads)
    common.add_argument('-v', '--verbose', action='store_true', default=argparse.SUPPRESS)

    subparsers.add_parser('eval', parents=[common], help="curvatures along the grid")

    verify = subparsers.add_parser('verify', parents=[common], help="check the curvature relation and residuals")
    verify.add_argument('--tol-frenet', dest='tol_frenet', type=float)
    verify.add_argument('--tol-oracle', dest='tol_oracle', type=float)
    verify.add_argument('--flip-omega', dest='flip_omega', action='store_true',
                        help="evaluate the relation with the wrong signature (debugging)")

    subparsers.add_parser('reparam', parents=[common], help="metric and equi-affine arclength")

    structure = subparsers.add_parser('structure', parents=[common], help="structure identities at points")
    structure.add_argument('--point', action='append', metavar='X,Y')
    return parser


def main(argv=None, out=None):
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    setup_logging('DEBUG' if getattr(args, 'verbose', False) else None)
    try:
        return COMMANDS[args.cmd](args, out)
    except INPUT_ERRORS as err:
        print(err, file=sys.stderr)
        return EXIT_INPUT
    except EquiaffineError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == '__main__':
    sys.exit(main())
