import argparse
import json
import logging
import math
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import cpu_count

from bryant_lab import acceptance
from bryant_lab.catalog.registry import build_family, get_descriptor, list_families
from bryant_lab.classification.enumeration import enumerate_types, type_labels
from bryant_lab.classification.facts import facts_check
from bryant_lab.classification.nonexistence import PROPOSITIONS, verify_nonexistence
from bryant_lab.config.settings import (BRYANT_LAB_JOBS, BRYANT_LAB_LOG_LEVEL, DEFAULT_SEED, DET_TOL,
                                        JSON_SIGNIFICANT_DIGITS, VERSION, integrator_config, mesh_config,
                                        period_config, quadrature_config)
from bryant_lab.curvature.quadrature import ta_quadrature
from bryant_lab.curvature.total_curvature import inequality_report, ta_gauss_bonnet
from bryant_lab.errors import BryantLabError
from bryant_lab.experimentation.period_optimiser import (METHODS, PeriodProblem, solve, sweep,
                                                         write_period_report)
from bryant_lab.holonomy.gauss_maps import divisor_from_spec
from bryant_lab.holonomy.monodromy import monodromy_rep
from bryant_lab.holonomy.surface_spec import SurfaceSpec
from bryant_lab.linalg.sl2c import is_simultaneously_diagonalizable, matrix_to_json, unitarizability
from bryant_lab.meshing.mesh import FORMATS, MeshGrid, export_sample, sample_surface

logger = logging.getLogger(__name__)

COMMANDS = ('catalog', 'build', 'monodromy', 'curvature', 'divisor', 'classify', 'verify', 'solve-period',
            'sweep', 'mesh', 'selftest')
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')
GLOBAL_FLAGS = ('config', 'jobs', 'log_level', 'seed')
# Checked after parsing so that a TOML file can supply them.
REQUIRED = {
    'build': ('family',),
    'verify': ('prop',),
    'solve-period': ('family', 'free', 'bracket'),
    'sweep': ('family', 'free', 'bracket', 'grid'),
    'mesh': ('out',),
}
NON_JSON_OUT = ('sweep', 'mesh')


@dataclass
class RunConfig:
    """Everything that determines the output of one run; embedded in every artifact."""
    command: str
    family: str = None
    spec_path: str = None
    params: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = DEFAULT_SEED
    jobs: int = 1

    def __post_init__(self):
        for name, value in self.tolerances.items():
            if not value > 0:
                raise BryantLabError(f"Tolerance {name} must be positive, got {value}")


# --- JSON artifacts ---------------------------------------------------------------------

def _canonical(obj, digits=JSON_SIGNIFICANT_DIGITS):
    if isinstance(obj, dict):
        return {str(k): _canonical(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v, digits) for v in obj]
    if isinstance(obj, np.ndarray):
        return _canonical(obj.tolist(), digits)
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_canonical(obj.real, digits), _canonical(obj.imag, digits)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return 'nan'
        if math.isinf(x):
            return 'inf' if x > 0 else '-inf'
        return float(f"{x:.{digits}g}")
    if obj is None or isinstance(obj, str):
        return obj
    if hasattr(obj, 'to_json'):
        return _canonical(obj.to_json(), digits)
    return str(obj)


def canonical_json(obj):
    return json.dumps(_canonical(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _with_pi(value):
    return {'value': value, 'over_pi': value / np.pi}


def _tolerances(args):
    return {
        'det': DET_TOL,
        'integrator_rtol': integrator_config['rtol'],
        'integrator_atol': integrator_config['atol'],
        'period': getattr(args, 'tol', None) or period_config['tol'],
        'quadrature_rel': quadrature_config['rel_tol'],
    }


def _artifact(args, result, spec=None):
    run = RunConfig(
        command=args.command,
        family=getattr(args, 'family', None),
        spec_path=getattr(args, 'spec', None),
        params=_parse_params(getattr(args, 'param', None)),
        tolerances=_tolerances(args),
        outputs={'out': getattr(args, 'out', None), 'report': getattr(args, 'report', None)},
        seed=args.seed,
        jobs=args.jobs,
    )
    anchors = []
    if spec is not None:
        anchors = spec.metadata.get('anchors', [])
    elif run.family:
        anchors = list(get_descriptor(run.family).anchors)
    return {'tool': 'bryant_lab', 'version': VERSION, 'run': asdict(run), 'anchors': anchors, 'result': result}


def _emit(payload, out=None):
    """JSON to stdout, and to `out` when given."""
    text = canonical_json(payload)
    if out:
        Path(out).write_text(text)
        logger.info("wrote %s", out)
    sys.stdout.write(text)


# --- argument helpers -------------------------------------------------------------------

def _parse_params(items):
    params = {}
    for item in items or ():
        key, sep, value = item.partition('=')
        if not sep or not key:
            raise argparse.ArgumentTypeError(f"Parameters are written key=value, got {item!r}")
        params[key.strip()] = value.strip()
    return params


def _param(text):
    _parse_params([text])
    return text


def _bracket(text):
    try:
        low, high = (float(x) for x in text.split(':'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"A bracket is written low:high, got {text!r}") from None
    return low, high


def _grid(text):
    """start:stop:count, or a comma separated list of values."""
    try:
        if ':' in text:
            start, stop, count = text.split(':')
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"A grid is written start:stop:count or v1,v2,..., got {text!r}") from None


def _resolution(text):
    try:
        nu, nv = (int(x) for x in text.lower().split('x'))
    except ValueError:
        raise argparse.ArgumentTypeError(f"A resolution is written NxM, got {text!r}") from None
    if nu < 2 or nv < 2:
        raise argparse.ArgumentTypeError("A mesh needs at least 2 x 2 nodes")
    return nu, nv


def _ta_bound(text):
    """'8pi', '8*pi' or a value in radians, returned as rho with TA <= 2 pi rho."""
    cleaned = text.replace(' ', '').replace('*', '').lower()
    try:
        ta = float(cleaned[:-2] or 1) * np.pi if cleaned.endswith('pi') else float(cleaned)
    except ValueError:
        raise argparse.ArgumentTypeError(f"A TA bound is written like 8pi, got {text!r}") from None
    rho = ta / (2 * np.pi)
    if not np.isclose(rho, round(rho)):
        raise argparse.ArgumentTypeError(f"The TA bound must be a multiple of 2 pi, got {text!r}")
    return int(round(rho))


def _chart(text):
    if text == 'center':
        return ('center', None)
    kind, _, index = text.partition(':')
    if kind != 'end' or not index.isdigit():
        raise argparse.ArgumentTypeError(f"A chart is written end:k or center, got {text!r}")
    return ('end', int(index))


def _load_spec(args):
    if getattr(args, 'spec', None):
        payload = json.loads(Path(args.spec).read_text())
        payload = payload.get('result', payload)
        return SurfaceSpec.from_json(payload.get('spec', payload))
    if getattr(args, 'family', None):
        return build_family(args.family, _parse_params(args.param))
    raise BryantLabError("Give a surface with --spec FILE or --family NAME")


# --- subcommands ---------------------------------------------------------------------------

def run_catalog(args):
    return _artifact(args, {'families': [d.to_json() for d in list_families()]})


def run_build(args):
    spec = build_family(args.family, _parse_params(args.param))
    return _artifact(args, {'spec': spec.to_json()}, spec)


def run_monodromy(args):
    spec = _load_spec(args)
    rep = monodromy_rep(spec, jobs=args.jobs)
    unitary = unitarizability(rep.matrices)
    result = rep.to_json()
    result.update({
        'unitarizability_defect': unitary.defect,
        'unitarizable': unitary.conjugator is not None,
        'conjugator': None if unitary.conjugator is None else matrix_to_json(unitary.conjugator),
        'reducibility': is_simultaneously_diagonalizable(rep.matrices),
    })
    return _artifact(args, result, spec)


def run_curvature(args):
    spec = _load_spec(args)
    result = {}
    which = ('primal', 'dual') if args.which == 'both' else (args.which,)
    if args.method in ('gauss-bonnet', 'both'):
        divisor = divisor_from_spec(spec)
        result['gauss_bonnet'] = {w: _with_pi(ta_gauss_bonnet(divisor, w)) for w in which}
    if args.method in ('quadrature', 'both'):
        result['quadrature'] = {w: ta_quadrature(spec, w, jobs=args.jobs) for w in which}
    return _artifact(args, result, spec)


def run_divisor(args):
    spec = _load_spec(args)
    divisor = divisor_from_spec(spec)
    ta, ta_dual = ta_gauss_bonnet(divisor), ta_gauss_bonnet(divisor, 'dual')
    result = {
        'divisor': divisor.to_json(),
        'ta': _with_pi(ta),
        'ta_dual': _with_pi(ta_dual),
        'facts_violated': facts_check(divisor),
        'inequalities': inequality_report(divisor, ta, ta_dual),
    }
    return _artifact(args, result, spec)


def run_classify(args):
    every = enumerate_types(args.ta_max, genus=args.genus, ends=args.ends, include_excluded=True)
    types = [t for t in every if t.status != 'impossible']
    excluded = [t for t in every if t.status == 'impossible']
    result = {'ta_max': _with_pi(2 * np.pi * args.ta_max), 'types': [t.to_json() for t in types],
              'labels': type_labels(types), 'excluded': [t.to_json() for t in excluded]}
    return _artifact(args, result)


def run_verify(args):
    return _artifact(args, verify_nonexistence(args.prop, grid=args.grid, jobs=args.jobs))


def _problem(args):
    return PeriodProblem(args.family, args.free, args.bracket, _parse_params(args.param),
                         args.tol or period_config['tol'], args.jobs)


def run_solve_period(args):
    result = solve(_problem(args), method=args.method)
    if args.report:
        write_period_report(result, output_file=args.report)
    return _artifact(args, result)


def run_sweep(args):
    table = sweep(_problem(args), args.grid, parameter=args.over, solve_free=args.solve, method=args.method)
    if args.out:
        table.to_csv(args.out, index=False)
        logger.info("wrote %d sweep rows to %s", len(table), args.out)
    return _artifact(args, {'parameter': args.over or args.free, 'rows': table.to_dict(orient='records'),
                            'csv': args.out})


def run_mesh(args):
    spec = _load_spec(args)
    kind, index = args.chart
    grid = MeshGrid.central(spec, args.res) if kind == 'center' else MeshGrid.for_end(spec, index, args.res)
    sample = sample_surface(spec, grid, override=args.override, jobs=args.jobs)
    path, vertices, faces = export_sample(sample, args.out, args.format)
    result = {
        'mesh': path,
        'format': args.format or Path(path).suffix.lstrip('.'),
        'chart': grid.chart,
        'grid': grid.params,
        'resolution': list(grid.shape),
        'vertices': vertices,
        'faces': faces,
        'period_closed': sample.period_closed,
        'seam_defect': sample.seam_defect,
        'max_edge_distance': sample.max_edge_distance,
    }
    return _artifact(args, result, spec)


def run_selftest(args):
    summary = acceptance.run_checks(full=args.full, seed=args.seed)
    return _artifact(args, summary)


HANDLERS = {
    'catalog': run_catalog,
    'build': run_build,
    'monodromy': run_monodromy,
    'curvature': run_curvature,
    'divisor': run_divisor,
    'classify': run_classify,
    'verify': run_verify,
    'solve-period': run_solve_period,
    'sweep': run_sweep,
    'mesh': run_mesh,
    'selftest': run_selftest,
}


# --- parser -----------------------------------------------------------------------------------

def _surface_arguments(parser):
    source = parser.add_mutually_exclusive_group()
    source.add_argument('--spec', help='spec JSON written by `build`')
    source.add_argument('--family', help='catalog family to build on the fly')
    parser.add_argument('--param', action='append', type=_param, default=[], metavar='KEY=VALUE')


def _period_arguments(parser):
    parser.add_argument('--family')
    parser.add_argument('--free', help='parameter solved for')
    parser.add_argument('--bracket', type=_bracket, metavar='LOW:HIGH')
    parser.add_argument('--param', action='append', type=_param, default=[], metavar='KEY=VALUE')
    parser.add_argument('--tol', type=float, default=None)
    parser.add_argument('--method', choices=METHODS, default='golden')


def _build_parser():
    parser = argparse.ArgumentParser(prog='bryant_lab',
                                     description='CMC-1 surfaces in hyperbolic space: lifts, monodromy, '
                                                 'total curvature and classification of small TA.')
    parser.add_argument('--config', help='TOML file; keys mirror the long flag names')
    parser.add_argument('--jobs', type=int, default=None, help='worker processes (BRYANT_LAB_JOBS overrides)')
    parser.add_argument('--log-level', choices=LOG_LEVELS, default=None)
    parser.add_argument('--seed', type=int, default=DEFAULT_SEED)
    parser.add_argument('--version', action='version', version=f"bryant_lab {VERSION}")
    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    commands.add_parser('catalog', help='list the surface families')

    build = commands.add_parser('build', help='write the spec of a catalog family')
    build.add_argument('--family')
    build.add_argument('--param', action='append', type=_param, default=[], metavar='KEY=VALUE')

    sub = commands.add_parser('monodromy', help='monodromy generators and their unitarizability')
    _surface_arguments(sub)

    sub = commands.add_parser('curvature', help='total absolute curvature')
    _surface_arguments(sub)
    sub.add_argument('--method', choices=('gauss-bonnet', 'quadrature', 'both'), default='gauss-bonnet')
    sub.add_argument('--which', choices=('primal', 'dual', 'both'), default='both')

    sub = commands.add_parser('divisor', help='end data, umbilics, both TA values and the inequality checks')
    _surface_arguments(sub)

    sub = commands.add_parser('classify', help='surface types allowed below a TA bound')
    sub.add_argument('--ta-max', type=_ta_bound, default=4, metavar='TA', help='e.g. 4pi or 8pi')
    sub.add_argument('--genus', type=int, default=None)
    sub.add_argument('--ends', type=int, default=None)

    sub = commands.add_parser('verify', help='run a nonexistence argument')
    sub.add_argument('--prop', metavar='TYPE',
                     help=f"one of {', '.join(PROPOSITIONS)}")
    sub.add_argument('--grid', type=int, default=None)

    sub = commands.add_parser('solve-period', help='close the period problem in one free parameter')
    _period_arguments(sub)
    sub.add_argument('--report', help='plain text report file')

    sub = commands.add_parser('sweep', help='defect and TA across a parameter grid')
    _period_arguments(sub)
    sub.add_argument('--over', default=None, help='swept parameter (default: the free one)')
    sub.add_argument('--grid', type=_grid, metavar='START:STOP:COUNT')
    sub.add_argument('--solve', action='store_true', help='solve the free parameter at every grid value')
    sub.add_argument('--out', help='CSV file for the sweep table')

    sub = commands.add_parser('mesh', help='sample the surface in the Poincare ball and export it')
    _surface_arguments(sub)
    sub.add_argument('--chart', type=_chart, default=('center', None), metavar='end:K|center')
    sub.add_argument('--res', type=_resolution, default=tuple(mesh_config['default_res']), metavar='NxM')
    sub.add_argument('--format', choices=FORMATS, default=None)
    sub.add_argument('--out', help='OBJ or PLY file')
    sub.add_argument('--override', action='store_true', help='sample even when the period problem is open')

    sub = commands.add_parser('selftest', help='run the acceptance checks')
    sub.add_argument('--full', action='store_true', help='include the slow checks')

    for name, sub in commands.choices.items():
        if name not in NON_JSON_OUT:
            sub.add_argument('--out', help='also write the JSON artifact to this file')
    return parser, commands


def _config_defaults(path):
    """Flag defaults from a TOML file: top-level keys are global, tables are per command."""
    with open(path, 'rb') as file:
        data = tomllib.load(file)
    top = {k.replace('-', '_'): v for k, v in data.items() if not isinstance(v, dict)}
    per_command = {name: {k.replace('-', '_'): v for k, v in table.items()}
                   for name, table in data.items() if isinstance(table, dict)}
    for values in (top, *per_command.values()):
        if isinstance(values.get('param'), dict):
            values['param'] = [f"{k}={v}" for k, v in values['param'].items()]
        if isinstance(values.get('bracket'), list):
            values['bracket'] = tuple(float(x) for x in values['bracket'])
        if isinstance(values.get('res'), list):
            values['res'] = tuple(int(x) for x in values['res'])
        for key in ('ta_max', 'chart'):
            if isinstance(values.get(key), str):
                values[key] = (_ta_bound if key == 'ta_max' else _chart)(values[key])
        if isinstance(values.get('grid'), str):
            values['grid'] = _grid(values['grid'])
    return top, per_command


def _parse_args(argv):
    parser, commands = _build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)
    if known.config:
        try:
            top, per_command = _config_defaults(known.config)
        except (OSError, tomllib.TOMLDecodeError, argparse.ArgumentTypeError) as error:
            parser.error(f"cannot read config {known.config}: {error}")
        unknown = set(per_command) - set(COMMANDS)
        if unknown:
            parser.error(f"unknown command table(s) in {known.config}: {sorted(unknown)}")
        parser.set_defaults(**{k: v for k, v in top.items() if k in GLOBAL_FLAGS})
        shared = {k: v for k, v in top.items() if k not in GLOBAL_FLAGS}
        for name, sub in commands.choices.items():
            table = {k: v for k, v in per_command.get(name, {}).items() if k not in GLOBAL_FLAGS}
            sub.set_defaults(**{**shared, **table})
    args = parser.parse_args(argv)
    missing = [f"--{name.replace('_', '-')}" for name in REQUIRED.get(args.command, ())
               if getattr(args, name, None) in (None, [], '')]
    if missing:
        commands.choices[args.command].error(f"the following arguments are required: {', '.join(missing)}")
    if BRYANT_LAB_JOBS:
        args.jobs = int(BRYANT_LAB_JOBS)
    elif args.jobs is None:
        args.jobs = cpu_count()
    if args.jobs < 1:
        parser.error("--jobs must be at least 1")
    return args


def dispatch(argv=None):
    """Run one subcommand; 0 on success, 1 on a domain error, 2 on a usage error."""
    try:
        args = _parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)
    logging.basicConfig(level=args.log_level or BRYANT_LAB_LOG_LEVEL,
                        format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    logger.info("running %s with %d job(s)", args.command, args.jobs)
    try:
        payload = HANDLERS[args.command](args)
    except BryantLabError as error:
        logger.error("%s failed: %s", args.command, error)
        sys.stdout.write(canonical_json({'error': type(error).__name__, 'message': str(error)}))
        return 1
    except (ValueError, OSError) as error:
        sys.stderr.write(f"bryant_lab {args.command}: error: {error}\n")
        return 2
    _emit(payload, None if args.command in NON_JSON_OUT else args.out)
    if args.command == 'selftest' and payload['result']['failed']:
        return 1
    return 0


def main(argv=None) -> int:
    return dispatch(argv)


if __name__ == '__main__':
    raise SystemExit(main())
