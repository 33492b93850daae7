import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import optimize

from bryant_lab.catalog.registry import build_family, get_descriptor
from bryant_lab.config.settings import period_config
from bryant_lab.curvature.total_curvature import ta_gauss_bonnet
from bryant_lab.errors import BryantLabError, NoRootInBracket
from bryant_lab.holonomy.gauss_maps import divisor_from_spec
from bryant_lab.holonomy.monodromy import conjugated, monodromy_rep
from bryant_lab.linalg.sl2c import form_signature, su2_defect, unitarizability

logger = logging.getLogger(__name__)

METHODS = ('golden', 'bisection', 'scan')
SWEEP_COLUMNS = ['value', 'defect', 'ta', 'ta_over_pi']


@dataclass
class PeriodProblem:
    """One free parameter of a catalog family, to be chosen so that the monodromy becomes unitarizable."""
    family: str
    free: str
    bracket: tuple
    params: dict = field(default_factory=dict)
    tol: float = period_config['tol']
    jobs: int = 1

    def __post_init__(self):
        low, high = (float(x) for x in self.bracket)
        if not low < high:
            raise NoRootInBracket(f"Bracket [{low}, {high}] is empty")
        self.bracket = (low, high)

    def spec_at(self, value):
        return build_family(self.family, {**self.params, self.free: value})

    def with_params(self, **changes):
        return PeriodProblem(self.family, self.free, self.bracket, {**self.params, **changes}, self.tol, self.jobs)


def defect(problem, value):
    """Unitarizability defect of the full monodromy representation at free parameter `value`."""
    rep = monodromy_rep(problem.spec_at(value), jobs=problem.jobs)
    return unitarizability(rep.matrices, tol=problem.tol).defect


def signed_surrogate(problem, value):
    rep = monodromy_rep(problem.spec_at(value), jobs=problem.jobs)
    return form_signature(rep.matrices)


def _total_curvature(spec):
    try:
        return ta_gauss_bonnet(divisor_from_spec(spec))
    except BryantLabError as error:
        logger.warning("no total curvature for %s: %s", spec.name, error)
        return float('nan')


class PeriodOptimiser:
    def __init__(self, problem, config=period_config):
        self.problem = problem
        self.config = config
        self.evals = 0
        self._cache = {}

    def evaluate(self, value):
        value = float(value)
        if value not in self._cache:
            if self.evals >= self.config['max_evals']:
                raise NoRootInBracket(f"No root found within {self.config['max_evals']} defect evaluations")
            self.evals += 1
            self._cache[value] = defect(self.problem, value)
            logger.debug("defect(%s = %.12g) = %.3e", self.problem.free, value, self._cache[value])
        return self._cache[value]

    def golden(self, bracket=None):
        low, high = bracket or self.problem.bracket
        result = optimize.minimize_scalar(self.evaluate, bounds=(low, high), method='bounded',
                                          options={'xatol': self.config['golden_xtol'],
                                                   'maxiter': self.config['max_evals']})
        return float(result.x), float(result.fun)

    def bisection(self):
        """Sign change of the invariant form's determinant; None when the bracket shows no change."""
        low, high = self.problem.bracket
        s_low, s_high = signed_surrogate(self.problem, low), signed_surrogate(self.problem, high)
        if np.sign(s_low) == np.sign(s_high):
            logger.info("surrogate keeps its sign on [%g, %g], falling back to minimisation", low, high)
            return None
        root = optimize.bisect(lambda v: signed_surrogate(self.problem, v), low, high,
                               xtol=self.config['golden_xtol'], maxiter=self.config['max_evals'])
        return float(root), self.evaluate(root)

    def scan(self):
        low, high = self.problem.bracket
        grid = np.linspace(low, high, self.config['scan_points'])
        values = [self.evaluate(v) for v in grid]
        best = int(np.argmin(values))
        window = (grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)])
        return self.golden(window)

    def optimise(self, method='golden'):
        if method == 'golden':
            return self.golden()
        elif method == 'bisection':
            return self.bisection() or self.golden()
        elif method == 'scan':
            return self.scan()
        else:
            raise ValueError(f"Unsupported method {method}. Choose one of {METHODS}.")


def _root_check(problem, root):
    spec = problem.spec_at(root)
    rep = monodromy_rep(spec, jobs=problem.jobs)
    unitary = unitarizability(rep.matrices, tol=problem.tol)
    if unitary.conjugator is None:
        return None, spec
    return max(su2_defect(M) for M in conjugated(rep, unitary.conjugator)), spec


def solve(problem, method='golden', config=period_config):
    """Parameter value in the bracket where the monodromy becomes unitarizable."""
    start = {**get_descriptor(problem.family).parameters, **problem.params}.get(problem.free)
    optimiser = PeriodOptimiser(problem, config)
    if start is not None and problem.spec_at(start).metadata.get('period_status') == 'closed':
        if optimiser.evaluate(start) <= problem.tol:
            root, value = float(start), optimiser.evaluate(start)
            method = 'closed'
        else:
            root, value = optimiser.optimise(method)
    else:
        root, value = optimiser.optimise(method)
    if value > problem.tol:
        raise NoRootInBracket(f"Smallest defect {value:.3e} on {problem.bracket} exceeds tolerance {problem.tol:g}")
    generator_defect, spec = _root_check(problem, root)
    ta = _total_curvature(spec)
    logger.info("period closed for %s at %s = %.12g (defect %.3e, %d evaluations)",
                problem.family, problem.free, root, value, optimiser.evals)
    return {
        'family': problem.family,
        'free': problem.free,
        'root': root,
        'defect': value,
        'evals': optimiser.evals,
        'method': method,
        'bracket': list(problem.bracket),
        'generator_su2_defect': generator_defect,
        'ta': ta,
        'ta_over_pi': ta / np.pi,
    }


def _sweep_row(problem, value, parameter, solve_free, method):
    if parameter is None or parameter == problem.free:
        spec = problem.spec_at(value)
        row = {'value': value, 'defect': defect(problem, value)}
    else:
        sub = problem.with_params(**{parameter: value})
        if solve_free:
            result = solve(sub, method=method)
            root, current = result['root'], result['defect']
        else:
            root = sub.params.get(sub.free, float(np.mean(sub.bracket)))
            current = defect(sub, root)
        spec = sub.spec_at(root)
        row = {'value': value, problem.free: root, 'defect': current}
    row['ta'] = _total_curvature(spec)
    row['ta_over_pi'] = row['ta'] / np.pi
    return row


def sweep(problem, grid, parameter=None, solve_free=False, method='golden'):
    """Defect and TA across a grid of the free parameter, or of another parameter with the free one solved."""
    grid = [float(v) for v in grid]
    columns = list(SWEEP_COLUMNS)
    if parameter is not None and parameter != problem.free:
        columns.insert(1, problem.free)
    if not grid:
        return pd.DataFrame(columns=columns)
    if problem.jobs > 1:
        rows = Parallel(n_jobs=problem.jobs)(
            delayed(_sweep_row)(problem, v, parameter, solve_free, method) for v in grid)
    else:
        rows = [_sweep_row(problem, v, parameter, solve_free, method) for v in grid]
    table = pd.DataFrame(rows, columns=columns)
    table.attrs['parameter'] = parameter or problem.free
    return table


def write_period_report(result, table=None, output_file="period_report.txt"):
    with open(output_file, "w") as file:
        file.write("Period Problem Report\n")
        file.write("=" * 80 + "\n\n")

        file.write(f"Family: {result['family']}\n")
        file.write(f"Free parameter: {result['free']} in {result['bracket']}\n")
        file.write("-" * 80 + "\n")
        file.write(f"Root: {result['root']:.12g}\n")
        file.write(f"Defect: {result['defect']:.3e} after {result['evals']} evaluations ({result['method']})\n")
        if result.get('generator_su2_defect') is not None:
            file.write(f"Largest SU(2) defect of the conjugated generators: {result['generator_su2_defect']:.3e}\n")
        file.write(f"TA / pi: {result['ta_over_pi']:.10g}\n\n")

        if table is not None and len(table):
            file.write(f"Sweep over {table.attrs.get('parameter', 'value')}\n")
            file.write("-" * 80 + "\n")
            file.write(table.to_string(index=False) + "\n\n")

        file.write("=" * 80 + "\n")
        file.write("End of Report\n")
