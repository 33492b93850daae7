import logging

import numpy as np

from bryant_lab.classification.facts import is_integral
from bryant_lab.expressions.branch_expr import BranchExpr, same_point
from bryant_lab.expressions.calculus import residue

logger = logging.getLogger(__name__)

RESIDUE_TOL = 1e-8
REDUCIBILITY_OUTCOMES = ('H3', 'H1', 'impossible', 'irreducible-possible')


def reducibility_classify(orders):
    """Reducibility of a conformal metric of curvature 1 on the sphere with conical orders beta_j.

    All integral: H3. Exactly two non-integral: H1. One non-integral: no such metric.
    Three or more: nothing is decided.
    """
    non_integral = sum(1 for beta in orders if not is_integral(beta))
    if non_integral == 0:
        return 'H3'
    if non_integral == 1:
        return 'impossible'
    if non_integral == 2:
        return 'H1'
    return 'irreducible-possible'


def residue_condition_sum(alphas, points, apexes, l):
    """sum_j alpha_j / (a_l - p_j) - 2 sum_{k != l} 1 / (a_l - a_k); zero iff dg has no residue at a_l."""
    a = complex(apexes[l])
    total = sum(alpha / (a - complex(p)) for alpha, p in zip(alphas, points))
    total -= 2 * sum(1 / (a - complex(b)) for k, b in enumerate(apexes) if k != l)
    return complex(total)


def _check_distinct(points, apexes):
    everything = list(points) + list(apexes)
    for i, p in enumerate(everything):
        for q in everything[i + 1:]:
            if same_point(complex(p), complex(q)):
                raise ValueError(f"Points and apexes must be distinct, {p} repeats")


def canonical_dg(points, alphas, apexes, t=1.0, beta_infinity=None):
    """dg = t prod (z - p_j)^alpha_j / prod (z - a_k)^2 with the apex residues and the exponent at infinity.

    Report only: nothing raises when a residue is nonzero or infinity does not match.
    """
    if len(points) != len(alphas):
        raise ValueError("One exponent per point is needed")
    _check_distinct(points, apexes)
    factors = [(complex(p), float(alpha)) for p, alpha in zip(points, alphas)]
    factors += [(complex(a), -2.0) for a in apexes]
    dg = BranchExpr.monomial(complex(t), factors)

    residues = []
    for l, a in enumerate(apexes):
        value, error = residue(dg, complex(a))
        closed = residue_condition_sum(alphas, points, apexes, l)
        residues.append({'apex': complex(a), 'residue': value, 'error': error, 'closed_form': closed})
    max_residue = max((abs(r['residue']) for r in residues), default=0.0)

    infinity_exponent = -float(sum(alphas)) + 2 * len(apexes) - 2
    if beta_infinity is None:
        consistent = None
    else:
        consistent = bool(np.isclose(infinity_exponent, beta_infinity, atol=1e-9)
                          or np.isclose(infinity_exponent, -beta_infinity - 2, atol=1e-9))
    logger.debug("canonical dg with %d apexes: max residue %.3e, exponent at infinity %.6g",
                 len(apexes), max_residue, infinity_exponent)
    return {
        'dg': dg,
        'residues': residues,
        'max_residue': float(max_residue),
        'residue_free': bool(max_residue <= RESIDUE_TOL * max(1.0, abs(t))),
        'infinity_exponent': infinity_exponent,
        'infinity_consistent': consistent,
    }
