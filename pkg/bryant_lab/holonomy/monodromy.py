import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from bryant_lab.errors import LoopPlanningFailed
from bryant_lab.expressions.calculus import is_infinity
from bryant_lab.holonomy.lift import LiftIntegrator
from bryant_lab.holonomy.paths import plan_loop, relation_order
from bryant_lab.linalg.sl2c import IDENTITY, matrix_to_json, projective_distance, su2_defect, unitarizability

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class MonodromyRep:
    """Generators M_j = F(base)^-1 F_continued(base), one per puncture loop.

    composition is 'left' when a loop followed by another gives M2 M1 (data acting as dF = A F)
    and 'right' when it gives M1 M2 (dF = F A).
    """
    loops: list
    matrices: list
    basepoint: complex
    composition: str = 'left'
    relation: list = field(default_factory=list)

    def by_puncture(self, index):
        return self.matrices[self.loops.index(index)]

    def relation_product(self):
        product = IDENTITY.copy()
        for index in self.relation:
            M = self.by_puncture(index)
            product = M @ product if self.composition == 'left' else product @ M
        return product

    def product_defect(self):
        distance, sign = projective_distance(self.relation_product(), IDENTITY)
        return distance, sign

    def to_json(self):
        distance, sign = self.product_defect()
        return {
            'loops': list(self.loops),
            'matrices': [matrix_to_json(M) for M in self.matrices],
            'su2_defects': [su2_defect(M) for M in self.matrices],
            'product_defect': distance,
            'product_sign': sign,
            'relation_order': list(self.relation),
        }


def loop_monodromy(spec, path):
    integrator = LiftIntegrator(spec)
    F0 = spec.initial_frame
    result = integrator.transport(path, F0)
    return np.linalg.solve(F0, result.frame)


def monodromy(spec, puncture_index, base=None, radius=None):
    """Monodromy of the lift around one puncture, from a positively oriented loop."""
    if puncture_index < 0 or puncture_index >= len(spec.punctures):
        raise LoopPlanningFailed(f"No puncture with index {puncture_index}")
    path = plan_loop(spec, puncture_index, base=base, radius=radius)
    M = loop_monodromy(spec, path)
    logger.debug("monodromy around %s: %s", spec.punctures[puncture_index], M)
    return M


def monodromy_rep(spec, jobs=1):
    indices = list(range(len(spec.punctures)))
    if jobs == 1 or len(indices) == 1:
        matrices = [monodromy(spec, i) for i in indices]
    else:
        matrices = Parallel(n_jobs=jobs)(delayed(monodromy)(spec, i) for i in indices)
    composition = 'left' if spec.mode == 'dual' else 'right'
    return MonodromyRep(indices, matrices, spec.basepoint, composition, relation_order(spec))


def unitarizability_of(spec, jobs=1, tol=None):
    rep = monodromy_rep(spec, jobs=jobs)
    return unitarizability(rep.matrices, tol=tol), rep


def conjugated(rep, b):
    """Generators of the lift F b^-1 (dual data) or b F (secondary data), i.e. b M b^-1."""
    b_inv = np.linalg.inv(b)
    return [b @ M @ b_inv for M in rep.matrices]


def single_valued_report(spec, puncture_index):
    """Change of dF F^-1 and of F^-1 dF across one loop, measured at the loop base."""
    integrator = LiftIntegrator(spec)
    path = plan_loop(spec, puncture_index)
    start = integrator.transport(path[:1], spec.initial_frame)
    end = integrator.transport(path, spec.initial_frame)
    A0 = integrator.coefficient(path[0], start.state.arg_map(), g=start.g)
    A1 = integrator.coefficient(path[0], end.state.arg_map(), g=end.g)
    F0, F1 = start.frame, end.frame
    if spec.mode == 'dual':
        left0, left1 = A0, A1
        right0, right1 = np.linalg.solve(F0, A0 @ F0), np.linalg.solve(F1, A1 @ F1)
    else:
        left0, left1 = F0 @ A0 @ np.linalg.inv(F0), F1 @ A1 @ np.linalg.inv(F1)
        right0, right1 = A0, A1
    return {
        'dF_Finv_change': float(np.linalg.norm(left1 - left0)),
        'Finv_dF_change': float(np.linalg.norm(right1 - right0)),
        'puncture': 'inf' if is_infinity(spec.punctures[puncture_index]) else str(spec.punctures[puncture_index]),
    }


def unitarized_frame(spec, conjugator):
    """Initial frame whose continuation has SU(2) monodromy, so that f = F F* is single valued."""
    F0 = spec.initial_frame
    if conjugator is None:
        return F0
    return F0 @ np.linalg.inv(conjugator) if spec.mode == 'dual' else conjugator @ F0
