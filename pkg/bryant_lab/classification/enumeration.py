import itertools
import logging
from dataclasses import dataclass

from bryant_lab.classification.surface_type import SurfaceType
from bryant_lab.errors import UnsupportedBound

logger = logging.getLogger(__name__)

MAX_BOUND = 4


@dataclass(frozen=True)
class StatusRow:
    reducibility: str
    status: str
    ta: str = ''
    note: str = ''
    ta_floor: float = 0.0
    ta_open: bool = False

    def fits(self, rho):
        limit = 2 * rho
        return self.ta_floor < limit or (self.ta_floor == limit and not self.ta_open)


def _row(reducibility, status, ta='', note='', floor=0.0, open_floor=False):
    return StatusRow(reducibility, status, ta, note, floor, open_floor)


# Known results for TA <= 4pi; floors are in units of pi.
FOUR_PI_ROWS = {
    'O(0)': (_row('H3', 'classified', '0', 'horosphere'),),
    'O(-4)': (_row('H3', 'classified', '4pi', 'Enneper cousins', 4),),
    'O(-2,-2)': (_row('H1', 'classified', '(0,4pi]', 'catenoid cousins'),
                 _row('H3', 'classified', '4pi', 'warped catenoid cousins with l = 1', 4)),
}

# Known results for TA <= 8pi.
EIGHT_PI_ROWS = {
    'O(0)': (_row('H3', 'classified', '0', 'horosphere'),),
    'O(-4)': (_row('H3', 'classified', '4pi', 'Enneper cousins', 4),),
    'O(-5)': (_row('H3', 'classified', '8pi', '', 8),),
    'O(-6)': (_row('H3', 'classified', '8pi', '', 8),),
    'O(-2,-2)': (_row('H1', 'classified', '(0,8pi]', 'catenoid cousins and their coverings'),
                 _row('H3', 'classified', '4pi, 8pi', 'warped catenoid cousins with l = 1, 2', 4)),
    'O(-1,-4)': (_row('H3', 'classified', '8pi', '', 8),),
    'O(-2,-4)': (_row('H3', 'classified', '8pi', '', 8),
                 _row('H1', 'existence', '(4pi,8pi)', 'one-parameter reducible examples', 4, True)),
    'O(-2,-5)': (_row('H1', 'existence', '8pi', 'TA >= 8pi by a cited bound', 8),),
    'O(-3,-3)': (_row('unknown', 'unknown'),),
    'O(-3,-4)': (_row('unknown', 'unknown', '8pi', 'TA >= 8pi by a cited bound', 8),),
    'O(0,-2,-2)': (_row('H1', 'classified', '(4pi,8pi)', '', 4, True),),
    'O(-1,-2,-3)': (_row('H1', 'unknown', '8pi', '', 8),),
    'O(-1,-1,-2)': (_row('H3', 'classified', '8pi', '', 8),),
    'O(-1,-2,-2)': (_row('H3', 'classified', '8pi', '', 8),
                    _row('H1', 'classified', '(4pi,8pi)', '', 4, True),
                    _row('H1', 'classified', '8pi', '', 8)),
    'O(-2,-2,-2)': (_row('unknown', 'existence', '(4pi,8pi]', 'trinoids', 4, True),),
    'O(-2,-2,-3)': (_row('unknown', 'unknown'),),
    'O(-2,-2,-4)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'O(-2,-3,-3)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'O(-2,-2,-2,-2)': (_row('unknown', 'existence', '', '4-noids'), _row('unknown', 'unknown')),
    'O(0,-2,-2,-2)': (_row('unknown', 'existence', '8pi', '', 8),),
    'O(-1,-2,-2,-2)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'O(1,-2,-2,-2)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'O(-2,-2,-2,-3)': (_row('unknown', 'unknown'),),
    'O(-2,-2,-2,-2,-2)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'I(-3)': (_row('unknown', 'unknown'),),
    'I(-4)': (_row('unknown', 'unknown'),),
    'I(-1,-1)': (_row('unknown', 'unknown', '8pi', '', 8),),
    'I(-2,-2)': (_row('unknown', 'unknown'),),
    'I(-2,-3)': (_row('unknown', 'unknown'),),
    'I(-2,-2,-2)': (_row('unknown', 'unknown'),),
}

# Reducibility of the surfaces known with dual total curvature TA(f#) <= 8pi. An H3-reducible
# surface has a well-defined dual with TA(f##) = TA(f), so its type must show up here.
DUAL_EIGHT_PI_ROWS = {
    'O(0)': ('H3',),
    'O(-4)': ('H3',),
    'O(-5)': ('H3',),
    'O(-6)': ('H3',),
    'O(-2,-2)': ('H1', 'H3'),
    'O(-1,-4)': ('H3',),
    'O(-2,-3)': ('H1',),
    'O(-2,-4)': ('H1', 'H3'),
    'O(-3,-3)': ('H1', 'H3'),
    'O(-1,-1,-2)': ('H3',),
    'O(-1,-2,-2)': ('H1', 'H3'),
    'O(-2,-2,-2)': ('irreducible', 'H1', 'H3'),
    'I(-3)': ('unknown',),
    'I(-4)': ('unknown',),
    'I(-1,-1)': ('unknown',),
    'I(-2,-2)': ('unknown',),
}

# Types the rules admit but a nonexistence argument rules out.
IMPOSSIBLE = {
    'O(-1,-3)': 'dual-classification: H3-reducible, so the dual surface would have small dual TA',
    'O(-2,-3)': 'dual-classification: the integral case as O(-1,-3), the H1 case by the d1 + d2 = -5 argument',
    'O(0,-2,-3)': 'residue-and-log-term: the residue and log-term conditions force a = b = q',
    'O(1,-2,-3)': 'log-term: the log-term coefficient at z = 1 is -(mu + 2)/3',
    'O(2,-2,-2,-2)': 'phi-bound: the sum of the three square roots stays above 1',
}

HOROSPHERE = SurfaceType(0, (0,), reducibility='H3')


def _rows_for(rho):
    return FOUR_PI_ROWS if rho <= 2 else EIGHT_PI_ROWS


@dataclass(frozen=True)
class ClassBounds:
    """Necessary conditions on a (genus, n) class of surfaces with TA <= 2 pi rho that are not totally umbilic."""
    genus: int
    n: int
    rho: int
    genus_ok: bool
    n_ok: bool
    sum_max: int
    sum_min_exclusive: int
    d_min_exclusive: int
    single_end: tuple = None
    all_minus_two: bool = False
    fixed_mu: bool = False

    @property
    def budget(self):
        """Upper bound for sum(mu_j - d_j)."""
        return self.rho - 2 * self.genus + 2

    def single_end_range(self):
        """(exclusive lower, inclusive upper) for d_1 when n = 1, else None."""
        return self.single_end

    def violations(self, orders):
        orders = tuple(orders)
        failed = []
        if not self.genus_ok:
            failed.append('lemma:genus')
        if not self.n_ok or len(orders) != self.n:
            failed.append('lemma:ends')
        total = sum(orders)
        if not self.sum_min_exclusive < total <= self.sum_max:
            failed.append('lemma:sum')
        if any(d <= self.d_min_exclusive for d in orders):
            failed.append('lemma:order')
        if self.single_end is not None:
            low, high = self.single_end
            if not low < orders[0] <= high:
                failed.append('lemma:single-end')
            if orders[0] == -2:
                failed.append('flux:single-end')
        if self.all_minus_two and any(d != -2 for d in orders):
            failed.append('lemma:all-regular')
        if self.fixed_mu and orders[0] < 0:
            failed.append('lemma:fixed-mu')
        return failed

    def admits(self, orders):
        return not self.violations(orders)

    def candidate_orders(self):
        """Non-increasing order tuples passing every bound."""
        if not (self.genus_ok and self.n_ok):
            return []
        low = self.d_min_exclusive + 1
        high = self.sum_max - (self.n - 1) * low
        out = []
        for combo in itertools.combinations_with_replacement(range(high, low - 1, -1), self.n):
            if self.admits(combo):
                out.append(tuple(combo))
        return out


def general_class_bounds(genus, n, rho):
    budget = rho - 2 * genus + 2
    single_end = None
    if n == 1:
        single_end = (2 * genus - rho - 3, 4 * genus - 4)
        if genus == 1:
            single_end = (-rho - 1, -3)
    return ClassBounds(
        genus=genus, n=n, rho=rho,
        genus_ok=2 * genus < rho + 1,
        n_ok=1 <= n < budget,
        sum_max=4 * genus - 4,
        sum_min_exclusive=-(budget + n),
        d_min_exclusive=n - rho + 2 * genus - 4,
        single_end=single_end,
        all_minus_two=2 <= n == rho + 1 - 2 * genus,
        fixed_mu=1 == n == rho + 1 - 2 * genus,
    )


def _integer_minimum(d):
    return max(2, -d)


def _non_integer_minimum(d):
    return max(1, -1 - d)


def _odd_end_requirement(genus, n):
    """(minimum of sum(mu - d), strict) from TA >= 4 pi m on the sphere with 2m + 1 ends."""
    if genus != 0 or n % 2 == 0:
        return None
    m = (n - 1) // 2
    return 2 * m + 2, n == 3


def integral_conical_orders(genus, orders, rho, bounds):
    """Integral mu_j realizable by a rational developing map of degree T/2."""
    budget = bounds.budget
    ranges = [range(max(0, d + 2), budget + d + 1) for d in orders]
    umbilic_total = 4 * genus - 4 - sum(orders)
    odd = _odd_end_requirement(genus, len(orders))
    for mus in itertools.product(*ranges):
        excess = sum(mu - d for mu, d in zip(mus, orders))
        total = 2 * genus - 2 + excess
        if total > rho or total % 2:
            continue
        degree = total // 2
        if degree < 1 or any(mu > degree - 1 for mu in mus):
            continue
        if degree < 2 and (umbilic_total > 0 or genus >= 1):
            continue
        if odd is not None and (excess < odd[0] or (odd[1] and excess == odd[0])):
            continue
        yield mus


def _pattern_feasible(genus, orders, pattern, rho, bounds):
    if not any(pattern):
        if genus == 0 or all(d >= -1 for d in orders):
            return next(integral_conical_orders(genus, orders, rho, bounds), None) is not None
        return sum(_integer_minimum(d) for d in orders) <= bounds.budget
    lower = sum(_non_integer_minimum(d) if non_integral else _integer_minimum(d)
                for d, non_integral in zip(orders, pattern))
    if lower >= bounds.budget:
        return False
    odd = _odd_end_requirement(genus, len(orders))
    if odd is not None:
        need, strict = odd
        return need < bounds.budget if strict else need <= bounds.budget
    return True


def _patterns(genus, orders):
    """Integral (False) or non-integral (True) mu_j; ends with d >= -1 have integral mu."""
    choices = [(False,) if d >= -1 else (False, True) for d in orders]
    for pattern in itertools.product(*choices):
        if genus == 0 and sum(pattern) == 1:
            continue
        yield pattern


def _named_rules(genus, orders):
    """Flux and branch-point results cited for genus one with two ends."""
    if genus != 1 or len(orders) != 2:
        return []
    regular = [d >= -2 for d in orders]
    if all(regular):
        if orders[0] != orders[1] or orders[0] not in (-2, -1, 0):
            return ['genus-one:two-regular-ends']
        if orders[0] == 0:
            return ['fact:e']
        return []
    if any(regular) and max(orders) >= -1:
        return ['genus-one:irregular-end']
    return []


def assess_type(genus, orders, rho):
    """Feasible integrality patterns of a candidate and the rules it breaks."""
    orders = tuple(sorted(orders, reverse=True))
    bounds = general_class_bounds(genus, len(orders), rho)
    failed = bounds.violations(orders) + _named_rules(genus, orders)
    if failed:
        return [], failed
    feasible = [pattern for pattern in _patterns(genus, orders)
                if _pattern_feasible(genus, orders, pattern, rho, bounds)]
    if not feasible:
        failed.append('facts:conical-orders')
    return feasible, failed


def _inferred_reducibility(genus, patterns):
    if genus != 0:
        return 'unknown'
    tags = {'H3' if sum(p) == 0 else 'H1' if sum(p) == 2 else 'unknown' for p in patterns}
    return tags.pop() if len(tags) == 1 else 'unknown'


def _applied_rules(genus, orders):
    rules = ['lemma:bounds', 'facts:conical-orders']
    if len(orders) == 1 and genus == 0:
        rules.append('flux:single-end')
    if genus == 0:
        rules.append('tear-drop')
        if len(orders) % 2:
            rules.append('odd-ends')
    if genus == 1 and len(orders) == 2:
        rules.append('genus-one:two-ends')
    if all(d == -2 for d in orders) and len(orders) >= 3:
        rules.append('lemma:all-regular')
    return rules


def _emit(genus, orders, patterns, rho):
    base = SurfaceType(genus, orders, reducibility=_inferred_reducibility(genus, patterns))
    label = base.label()
    rules = _applied_rules(genus, orders)
    if label in IMPOSSIBLE:
        return [base.with_status('impossible', IMPOSSIBLE[label], rules + [IMPOSSIBLE[label].split(':')[0]])]
    rows = [row for row in _rows_for(rho).get(label, ()) if row.fits(rho)]
    if not rows:
        logger.warning("type %s passes every rule but has no known status", label)
        return [base.with_status('unknown', 'no tabulated result', rules)]
    out = []
    for row in rows:
        note = '; '.join(part for part in (f"TA {row.ta}" if row.ta else '', row.note) if part)
        typed = SurfaceType(genus, orders, reducibility=row.reducibility)
        out.append(typed.with_status(row.status, note, rules))
    return out


def enumerate_types(rho, genus=None, ends=None, include_excluded=False):
    """Every surface type with TA <= 2 pi rho allowed by the facts, the class bounds and the cited rules.

    Types a nonexistence argument rules out pass the bounds too; they are dropped unless
    include_excluded is set, in which case they come back with status 'impossible'.
    """
    if rho <= 0 or rho > MAX_BOUND:
        raise UnsupportedBound(f"TA bound 2*{rho}*pi is outside the analysed range (0, {2 * MAX_BOUND}pi]")
    found = []
    if genus in (None, 0) and ends in (None, 1):
        row = _rows_for(rho)['O(0)'][0]
        found.append(HOROSPHERE.with_status(row.status, f"TA {row.ta}; {row.note}", ['totally-umbilic']))
    max_genus = (rho + 1) // 2
    for g in range(max_genus + 1):
        if genus is not None and g != genus:
            continue
        n_max = rho - 2 * g + 1
        for n in range(1, n_max + 1):
            if ends is not None and n != ends:
                continue
            bounds = general_class_bounds(g, n, rho)
            for orders in bounds.candidate_orders():
                patterns, failed = assess_type(g, orders, rho)
                if failed:
                    logger.debug("%s rejected by %s", SurfaceType(g, orders).label(), failed)
                    continue
                rows = _emit(g, orders, patterns, rho)
                if not include_excluded and rows[0].status == 'impossible':
                    logger.debug("%s excluded by %s", rows[0].label(), rows[0].note)
                    continue
                found.extend(rows)
    found.sort(key=lambda t: (t.genus, t.n, tuple(-d for d in t.orders)))
    logger.info("enumerated %d type rows for TA <= %dpi", len(found), 2 * rho)
    return found


def type_labels(types):
    return sorted({t.label() for t in types})
