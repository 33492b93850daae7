import logging
from dataclasses import dataclass, field

from bryant_lab.catalog import families
from bryant_lab.classification.surface_type import SurfaceType
from bryant_lab.errors import BadParameter, UnknownFamily

logger = logging.getLogger(__name__)

# Default parameters for each constructor
family_parameters = {
    "horosphere": {"a": 1.0},
    "enneper": {"a": 1.0, "convention": "closed_form"},
    "enneper_dual": {"a": 1.0},
    "catenoid_cousin": {"l": 0.8, "delta": 1, "b": 0.0},
    "warped_catenoid_cousin": {"l": 1, "delta": 2, "b": 0.5},
    "trinoid": {"mu1": -0.3, "mu2": -0.3, "mu3": -0.3},
    "fournoid": {"mu": -0.5, "a": 0.8, "p": 1.4},
    "o0_2_2": {"mu": -0.5, "m": 1, "t": 1.0},
    "o_1_2_2": {"mu": -0.5, "m": 2, "t": 1.0},
    "o_1_2_2_a": {"case": 1, "mu": -0.5, "m": 3, "root": 1},
    "o_2_4": {"mu": -0.5, "t": 1.0},
    "o_2_5": {"mu": -0.5, "t": 1.0},
    "o_2_2_2_0": {"mu": -0.75, "q": None, "t": 1.0, "root": 0},
    "genus_one_catenoid_cousin": {},
    "genus_one_trinoid": {},
}


@dataclass(frozen=True)
class FamilyDescriptor:
    name: str
    parameters: dict
    constraints: str
    expected_type: SurfaceType
    expected_ta: str
    constructor: object = None
    closed_form_lift: object = None
    anchors: tuple = field(default_factory=tuple)

    @property
    def available(self):
        return self.constructor is not None

    def to_json(self):
        return {
            'name': self.name,
            'parameters': dict(self.parameters),
            'constraints': self.constraints,
            'expected_type': self.expected_type.label(),
            'expected_ta': self.expected_ta,
            'constructor': self.constructor.__name__ if self.available else 'unavailable',
            'closed_form_lift': self.closed_form_lift.__name__ if self.closed_form_lift else None,
            'anchors': list(self.anchors),
        }


def _descriptor(name, constraints, genus, orders, expected_ta, constructor=None, lift=None, anchors=()):
    return FamilyDescriptor(name, family_parameters[name], constraints, SurfaceType(genus, orders),
                            expected_ta, constructor, lift, tuple(anchors))


_DESCRIPTORS = (
    _descriptor("horosphere", "a != 0", 0, (0,), "0", families.make_horosphere, families.horosphere_lift,
                ["horosphere: TA and dual TA vanish"]),
    _descriptor("enneper", "a != 0", 0, (-4,), "4 pi", families.make_enneper, families.enneper_lift,
                ["Enneper cousin: TA = 4 pi, dual TA infinite"]),
    _descriptor("enneper_dual", "a != 0", 0, (-4,), "infinite (dual TA = 4 pi)", families.make_enneper_dual,
                families.enneper_dual_lift, ["dual of the Enneper cousin"]),
    _descriptor("catenoid_cousin", "l > 0, delta positive integer, l != delta, b = 0", 0, (-2, -2), "4 pi l",
                families.make_catenoid_cousin, families.catenoid_lift, ["catenoid cousins and delta-fold covers"]),
    _descriptor("warped_catenoid_cousin", "l positive integer, delta positive integer, l != delta, b > 0", 0,
                (-2, -2), "4 pi l", families.make_catenoid_cousin, families.catenoid_lift,
                ["warped catenoid cousins"]),
    _descriptor("trinoid", "mu_j > -1, strict angle condition, distinct umbilics", 0, (-2, -2, -2),
                "2 pi (4 + mu1 + mu2 + mu3)", families.make_trinoid, anchors=["irreducible trinoids"]),
    _descriptor("fournoid", "0 < a < 1, mu > -1, p real not in {0, 1}", 0, (-2, -2, -2, -2), "4 pi (2 mu + 3)",
                families.make_fournoid, anchors=["4-noids, period problem solved in p"]),
    _descriptor("o0_2_2", "-1 < mu < 0, m positive integer", 0, (0, -2, -2), "4 pi (mu + 2)",
                families.make_o0_2_2, anchors=["one parameter family of type O(0,-2,-2)"]),
    _descriptor("o_1_2_2", "-1 < mu < 0, m >= 2 integer", 0, (-1, -2, -2), "4 pi (mu + 2)",
                families.make_o_1_2_2, anchors=["H1-reducible O(-1,-2,-2) with TA < 8 pi"]),
    _descriptor("o_1_2_2_a", "-1 < mu < 0, case 1: m >= 3, case 2: m >= 1", 0, (-1, -2, -2), "8 pi",
                families.make_o_1_2_2_a, anchors=["H1-reducible O(-1,-2,-2) with TA = 8 pi"]),
    _descriptor("o_2_4", "-1 < mu < 0", 0, (-2, -4), "8 pi", families.make_o_2_4,
                anchors=["example of type O(-2,-4)"]),
    _descriptor("o_2_5", "mu > -1, mu not in {0, 2}", 0, (-2, -5), "2 pi (5 + mu1 + mu2)", families.make_o_2_5,
                anchors=["example of type O(-2,-5)"]),
    _descriptor("o_2_2_2_0", "-1 < mu < -1/2, q^2 a root of the consistency cubic", 0, (-2, -2, -2, 0), "8 pi",
                families.make_o_2_2_2_0, anchors=["example of type O(-2,-2,-2,0)"]),
    _descriptor("genus_one_catenoid_cousin", "construction needs genus-one machinery", 1, (-2, -2), "unknown",
                anchors=["genus one catenoid cousins of type I(-2,-2)"]),
    _descriptor("genus_one_trinoid", "construction needs genus-one machinery", 1, (-2, -2, -2), "unknown",
                anchors=["genus one trinoids of type I(-2,-2,-2)"]),
)


def list_families():
    return list(_DESCRIPTORS)


def get_descriptor(name):
    for descriptor in _DESCRIPTORS:
        if descriptor.name == name:
            return descriptor
    raise UnknownFamily(f"Family {name} not recognized. Available families: {list(family_parameters)}")


def _coerce(value, default):
    if not isinstance(value, str):
        return value
    if value.lower() in ('none', 'null'):
        return None
    if isinstance(default, bool):
        return value.lower() in ('1', 'true', 'yes')
    if isinstance(default, int):
        number = float(value)
        return int(number) if number.is_integer() else number
    if isinstance(default, float) or default is None:
        try:
            return float(value)
        except ValueError:
            return complex(value.replace(' ', ''))
    return value


def build_family(name, custom_params=None):
    """SurfaceSpec for a catalog family; string parameter values are coerced to the defaults' types."""
    descriptor = get_descriptor(name)
    if not descriptor.available:
        raise UnknownFamily(f"Family {name} has no constructor (genus one surfaces are listed only)")
    params = dict(descriptor.parameters)
    for key, value in (custom_params or {}).items():
        if key not in params:
            raise BadParameter(f"Family {name} has no parameter {key}. Parameters: {list(params)}")
        params[key] = _coerce(value, params[key])
    logger.info("building %s with %s", name, params)
    return descriptor.constructor(**params)
