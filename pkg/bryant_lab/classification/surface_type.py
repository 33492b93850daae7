from dataclasses import dataclass, field

import numpy as np

GENUS_LETTERS = {0: 'O', 1: 'I', 2: 'II', 3: 'III'}
STATUSES = ('classified', 'existence', 'unknown', 'impossible')
REDUCIBILITY_TAGS = ('irreducible', 'H1', 'H3', 'unknown')


@dataclass(frozen=True)
class EndData:
    """One end: Hopf order d, conical order mu of the metric from g, mu_sharp from G."""
    d: int
    mu: float
    mu_sharp: float
    point: object = None

    def is_regular(self):
        return self.d >= -2

    def to_json(self):
        return {
            'd': self.d,
            'mu': _number(self.mu),
            'mu_sharp': _number(self.mu_sharp),
            'point': _point(self.point),
        }


@dataclass(frozen=True)
class DivisorData:
    genus: int
    ends: tuple
    umbilics: tuple = ()
    umbilic_points: tuple = ()
    totally_umbilic: bool = False

    @property
    def n(self):
        return len(self.ends)

    def orders(self):
        return tuple(e.d for e in self.ends)

    def total_order(self):
        return sum(e.d for e in self.ends) + sum(self.umbilics)

    def to_json(self):
        return {
            'genus': self.genus,
            'ends': [e.to_json() for e in self.ends],
            'umbilics': list(self.umbilics),
            'umbilic_points': [_point(p) for p in self.umbilic_points],
            'totally_umbilic': self.totally_umbilic,
            'type': SurfaceType(self.genus, self.orders()).label(),
        }


@dataclass(frozen=True)
class SurfaceType:
    genus: int
    orders: tuple
    mus: tuple = None
    mu_sharps: tuple = None
    umbilics: tuple = None
    reducibility: str = 'unknown'
    status: str = None
    note: str = ''
    rules: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'orders', tuple(int(d) for d in self.orders))
        if not self.orders:
            raise ValueError("A surface type needs at least one end")
        if self.reducibility not in REDUCIBILITY_TAGS:
            raise ValueError(f"Unsupported reducibility tag. Choose one of {REDUCIBILITY_TAGS}.")
        if self.status is not None and self.status not in STATUSES:
            raise ValueError(f"Unsupported status. Choose one of {STATUSES}.")

    @property
    def n(self):
        return len(self.orders)

    def key(self):
        return self.genus, tuple(sorted(self.orders, reverse=True))

    def label(self):
        letter = GENUS_LETTERS.get(self.genus, f"g{self.genus}")
        return f"{letter}({','.join(str(d) for d in self.orders)})"

    def with_status(self, status, note='', rules=()):
        return SurfaceType(self.genus, self.orders, self.mus, self.mu_sharps, self.umbilics,
                           self.reducibility, status, note, tuple(rules))

    def to_json(self):
        return {
            'type': self.label(),
            'genus': self.genus,
            'orders': list(self.orders),
            'status': self.status,
            'reducibility': self.reducibility,
            'note': self.note,
            'rules': list(self.rules),
        }

    @classmethod
    def from_divisor(cls, divisor):
        return cls(divisor.genus, divisor.orders(),
                   tuple(e.mu for e in divisor.ends), tuple(e.mu_sharp for e in divisor.ends),
                   tuple(divisor.umbilics))


def _number(x):
    if x is None:
        return None
    x = float(x)
    return 'inf' if np.isinf(x) else x


def _point(p):
    if p is None:
        return None
    p = complex(p)
    return 'inf' if not np.isfinite(abs(p)) else [p.real, p.imag]
