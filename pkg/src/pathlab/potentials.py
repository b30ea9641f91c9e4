"""Closed-form static potentials with analytic derivatives.

A :class:`PotentialSpec` is a sum of terms from a few families. Terms are
also exported as a float array ``(n_terms, 4)`` of ``[code, p1, p2, p3]`` so
the compiled kernels can evaluate them without Python objects.
"""

import re
from dataclasses import dataclass

import numpy as np

from ._accel import njit
from .errors import InvalidInput

__all__ = ["PotentialSpec", "potential_derivative", "potential_derivative_jit"]

ZERO, HARMONIC, COSINE, LORENTZIAN, GAUSSIAN = 0, 1, 2, 3, 4

_FAMILIES = {
    "zero": (ZERO, 0),
    "harmonic": (HARMONIC, 1),
    "cosine": (COSINE, 3),
    "lorentzian_bump": (LORENTZIAN, 2),
    "gaussian_bump": (GAUSSIAN, 2),
}
_NAMES = {code: name for name, (code, _) in _FAMILIES.items()}
_DEFAULTS = {
    "harmonic": (1.0,),
    "cosine": (0.3, 1.0, 0.0),
    "lorentzian_bump": (1.0, 1.0),
    "gaussian_bump": (1.0, 1.0),
}


def potential_derivative(q, terms, order):
    """``d^order V / dq^order`` at ``q`` for the packed ``terms`` array.

    Written with plain numpy operations so that the same source runs on
    arrays (numpy backend) and compiles for scalars (numba backend).
    """
    out = 0.0 * q
    for m in range(terms.shape[0]):
        code = int(terms[m, 0])
        a = terms[m, 1]
        b = terms[m, 2]
        c = terms[m, 3]
        if code == HARMONIC:
            w2 = a * a
            if order == 0:
                out = out + 0.5 * w2 * q * q
            elif order == 1:
                out = out + w2 * q
            elif order == 2:
                out = out + w2 + 0.0 * q
        elif code == COSINE:
            ph = b * q + c + 0.5 * np.pi * order
            out = out + a * b**order * np.cos(ph)
        elif code == LORENTZIAN:
            d = 1.0 + b * q * q
            if order == 0:
                out = out + a / d
            elif order == 1:
                out = out - 2.0 * a * b * q / d**2
            elif order == 2:
                out = out + a * (6.0 * b * b * q * q - 2.0 * b) / d**3
            elif order == 3:
                out = out + 24.0 * a * b * b * q * (1.0 - b * q * q) / d**4
            elif order == 4:
                bq2 = b * q * q
                out = out + 24.0 * a * b * b * (5.0 * bq2 * bq2 - 10.0 * bq2 + 1.0) / d**5
        elif code == GAUSSIAN:
            e = np.exp(-b * q * q)
            if order == 0:
                out = out + a * e
            elif order == 1:
                out = out - 2.0 * a * b * q * e
            elif order == 2:
                out = out + a * (4.0 * b * b * q * q - 2.0 * b) * e
            elif order == 3:
                out = out + a * (12.0 * b * b * q - 8.0 * b**3 * q**3) * e
            elif order == 4:
                out = out + a * (16.0 * b**4 * q**4 - 48.0 * b**3 * q * q + 12.0 * b * b) * e
    return out


potential_derivative_jit = njit(cache=True, inline="always")(potential_derivative)


@dataclass(frozen=True)
class PotentialSpec:
    """Sum of closed-form static potential terms.

    ``terms`` is a tuple of ``(family, params)`` pairs with families
    ``harmonic(omega)`` = omega^2 x^2/2, ``cosine(a, k, phi)`` = a cos(k x + phi),
    ``lorentzian_bump(a, b)`` = a/(1 + b x^2) and ``gaussian_bump(a, b)`` =
    a exp(-b x^2). The empty sum is the zero potential.
    """

    terms: tuple = ()

    def __post_init__(self):
        clean = []
        for name, params in self.terms:
            if name not in _FAMILIES:
                raise InvalidInput(f"unknown potential family {name!r}")
            code, arity = _FAMILIES[name]
            params = tuple(float(p) for p in params)
            if len(params) != arity:
                raise InvalidInput(f"{name} takes {arity} parameters, got {len(params)}")
            if not all(np.isfinite(params)):
                raise InvalidInput(f"{name} parameters must be finite")
            if name == "zero":
                continue
            if name in ("lorentzian_bump", "gaussian_bump") and params[1] <= 0:
                raise InvalidInput(f"{name} width parameter must be positive")
            clean.append((name, params))
        object.__setattr__(self, "terms", tuple(clean))

    # constructors
    @classmethod
    def zero(cls):
        return cls(())

    @classmethod
    def harmonic(cls, omega=1.0):
        return cls((("harmonic", (omega,)),))

    @classmethod
    def cosine(cls, amplitude=0.3, frequency=1.0, phase=0.0):
        return cls((("cosine", (amplitude, frequency, phase)),))

    @classmethod
    def lorentzian_bump(cls, a=1.0, b=1.0):
        return cls((("lorentzian_bump", (a, b)),))

    @classmethod
    def gaussian_bump(cls, a=1.0, b=1.0):
        return cls((("gaussian_bump", (a, b)),))

    @classmethod
    def parse(cls, text):
        """Parse ``"harmonic(1)+cosine(0.3,1,0)"`` style strings."""
        text = text.replace(" ", "")
        if not text:
            raise InvalidInput("empty potential string")
        terms = []
        for part in text.split("+"):
            m = re.fullmatch(r"([a-z_]+)(?:\(([^()]*)\))?", part)
            if m is None:
                raise InvalidInput(f"cannot parse potential term {part!r}")
            name, args = m.group(1), m.group(2)
            if name == "cos":
                name = "cosine"
            if name not in _FAMILIES:
                raise InvalidInput(f"unknown potential family {name!r}")
            if args is None or args == "":
                params = _DEFAULTS.get(name, ())
            else:
                try:
                    params = tuple(float(a) for a in args.split(","))
                except ValueError:
                    raise InvalidInput(f"non-numeric parameter in {part!r}") from None
            terms.append((name, params))
        return cls(tuple(terms))

    def __add__(self, other):
        return PotentialSpec(self.terms + other.terms)

    def __str__(self):
        if not self.terms:
            return "zero"
        return "+".join(
            f"{name}({','.join(repr(p) for p in params)})" for name, params in self.terms
        )

    # structure
    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_bounded(self):
        return all(name != "harmonic" for name, _ in self.terms)

    @property
    def quadratic_coefficient(self):
        """Coefficient A of A x^2/2 contributed by harmonic terms."""
        return sum(p[0] ** 2 for name, p in self.terms if name == "harmonic")

    def bounded_part(self):
        return PotentialSpec(tuple(t for t in self.terms if t[0] != "harmonic"))

    def quadratic_part(self):
        return PotentialSpec(tuple(t for t in self.terms if t[0] == "harmonic"))

    @property
    def packed(self):
        """Terms packed as a float array for the compiled kernels."""
        rows = []
        for name, params in self.terms:
            code = _FAMILIES[name][0]
            p = list(params) + [0.0] * (3 - len(params))
            rows.append([float(code)] + p)
        if not rows:
            rows = [[float(ZERO), 0.0, 0.0, 0.0]]
        return np.array(rows, dtype=float)

    # evaluation
    def derivative(self, x, order=0):
        if order not in (0, 1, 2, 3, 4):
            raise InvalidInput("derivatives are available up to order 4")
        x = np.asarray(x, dtype=float)
        return potential_derivative(x, self.packed, order) + np.zeros_like(x)

    def __call__(self, x):
        return self.derivative(x, 0)

    def sup_bound(self):
        """Upper bound of |V| for bounded potentials (inf if harmonic terms are present)."""
        if not self.is_bounded:
            return np.inf
        return float(sum(abs(p[0]) for _, p in self.terms))
