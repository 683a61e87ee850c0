"""Registry of the built-in target functions.

Every function takes coordinate arrays ``x, y`` and returns an array of the
broadcast shape. Real functions are returned as real arrays; the solvers
embed them in the complex pipeline.
"""

from __future__ import annotations

import re
from typing import Callable

import numpy as np
from scipy import special

Function = Callable[[np.ndarray, np.ndarray], np.ndarray]


def sinxy(x, y):
    return np.sin(x * y) / (1.0 + y ** 2)


def u1(x, y):
    return np.sin(x * y / 2.0) / (1.0 + y ** 2 / 4.0)


def u2(x, y):
    return np.cos(1.45 * x) * np.sin(1.37 * y)


def f1(x, y):
    return special.erf(20.0 * (x - y))


def f2(x, y):
    return np.log(10.0 * (x + y)) / np.sqrt(x ** 2 + y)


def f3(x, y):
    return np.sin(20.0 * (x ** 2 + y ** 2))


def f4(x, y):
    return special.airy(-15.0 - 13.0 * (x + y))[0]


def sepexp(omega_x: float, omega_y: float) -> Function:
    """Separable plane wave ``exp(i omega_x x) exp(i omega_y y)``."""

    def f(x, y):
        return np.exp(1j * omega_x * np.asarray(x)) * np.exp(1j * omega_y * np.asarray(y))

    f.__name__ = f"sepexp({omega_x:g},{omega_y:g})"
    return f


REGISTRY: dict[str, Function] = {
    "sinxy": sinxy,
    "u1": u1,
    "u2": u2,
    "f1": f1,
    "f2": f2,
    "f3": f3,
    "f4": f4,
}

_SEPEXP = re.compile(r"^sepexp\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)$")


def get_function(name: str) -> Function:
    """Look up a function by name; ``sepexp(wx,wy)`` takes two numbers."""
    match = _SEPEXP.match(name.strip())
    if match:
        return sepexp(float(match.group(1)), float(match.group(2)))
    try:
        return REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(REGISTRY)) + ", sepexp(wx,wy)"
        raise ValueError(f"unknown function {name!r}; known: {known}") from None
