"""Truncated Fourier series on the unit cell.

Coefficient fields are specified as a constant plus finitely many
cosine/sine modes with integer wave vectors.  This guarantees exact
periodicity on [0,1)^d and makes pointwise evaluation, and therefore
sampling at arbitrary rescaled macroscopic nodes x/eps, exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class FourierMode:
    """Single mode ``cos_c * cos(2 pi k.y) + sin_c * sin(2 pi k.y)``."""

    wave: tuple[int, ...]
    cos: float = 0.0
    sin: float = 0.0

    def to_dict(self):
        return {"wave": list(self.wave), "cos": self.cos, "sin": self.sin}

    @staticmethod
    def from_dict(d):
        return FourierMode(tuple(int(k) for k in d["wave"]),
                           float(d.get("cos", 0.0)), float(d.get("sin", 0.0)))


@dataclass(frozen=True)
class FourierField:
    """Scalar periodic field: constant term plus a list of modes."""

    constant: float = 0.0
    modes: tuple[FourierMode, ...] = field(default_factory=tuple)

    def __call__(self, points):
        """Evaluate at points of shape (d, ...); returns array of shape (...)."""
        points = np.asarray(points, dtype=float)
        out = np.full(points.shape[1:], self.constant, dtype=float)
        for m in self.modes:
            phase = TWO_PI * np.tensordot(np.asarray(m.wave, dtype=float),
                                          points, axes=(0, 0))
            if m.cos:
                out += m.cos * np.cos(phase)
            if m.sin:
                out += m.sin * np.sin(phase)
        return out

    @property
    def dim(self):
        return len(self.modes[0].wave) if self.modes else None

    def is_constant(self):
        return all(m.cos == 0.0 and m.sin == 0.0 for m in self.modes)

    def to_dict(self):
        return {"constant": self.constant,
                "modes": [m.to_dict() for m in self.modes]}

    @staticmethod
    def from_dict(d):
        return FourierField(float(d.get("constant", 0.0)),
                            tuple(FourierMode.from_dict(m)
                                  for m in d.get("modes", [])))


def constant_field(value):
    return FourierField(constant=float(value))


def mode_field(wave, cos=0.0, sin=0.0, constant=0.0):
    """Convenience constructor for a constant plus one mode."""
    return FourierField(constant=float(constant),
                        modes=(FourierMode(tuple(int(k) for k in wave),
                                           float(cos), float(sin)),))
