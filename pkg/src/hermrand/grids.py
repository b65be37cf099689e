"""Tensor evaluation and integration grids on R^d.

Two modes are provided.  ``tensor-gauss-hermite`` grids are products of
(possibly rescaled) Gauss-Hermite rules; they integrate L^2 quantities and
even powers of Hermite expansions exactly.  ``uniform-truncated`` grids are
products of uniform rules cut off at a radius beyond the classically allowed
region; they are used for sup-norms and for non-polynomial integrands.
"""

from dataclasses import dataclass
import math

import numpy as np

from .hermite import gauss_hermite_rule, scaled_gauss_hermite_rule, uniform_rule, ORDER_MAX

# Radius factor over sqrt(lambda_max); Hermite functions of energy lambda are
# super-polynomially small beyond |x|^2 >= (1 + eps0) lambda.
CUTOFF_FACTOR = 1.5
# Absolute margin past the turning point; matters only at low energies,
# where the factor alone would clip the Gaussian tail.
CUTOFF_MARGIN = 6.0
# Default spacing factor over 1/sqrt(lambda_max) for sup-norm grids.
SUP_SPACING = 1.0


@dataclass(frozen=True)
class QuadratureGrid:
    """Product grid in dimension ``d`` built from one rule per axis.

    Attributes
    ----------
    d : int
    rules : tuple of QuadratureRule1D
    mode : str
        ``"tensor-gauss-hermite"`` or ``"uniform-truncated"``.
    r_cut : float
        Largest |x_i| covered by the grid.
    design_degree : int
        Highest 1-D Hermite degree the grid is meant to resolve.
    """

    d: int
    rules: tuple
    mode: str
    r_cut: float
    design_degree: int

    @property
    def axes(self):
        return [rule.nodes for rule in self.rules]

    @property
    def shape(self):
        return tuple(rule.nodes.size for rule in self.rules)

    @property
    def size(self):
        return int(np.prod(self.shape))

    def integrate(self, values):
        """Integrate values sampled on the grid (shape ``self.shape``)."""
        out = values
        for rule in reversed(self.rules):
            out = np.tensordot(out, rule.unit_weights, axes=([out.ndim - 1], [0]))
        return out

    def radius_squared(self):
        total = np.zeros(self.shape)
        for i, axis in enumerate(self.axes):
            shape = [1] * self.d
            shape[i] = axis.size
            total = total + axis.reshape(shape) ** 2
        return total

    def japanese(self, power=1.0):
        """<x>^power = (1 + |x|^2)^(power/2) on the grid."""
        if power == 0:
            return np.ones(self.shape)
        return (1.0 + self.radius_squared()) ** (0.5 * power)

    def points(self):
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def gauss_hermite_grid(d, order, scale=1.0, design_degree=None):
    """Tensor Gauss-Hermite grid; ``scale`` rescales nodes for exp(-scale x^2) decay."""
    if scale == 1.0:
        rule = gauss_hermite_rule(order)
    else:
        rule = scaled_gauss_hermite_rule(order, scale)
    if design_degree is None:
        design_degree = max(0, order - 1)
    r_cut = float(np.max(np.abs(rule.nodes)))
    return QuadratureGrid(d, (rule,) * d, "tensor-gauss-hermite", r_cut, int(design_degree))


def uniform_grid(d, radius, spacing, design_degree):
    rule = uniform_rule(radius, spacing)
    return QuadratureGrid(d, (rule,) * d, "uniform-truncated", float(rule.nodes[-1]), int(design_degree))


def exact_power_grid(d, max_degree, power):
    """Gauss-Hermite grid integrating |u|^power exactly for even integer ``power``.

    For u a Hermite expansion of per-axis degree <= max_degree, |u|^power is
    a polynomial of degree power * max_degree times exp(-(power/2)|x|^2).
    """
    p = power / 2.0
    order = int(math.ceil((power * max_degree + 1) / 2.0)) + 1
    if order > ORDER_MAX:
        raise ValueError(f"exact grid would need order {order} > {ORDER_MAX}")
    return gauss_hermite_grid(d, order, scale=p, design_degree=max_degree)


def sup_grid(d, lambda_max, spacing_factor=SUP_SPACING, cutoff=CUTOFF_FACTOR):
    """Uniform grid for sup-norms of functions with energies <= lambda_max.

    The spacing is ``spacing_factor / sqrt(lambda_max)``: the local wave
    number never exceeds sqrt(lambda_max), so a fixed number of points per
    wavelength resolves every function in the spectral window.
    """
    root = math.sqrt(lambda_max)
    degree = int(max(0, (lambda_max - d) // 2))
    return uniform_grid(d, cutoff_radius(lambda_max, cutoff), spacing_factor / root, degree)


def trapezoid_grid(d, lambda_max, power=2.0, spacing_factor=0.5, cutoff=CUTOFF_FACTOR):
    """Uniform grid for integrals of |u|^power with non-integer or odd powers."""
    root = math.sqrt(lambda_max)
    degree = int(max(0, (lambda_max - d) // 2))
    spacing = spacing_factor / (root * max(1.0, power / 2.0))
    return uniform_grid(d, cutoff_radius(lambda_max, cutoff), spacing, degree)


def cutoff_radius(lambda_max, cutoff=CUTOFF_FACTOR):
    """max(cutoff sqrt(lambda), sqrt(lambda) + CUTOFF_MARGIN)."""
    root = math.sqrt(lambda_max)
    return max(cutoff * root, root + CUTOFF_MARGIN)
