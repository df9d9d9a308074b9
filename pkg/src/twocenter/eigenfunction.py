"""Matched product eigenfunctions Psi = F(xi) G(eta) or F(xi) G(nu)."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Union

import numpy as np

from .heun import Scalar
from .mathieu import MathieuFactor
from .separation import CenterPair, SeparatedSolution

AngularFactor = Union[SeparatedSolution, MathieuFactor]


@dataclass(frozen=True)
class ElementaryEigenfunction:
    """A matched radial x angular product at a fixed intercenter distance.

    ``normalization`` is None until :func:`twocenter.evaluate.normalize` has
    been applied (see :meth:`normalized`).
    """

    centers: CenterPair
    energy: Scalar
    lam: Scalar
    radial: SeparatedSolution
    angular: AngularFactor
    normalization: float | None = None
    provenance: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def R(self) -> Scalar:
        return self.centers.require_R()

    @property
    def mixed(self) -> bool:
        """True for a Razavy x Mathieu product (equal charges)."""
        return isinstance(self.angular, MathieuFactor)

    def with_normalization(self, value: float) -> ElementaryEigenfunction:
        return replace(self, normalization=float(value))

    def angular_of_nu(self, nu):
        """G as a function of the one-to-one angle nu (eta = cos nu)."""
        if self.mixed:
            return self.angular(nu)
        eta = np.clip(np.cos(np.asarray(nu, dtype=float)), -1.0, 1.0)
        return self.angular(eta)

    def psi_elliptic(self, xi, nu, normalized: bool = True):
        """Psi at elliptic coordinates (xi, nu); xi >= 1, eta = cos nu."""
        xi = np.asarray(xi, dtype=float)
        val = self.radial(np.maximum(xi, 1.0)) * self.angular_of_nu(nu)
        if normalized and self.normalization is not None:
            val = val * self.normalization
        return val
