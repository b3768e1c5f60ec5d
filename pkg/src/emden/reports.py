"""Report type shared by the identity and integral-system checks."""

import hashlib
from dataclasses import dataclass, field
from typing import Mapping, Optional

EPS_DEN = 1e-300


def relative_residual(lhs, rhs):
    """``|lhs - rhs| / max(|lhs|, |rhs|, EPS_DEN)``."""
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), EPS_DEN)


@dataclass(frozen=True)
class IdentityReport:
    """Both sides of a numerically checked identity.

    Attributes
    ----------
    name : str
    lhs, rhs : float
    residual : float
        Relative mismatch, by default :func:`relative_residual`.
    components : mapping of str to float
        Intermediate integrals and boundary terms.
    profile_digest : str or None
        Digest of the input profile, so the components can be recomputed.
    """

    name: str
    lhs: float
    rhs: float
    residual: float
    components: Mapping[str, float] = field(default_factory=dict)
    profile_digest: Optional[str] = None

    @classmethod
    def from_sides(cls, name, lhs, rhs, components=None, profile_digest=None):
        return cls(
            name,
            float(lhs),
            float(rhs),
            relative_residual(lhs, rhs),
            dict(components or {}),
            profile_digest,
        )

    def to_dict(self):
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "residual": self.residual,
            "components": dict(self.components),
            "profile_digest": self.profile_digest,
        }


def form_digest(form):
    """Digest of a closed form, stable across runs."""
    return hashlib.sha256(repr(form).encode()).hexdigest()[:16]
