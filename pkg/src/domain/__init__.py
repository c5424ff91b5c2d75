"""Domain enumerations"""

from .kinds import ModelKind, RegularizerKind, Split

__all__ = ["ModelKind", "RegularizerKind", "Split"]
