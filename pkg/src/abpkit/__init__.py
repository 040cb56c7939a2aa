"""Exact ABP and formula transformations with auditable error ledgers."""

from .field import FieldConfig
from .poly import MINUS_INF, Ring, SparsePoly

__all__ = ["FieldConfig", "Ring", "SparsePoly", "MINUS_INF"]
