"""Tensor factorization knowledge graph completion with duality-induced regularization"""

__version__ = "1.0.0"
