"""Networked Learning - weighting, bounds and simulation for learning from networked examples."""

__version__ = "0.1.0"
__author__ = "Networked Learning Team"
__description__ = "Optimal example weighting and sample-error bounds for hypergraph-networked data"
