"""Loading-pattern workbench for a 193-assembly PWR first core.

Subpackages cover the full pipeline: core geometry and pattern symmetry,
a two-group coarse-mesh diffusion/depletion oracle, dataset generation,
a from-scratch feed-forward surrogate with Adam training, evaluation
metrics, and a CLI / HTTP service front end.
"""

__version__ = "0.1.0"
