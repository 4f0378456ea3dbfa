"""Path-dependent elasto-plastic response of short-fiber composites:
incremental Mori-Tanaka mean-field simulation, randomized dataset
generation, and a gated-recurrent stress surrogate."""

__version__ = "0.1.0"
