"""
lrpids - integrated density of states of random Hamiltonians on long-range
percolation graphs.

The package is organized into the following submodules:
- core: kernels, weight laws, model parameters, configs, settings and errors
- engine: sampling, operator assembly, spectra, IDS estimators and diagnostics
- workflow: one pipeline per CLI command
- utils: artifact cache, exports, plots, thread pool and tracing
- cli: command-line interface and console UI
"""

__version__ = "1.0.0"
