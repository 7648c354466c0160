"""
lrpids Test Suite.

This package contains tests for all lrpids modules:
- test_kernels.py: Kernel families, tails, truncation radii, weight laws, ModelParams
- test_sampler.py: Counter-based edge draws, window sampling, restriction, shifts
- test_operator.py: Matrix assembly, matrix-free application, row moments
- test_spectra.py: Eigensolves, step functions, sup distances, averaging
- test_diagnostics.py: Boundaries, schedules, long-edge counts, concentration, Lifshitz fits
- test_ids.py: Counting and Pastur-Shubin estimators, atoms, convergence, Birkhoff check
- test_schemas.py: Experiment config validation and seed expansion
- test_errors.py: Error classification and exit codes
- test_cache.py: Artifact cache envelopes and corruption handling
- test_export.py: CSV/JSON writers
- test_plotting.py: SVG plots
- test_pipelines.py: Command pipelines and output files
- test_cli.py: Command-line entry points
- test_ui.py: Console output helpers
- test_tracing.py: OpenTelemetry tracing
- test_settings.py: Runtime settings from the environment
- test_parallel.py: Per-seed thread pool

Run tests with: pytest
Skip desk-scale acceptance runs: pytest -m "not slow"
Run with coverage: pytest --cov=lrpids --cov-report=html
"""
