"""evalbench: a knowledge-driven performance evaluation workbench.

The package is organised around one evaluation study (a *project*) that walks
a gated sequence of evaluation steps, from requirement recognition through
experimental design, execution, and statistical analysis, to conclusions.
Domain knowledge (taxonomy, metrics catalogue, factor framework, blueprints,
templates) is loaded from a *knowledge bundle* directory and is immutable at
runtime.

Subsystems:

- ``artefacts``: knowledge bundle loading, validation, and lookups
- ``engine`` / ``steps`` / ``journal``: the gated workflow state machine and
  its append-only event journal
- ``doe``: full factorial designs, randomization, blocking, simulated power
- ``runner``: benchmark adapter execution over a run plan
- ``analysis``: descriptive stats, one-way ANOVA, factorial effects, Pareto
  ranking, composite (boosting) indices, chart series
- ``reporting``: reports, question answering, evaluation templates
- ``cli`` / ``service``: command line and HTTP surfaces
"""

__version__ = "0.1.0"
