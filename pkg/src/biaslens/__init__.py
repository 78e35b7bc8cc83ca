"""biaslens: correlation-based bias triage for large, sparsely labeled label spaces.

The package is split along the offline/interactive boundary:

* :mod:`biaslens.ingest`, :mod:`biaslens.counting`, :mod:`biaslens.metrics`
  form the offline pipeline (corpus -> co-occurrence counts -> metric tables).
* :mod:`biaslens.query`, :mod:`biaslens.distributions`,
  :mod:`biaslens.projection`, :mod:`biaslens.session` back the interactive
  workbench, served over HTTP by :mod:`biaslens.api`.
* :mod:`biaslens.fixtures` ships the deterministic fixtures and brute-force
  reference implementations used to audit every displayed value.
"""

from biaslens.ingest import (
    AttributeSpec,
    Corpus,
    DataPoint,
    EmbeddingTable,
    load_attribute_specs,
    load_corpus,
    load_embeddings,
)
from biaslens.counting import CountTable, count_cooccurrences, merge_tables
from biaslens.metrics import (
    MetricValue,
    RunMetrics,
    compute_diff,
    compute_run_metrics,
    metric_value,
    npmi_value,
)

__all__ = [
    "AttributeSpec",
    "Corpus",
    "CountTable",
    "DataPoint",
    "EmbeddingTable",
    "MetricValue",
    "RunMetrics",
    "compute_diff",
    "compute_run_metrics",
    "count_cooccurrences",
    "load_attribute_specs",
    "load_corpus",
    "load_embeddings",
    "merge_tables",
    "metric_value",
    "npmi_value",
]

__version__ = "0.1.0"
