"""From raw records to a flagged-label report, on the 10-point tiny corpus.

Everything here is small enough to check by hand: basketball appears on 4
points, 3 of them male-attributed, out of 10 points total, so

    nPMI = ln((3*10)/(4*5)) / -ln(3/10) = ln(1.5)/-ln(0.3) ~= 0.3368
"""

from biaslens.counting import count_cooccurrences
from biaslens.fixtures import GENDER, tiny_corpus
from biaslens.metrics import compute_run_metrics
from biaslens.query import (
    DirectionSelector,
    MetricFilter,
    MetricsIndex,
    QuerySpec,
    query_annotations,
)
from biaslens.session import SessionState, export_report, mutate

corpus = tiny_corpus()
print(f"corpus: {corpus.total_points} points, labels {sorted(corpus.label_vocabulary)}")

counts = count_cooccurrences(corpus, GENDER)
print(
    "joint(basketball, male) =", counts.joint("basketball", "male"),
    "| c(basketball) =", counts.label_count("basketball"),
    "| c(male) =", counts.direction_count("male"),
)

metrics = compute_run_metrics(counts, "npmi", run_name="tiny")
for label, row in metrics.per_label.items():
    rendered = {d: (f"{c.value:+.4f}" if c.value is not None else "absent") for d, c in row.items()}
    print(f"  {label:12s} {rendered}")

# triage: which labels lean male with nPMI in [0.2, 1.0]?
male = DirectionSelector(attribute="gender", direction="male", metric_kind="npmi")
index = MetricsIndex([metrics])
rows, total = query_annotations(
    index, QuerySpec(filters=[MetricFilter(selector=male, low=0.2, high=1.0)])
)
print(f"\n{total} label(s) lean male at nPMI >= 0.2: {[r.label for r in rows]}")

# flag them and export the deterministic report
state = SessionState(workspace_id="tiny")
state = mutate(state, "flag", {r.label for r in rows})
report = export_report(state, index, [male], fmt="tsv").decode()
print("\nreport:")
print(report)
