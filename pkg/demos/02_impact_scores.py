"""Which records matter to a view? Per-record view impact scores.

The impact of a record is the distance between the view evaluated with
and without it. Records outside the view's selection never change the
result, so they carry no score at all; inside the selection, records in
displayed groups move the view more than records in groups the top-k
clause hides.
"""

from viewclean import evaluate, generate_synthetic, view_impact_scores
from viewclean.synth import default_views

rel, truth = generate_synthetic(n=200, dup_rate=0.15, noise=0.1, seed=7)
spec = default_views()["top3"]

print("the dirty view:")
for row in evaluate(spec, rel).rows:
    print(f"  {row[0]:<10} {row[1]:.0f}")

scores = view_impact_scores(spec, rel)
print(f"\n{len(scores)} of {len(rel.records)} records feed this view")

by_id = {r.id: r for r in rel.records}
ranked = sorted(scores.items(), key=lambda kv: -kv[1])
print("\nhighest-impact records:")
for rid, score in ranked[:5]:
    name, category, city, _ = by_id[rid].values
    print(f"  #{rid:<4} {score:.4f}  {category:<10} {name}")

zero = [rid for rid, s in ranked if s < 1e-12]
print(f"\n{len(zero)} in-view records have zero impact: their categories are"
      "\nnot displayed by the top-3 clause, so removing them changes nothing")
