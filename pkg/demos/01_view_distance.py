"""How far apart are two views? A walk through the distance machinery.

A view result is a small table. We compare two of them cell by cell:
text cells contribute 0/1, numeric cells contribute |a-b| normalized by
the column's largest value across both views, and each row pair gets the
Euclidean norm of its attribute distances. The view distance is then the
cheapest way to transport uniform mass from one row set onto the other.
"""

import numpy as np

from viewclean import (
    AttributeType,
    DistanceConfig,
    ViewResult,
    attribute_distance,
    tuple_distance,
    view_distance_with_flow,
)

TEXT, NUM = AttributeType.TEXT, AttributeType.NUMBER
schema = (("cuisine", TEXT), ("count", NUM))

# a top-3 cuisine count view, and the same view after one record that
# counted toward 'asian' was removed
before = ViewResult(schema, (("american", 23.0), ("french", 18.0), ("asian", 18.0)),
                    (0, 1, 2))
after = ViewResult(schema, (("american", 23.0), ("french", 18.0), ("asian", 17.0)),
                   (0, 1, 2))

print("attribute distances (count column, normalized by the max value 23):")
for a, b in [(23.0, 18.0), (23.0, 17.0), (18.0, 17.0)]:
    print(f"  |{a:.0f} - {b:.0f}| / 23 = {attribute_distance(a, b, NUM, 23.0):.3f}")

cfg = DistanceConfig(norms=(None, 23.0))
print("\nrow distances (Euclidean over the attribute distances):")
for i in range(3):
    for j in range(3):
        d = tuple_distance(before.rows[i], after.rows[j], schema, cfg)
        print(f"  {before.rows[i]} vs {after.rows[j]} -> {d:.3f}")

distance, flow = view_distance_with_flow(before, after)
print(f"\noptimal transport plan (each row carries mass 1/3):\n{np.round(flow, 3)}")
print(f"view distance = {distance:.5f}")
print("the mass stays on the diagonal: only the shrunken 'asian' count moves")
