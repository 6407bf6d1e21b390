"""Driving the labeling HTTP API end to end, in process.

The same protocol the browser UI speaks: create a session, pull the
outstanding batch, post labels for exactly that batch, watch the view
refresh, and stop when the server says so. Here the 'human' answers from
the synthetic ground truth.
"""

from fastapi.testclient import TestClient

from viewclean.datasets import load_dataset, synthetic_spec
from viewclean.service import create_app

truth = load_dataset(synthetic_spec()).ground_truth
client = TestClient(create_app())

desc = client.post("/sessions", json={
    "dataset": "synthetic",
    "view": "groups",
    "config": {"budget": 60, "batch": 10, "initial_batch": 20, "seed": 2,
               "strategy": "view_impact", "holdout": False},
}).json()
sid = desc["id"]
print(f"session {sid}: budget {desc['budget']}, first batch of {desc['batch_size']}")

while True:
    batch = client.get(f"/sessions/{sid}/batch").json()
    if batch["stopped"]:
        print(f"server says stop: {batch['reason']}")
        break
    answers = [
        {"id1": p["id1"], "id2": p["id2"],
         "label": truth.is_match((p["id1"], p["id2"]))}
        for p in batch["pairs"]
    ]
    out = client.post(f"/sessions/{sid}/labels", json={"labels": answers}).json()
    rows = out["views"]["groups"]["rows"]
    print(f"labeled {out['state']['labels_used']:>3}: view_change="
          f"{out['view_change']:.4f}, view now {len(rows)} rows")
    if out["stopped"]:
        print(f"server says stop: {out['reason']}")
        break

final = client.get(f"/sessions/{sid}").json()
print(f"digest of the final session state: {final['digest'][:16]}…")
