"""Scoring summarizers over a document manifest.

Each document is summarized by every requested model plus a seeded random
baseline; SSD (squared distance to the topic headers, lower is better)
and ROUGE against the combined sample sentences (higher is better) are
reported per document with mean and population standard deviation.
"""

import tempfile
from pathlib import Path

from policysum import HashEmbedder, batch_evaluate
from policysum.evaluation import write_plot_data, write_rouge_csv, write_ssd_csv

fixtures = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
manifest = [
    ("Alpha", str(fixtures / "alpha_policy.html")),
    ("Beta", str(fixtures / "beta_policy.html")),
    ("Meta", str(fixtures / "meta_policy.html")),
]

provider = HashEmbedder(dim=256, seed=0)
report = batch_evaluate(manifest, ["pdc"], provider, seed=0)

print("company     model    ssd        rouge-mean")
for row in report.rows:
    rouge = f"{row.rouge.mean_r1_rl:.4f}" if row.rouge else "-"
    print(f"{row.company:10s}  {row.model:7s}  {row.ssd:9.4f}  {rouge}")

print("\naggregates (mean / std-dev):")
for model, aggregate in report.ssd_aggregates.items():
    print(f"  ssd {model:7s} {aggregate.mean:9.4f} / {aggregate.std_dev:.4f}")
for model, aggregate in report.rouge_aggregates.items():
    print(f"  rouge {model:7s} {aggregate.mean:7.4f} / {aggregate.std_dev:.4f}")

with tempfile.TemporaryDirectory() as tmp:
    out = Path(tmp)
    write_ssd_csv(report, out / "ssd.csv")
    write_rouge_csv(report, out / "rouge.csv")
    write_plot_data(report, out / "plot_data.csv")
    print("\nssd.csv:")
    print((out / "ssd.csv").read_text())
