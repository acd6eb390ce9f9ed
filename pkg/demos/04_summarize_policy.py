"""End-to-end extractive summary of an archived policy page.

Every document sentence is embedded and ranked by Euclidean distance
against each of the 14 fixed topic centroids; the nearest n_best per
topic survive. The same sentence may answer several topics.
"""

from pathlib import Path

import numpy as np

from policysum import HashEmbedder, fetch_document, load_gdpr_topics, summarize
from policysum.clustering import CentroidSet
from policysum.summarizer import SummaryRequest, summary_to_json

fixture = Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "meta_policy.html"

provider = HashEmbedder(dim=256, seed=0)
topics = load_gdpr_topics()
centroids = CentroidSet(
    mode="pdc",
    labels=tuple(topics.headers),
    centroids=np.vstack(provider.embed(topics.combined_sentences)),
    texts=tuple(topics.combined_sentences),
)

document = fetch_document(str(fixture))
request = SummaryRequest(source=str(fixture), mode="pdc", n_best=2)
summary = summarize(request, provider, centroids, document=document)

print(f"document sentences: {summary.stats.input_sentence_count}")
print(f"summary sentences:  {summary.stats.output_sentence_count}")
print(f"reduction:          {summary.stats.reduction_ratio:.1%}\n")

for topic in summary.topics[:4]:
    print(topic.label)
    for pick in topic.picks:
        print(f"  [{pick.distance:.4f}] {pick.text[:90]}")
    print()

print("full JSON document (truncated):")
print(summary_to_json(summary)[:600], "...")
