"""Schema discovery with the deterministic keyword-rule proposer.

The discovery loop feeds caption batches to a proposer and stops once the
canonicalized schema hash is stable for K consecutive rounds.  The shipped
mock proposer answers from fixed rules, so the whole pipeline runs offline.
"""

from seriesbench.schema_discovery import (
    DiscoveryParams,
    MockProposer,
    assign_attributes_batch,
    discover,
    index_labels,
    schema_hash,
)

captions = [
    f"series {i}: a {'rising' if i % 2 else 'falling'} line that is "
    f"{'noisy' if i % 3 == 0 else 'calm'}"
    for i in range(200)
]

proposer = MockProposer(
    schema_doc={
        "attributes": [
            {"name": "trend", "definition": "overall direction", "values": ["up", "down", "other"]},
            {"name": "volatility", "definition": "noise level", "values": ["low", "high", "other"]},
        ]
    },
    keywords={
        "trend": {"up": ["rising"], "down": ["falling"]},
        "volatility": {"high": ["noisy"], "low": ["calm"]},
    },
)

result = discover(captions, proposer, DiscoveryParams(batch_size=50, stability=3, max_iter=50, seed=0))
print(f"converged: {result.converged} after {result.iterations} rounds")
print(f"schema hash: {schema_hash(result.schema)[:16]}…")
for attr in result.schema.attributes:
    print(f"  {attr.name}: {list(attr.values)}")

vectors = assign_attributes_batch(captions[:6], result.schema, proposer)
labels, index = index_labels([tuple(v[a.name] for a in result.schema.attributes) for v in vectors])
print(f"\nfirst captions -> attribute vectors -> labels ({len(index.combos)} combinations):")
for caption, vector, label in zip(captions[:6], vectors, labels):
    print(f"  label {label}  {vector}  «{caption[:46]}…»")
