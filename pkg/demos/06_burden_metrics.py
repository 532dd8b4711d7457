"""Diversity and user-burden metrics over contrasting query patterns.

Compares a "hammer the same hubs" log against a "rotate through everyone"
log: entropy, coverage, time gaps, over-exertion, and how query pressure
correlates with node centrality.
"""

from galstream import (
    Graph,
    QueryLog,
    average_time_gap,
    centrality_burden_correlation,
    coverage_ratio,
    mean_normalized_centrality,
    over_exertion,
    sampling_entropy,
    within_gap_percentage,
)

# a hub-and-spoke graph: node 0 and 5 are the busy centers
graph = Graph.from_edges(
    10,
    [(0, v) for v in (1, 2, 3, 4)] + [(5, v) for v in (6, 7, 8, 9)] + [(0, 5)],
)
pool = tuple(range(10))

# strategy A queries the two hubs every single day
hub_log = QueryLog.from_events(
    pool, [(day, node) for day in range(12) for node in (0, 5)]
)
# strategy B rotates through the pool, two nodes per day
rotate_log = QueryLog.from_events(
    pool, [(day, (2 * day) % 10) for day in range(12)]
    + [(day, (2 * day + 1) % 10) for day in range(12)],
)

for name, log in (("hub-hammering", hub_log), ("rotating", rotate_log)):
    print(f"{name}: {log.total_queries} queries")
    print(f"  sampling entropy   {sampling_entropy(log):.4f}")
    print(f"  coverage ratio     {coverage_ratio(log):.2f}")
    print(f"  average time gap   {average_time_gap(log):.2f} days")
    print(f"  within-gap (k=3)   {within_gap_percentage(log, 3):.2f}")
    for threshold in (1, 3, 5):
        print(f"  over-exertion @{threshold}   {over_exertion(log, threshold):.2f}")

r = centrality_burden_correlation(hub_log, graph, "degree", "query_count", "pearson")
print(f"\nhub log: degree vs query-count correlation {r:.3f} (hubs absorb all the burden)")

table = mean_normalized_centrality({"hubs": hub_log, "rotate": rotate_log}, graph)
print("\nmean normalized centrality of queried nodes:")
for strategy, row in table.items():
    cells = ", ".join(f"{metric}={row[metric]:.2f}" for metric in ("degree", "pagerank", "closeness"))
    print(f"  {strategy:8s} {cells}")
