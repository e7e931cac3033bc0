# results: trajectory records, stores, sink and aggregation queries
