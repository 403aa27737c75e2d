from .io import parse_graph, read_results, write_graph, write_metis
from .report import AggregateRow, aggregate, render_table
from .runner import InstanceResult, greedy_maximal, run_benchmark
