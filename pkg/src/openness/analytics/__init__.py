from .aggregate import CorrelationMatrix, TrendTable, correlation_matrix, decade_trends, regional_aggregate
from .funnel import FunnelReport, default_predicates, run_funnel
from .records import PropertyRecord, RecordError, load_metadata
from .stats import ols_trend, pearson, spearman, stars
from .table import IndicatorTable, TableError

__all__ = [
    "CorrelationMatrix", "FunnelReport", "IndicatorTable", "PropertyRecord", "RecordError",
    "TableError", "TrendTable", "correlation_matrix", "decade_trends", "default_predicates",
    "load_metadata", "ols_trend", "pearson", "regional_aggregate", "run_funnel", "spearman", "stars",
]
