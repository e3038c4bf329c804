"""tagtrend: weekly tag-pair association rules and their convergence / stationarity onsets."""
from tagtrend.errors import TagTrendError

__version__ = "0.3.0"

__all__ = ["TagTrendError", "__version__"]
