import logging
import math
import statistics

import numpy as np


def _finite(data):
    values = [float(i) for i in data if math.isfinite(i)]
    dropped = len(data) - len(values)
    if dropped > 0:
        logging.warning(f"Dropped {dropped} NaN/Inf samples")
    return values


def percentile(data, percent):
    if not data:
        return None
    return float(np.percentile(data, percent))


def get_hist(data, bins_number=10):
    """
    Histogram as a list of ((lower, upper), count) pairs, the maximum
    counted in the last bin.
    """
    values = _finite(data)
    if not values:
        return [((0.0, 1.0), 0.0)]

    counts, borders = np.histogram(values, bins=bins_number)
    return [
        ((float(borders[i]), float(borders[i + 1])), float(count))
        for i, count in enumerate(counts)
    ]


def data_stats(data):
    """
    Summary statistics of sweep samples, NaN and Inf filtered out.
    """
    values = _finite(data)
    if not values:
        return {"samples": 0}

    q25, q75, q90, q99 = (percentile(values, q) for q in (25, 75, 90, 99))
    return {
        "samples": len(values),
        "min": min(values),
        "max": max(values),
        "sum": math.fsum(values),
        "mean": statistics.mean(values),
        "median": statistics.median(values),
        "stdev": statistics.stdev(values) if len(values) > 1 else 0.0,
        "range": max(values) - min(values),
        "percentile25": q25,
        "percentile75": q75,
        "percentile90": q90,
        "percentile99": q99,
        "iqr": q75 - q25,
    }
