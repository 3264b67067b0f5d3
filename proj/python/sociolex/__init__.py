"""Sociolinguistic marker, SES and network analysis (C++ core)."""

import os
from importlib import resources
from pathlib import Path


def _find_data_dir():
    # Installed wheels carry data/ inside the package; editable installs
    # resolve it through importlib or fall back to the source tree.
    candidates = [Path(__file__).parent / "data", Path(__file__).resolve().parents[2] / "data"]
    try:
        candidates.insert(1, Path(str(resources.files(__name__) / "data")))
    except (ModuleNotFoundError, TypeError):
        pass
    for c in candidates:
        if (c / "lexicon.csv").exists():
            return c
    return None


_data = _find_data_dir()
if _data is not None:
    os.environ.setdefault("SOCIOLEX_DATA_DIR", str(_data))

from ._sociolex import (  # noqa: E402
    DataError,
    PluralLexicon,
    UsageError,
    binned_regression,
    compute_indicators,
    detect_negation,
    detect_plural,
    homophily,
    hour_of_week,
    normalize_text,
    partition_classes,
    pearson,
    profile_user,
    randomize,
    run_cli,
    set_threads,
    sha256_file,
    sha256_hex,
    thread_count,
)

__all__ = [
    "DataError",
    "PluralLexicon",
    "UsageError",
    "binned_regression",
    "bundled_lexicon",
    "compute_indicators",
    "detect_negation",
    "detect_plural",
    "homophily",
    "hour_of_week",
    "normalize_text",
    "partition_classes",
    "pearson",
    "profile_user",
    "randomize",
    "run_cli",
    "set_threads",
    "sha256_file",
    "sha256_hex",
    "thread_count",
]


def bundled_lexicon() -> PluralLexicon:
    if _data is None:
        raise DataError("bundled lexicon not found; set SOCIOLEX_DATA_DIR")
    return PluralLexicon.load(_data / "lexicon.csv")
