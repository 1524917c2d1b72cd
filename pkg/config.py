"""
Centralised configuration: single source of truth for all tunables.

Every module imports from here instead of calling os.getenv() directly.
load_dotenv() is called exactly once, at import time.
"""
import os
import logging
from dotenv import load_dotenv

_log = logging.getLogger(__name__)

load_dotenv(override=True)

# --- Tolerances ---
TOL = float(os.getenv("KPA_TOL", "1e-9"))
RANK_CUT = float(os.getenv("KPA_RANK_CUT", "1e-10"))
COVARIANCE_TOL = float(os.getenv("KPA_COVARIANCE_TOL", "1e-8"))

# --- Sampling / depth ---
DEPTH = int(os.getenv("KPA_DEPTH", "1"))
SEED = int(os.getenv("KPA_SEED", "20240607"))

# --- Checker thread pool ---
WORKERS = int(os.getenv("KPA_WORKERS", "4"))

# --- Output ---
FORMAT = os.getenv("KPA_FORMAT", "text").lower()
GALLERY_DIR = os.getenv("KPA_GALLERY_DIR", "gallery")

# --- Validation ---
_VALID_FORMATS = {"text", "json"}

if not 0 < TOL < 1e-3:
    _log.warning("KPA_TOL=%g is outside (0, 1e-3), defaulting to 1e-9", TOL)
    TOL = 1e-9

if not 0 < RANK_CUT <= TOL:
    _log.warning("KPA_RANK_CUT=%g must be positive and no larger than KPA_TOL, defaulting to 1e-10", RANK_CUT)
    RANK_CUT = min(1e-10, TOL)

if not TOL <= COVARIANCE_TOL < 1e-2:
    _log.warning("KPA_COVARIANCE_TOL=%g is outside [KPA_TOL, 1e-2), defaulting to 1e-8", COVARIANCE_TOL)
    COVARIANCE_TOL = max(1e-8, TOL)

if not 0 <= DEPTH <= 4:
    _log.warning("KPA_DEPTH=%d is outside 0-4 range, clamping", DEPTH)
    DEPTH = max(0, min(4, DEPTH))

if not 1 <= WORKERS <= 64:
    _log.warning("KPA_WORKERS=%d is outside 1-64 range, clamping", WORKERS)
    WORKERS = max(1, min(64, WORKERS))

if FORMAT not in _VALID_FORMATS:
    _log.warning("KPA_FORMAT='%s' not recognized, defaulting to text", FORMAT)
    FORMAT = "text"
