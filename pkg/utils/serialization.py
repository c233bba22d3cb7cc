"""JSON codecs for points, vectors and rank evidence, plus the CLI's point syntax."""
import json
import logging
from pathlib import Path

import numpy as np

from geometry.backends import COMPLEX, RATIONAL, ScalarBackend
from geometry.errors import SpecFormatError

logger = logging.getLogger(__name__)


def encode_vector(v, backend):
    return [backend.encode(c) for c in v]


def decode_vector(raw, backend):
    if not isinstance(raw, list):
        raise SpecFormatError(f"expected a coordinate list, got {raw!r}")
    return backend.vector([backend.decode(c) for c in raw])


def encode_point(point):
    return encode_vector(point.coords, point.backend)


def decode_point(raw, backend):
    from geometry.projective import ProjectivePoint

    return ProjectivePoint.of(decode_vector(raw, backend), backend)


def encode_rank(result):
    """Rank evidence: the nonzero minor (exact) or the singular values (complex)"""
    doc = {"rank": result.rank, "backend": result.backend}
    if result.minor is not None:
        doc["minor"] = RATIONAL.encode(result.minor)
        doc["pivot_rows"] = result.pivot_rows
        doc["pivot_cols"] = result.pivot_cols
    if result.singular_values is not None:
        doc["singular_values"] = result.singular_values
    return doc


def parse_point_text(text, backend=None):
    """Parse '1:-1:0:0:0'; entries may be p/q or Python complex literals like 1+2j"""
    entries = [e.strip() for e in str(text).split(":")]
    if len(entries) < 2 or any(not e for e in entries):
        raise SpecFormatError(f"malformed point {text!r}")
    if backend is None:
        backend = COMPLEX if any("j" in e for e in entries) else RATIONAL
    if backend.exact and any("j" in e for e in entries):
        raise SpecFormatError(f"complex point {text!r} with the rational backend")
    return decode_point(entries, backend)


def coerce_point(point, backend: ScalarBackend):
    """Move a parsed point to the backend of the cubic it will be used with"""
    if point.backend is backend or backend is COMPLEX:
        return point.to_backend(backend)
    raise SpecFormatError("complex point used with a rational cubic and the rational backend")


def load_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise SpecFormatError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"malformed document {path}: {exc}") from exc


def _default(value):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    raise TypeError(f"not JSON serialisable: {type(value).__name__}")


def dumps(doc):
    """Canonical JSON text: sorted keys, two-space indent"""
    return json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"


def write_json(doc, out=None):
    text = dumps(doc)
    if out is None:
        return text
    Path(out).write_text(text)
    logger.info("wrote %s", out)
    return text
