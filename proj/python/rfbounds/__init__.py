"""Python access to the rfbounds kinematic bound extraction core."""

import json
import os

from . import _rfbounds
from ._rfbounds import (
    ConfigError,
    IngestError,
    NoRecordingsError,
    ReportError,
    SceneError,
    body_frame_decompose,
    differentiate,
    lateral_fluctuation,
    unwrap_headings,
)

__version__ = _rfbounds.__version__

__all__ = [
    "ConfigError",
    "IngestError",
    "NoRecordingsError",
    "ReportError",
    "SceneError",
    "audit",
    "body_frame_decompose",
    "default_config",
    "differentiate",
    "extract",
    "lateral_fluctuation",
    "render_csv",
    "render_table",
    "synth",
    "unwrap_headings",
]


def _text(obj):
    return "" if obj is None else json.dumps(obj)


def default_config():
    return json.loads(_rfbounds.default_config_json())


def extract(dataset, recordings=None, config=None, jobs=1, out_dir=None):
    """Run extraction; returns the report document with a 'manifest' entry added."""
    text = _rfbounds.extract_json(
        os.fspath(dataset),
        None if recordings is None else list(recordings),
        _text(config),
        int(jobs),
        "" if out_dir is None else os.fspath(out_dir),
    )
    return json.loads(text)


def _report_text(report):
    if isinstance(report, (str, os.PathLike)):
        with open(report, encoding="utf-8") as fh:
            return fh.read()
    doc = {k: v for k, v in report.items() if k != "manifest"}
    return json.dumps(doc)


def audit(report, dataset):
    """Returns (ok, problems) for a report dict or report.json path."""
    return _rfbounds.audit_json(_report_text(report), os.fspath(dataset))


def synth(scene, out_dir):
    """Writes a recording triple for a scene dict or scene file; returns the tracks path."""
    if isinstance(scene, (str, os.PathLike)):
        with open(scene, encoding="utf-8") as fh:
            scene = json.load(fh)
    return _rfbounds.synth_json(json.dumps(scene), os.fspath(out_dir))


def render_table(report):
    return _rfbounds.render_table_json(_report_text(report))


def render_csv(report):
    return _rfbounds.render_csv_json(_report_text(report))
