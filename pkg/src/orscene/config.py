"""Service configuration: port, timeline directory, thresholds, styles.

Loaded from a JSON file; the ORSCENE_PORT environment variable
overrides the configured port.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bev import BevConfig
from .relations import RelationConfig

PORT_ENV_VAR = "ORSCENE_PORT"


@dataclass(frozen=True)
class AppConfig:
    port: int = 8077
    timeline_dir: Optional[Path] = None
    relation: RelationConfig = field(default_factory=RelationConfig)
    bev: BevConfig = field(default_factory=BevConfig)
    style_path: Optional[Path] = None
    # reject sync requests whose cost matrix would exceed this many cells
    max_sync_cells: int = 4_000_000


def load_app_config(path: Optional[str | Path] = None) -> AppConfig:
    data: dict = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    port = int(os.environ.get(PORT_ENV_VAR, data.get("port", 8077)))
    timeline_dir = data.get("timeline_dir")
    style_path = data.get("style")
    return AppConfig(
        port=port,
        timeline_dir=Path(timeline_dir) if timeline_dir else None,
        relation=RelationConfig.from_dict(data.get("relation", {})),
        bev=BevConfig.from_dict(data.get("bev", {})),
        style_path=Path(style_path) if style_path else None,
        max_sync_cells=int(data.get("max_sync_cells", 4_000_000)),
    )
