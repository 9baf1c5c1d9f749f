"""Project configuration: thresholds, seed, paths.

A config file is plain ``key = value`` text, one pair per line, ``#``
comments allowed.  Recognized keys match the ProjectConfig field names.
Every report echoes the full config (plus the active kernel backend) so
runs are reproducible.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .. import kernels
from ..errors import DataError

TESSDATA_ENV = "GLYPHFORGE_TESSDATA"


@dataclass
class ProjectConfig:
    lang_code: str = "num"
    tessdata: str = "tessdata"
    reject_threshold: float = 0.9
    noise_floor: float = 8.0
    gap_factor: float = 0.4
    oversized_factor: float = 1.8
    iou_threshold: float = 0.5
    pruner_keep: int = 5
    k_max: int = 8
    seed: int = 42
    dpi: int = 300
    invert: bool = False

    def validate(self) -> None:
        checks = [
            (0.0 < self.reject_threshold <= 2.0, "reject_threshold in (0, 2]"),
            (self.noise_floor >= 0, "noise_floor >= 0"),
            (0.0 <= self.gap_factor <= 5.0, "gap_factor in [0, 5]"),
            (self.oversized_factor >= 1.0, "oversized_factor >= 1"),
            (0.0 < self.iou_threshold <= 1.0, "iou_threshold in (0, 1]"),
            (self.pruner_keep >= 1, "pruner_keep >= 1"),
            (self.k_max >= 1, "k_max >= 1"),
            (self.seed >= 0, "seed >= 0"),
            (self.dpi > 0, "dpi > 0"),
        ]
        for ok, requirement in checks:
            if not ok:
                raise DataError(f"config requires {requirement}")

    def echo(self) -> dict:
        """Config as a flat dict for report embedding."""
        d = asdict(self)
        d["kernel_backend"] = kernels.backend_name()
        return d

    def tessdata_dir(self, override: str | None = None) -> Path:
        """Bundle directory: explicit flag > environment > config value."""
        if override:
            return Path(override)
        env = os.environ.get(TESSDATA_ENV)
        return Path(env) if env else Path(self.tessdata)


def load_config(path: str | Path) -> ProjectConfig:
    cfg = ProjectConfig()
    valid = {f.name: f.type for f in fields(ProjectConfig)}
    for lineno, line in enumerate(
        Path(path).read_text(encoding="utf-8").split("\n"), start=1
    ):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"config line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in valid:
            raise DataError(f"config line {lineno}: unknown key {key!r}")
        current = getattr(cfg, key)
        try:
            if isinstance(current, bool):
                if value.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(value)
                parsed = value.lower() in ("true", "1")
            elif isinstance(current, int):
                parsed = int(value)
            elif isinstance(current, float):
                parsed = float(value)
            else:
                parsed = value
        except ValueError as exc:
            raise DataError(f"config line {lineno}: bad value for {key}: {value!r}") from exc
        setattr(cfg, key, parsed)
    cfg.validate()
    return cfg
