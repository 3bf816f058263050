"""Keyed YAML config files for training runs and the inference service.

Unknown keys are rejected everywhere so a typo cannot silently fall back
to a default.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .augment import AugmentConfig
from .errors import ConfigError
from .training import TrainConfig

_TRAIN_SECTIONS = {"model", "data", "optimizer", "scheduler", "augment", "seed"}
_MODEL_KEYS = {"variant", "init_weights"}
_DATA_KEYS = {"root", "manifest", "resize", "batch_size"}
_OPT_KEYS = {"lr0", "min_lr", "weight_decay", "betas", "epochs", "max_steps"}
_SCHED_KEYS = {"factor", "patience", "val_interval"}
_AUGMENT_KEYS = {
    "blur_kernel", "blur_sigma_range", "max_translate_frac", "max_rotate_deg",
    "scale_range", "max_shear_deg", "flip_prob", "jitter_strengths",
}


def _check_keys(section: str, given: dict, allowed: set[str]) -> None:
    unknown = set(given) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in section {section!r}; "
            f"allowed: {sorted(allowed)}"
        )


def _load_yaml(path: Path | str) -> dict:
    doc = yaml.safe_load(Path(path).read_text())
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a mapping")
    return doc


def load_train_config(path: Path | str) -> TrainConfig:
    doc = _load_yaml(path)
    _check_keys("<root>", doc, _TRAIN_SECTIONS)

    model = doc.get("model") or {}
    _check_keys("model", model, _MODEL_KEYS)
    if "variant" not in model:
        raise ConfigError("config must set model.variant")
    data = doc.get("data") or {}
    _check_keys("data", data, _DATA_KEYS)
    opt = doc.get("optimizer") or {}
    _check_keys("optimizer", opt, _OPT_KEYS)
    sched = doc.get("scheduler") or {}
    _check_keys("scheduler", sched, _SCHED_KEYS)

    augment_doc = doc.get("augment", {})
    if augment_doc in (None, "none"):
        augment = None
    else:
        _check_keys("augment", augment_doc, _AUGMENT_KEYS)
        kwargs = dict(augment_doc)
        for key in ("blur_sigma_range", "scale_range", "jitter_strengths"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        augment = AugmentConfig(**kwargs)

    kwargs = dict(
        variant=model["variant"],
        init_weights=model.get("init_weights"),
        data_root=data.get("root"),
        manifest=data.get("manifest"),
        seed=doc.get("seed", 0),
        augment=augment,
    )
    if "resize" in data:
        kwargs["resize"] = int(data["resize"])
    if "batch_size" in data:
        kwargs["batch_size"] = int(data["batch_size"])
    if "lr0" in opt:
        kwargs["lr0"] = float(opt["lr0"])
    if "min_lr" in opt:
        kwargs["min_lr"] = float(opt["min_lr"])
    if "weight_decay" in opt:
        kwargs["weight_decay"] = float(opt["weight_decay"])
    if "betas" in opt:
        kwargs["betas"] = tuple(float(b) for b in opt["betas"])
    if "epochs" in opt:
        kwargs["epochs"] = int(opt["epochs"])
    if opt.get("max_steps") is not None:
        kwargs["max_steps"] = int(opt["max_steps"])
    if "factor" in sched:
        kwargs["scheduler_factor"] = float(sched["factor"])
    if "patience" in sched:
        kwargs["scheduler_patience"] = int(sched["patience"])
    if "val_interval" in sched:
        kwargs["val_interval"] = int(sched["val_interval"])
    return TrainConfig(**kwargs)


_SERVICE_KEYS = {"variant", "weights", "weights_dir", "threshold", "port", "host"}


@dataclass
class ServiceConfig:
    variant: str = "unext_s"
    weights: str | None = None       # archive for the initial variant
    weights_dir: str | None = None   # <dir>/<variant>.wsa used on variant swap
    threshold: float = 0.75
    port: int = 8000
    host: str = "127.0.0.1"
    max_in_flight: int = 1

    def __post_init__(self):
        if not 0 < self.threshold < 1:
            raise ConfigError(f"threshold must be in (0,1), got {self.threshold}")


def load_service_config(path: Path | str) -> ServiceConfig:
    doc = _load_yaml(path)
    _check_keys("<root>", doc, _SERVICE_KEYS)
    return ServiceConfig(**doc)
