"""JSON experiment files.

A config file is a flat JSON object. Powers are given in dB and converted to
linear values here; Bob's power is fixed at 1 so ``snr_db`` sets the noise
variance and ``power_ratio_db`` (``P_B/P_E``) sets Eve's power.

Example::

    {"M": 16, "N": 64, "K": 4, "phi_max": 0.2, "snr_db": 20,
     "scheme": "ufs", "sweep_axis": "power_ratio_db",
     "sweep_values": [-10, -5, 0, 5, 10, 15, 20],
     "trials": 10000, "master_seed": 2016}
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .errors import InvalidParameterError
from .montecarlo import ExperimentConfig, db_to_linear
from .signal_model import TrainingScenario
from .srs import SrsConfig

REQUIRED = ("M", "N", "K", "scheme", "sweep_axis", "sweep_values")
DEFAULTS = {
    "phi_max": 0.2,
    "snr_db": 20.0,
    "power_ratio_db": 0.0,
    "trials": 10_000,
    "master_seed": 0,
    "attack": True,
    "beta": 0.5,
    "est_iters": 3,
}
_INTEGER = ("M", "N", "K", "trials", "master_seed", "est_iters")
_NUMBER = ("phi_max", "snr_db", "power_ratio_db", "beta")
_STRING = ("scheme", "sweep_axis")
BUNDLED = ("fig2", "fig3", "fig4", "fig5")


class ConfigError(InvalidParameterError):
    """A config document failed validation; ``key`` names the culprit."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def resolve(doc: dict) -> dict:
    """Validates a config document and fills in defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    for key in doc:
        if key not in REQUIRED and key not in DEFAULTS:
            raise ConfigError(key, f"unknown key {key!r}")
    for key in REQUIRED:
        if key not in doc:
            raise ConfigError(key, "missing required key")
    out = dict(DEFAULTS)
    out.update(doc)
    for key in _INTEGER:
        v = out[key]
        if not (_is_number(v) and float(v).is_integer()):
            raise ConfigError(key, f"expected an integer, got {v!r}")
        out[key] = int(v)
    for key in _NUMBER:
        if not _is_number(out[key]):
            raise ConfigError(key, f"expected a number, got {out[key]!r}")
        out[key] = float(out[key])
    for key in _STRING:
        if not isinstance(out[key], str):
            raise ConfigError(key, f"expected a string, got {out[key]!r}")
    if not isinstance(out["attack"], bool):
        raise ConfigError("attack", f"expected true or false, got {out['attack']!r}")
    values = out["sweep_values"]
    if not isinstance(values, list) or not values or not all(_is_number(v) for v in values):
        raise ConfigError("sweep_values", f"expected a non-empty array of numbers, got {values!r}")
    out["sweep_values"] = [v if isinstance(v, int) else float(v) for v in values]
    for key in ("M", "N", "K", "trials"):
        if out[key] < 1:
            raise ConfigError(key, f"must be >= 1, got {out[key]}")
    if out["N"] % out["K"]:
        raise ConfigError("K", f"K={out['K']} does not divide N={out['N']}")
    if not 0 <= out["phi_max"] < 0.5:
        raise ConfigError("phi_max", f"must lie in [0, 0.5), got {out['phi_max']}")
    if not 0 <= out["master_seed"] < 1 << 64:
        raise ConfigError("master_seed", f"must fit in 64 unsigned bits, got {out['master_seed']}")
    return out


def to_experiment(resolved: dict) -> ExperimentConfig:
    """Builds the experiment from a resolved document, naming the key at fault on error."""
    r = resolved
    scenario = TrainingScenario(
        M=r["M"],
        N=r["N"],
        K=r["K"],
        p_bob=1.0,
        p_eve=1.0 / db_to_linear(r["power_ratio_db"]),
        noise_var=1.0 / db_to_linear(r["snr_db"]),
        phi_max=r["phi_max"],
        attack=r["attack"],
    )
    try:
        srs = SrsConfig(beta=r["beta"], est_iters=r["est_iters"])
    except InvalidParameterError as exc:
        raise ConfigError("beta" if "beta" in str(exc) else "est_iters", str(exc)) from exc
    try:
        return ExperimentConfig(
            scenario=scenario,
            scheme=r["scheme"],
            sweep_axis=r["sweep_axis"],
            sweep_values=tuple(r["sweep_values"]),
            trials=r["trials"],
            master_seed=r["master_seed"],
            srs=srs,
        )
    except InvalidParameterError as exc:
        msg = str(exc)
        key = next((k for k in ("scheme", "sweep_axis") if msg.startswith(k)), "sweep_values")
        if key == "sweep_values" and r["sweep_axis"] not in ("pilot_length", "segments") and "M" in msg:
            key = "M"
        raise ConfigError(key, msg) from exc


def load(path: str | Path, seed: int | None = None) -> tuple[dict, ExperimentConfig]:
    """Reads a config file (or a bundled config name such as ``fig2``).

    Returns:
        The resolved document and the experiment it describes.
    """
    text = read_text(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from exc
    resolved = resolve(doc)
    if seed is not None:
        if not 0 <= int(seed) < 1 << 64:
            raise ConfigError("master_seed", f"must fit in 64 unsigned bits, got {seed}")
        resolved["master_seed"] = int(seed)
    return resolved, to_experiment(resolved)


def read_text(path: str | Path) -> str:
    p = Path(path)
    if p.exists():
        return p.read_text(encoding="utf-8")
    name = p.stem if p.suffix == ".json" else p.name
    if name in BUNDLED and p.parent == Path("."):
        return bundled_path(name).read_text(encoding="utf-8")
    raise FileNotFoundError(f"config file not found: {path}")


def bundled_path(name: str):
    """Location of a bundled figure config (``fig2`` .. ``fig5``)."""
    return resources.files("ufsdetect").joinpath("configs", f"{name}.json")
