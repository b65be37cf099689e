"""Experiment configuration: JSON schema, validation and hashing."""

from dataclasses import dataclass, field, asdict, fields
import hashlib
import json

from ..errors import ConfigError
from ..measures import RandomLaw, LAW_KINDS

EXPERIMENTS = (
    "tail", "median", "linfty", "lr", "basis", "besov", "concentration",
    "lipschitz", "gap", "pz",
)
FUNCTIONALS = ("point", "coordinate", "norm", "sobolev", "sup", "constant")
PROFILES = ("isotropic", "power", "explicit")

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "ExperimentConfig",
    "type": "object",
    "additionalProperties": False,
    "required": ["experiment"],
    "properties": {
        "experiment": {"enum": list(EXPERIMENTS)},
        "d": {"type": "integer", "minimum": 1},
        "levels": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
        "window": {
            "type": ["object", "null"],
            "properties": {
                "h": {"type": "number", "exclusiveMinimum": 0},
                "a_h": {"type": "number"},
                "b_h": {"type": "number"},
                "delta": {"type": "number"},
            },
            "required": ["h", "a_h", "b_h"],
        },
        "profile": {"type": "object", "properties": {"kind": {"enum": list(PROFILES)}}},
        "law": {"type": "object", "properties": {"kind": {"enum": list(LAW_KINDS)}, "params": {"type": "object"}}},
        "functional": {"type": "object", "properties": {"kind": {"enum": list(FUNCTIONALS)}}},
        "M": {"type": "integer", "minimum": 1},
        "t_grid": {"type": ["array", "null"], "items": {"type": "number"}, "minItems": 1},
        "r_grid": {"type": ["array", "null"], "items": {"type": "number"}, "minItems": 1},
        "N_grid": {"type": ["array", "null"], "items": {"type": "integer"}, "minItems": 1},
        "K_grid": {"type": ["array", "null"], "items": {"type": "number"}, "minItems": 1},
        "theta": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "eps0": {"type": "number", "exclusiveMinimum": 0},
        "fit_range": {"enum": ["theorem", "full"]},
        "params": {"type": "object"},
    },
}


@dataclass
class ExperimentConfig:
    """Everything an experiment needs besides the worker count.

    Grids are optional and each experiment falls back to its own default.
    ``t_grid`` is expressed in units of sqrt(e_L), i.e. as t / sqrt(e_L).
    """

    experiment: str
    d: int = 2
    levels: list = field(default_factory=lambda: [10])
    window: dict = None
    profile: dict = field(default_factory=lambda: {"kind": "isotropic"})
    law: dict = field(default_factory=lambda: {"kind": "complex-gaussian"})
    functional: dict = field(default_factory=lambda: {"kind": "point", "x0": [0.5, 0.25]})
    M: int = 1000
    t_grid: list = None
    r_grid: list = None
    N_grid: list = None
    K_grid: list = None
    theta: float = 0.0
    seed: int = 0
    eps0: float = 0.5
    fit_range: str = "theorem"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if int(self.d) < 1:
            raise ConfigError("d must be >= 1")
        if not self.levels:
            raise ConfigError("levels must be nonempty")
        if self.M < 1:
            raise ConfigError("M must be positive")
        if self.experiment == "tail" and self.M < 1000:
            raise ConfigError("tail experiments need M >= 1000")
        for name in ("t_grid", "r_grid", "N_grid", "K_grid"):
            value = getattr(self, name)
            if value is not None and len(value) == 0:
                raise ConfigError(f"{name} must be nonempty when given")
        if self.fit_range not in ("theorem", "full"):
            raise ConfigError("fit_range must be 'theorem' or 'full'")
        if self.profile.get("kind", "isotropic") not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.functional.get("kind", "point") not in FUNCTIONALS:
            raise ConfigError(f"unknown functional {self.functional!r}")
        try:
            RandomLaw.from_dict(self.law)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def random_law(self):
        return RandomLaw.from_dict(self.law)

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def replace(self, **changes):
        data = self.to_dict()
        data.update(changes)
        return ExperimentConfig(**data)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "experiment" not in data:
            raise ConfigError("config needs an 'experiment' key")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc}") from exc
        return cls.from_dict(data)

    def config_hash(self):
        return config_hash(self.to_dict())


def config_hash(data):
    """SHA-256 of the canonical JSON form, ignoring the seed and key order."""
    payload = {k: v for k, v in data.items() if k != "seed"}
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]
