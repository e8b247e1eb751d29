"""INI run configuration.

Schema (all sections optional unless the experiment needs them)::

    [run]
    name = circle_sweep
    seeds = 0-9            ; ranges and comma lists: "0-4,7"
    workers = 1

    [data]
    kind = sphere          ; sphere | circle_lattice | mnist
    dim = 2
    n = 500
    path = data/train-images-idx3-ubyte.gz   ; mnist only, or $LAYERNTK_MNIST
    n_subsample = 1000
    pixel_scale = 255

    [model]
    hidden = 100,100,100   ; hidden widths; depth = len(hidden) + 1
    activation = relu

    [targets]
    kind = harmonic_2d     ; harmonic_2d | harmonic_highd | radial | pca_sinusoid | gram_eigenvector
    degrees = 1,2,3,4      ; or "half_period:6" for radial (k_j = j pi / (r_max - r_min))
    anchors = 4
    anchor_seed = 0
    parity = sin

    [training]
    layers = 0,3
    steps = 2000
    lr = auto              ; or a float
    lr_scale = 0.1

    [concentration]
    activation = relu
    dim = 2
    degrees = 1,2
    amplitudes = 1,1
    n_grid = 50,100,200,400,800,1600,3200
    trials = 400
    delta = 0.05
    max_degree = 30
"""
import configparser
import hashlib
from dataclasses import dataclass, field

from ..errors import ConfigError

DEFAULTS = {
    "run": {"name": "run", "seeds": "0", "workers": "1"},
    "data": {"kind": "sphere", "dim": "2", "n": "500", "n_subsample": "1000", "pixel_scale": "255"},
    "model": {"hidden": "100,100,100", "activation": "relu"},
    "targets": {
        "kind": "harmonic_2d",
        "degrees": "1,2,3,4",
        "anchors": "4",
        "anchor_seed": "0",
        "parity": "sin",
    },
    "training": {"layers": "0,3", "steps": "2000", "lr": "auto", "lr_scale": "0.1"},
    "concentration": {
        "activation": "relu",
        "dim": "2",
        "degrees": "1,2",
        "amplitudes": "1,1",
        "n_grid": "50,100,200,400,800,1600,3200",
        "trials": "400",
        "delta": "0.05",
        "max_degree": "30",
    },
}


def parse_int_list(text):
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_float_list(text):
    return [float(p) for p in text.split(",") if p.strip()]


@dataclass
class ExperimentConfig:
    parser: configparser.ConfigParser = field(repr=False)
    source_text: str = ""

    @classmethod
    def from_string(cls, text):
        cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        cp.read_dict(DEFAULTS)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"config parse error: {' '.join(str(exc).split())}") from None
        return cls(cp, text)

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            return cls.from_string(fh.read())

    def get(self, section, key, cast=str):
        try:
            raw = self.parser.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError):
            raise ConfigError(f"missing [{section}] {key}") from None
        try:
            return cast(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from None

    def has(self, section, key):
        return self.parser.has_option(section, key)

    def set(self, section, key, value):
        if not self.parser.has_section(section):
            self.parser.add_section(section)
        self.parser.set(section, key, str(value))

    @property
    def seeds(self):
        return self.get("run", "seeds", parse_int_list)

    @property
    def name(self):
        return self.get("run", "name")

    def as_dict(self):
        return {s: dict(self.parser.items(s)) for s in self.parser.sections()}

    def digest(self):
        """SHA-256 of the resolved configuration (defaults included), key order independent."""
        h = hashlib.sha256()
        for section in sorted(self.parser.sections()):
            for key, value in sorted(self.parser.items(section)):
                h.update(f"[{section}]{key}={value}\n".encode())
        return h.hexdigest()
