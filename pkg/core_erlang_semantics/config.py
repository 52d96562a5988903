from dataclasses import dataclass, fields
from pathlib import Path
import yaml

ROOT_DIR = Path(__file__).resolve().parent.parent
CONFIG_FILE = ROOT_DIR / "config.yaml"
_DEFAULT_CORPUS_DIR = ROOT_DIR / "corpus"


@dataclass(frozen=True)
class Config:
    default_fuel: int = 10000
    default_seed: int = 0
    generator_depth: int = 4
    log_level: str = "INFO"
    corpus_dir: Path = _DEFAULT_CORPUS_DIR

    def __post_init__(self):
        if self.default_fuel <= 0:
            raise ValueError(
                f"default_fuel must be positive, got {self.default_fuel}."
            )

    @classmethod
    def from_dict(cls, dct):
        dct = dict(dct)
        if "corpus_dir" in dct:
            dct["corpus_dir"] = Path(dct["corpus_dir"]).expanduser()
        return cls(**dct)

    def to_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _load_config_dict(path: Path) -> dict:
    if not path.is_file():
        return {}
    with open(path, "r", encoding="utf-8") as cf:
        return yaml.safe_load(cf) or {}


config = Config.from_dict(_load_config_dict(CONFIG_FILE))


@dataclass(frozen=True)
class paths:
    corpus_dir = config.corpus_dir
    equivalences_manifest = corpus_dir / "equivalences.manifest"
    divergent_manifest = corpus_dir / "divergent.manifest"
