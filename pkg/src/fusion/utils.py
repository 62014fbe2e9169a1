""" Script for useful functions """

import json
import logging
import os
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
import yaml

_CONFIGURED = set()
_DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "defaults.yaml"

MASK64 = (1 << 64) - 1


def get_logger(name: str) -> logging.Logger:
    """Returns the module logger, with the file handler every module of the package writes to.

    Args:
        name (str): Usually __name__ of the calling module

    Returns:
        logging.Logger: The configured logger
    """
    logging.basicConfig(level=logging.INFO)
    logger = logging.getLogger(name)
    if name not in _CONFIGURED:
        handler = logging.FileHandler(os.getenv("FUSION_LOG_FILE", "log.log"))
        formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        handler.setFormatter(formatter)
        logger.addHandler(handler)
        _CONFIGURED.add(name)
    return logger


logger = get_logger(__name__)


def load_yaml(yaml_path: str) -> dict:
    """Function used to load the yaml content. Useful for reading configuration files or any other data stored in YAML format.

    Args:
        yaml_path (str): The absolute path to the yaml

    Returns:
        dict: The yaml content
    """
    with open(yaml_path, 'r') as file:
        try:
            yaml_content = yaml.safe_load(file)
            return yaml_content
        except yaml.YAMLError as e:
            logger.error(e)
            return None


def load_config(command: str, yaml_path: Optional[str] = None) -> dict:
    """Loads the defaults of one subcommand, merged over the `common` section.

    Args:
        command (str): Subcommand name as it appears in the yaml (e.g. catch-product)
        yaml_path (str, optional): Path to the yaml. Defaults to FUSION_CONFIG or the packaged defaults.yaml.

    Returns:
        dict: The merged parameters
    """
    yaml_path = yaml_path or os.getenv("FUSION_CONFIG") or str(_DEFAULT_CONFIG)
    if not Path(yaml_path).exists():
        logger.warning(f"Config {yaml_path} not found, falling back to {_DEFAULT_CONFIG}")
        yaml_path = str(_DEFAULT_CONFIG)
    if not Path(yaml_path).exists():
        logger.warning("No defaults file available, every parameter must come from flags or manifest")
        return {}
    content = load_yaml(yaml_path) or {}
    params = dict(content.get("common", {}))
    params.update(content.get(command, {}) or {})
    return params


def create_exp_dir(name: str, command: str) -> str:
    """
    Function to create a unique run directory. Useful for keeping the reports of repeated runs apart.

    Args:
        name (str): The base name for the run directory.
        command (str): The subcommand that produced the run.

    Returns:
        str: The path to the created run directory.
    """
    parent_path = Path(f'runs/{command}')
    parent_path.mkdir(exist_ok=True, parents=True)
    exp_path = str(parent_path / name) + "_{:02d}"
    i = 0
    while Path(exp_path.format(i)) in list(parent_path.glob("*")):
        i += 1
    exp_path = Path(exp_path.format(i))
    exp_path.mkdir(exist_ok=True)
    return str(exp_path)


def splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer.

    z = (x + 0x9E3779B97F4A7C15) mod 2^64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64
    return z ^ (z >> 31)
    """
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *path: int) -> int:
    """Child seed for a path of integers: folds splitmix64 over (seed, p0, p1, ...)."""
    value = splitmix64(seed & MASK64)
    for component in path:
        value = splitmix64(value ^ (component & MASK64))
    return value


def hash_bits(seed: int) -> Callable[[int], int]:
    """Bit rule used for every sampled descent: step ↦ splitmix64(seed XOR step) mod 2."""
    def bit(step: int) -> int:
        return splitmix64((seed ^ step) & MASK64) & 1
    return bit


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    SKIP = "skip"


@dataclass
class Check:
    name: str
    status: Status
    witness: Any = None
    detail: str = ""

    def to_dict(self) -> dict:
        row = {"name": self.name, "status": self.status.value}
        if self.witness is not None:
            row["witness"] = to_jsonable(self.witness)
        if self.detail:
            row["detail"] = self.detail
        return row


@dataclass
class Report:
    """Outcome of a verification: named checks, each passing or carrying a finite witness."""
    command: str
    params: Dict[str, Any] = field(default_factory=dict)
    checks: List[Check] = field(default_factory=list)

    def add(self, name: str, ok: bool, witness: Any = None, detail: str = "") -> Check:
        check = Check(name, Status.PASS if ok else Status.FAIL, None if ok else witness, "" if ok else detail)
        self.checks.append(check)
        return check

    def skip(self, name: str, detail: str) -> Check:
        check = Check(name, Status.SKIP, detail=detail)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> None:
        for check in other.checks:
            self.checks.append(Check(prefix + check.name, check.status, check.witness, check.detail))

    @property
    def passed(self) -> bool:
        return all(check.status != Status.FAIL for check in self.checks)

    def failures(self) -> List[Check]:
        return [check for check in self.checks if check.status == Status.FAIL]

    def summary(self) -> dict:
        counts = {status.value: 0 for status in Status}
        for check in self.checks:
            counts[check.status.value] += 1
        counts["passed"] = self.passed
        return counts

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": to_jsonable(self.params),
            "checks": [check.to_dict() for check in self.checks],
            "summary": self.summary(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def table(self) -> pd.DataFrame:
        """The checks as a DataFrame, for the human-readable summary."""
        rows = [{"check": c.name, "status": c.status.value,
                 "witness": "" if c.witness is None else json.dumps(to_jsonable(c.witness))} for c in self.checks]
        return pd.DataFrame(rows, columns=["check", "status", "witness"])


def to_jsonable(value: Any) -> Any:
    """Tuples become lists, enums their values, dict keys strings; integers stay exact."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    return value
