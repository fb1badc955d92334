"""CSV and run-manifest output, plus layered configuration lookup."""

import csv
import json
import math
import os
import subprocess
from pathlib import Path

from . import __version__, kernels

MANIFEST_SCHEMA = "e1lab-manifest/1"
ENV_PREFIX = "E1LAB_"


def fmt(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return "%.17g" % v
    if hasattr(v, "dtype"):
        return fmt(v.item())
    return str(v)


def write_csv(path, header, rows):
    """Comma-separated, LF line endings, header first, floats with 17 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def build_id():
    """Package version, active kernel backend, and the git revision when available."""
    rev = "nogit"
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            rev = out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return f"e1lab-{__version__}+{rev}.{kernels.BACKEND}"


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return v.tolist()
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    if isinstance(v, Path):
        return str(v)
    return v


def write_manifest(path, command, parameters, tolerances, outputs, status, wall_time_ms, extra=None):
    manifest = {
        "schema": MANIFEST_SCHEMA,
        "command": command,
        "parameters": parameters,
        "tolerances": tolerances,
        "build": build_id(),
        "outputs": [str(p) for p in outputs],
        "status": status,
        "wall_time_ms": int(wall_time_ms),
    }
    if extra:
        manifest["results"] = extra
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_config(path):
    """key = value lines; '#' starts a comment."""
    out = {}
    if not path:
        return out
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_").lower()] = v.strip()
    return out


def resolve(name, flag_value, config, default, cast=str, environ=None):
    """flags > E1LAB_<NAME> environment > config file > default."""
    environ = os.environ if environ is None else environ
    if flag_value is not None:
        return flag_value
    env = environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return cast(env)
    if name in config:
        return cast(config[name])
    return default
