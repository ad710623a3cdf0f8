import os
import shlex
import subprocess
import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(ROOT / "extractor" / "src"))


def _cli_path():
    env = os.environ.get("DKI_CLI_PATH")
    candidates = [Path(env)] if env else [ROOT / "build" / "tools" / "dki"]
    for c in candidates:
        if c.is_file() and os.access(c, os.X_OK):
            return c
    return None


@pytest.fixture(scope="session")
def dki():
    path = _cli_path()
    if path is None:
        pytest.skip("dki binary not built (set DKI_CLI_PATH)")

    def run(args, check=None):
        proc = subprocess.run([str(path)] + shlex.split(args), capture_output=True, text=True)
        if check is not None and proc.returncode != check:
            raise AssertionError(f"dki {args} exited {proc.returncode}, expected {check}\n{proc.stdout}\n{proc.stderr}")
        return proc

    return run


@pytest.fixture(scope="session")
def t4_bundle(dki, tmp_path_factory):
    """T=4 synthetic fixture corpus, 20 trajectories, baseline and index variants."""
    out = tmp_path_factory.mktemp("bundle")
    dki(f"export-prompts -T 4 -n 20 -s 0 --variants baseline,index -o {out}", check=0)
    return out / "prompts.jsonl"


@pytest.fixture(scope="session")
def data_dir():
    return ROOT / "tests" / "data"
