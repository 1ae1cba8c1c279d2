"""Console acceptance: the live round-trip, when the frontend is built.

Delegates to frontend/scripts/roundtrip.py, which starts a real service,
seeds 5 queued events, and drives the console controller through vitest:
labeling all 5 empties the queue, the label log gains exactly 5 manual
records, and the retrain button counts down to the threshold.
"""

import shutil
import subprocess
import sys
from pathlib import Path

import pytest

FRONTEND = Path(__file__).resolve().parent.parent / "frontend"


@pytest.mark.skipif(
    not (FRONTEND / "node_modules").is_dir() or shutil.which("npx") is None,
    reason="frontend not built (run npm install in frontend/) or npx unavailable",
)
def test_console_round_trip():
    result = subprocess.run(
        [sys.executable, str(FRONTEND / "scripts" / "roundtrip.py")],
        cwd=FRONTEND,
        capture_output=True,
        text=True,
        timeout=600,
    )
    passed = result.returncode == 0
    print(f"ACCEPTANCE console-round-trip: {'PASS' if passed else 'FAIL'}")
    assert passed, f"stdout:\n{result.stdout}\nstderr:\n{result.stderr}"
