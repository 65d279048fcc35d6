"""The state file format and the command-line surface.

Writes a state file, then drives the installed ``dmres`` CLI against it
the way a scripted pipeline would.
"""

import subprocess
import sys
import tempfile
from pathlib import Path

from dmres import prepare_qutrit, PrepParams, write_state

workdir = Path(tempfile.mkdtemp(prefix="dmres-demo-"))

# A pure qutrit state from the preparation family, saved as JSON text.
ket = prepare_qutrit(PrepParams(variant="qutrit", theta1=0.3, theta2=0.5, phi1=0.2, phi2=1.0))
state_path = workdir / "qutrit.state"
write_state(state_path, ket.density())
print("state file:", state_path)
print(state_path.read_text()[:160], "...\n")

def run(*args):
    cmd = [sys.executable, "-m", "dmres.cli", *args]
    print("$", " ".join(str(a) for a in cmd[2:]))
    out = subprocess.run(cmd, capture_output=True, text=True)
    print(out.stdout or out.stderr)
    return out.returncode

run("extract", "--scheme", "res", "--element", "0,1", "--g", "pi/4",
    "--state", str(state_path), "--shots", "1e6")

run("characterize", "--state", str(state_path), "--g", "pi/4",
    "--out", str(workdir / "char"), "--truth", str(state_path))
print("characterize outputs:", sorted(p.name for p in (workdir / "char").iterdir()))

run("scenario", "fig3a", "--out", str(workdir))
print("scenario outputs:", sorted(p.name for p in (workdir / "fig3a").iterdir()))
