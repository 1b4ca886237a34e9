"""External prover invocation: one subprocess per call, SZS status parsing.

Any TPTP-FOF prover that prints an SZS status line works.  The command
is a template with {file} and {timeout_s} placeholders; TCSIM_PROVER
overrides everything.  Verdicts are fail-closed: Proved requires an
affirmative status line, anything unparseable is an error.
"""

from __future__ import annotations

import os
import re
import shlex
import shutil
import subprocess
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .tptp import ProblemBundle, to_tptp

PROVED = "proved"
COUNTERSAT = "countersat"
TIMEOUT = "timeout"
ERROR = "error"

_SZS_RE = re.compile(r"SZS\s+status[:\s]+([A-Za-z]+)")

_PROVED_STATUSES = {"Theorem", "Unsatisfiable", "ContradictoryAxioms"}
_COUNTERSAT_STATUSES = {"CounterSatisfiable", "Satisfiable"}
_TIMEOUT_STATUSES = {"Timeout", "GaveUp", "ResourceOut", "Unknown", "Incomplete"}


@dataclass
class Verdict:
    kind: str  # proved | countersat | timeout | error
    status: str  # raw SZS word (or synthetic marker)
    wall_time: float
    prover: str
    detail: str = ""

    @property
    def proved(self) -> bool:
        return self.kind == PROVED


KNOWN_PROVERS = (
    ("eprover", "eprover --auto --silent --cpu-limit={timeout_s} {file}"),
    ("vampire", "vampire --mode casc -t {timeout_s} {file}"),
    ("tcsim-z3", "tcsim-z3 {file} {timeout_s}"),
)


def find_prover(configured: Optional[str] = None) -> Optional[str]:
    """Resolve the prover command template: env, config, then autodetect."""
    env = os.environ.get("TCSIM_PROVER")
    if env:
        return env
    if configured:
        return configured
    for exe, template in KNOWN_PROVERS:
        if shutil.which(exe):
            if exe == "tcsim-z3" and not shutil.which("node"):
                continue
            return template
    return None


def prove(bundle: ProblemBundle, timeout_s: float, command: str,
          keep_file: Optional[str] = None) -> Verdict:
    """Run the prover on the bundle with both a flag and a watchdog timeout."""
    text = to_tptp(bundle)
    if keep_file:
        path = keep_file
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        cleanup = False
    else:
        fd, path = tempfile.mkstemp(suffix=".p", prefix="tcsim_")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        cleanup = True
    argv = [a.format(file=path, timeout_s=str(int(max(1, timeout_s))))
            for a in shlex.split(command)]
    prover_id = os.path.basename(argv[0]) if argv else "?"
    start = time.time()
    try:
        proc = subprocess.run(
            argv, capture_output=True, text=True, timeout=timeout_s + 20
        )
    except subprocess.TimeoutExpired:
        return Verdict(TIMEOUT, "WatchdogTimeout", time.time() - start, prover_id)
    except (OSError, ValueError) as exc:
        return Verdict(ERROR, "LaunchFailure", time.time() - start, prover_id, str(exc))
    finally:
        if cleanup:
            try:
                os.unlink(path)
            except OSError:
                pass
    wall = time.time() - start
    m = _SZS_RE.search(proc.stdout) or _SZS_RE.search(proc.stderr)
    if not m:
        tail = (proc.stdout + proc.stderr)[-400:]
        return Verdict(ERROR, "NoStatusLine", wall, prover_id,
                       "exit=%d %s" % (proc.returncode, tail.strip()))
    status = m.group(1)
    if status in _PROVED_STATUSES:
        return Verdict(PROVED, status, wall, prover_id)
    if status in _COUNTERSAT_STATUSES:
        return Verdict(COUNTERSAT, status, wall, prover_id)
    if status in _TIMEOUT_STATUSES:
        return Verdict(TIMEOUT, status, wall, prover_id)
    return Verdict(ERROR, status, wall, prover_id)


def prove_many(bundles: Sequence[ProblemBundle], timeout_s: float, command: str,
               workers: int = 1) -> List[Verdict]:
    """Independent calls, results returned in submission order."""
    if workers <= 1 or len(bundles) <= 1:
        return [prove(b, timeout_s, command) for b in bundles]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futs = [pool.submit(prove, b, timeout_s, command) for b in bundles]
        return [f.result() for f in futs]
