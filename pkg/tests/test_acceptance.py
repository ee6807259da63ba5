"""One test per acceptance criterion, each run at its stated tolerance.

Every criterion prints a single status line (also when run directly with
``python tests/test_acceptance.py``).
"""

import sys

import pytest

from radmax.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("cid", [c[0] for c in CRITERIA], ids=[f"criterion-{c[0]}" for c in CRITERIA])
def test_criterion(cid, capsys):
    res = run_criterion(cid)
    with capsys.disabled():
        print("\n" + res.line())
    bad = [c for c in res.checks if not c.ok][:5]
    assert res.status == "pass", f"{res.note}; first failures: {bad}"


if __name__ == "__main__":
    failed = 0
    for cid, *_ in CRITERIA:
        r = run_criterion(cid)
        print(r.line(), flush=True)
        failed += r.failed
    sys.exit(1 if failed else 0)
