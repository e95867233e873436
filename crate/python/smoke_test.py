"""Builds the extension module, loads it and exercises each binding."""

import importlib.util
import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "gepner-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "libgepner_py.so"
    tmp = pathlib.Path(tempfile.mkdtemp()) / "gepner_py.so"
    shutil.copy(lib, tmp)
    spec = importlib.util.spec_from_file_location("gepner_py", tmp)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    g = load()
    rows = json.loads(g.table1())
    assert len(rows) == 12, rows
    assert rows[0]["geometry"]["kind"] == "k3"
    assert g.gepner_check("1,1:4")
    assert g.zg("1,1:4", [0, 1, 0, 0, 0, 0])[0] == "1 - z4"
    assert g.ext_cc("1,1:4", 1, 1) == 2
    assert g.stability("1,1:3", "C1m1", [5, 7]) == "stable (verified over F_5, F_7)"
    code, out = g.run_cli(["gepner-check", "--type", "1,1:4"])
    assert code == 0 and "OK (6 basis vectors)" in out, out
    try:
        g.gepner_check("bogus")
    except ValueError:
        pass
    else:
        raise AssertionError("bad type accepted")
    print("smoke test passed")


if __name__ == "__main__":
    sys.exit(main())
